//! Dense LU with partial pivoting for the small complex systems of the
//! fluctuation solver (at most 4x4).

use num_complex::Complex64;

pub(crate) struct ComplexLu {
    n: usize,
    a: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    /// Factors the row-major `n x n` matrix. Returns `None` when a pivot is
    /// below `rel_tol` times the largest entry of its original column, so
    /// badly scaled but regular systems are accepted.
    pub(crate) fn factor(n: usize, mut a: Vec<Complex64>, rel_tol: f64) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let column_scale: Vec<f64> =
            (0..n).map(|c| (0..n).map(|r| a[r * n + c].norm()).fold(0.0, f64::max)).collect();
        if column_scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
            return None;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= rel_tol * column_scale[k] {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for c in k + 1..n {
                    let akc = a[k * n + c];
                    a[i * n + c] -= f * akc;
                }
            }
        }
        Some(Self { n, a, perm })
    }

    pub(crate) fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for c in 0..i {
                let v = self.a[i * n + c] * x[c];
                x[i] -= v;
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                let v = self.a[i * n + c] * x[c];
                x[i] -= v;
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}
