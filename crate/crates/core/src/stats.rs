//! Sample statistics and Student-t intervals used by the run aggregators.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean and standard error of the mean. The standard error is zero for
/// fewer than two samples.
pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sided Student-t quantile for the given confidence and degrees of freedom.
pub fn t_quantile(confidence: f64, dof: usize) -> f64 {
    let t = StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom");
    t.inverse_cdf(0.5 + confidence / 2.0)
}

/// Confidence interval of the mean of independent samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Student-t 95% interval of the mean. Needs at least two samples.
pub fn t_interval95(xs: &[f64]) -> Interval {
    let (mean, sem) = mean_and_sem(xs);
    let half = if xs.len() < 2 { 0.0 } else { t_quantile(0.95, xs.len() - 1) * sem };
    Interval { mean, low: mean - half, high: mean + half }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_quantiles() {
        assert!((t_quantile(0.95, 1) - 12.706204736).abs() < 1e-6);
        assert!((t_quantile(0.95, 9) - 2.262157163).abs() < 1e-6);
        assert!((t_quantile(0.95, 149) - 1.976013).abs() < 1e-5);
    }

    #[test]
    fn two_sample_interval() {
        // sd = 0.1 * sqrt(2), sem = 0.1, half width = 12.706 * 0.1
        let iv = t_interval95(&[0.9, 1.1]);
        assert!((iv.mean - 1.0).abs() < 1e-15);
        assert!((iv.high - 1.0 - 1.2706204736).abs() < 1e-8);
        assert!((1.0 - iv.low - 1.2706204736).abs() < 1e-8);
    }
}
