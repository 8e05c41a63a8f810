//! Spectral estimation from photo-detection times.
//!
//! The periodogram of a point process at the Fourier frequencies
//! `omega_j = 2 pi j / T` is `|sum_k exp(i omega_j t_k)|^2 / n`, which is 1 in
//! expectation for a Poisson stream. Evaluating it directly costs
//! `O(n * J)`; here the event times are binned on a fine grid and the phase
//! offset inside each bin is expanded in a short Taylor series, so the sum
//! reduces to a handful of FFTs of binned moments. The truncation error is
//! kept below double-precision round-off.

use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{mean_and_sem, t_quantile};

/// Shot-noise-normalized spectral density on an ascending frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    pub ci_low: Option<Vec<f64>>,
    pub ci_high: Option<Vec<f64>>,
    pub n_runs: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Mean of `s` over all bins.
    pub fn grand_mean(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len() as f64
    }

    /// Restricts the spectrum to bins with `omega <= omega_max`.
    pub fn truncate(&mut self, omega_max: f64) {
        let keep = self.omega.partition_point(|&w| w <= omega_max);
        self.omega.truncate(keep);
        self.s.truncate(keep);
        if let Some(v) = self.ci_low.as_mut() {
            v.truncate(keep);
        }
        if let Some(v) = self.ci_high.as_mut() {
            v.truncate(keep);
        }
    }

    /// CSV with header `omega,s,ci_low,ci_high`; missing bands are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "omega,s,ci_low,ci_high")?;
        for i in 0..self.len() {
            write!(w, "{},{}", self.omega[i], self.s[i])?;
            match (&self.ci_low, &self.ci_high) {
                (Some(lo), Some(hi)) => writeln!(w, ",{},{}", lo[i], hi[i])?,
                _ => writeln!(w, ",,")?,
            }
        }
        Ok(())
    }
}

/// Number of Fourier bins of a record of length `duration` up to `omega_max`.
pub fn bins_up_to(omega_max: f64, duration: f64) -> usize {
    (omega_max * duration / std::f64::consts::TAU).floor().max(1.0) as usize
}

/// Fourier grid `2 pi j / T` for `j = 1..=bins`.
pub fn fourier_grid(duration: f64, bins: usize) -> Vec<f64> {
    (1..=bins).map(|j| std::f64::consts::TAU * j as f64 / duration).collect()
}

/// Raw periodogram of event times lying in `[0, duration]` at the first
/// `bins` nonzero Fourier frequencies.
pub fn periodogram(times: &[f64], duration: f64, bins: usize) -> Result<Spectrum> {
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }
    if times.len() < 2 {
        return Err(Error::TooFewEvents { needed: 2, got: times.len() });
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidConfig(format!("record length must be positive, got {duration}")));
    }
    if bins == 0 {
        return Err(Error::InvalidConfig("periodogram needs at least one bin".into()));
    }
    if let Some(&t) = times.iter().find(|&&t| !(0.0..=duration).contains(&t)) {
        return Err(Error::InvalidConfig(format!("event time {t} outside [0, {duration}]")));
    }
    let sums = fourier_sums(times, duration, bins);
    let n = times.len() as f64;
    Ok(Spectrum {
        omega: fourier_grid(duration, bins),
        s: sums.iter().map(|z| z.norm_sqr() / n).collect(),
        ci_low: None,
        ci_high: None,
        n_runs: 1,
    })
}

/// `sum_k exp(i omega_j t_k)` for `j = 1..=bins`.
fn fourier_sums(times: &[f64], duration: f64, bins: usize) -> Vec<Complex64> {
    let grid = (4 * (bins + 1)).next_power_of_two();
    let width = duration / grid as f64;
    // Largest phase offset inside a bin, in radians.
    let x = std::f64::consts::TAU * bins as f64 / duration * width / 2.0;
    let mut order = 1usize;
    let mut bound = x;
    while bound > 1e-17 {
        order += 1;
        bound *= x / order as f64;
    }

    // moments[p][b] = sum over events in bin b of u^p, u = offset / half width
    let mut moments = vec![vec![Complex64::new(0.0, 0.0); grid]; order];
    for &t in times {
        let b = ((t / width) as usize).min(grid - 1);
        let u = (t - (b as f64 + 0.5) * width) / (0.5 * width);
        let mut up = 1.0;
        for row in moments.iter_mut() {
            row[b].re += up;
            up *= u;
        }
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(grid);
    for row in moments.iter_mut() {
        fft.process(row);
    }

    (1..=bins)
        .map(|j| {
            let omega_half = std::f64::consts::TAU * j as f64 / duration * 0.5 * width;
            let centre = Complex64::from_polar(1.0, std::f64::consts::PI * j as f64 / grid as f64);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut coef = Complex64::new(1.0, 0.0);
            for (p, row) in moments.iter().enumerate() {
                if p > 0 {
                    coef *= Complex64::new(0.0, omega_half / p as f64);
                }
                acc += coef * row[j];
            }
            acc * centre
        })
        .collect()
}

/// Daniell smoothing: each bin becomes the mean of the `2 * half_width + 1`
/// bins around it, with windows truncated at the ends. Confidence bands are
/// dropped since they do not smooth linearly.
pub fn smooth(spec: &Spectrum, half_width: usize) -> Spectrum {
    let n = spec.len();
    // Sums of deviations from the first bin keep constant input exact.
    let base = spec.s.first().copied().unwrap_or(0.0);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in &spec.s {
        prefix.push(prefix.last().unwrap() + (v - base));
    }
    let s = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            base + (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();
    Spectrum { omega: spec.omega.clone(), s, ci_low: None, ci_high: None, n_runs: spec.n_runs }
}

/// Averages non-overlapping groups of `group` adjacent bins; a trailing
/// partial group is discarded.
pub fn coarsen(spec: &Spectrum, group: usize) -> Spectrum {
    let group = group.max(1);
    let chunks = spec.len() / group;
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let take = |v: &Vec<f64>| (0..chunks).map(|c| avg(&v[c * group..(c + 1) * group])).collect::<Vec<_>>();
    Spectrum {
        omega: take(&spec.omega),
        s: take(&spec.s),
        ci_low: None,
        ci_high: None,
        n_runs: spec.n_runs,
    }
}

/// Per-bin mean over runs with a Student-t 95% interval from the
/// across-run standard error.
pub fn aggregate_runs(runs: &[Spectrum]) -> Result<Spectrum> {
    let first = runs.first().ok_or(Error::EmptyInput)?;
    if runs.iter().any(|r| r.omega != first.omega) {
        return Err(Error::GridMismatch);
    }
    let n = first.len();
    let k = runs.len();
    let t = if k >= 2 { t_quantile(0.95, k - 1) } else { 0.0 };
    let mut s = Vec::with_capacity(n);
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut column = vec![0.0; k];
    for i in 0..n {
        for (c, r) in column.iter_mut().zip(runs) {
            *c = r.s[i];
        }
        let (mean, sem) = mean_and_sem(&column);
        s.push(mean);
        lo.push(mean - t * sem);
        hi.push(mean + t * sem);
    }
    let bands = k >= 2;
    Ok(Spectrum {
        omega: first.omega.clone(),
        s,
        ci_low: bands.then_some(lo),
        ci_high: bands.then_some(hi),
        n_runs: runs.iter().map(|r| r.n_runs).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct(times: &[f64], duration: f64, bins: usize) -> Vec<f64> {
        (1..=bins)
            .map(|j| {
                let w = std::f64::consts::TAU * j as f64 / duration;
                let (mut c, mut s) = (0.0, 0.0);
                for &t in times {
                    c += (w * t).cos();
                    s += (w * t).sin();
                }
                (c * c + s * s) / times.len() as f64
            })
            .collect()
    }

    fn poisson(rate: f64, duration: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0.0;
        let mut out = Vec::new();
        loop {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / rate;
            if t > duration {
                return out;
            }
            out.push(t);
        }
    }

    #[test]
    fn matches_direct_sum() {
        let times = poisson(50.0, 20.0, 1);
        for bins in [1, 7, 300] {
            let fast = periodogram(&times, 20.0, bins).unwrap();
            let slow = direct(&times, 20.0, bins);
            for (a, b) in fast.s.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9 * (1.0 + b), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn endpoints_allowed() {
        let s = periodogram(&[0.0, 1.0, 2.0], 2.0, 3).unwrap();
        let d = direct(&[0.0, 1.0, 2.0], 2.0, 3);
        for (a, b) in s.s.iter().zip(&d) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariant() {
        let times = poisson(30.0, 10.0, 2);
        let shifted: Vec<f64> = times.iter().map(|t| t + 3.7).collect();
        let a = periodogram(&times, 20.0, 200).unwrap();
        let b = periodogram(&shifted, 20.0, 200).unwrap();
        for (x, y) in a.s.iter().zip(&b.s) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x));
        }
    }

    #[test]
    fn regular_train_is_quiet() {
        // 1000 events one unit apart: bins below the repetition rate vanish.
        let times: Vec<f64> = (0..1000).map(|k| k as f64 + 0.5).collect();
        let s = periodogram(&times, 1000.0, 900).unwrap();
        assert!(s.s.iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn poisson_is_shot_noise() {
        let runs: Vec<Spectrum> =
            (0..20).map(|k| periodogram(&poisson(500.0, 20.0, 10 + k), 20.0, 2000).unwrap()).collect();
        let agg = aggregate_runs(&runs).unwrap();
        assert!((agg.grand_mean() - 1.0).abs() < 0.01, "{}", agg.grand_mean());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(periodogram(&[], 1.0, 3), Err(Error::EmptyInput));
        assert_eq!(periodogram(&[0.5], 1.0, 3), Err(Error::TooFewEvents { needed: 2, got: 1 }));
        assert!(matches!(periodogram(&[0.5, 1.5], 1.0, 3), Err(Error::InvalidConfig(_))));
    }

    fn flat(values: Vec<f64>) -> Spectrum {
        Spectrum { omega: fourier_grid(1.0, values.len()), s: values, ci_low: None, ci_high: None, n_runs: 1 }
    }

    #[test]
    fn smoothing_constant_and_wide() {
        let c = smooth(&flat(vec![0.7; 25]), 4);
        assert!(c.s.iter().all(|&v| v == 0.7));
        let v: Vec<f64> = (0..25).map(|k| (k * k) as f64).collect();
        let mean = v.iter().sum::<f64>() / 25.0;
        let wide = smooth(&flat(v), 25);
        assert!(wide.s.iter().all(|&x| (x - mean).abs() < 1e-12));
    }

    #[test]
    fn smoothing_truncates_at_ends() {
        let s = smooth(&flat(vec![1.0, 2.0, 3.0, 4.0]), 1);
        assert_eq!(s.s, vec![1.5, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn aggregate_interval() {
        let agg = aggregate_runs(&[flat(vec![0.9, 2.0]), flat(vec![1.1, 2.0])]).unwrap();
        assert!((agg.s[0] - 1.0).abs() < 1e-15);
        let half = agg.ci_high.as_ref().unwrap()[0] - agg.s[0];
        assert!((half - 1.2706204736).abs() < 1e-8);
        assert_eq!(agg.ci_low.as_ref().unwrap()[1], 2.0);
        assert_eq!(agg.ci_high.as_ref().unwrap()[1], 2.0);
        assert_eq!(agg.n_runs, 2);
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate_runs(&[]), Err(Error::EmptyInput));
        let mut other = flat(vec![1.0, 1.0]);
        other.omega[1] = 99.0;
        assert_eq!(aggregate_runs(&[flat(vec![1.0, 1.0]), other]), Err(Error::GridMismatch));
    }

    #[test]
    fn coarsen_groups() {
        let c = coarsen(&flat(vec![1.0, 3.0, 5.0, 7.0, 9.0]), 2);
        assert_eq!(c.s, vec![2.0, 6.0]);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn csv_layout() {
        let agg = aggregate_runs(&[flat(vec![0.5]), flat(vec![1.5])]).unwrap();
        let mut out = Vec::new();
        agg.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("omega,s,ci_low,ci_high"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row.len(), 4);
        assert_eq!(row[1], 1.0);
        let mut out = Vec::new();
        flat(vec![0.25]).write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().ends_with("0.25,,\n"));
    }
}
