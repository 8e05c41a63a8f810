//! Oracle-equivalence suite: the general linearized solver against every
//! closed form it should reproduce.

use anyhow::Result;
use lasernoise_core::langevin::LinearizedLaser;
use lasernoise_core::steady::derived_params;
use lasernoise_core::table::optimum_table;
use lasernoise_core::{closed_form_s0, spectral_density, ClosedFormCase, LaserParams, Pumping, SchemeKind};

pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Deterministic low-discrepancy draws in `[0, 1)`.
struct Weyl {
    k: u64,
}

impl Weyl {
    fn next(&mut self, dim: u32) -> f64 {
        self.k += 1;
        let irrational = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_790, 0.645_751_311_064_591];
        (self.k as f64 * irrational[dim as usize % irrational.len()]).fract()
    }

    fn log(&mut self, dim: u32, lo: f64, hi: f64) -> f64 {
        (lo.ln() + self.next(dim) * (hi.ln() - lo.ln())).exp()
    }
}

fn draws(scheme: SchemeKind, count: usize, script_n: f64, gamma_frac: f64) -> Vec<LaserParams> {
    let mut w = Weyl { k: 0 };
    (0..count)
        .map(|i| {
            let alpha = w.log(0, 0.3, 3.0);
            let mut p = LaserParams {
                scheme,
                atoms: (script_n * alpha) as u64,
                pump: w.log(1, 1.0, 100.0),
                ell: if i % 2 == 0 { Pumping::Incoherent } else { Pumping::Coherent },
                p_u: w.log(2, 1.0, 100.0),
                p_d: w.log(3, 1.0, 100.0),
                gamma: 0.0,
                alpha,
            };
            if gamma_frac > 0.0 {
                let d = derived_params(&p);
                let limit = match scheme {
                    SchemeKind::V3 => d.script_p.min(p.p_u),
                    _ => p.p_d,
                };
                p.gamma = gamma_frac * w.next(4) * limit;
            }
            p
        })
        .collect()
}

fn closed_form(name: &'static str, case: ClosedFormCase, script_n: f64, gamma_frac: f64, tol: f64) -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for scheme in SchemeKind::ALL {
        for p in draws(scheme, 40, script_n, gamma_frac) {
            let general = spectral_density(&p, 0.0)?;
            let closed = closed_form_s0(&p, case)?;
            worst = worst.max(((general - closed) / closed).abs());
            count += 1;
        }
    }
    Ok(Outcome { name, pass: worst < tol, detail: format!("max relative error {worst:.2e} over {count} draws (tol {tol:.0e})") })
}

fn reduction() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for base in draws(SchemeKind::Lambda3, 20, 1e4, 0.5) {
        let lambda = LaserParams { ell: Pumping::Incoherent, ..base };
        let four = LaserParams { scheme: SchemeKind::Four4, p_u: f64::INFINITY, ..lambda.clone() };
        let (a, b) = (LinearizedLaser::new(&lambda)?, LinearizedLaser::new(&four)?);
        for k in 0..20 {
            let omega = lambda.max_rate() * 10f64.powf(-3.0 + 6.0 * k as f64 / 19.0);
            let (sa, sb) = (a.photocurrent_spectrum(omega)?, b.photocurrent_spectrum(omega)?);
            worst = worst.max(((sa - sb) / sa).abs());
        }
    }
    Ok(Outcome { name: "reduction identity", pass: worst < 1e-10, detail: format!("max relative error {worst:.2e}") })
}

fn high_frequency() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for scheme in SchemeKind::ALL {
        for p in draws(scheme, 20, 1e3, 0.5) {
            let s = spectral_density(&p, 1e3 * p.max_rate())?;
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(Outcome { name: "high-frequency limit", pass: worst < 0.01, detail: format!("max |S - 1| = {worst:.2e}") })
}

fn table() -> Result<Outcome> {
    let rows = optimum_table()?;
    let bad: Vec<String> = rows.iter().filter(|r| r.mismatch).map(|r| format!("{:?}/{}", r.scheme, r.pumping.ell())).collect();
    Ok(Outcome {
        name: "optimum table",
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "all six rows match".into() } else { format!("mismatch in {}", bad.join(", ")) },
    })
}

pub fn run_all() -> Result<Vec<Outcome>> {
    Ok(vec![
        closed_form("closed form, no spontaneous decay", ClosedFormCase::Gamma0, 1e13, 0.0, 1e-9)?,
        closed_form("closed form, many atoms", ClosedFormCase::LargeN, 1e12, 0.5, 1e-6)?,
        closed_form("closed form, both limits", ClosedFormCase::Both, 1e12, 0.0, 1e-6)?,
        reduction()?,
        high_frequency()?,
        table()?,
    ])
}
