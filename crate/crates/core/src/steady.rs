//! Closed-form steady state, threshold and saturation diagnostics.
//!
//! The mean photon number is the positive root of
//! `m^2 - B m - P_eff * N_eff = 0`, where the effective atom number, pump
//! and linear coefficient depend on the scheme. Populations then follow by
//! back-substitution: the photon balance `(m+1) n2 - m n1 = alpha m` and one
//! decay or pump relation form a 2x2 linear system in `(n1, n2)`, and the
//! remaining levels are explicit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LaserParams, SchemeKind, LEVELS};

/// Relative tolerance of the atom-conservation check on solved populations.
const CONSERVATION_RTOL: f64 = 1e-8;

/// Scheme-dependent effective atom number, pump and linear coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub script_n: f64,
    pub script_p: f64,
    pub script_b: f64,
}

/// Net process rates at steady state.
///
/// `j` net pump, `r` net stimulated emission, `s` spontaneous decay between
/// working levels, `u` upper decay, `d` lower decay, `q` photon absorption.
/// A Λ-type laser has no upper decay and a V-type laser no lower decay; the
/// missing process is reported as the flux passing through it, so that
/// `j = u = d = r + s` holds for every scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetRates {
    pub j: f64,
    pub r: f64,
    pub s: f64,
    pub u: f64,
    pub d: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyState {
    /// Mean occupancy per level slot.
    pub populations: [f64; LEVELS],
    /// Mean photon number.
    pub m: f64,
    pub rates: NetRates,
    pub derived: DerivedParams,
}

impl SteadyState {
    /// Largest relative violation of `j = u = d = r + s` and `q = r`.
    pub fn balance_residual(&self) -> f64 {
        let r = &self.rates;
        let scale = r.j.abs().max(r.q.abs()).max(f64::MIN_POSITIVE);
        [r.u - r.j, r.d - r.j, r.r + r.s - r.j, r.q - r.r]
            .iter()
            .map(|x| x.abs() / scale)
            .fold(0.0, f64::max)
    }
}

pub fn derived_params(params: &LaserParams) -> DerivedParams {
    let n = params.n_atoms();
    let (a, p, l, g) = (params.alpha, params.pump, params.ell(), params.gamma);
    let (pu, pd) = (params.p_u, params.p_d);
    match params.scheme {
        SchemeKind::Four4 => {
            let script_n = n / a;
            let script_p = 1.0 / (1.0 / p + 2.0 / pd + (1.0 + l) / pu);
            let script_b = script_p * (script_n - 1.0 + (1.0 + g - script_n * g) / pd) - g - 1.0;
            DerivedParams { script_n, script_p, script_b }
        }
        SchemeKind::Lambda3 => {
            let script_n = n / a;
            let script_p = 1.0 / (1.0 / p + (2.0 + l) / pd);
            let script_b = script_p * (script_n - 1.0 - l + ((1.0 + l) * (1.0 + g) - script_n * g) / pd) - 1.0 - g;
            DerivedParams { script_n, script_p, script_b }
        }
        SchemeKind::V3 => {
            let script_n = n / (2.0 * a);
            let script_p = 1.0 / (1.0 / p + (1.0 + 2.0 * l) / (2.0 * pu));
            let script_b = script_p / (4.0 * pu) * ((2.0 * script_n - 1.0) * (g + 2.0 * pu) - 1.0)
                - 0.5
                - g / 2.0
                - script_n * g;
            DerivedParams { script_n, script_p, script_b }
        }
    }
}

/// Larger root of `m^2 - B m - P N = 0`, evaluated without cancellation.
pub fn photon_root(d: &DerivedParams) -> f64 {
    let c = d.script_p * d.script_n;
    let disc = (d.script_b * d.script_b + 4.0 * c).sqrt();
    if d.script_b >= 0.0 {
        0.5 * (d.script_b + disc)
    } else {
        2.0 * c / (disc - d.script_b)
    }
}

fn require_positive(params: &LaserParams) -> Result<()> {
    let scheme = params.scheme;
    if params.pump <= 0.0 {
        return Err(Error::Degenerate { name: "pump", scheme });
    }
    if scheme.uses_lower_decay() && params.p_d <= 0.0 {
        return Err(Error::Degenerate { name: "p_d", scheme });
    }
    if scheme.uses_upper_decay() && params.p_u <= 0.0 {
        return Err(Error::Degenerate { name: "p_u", scheme });
    }
    Ok(())
}

/// Steady-state photon number, populations and balanced rates.
pub fn solve_steady(params: &LaserParams) -> Result<SteadyState> {
    params.validate()?;
    require_positive(params)?;
    let derived = derived_params(params);
    let m = photon_root(&derived);

    let (a, p, l, g) = (params.alpha, params.pump, params.ell(), params.gamma);
    let (pu, pd) = (params.p_u, params.p_d);
    let am = a * m;

    // Row 1: -m n1 + (m+1) n2 = alpha m.  Row 2 is scheme-specific.
    let (a21, a22, rhs2) = match params.scheme {
        SchemeKind::Four4 | SchemeKind::Lambda3 => (pd, -g, am),
        SchemeKind::V3 => {
            let c = 1.0 / p + l / pu;
            (1.0, -c * g, c * am)
        }
    };
    let det = -m * a22 - (m + 1.0) * a21;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::InconsistentSteadyState(format!("singular population system (det = {det})")));
    }
    let n1 = (am * a22 - (m + 1.0) * rhs2) / det;
    let n2 = (-m * rhs2 - a21 * am) / det;
    let flux = am + g * n2;

    let mut pop = [0.0; LEVELS];
    pop[1] = n1;
    pop[2] = n2;
    match params.scheme {
        SchemeKind::Four4 => {
            pop[3] = flux / pu;
            pop[0] = flux / p + l * pop[3];
        }
        SchemeKind::Lambda3 => {
            pop[0] = flux / p + l * n2;
        }
        SchemeKind::V3 => {
            pop[3] = flux / pu;
        }
    }

    let n = params.n_atoms();
    let total: f64 = pop.iter().sum();
    if (total - n).abs() > CONSERVATION_RTOL * n {
        return Err(Error::InconsistentSteadyState(format!("populations sum to {total}, expected {n}")));
    }
    if let Some(neg) = pop.iter().find(|&&x| x < -CONSERVATION_RTOL * n) {
        return Err(Error::InconsistentSteadyState(format!("negative population {neg}")));
    }

    let rates = net_rates(params, &pop, m, flux);
    Ok(SteadyState { populations: pop, m, rates, derived })
}

fn net_rates(params: &LaserParams, pop: &[f64; LEVELS], m: f64, flux: f64) -> NetRates {
    let (p, l) = (params.pump, params.ell());
    let src = params.scheme.pump_source();
    let top = params.scheme.pumped_level();
    let j = p * pop[src] - l * p * pop[top];
    // (m + 1) n2 - m n1 = alpha m holds by construction; evaluating the
    // difference directly cancels catastrophically when m is large.
    let r = params.alpha * m;
    let s = params.gamma * pop[2];
    let u = if params.scheme.uses_upper_decay() && params.p_u.is_finite() {
        params.p_u * pop[3]
    } else {
        flux
    };
    let d = if params.scheme.uses_lower_decay() { params.p_d * pop[1] } else { flux };
    NetRates { j, r, s, u, d, q: params.alpha * m }
}

/// Largest spontaneous decay rate that still allows oscillation at some pump.
pub fn threshold_gamma(params: &LaserParams) -> f64 {
    let d = derived_params(params);
    let n = d.script_n;
    let l = params.ell();
    match params.scheme {
        SchemeKind::Four4 => (n - 1.0) / ((n + 1.0) / params.p_d + (1.0 + l) / params.p_u),
        SchemeKind::Lambda3 => (n - 1.0 - l) * params.p_d / (n + 1.0),
        SchemeKind::V3 => (2.0 * n - 1.0) * params.p_u / (1.0 + l + 2.0 * l * n),
    }
}

/// Photon number of the modified steady state in which `m + 1` is replaced
/// by `m`, extrapolated to the given pump. It is linear in the populations
/// and changes sign at the threshold pump.
pub fn linear_extrapolated_m(params: &LaserParams, pump: f64) -> f64 {
    let a = params.alpha;
    let n = params.n_atoms();
    let (l, g) = (params.ell(), params.gamma);
    let (pu, pd) = (params.p_u, params.p_d);
    match params.scheme {
        SchemeKind::Four4 => {
            let flux = (n - a) / (1.0 / pump + 2.0 / pd + (1.0 + l) / pu);
            (flux * (1.0 - g / pd) - g * a) / a
        }
        SchemeKind::Lambda3 => {
            let flux = (n - (1.0 + l) * a) / (1.0 / pump + (2.0 + l) / pd);
            (flux * (1.0 - g / pd) - g * a) / a
        }
        SchemeKind::V3 => {
            let c = 1.0 / pump + l / pu;
            let flux = (n - a) / (2.0 / pump + (1.0 + 2.0 * l) / pu);
            (flux * (1.0 - g * c) - g * a) / a
        }
    }
}

/// Threshold pump rate, found by bisection on [`linear_extrapolated_m`].
///
/// Returns `Ok(None)` when no finite pump reaches threshold, and `Some(0)`
/// when the laser has no threshold (no spontaneous loss from the upper level).
pub fn threshold_pump(params: &LaserParams) -> Result<Option<f64>> {
    params.validate()?;
    let f = |p: f64| linear_extrapolated_m(params, p);
    if params.gamma == 0.0 {
        return Ok(if f(1.0) > 0.0 { Some(0.0) } else { None });
    }
    let mut hi = params.max_rate().max(1.0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(None);
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Photon number approached at infinite pump, four-level scheme only.
pub fn m_saturation(params: &LaserParams) -> Result<f64> {
    if params.scheme != SchemeKind::Four4 {
        return Err(Error::UnsupportedScheme { expected: SchemeKind::Four4, got: params.scheme });
    }
    params.validate()?;
    let n = params.n_atoms() / params.alpha;
    let (pu, pd, g) = (params.p_u, params.p_d, params.gamma);
    Ok((n - 1.0) * (pd - g) / ((1.0 + params.ell()) * pd / pu + 2.0) - g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pumping;

    fn fig_four(pump: f64, gamma: f64) -> LaserParams {
        LaserParams::four_level(100_000, pump, Pumping::Incoherent, 316.0, 632.0, gamma, 6.32)
    }

    #[test]
    fn below_threshold_limit() {
        let p = fig_four(1e-300, 0.0);
        let ss = solve_steady(&p).unwrap();
        assert!(ss.derived.script_b < 0.0);
        assert!((ss.derived.script_b + 1.0).abs() < 1e-12);
        assert!(ss.m < 1e-290);
    }

    #[test]
    fn photon_number_at_sample_pump() {
        // P_eff = [1/316 + 2/632 + 1/316]^-1 = 316/3, N_eff = 1e5/6.32.
        let ss = solve_steady(&fig_four(316.0, 0.0)).unwrap();
        let pe: f64 = 316.0 / 3.0;
        let ne = 1e5 / 6.32;
        let b = pe * (ne - 1.0 + 1.0 / 632.0) - 1.0;
        let expected = 0.5 * (b + (b * b + 4.0 * pe * ne).sqrt());
        assert!((ss.m - expected).abs() < 1e-9 * expected);
        assert!((ss.m - 1.6667e6).abs() < 1e3);
    }

    #[test]
    fn balance_and_conservation() {
        for scheme in SchemeKind::ALL {
            for ell in [Pumping::Incoherent, Pumping::Coherent] {
                let p = LaserParams { scheme, atoms: 1000, pump: 30.0, ell, p_u: 50.0, p_d: 70.0, gamma: 2.0, alpha: 3.0 };
                let ss = solve_steady(&p).unwrap();
                assert!(ss.balance_residual() < 1e-10, "{scheme:?} {ell:?}");
                let total: f64 = ss.populations.iter().sum();
                assert!((total - 1000.0).abs() < 1e-8);
                assert!(ss.populations.iter().all(|&x| x >= 0.0));
                for (slot, &x) in ss.populations.iter().enumerate() {
                    if !scheme.levels().contains(&slot) {
                        assert_eq!(x, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_equals_four_level_without_upper_level() {
        let lam = LaserParams::lambda(5000, 12.0, Pumping::Incoherent, 40.0, 0.7, 2.5);
        let mut four = LaserParams::four_level(5000, 12.0, Pumping::Incoherent, f64::INFINITY, 40.0, 0.7, 2.5);
        let a = solve_steady(&lam).unwrap();
        for ell in [Pumping::Incoherent, Pumping::Coherent] {
            four.ell = ell;
            let b = solve_steady(&four).unwrap();
            assert!((a.m - b.m).abs() <= 1e-12 * a.m);
            for k in 0..LEVELS {
                assert!((a.populations[k] - b.populations[k]).abs() <= 1e-10 * 5000.0);
            }
            assert!((a.rates.u - b.rates.u).abs() <= 1e-10 * a.rates.j);
        }
    }

    #[test]
    fn threshold_gamma_limits() {
        let mut p = LaserParams::four_level(10, 1.0, Pumping::Incoherent, 3.0, 4.0, 0.0, 10.0);
        assert!(threshold_gamma(&p).abs() < 1e-15);
        p.scheme = SchemeKind::V3;
        p.atoms = 1000;
        p.alpha = 2.0;
        let ne = 1000.0 / 4.0;
        assert!((threshold_gamma(&p) - (2.0 * ne - 1.0) * 3.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_gamma_for_sample_four_level() {
        let p = fig_four(100.0, 0.0);
        let ne = 1e5 / 6.32;
        let bound = (ne - 1.0) / ((ne + 1.0) / 632.0 + 1.0 / 316.0);
        assert!((threshold_gamma(&p) - bound).abs() < 1e-9);
        // The highest-gamma curve sits far above the bound and stays dark.
        let dark = solve_steady(&fig_four(316.0, 6325.0)).unwrap();
        assert!(dark.m < 1.0, "m = {}", dark.m);
    }

    #[test]
    fn threshold_pump_matches_inversion() {
        let p = fig_four(1.0, 63.2);
        let ne = 1e5 / 6.32;
        let pe = 63.2 / ((ne - 1.0) * (1.0 - 63.2 / 632.0));
        let expected = 1.0 / (1.0 / pe - 2.0 / 632.0 - 1.0 / 316.0);
        let got = threshold_pump(&p).unwrap().unwrap();
        assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
        assert!(threshold_pump(&fig_four(1.0, 6325.0)).unwrap().is_none());
        assert_eq!(threshold_pump(&fig_four(1.0, 0.0)).unwrap(), Some(0.0));
    }

    #[test]
    fn threshold_pump_sign_change_for_three_level() {
        for scheme in [SchemeKind::Lambda3, SchemeKind::V3] {
            let p = LaserParams { scheme, atoms: 2000, pump: 1.0, ell: Pumping::Coherent, p_u: 300.0, p_d: 300.0, gamma: 5.0, alpha: 4.0 };
            let pt = threshold_pump(&p).unwrap().unwrap();
            assert!(linear_extrapolated_m(&p, pt * 0.99) < 0.0);
            assert!(linear_extrapolated_m(&p, pt * 1.01) > 0.0);
        }
    }

    #[test]
    fn saturation() {
        let p = fig_four(1.0, 632.0);
        assert!((m_saturation(&p).unwrap() + 632.0).abs() < 1e-9);
        let p = fig_four(1e6, 0.0);
        let sat = m_saturation(&p).unwrap();
        let ne = 1e5 / 6.32;
        assert!((sat - (ne - 1.0) * 158.0).abs() < 1e-6);
        assert!((sat - 2.50e6).abs() < 0.01e6);
        let ss = solve_steady(&p).unwrap();
        assert!((ss.m - sat).abs() < 1e-3 * sat);
        let v = LaserParams::v_type(10, 1.0, Pumping::Incoherent, 1.0, 0.0, 1.0);
        assert!(matches!(m_saturation(&v), Err(Error::UnsupportedScheme { .. })));
    }

    #[test]
    fn coherent_and_incoherent_curves_overlay_on_log_scale() {
        // p_u = 316 incoherent vs p_u = 949 coherent. The overlay holds to
        // within 0.1 decade, not exactly.
        for pump in [10.0, 100.0, 316.0, 1000.0, 1e4, 1e5] {
            let inc = solve_steady(&fig_four(pump, 0.0)).unwrap().m;
            let coh = LaserParams::four_level(100_000, pump, Pumping::Coherent, 949.0, 632.0, 0.0, 6.32);
            let coh = solve_steady(&coh).unwrap().m;
            assert!((inc / coh).log10().abs() < 0.1, "pump {pump}: {inc} vs {coh}");
        }
    }

    #[test]
    fn rejects_zero_pump() {
        assert!(matches!(solve_steady(&fig_four(0.0, 0.0)), Err(Error::Degenerate { name: "pump", .. })));
    }
}
