//! Optimum-noise table and reference parameter sets.

use serde::Serialize;

use crate::error::Result;
use crate::langevin::{optimum_conditions, LinearizedLaser};
use crate::model::{LaserParams, Pumping, SchemeKind};

/// Effective atom number `N / alpha` used when evaluating the optimum rows.
pub const TABLE_SCRIPT_N: f64 = 1e6;
/// Pump rate of the optimum rows, in units of the detector constant.
pub const TABLE_PUMP_OVER_ALPHA: f64 = 1e3;
/// Agreement required between computed and expected optimum values.
pub const TABLE_TOLERANCE: f64 = 5e-3;

/// One row of the optimum-noise table.
#[derive(Clone, Debug, Serialize)]
pub struct OptimumRow {
    pub scheme: SchemeKind,
    pub pumping: Pumping,
    pub params: LaserParams,
    /// Minimum zero-frequency noise of the ideal limit.
    pub s_min: f64,
    /// Fano factor implied by `S = 2F - 1` in the ideal limit.
    pub fano_expected: f64,
    /// Zero-frequency noise from the general solver.
    pub s0: f64,
    /// Fano factor from the integrated photon-number spectrum.
    pub fano: f64,
    pub mismatch: bool,
}

/// Row order: Lambda, V, four-level; incoherent before coherent.
pub const TABLE_ROWS: [(SchemeKind, Pumping); 6] = [
    (SchemeKind::Lambda3, Pumping::Incoherent),
    (SchemeKind::Lambda3, Pumping::Coherent),
    (SchemeKind::V3, Pumping::Incoherent),
    (SchemeKind::V3, Pumping::Coherent),
    (SchemeKind::Four4, Pumping::Incoherent),
    (SchemeKind::Four4, Pumping::Coherent),
];

/// Parameters realizing the optimum pump ratios with `N / alpha` fixed and
/// the detector much slower than the pump.
pub fn optimum_params(scheme: SchemeKind, pumping: Pumping, script_n: f64) -> LaserParams {
    let alpha = 1.0;
    let pump = TABLE_PUMP_OVER_ALPHA * alpha;
    let opt = optimum_conditions(scheme, pumping);
    let atoms = (script_n * alpha).round() as u64;
    let p_u = opt.pump_over_p_u.map_or(0.0, |r| pump / r);
    let p_d = opt.pump_over_p_d.map_or(0.0, |r| pump / r);
    LaserParams { scheme, atoms, pump, ell: pumping, p_u, p_d, gamma: 0.0, alpha }
}

pub fn optimum_row(scheme: SchemeKind, pumping: Pumping) -> Result<OptimumRow> {
    let params = optimum_params(scheme, pumping, TABLE_SCRIPT_N);
    let s_min = optimum_conditions(scheme, pumping).s_min;
    let fano_expected = 0.5 * (1.0 + s_min);
    let lin = LinearizedLaser::new(&params)?;
    let s0 = lin.photocurrent_spectrum(0.0)?;
    let fano = lin.fano()?;
    let mismatch = (s0 - s_min).abs() > TABLE_TOLERANCE || (fano - fano_expected).abs() > TABLE_TOLERANCE;
    Ok(OptimumRow { scheme, pumping, params, s_min, fano_expected, s0, fano, mismatch })
}

pub fn optimum_table() -> Result<Vec<OptimumRow>> {
    TABLE_ROWS.iter().map(|&(s, p)| optimum_row(s, p)).collect()
}

/// Reference parameter sets used by the figure recipes.
pub mod presets {
    use super::*;

    pub const FOUR_ATOMS: u64 = 100_000;
    pub const FOUR_ALPHA: f64 = 6.32;
    pub const FOUR_P_D: f64 = 632.0;

    /// Upper-level decay paired with each pumping mode in the four-level sets.
    pub fn four_level_p_u(pumping: Pumping) -> f64 {
        match pumping {
            Pumping::Incoherent => 316.0,
            Pumping::Coherent => 949.0,
        }
    }

    /// Four-level laser with `N = 1e5`, `alpha = 6.32`, `p_d = 632`.
    pub fn four_level(pump: f64, pumping: Pumping, gamma: f64) -> LaserParams {
        LaserParams::four_level(FOUR_ATOMS, pump, pumping, four_level_p_u(pumping), FOUR_P_D, gamma, FOUR_ALPHA)
    }

    pub const V_ATOMS: u64 = 100;
    pub const V_ALPHA: f64 = 6.32;
    pub const V_P_U: f64 = 632.0;

    /// V-type laser with `N = 100`, `p_u = 632`, `alpha = 6.32`.
    pub fn v_small(pump: f64, pumping: Pumping, gamma: f64) -> LaserParams {
        LaserParams::v_type(V_ATOMS, pump, pumping, V_P_U, gamma, V_ALPHA)
    }

    /// Spontaneous decay rates of the four-level sweeps.
    pub const FOUR_GAMMAS: [f64; 5] = [0.0, 6.32, 63.2, 632.0, 6325.0];
    /// Spontaneous decay rates of the V-type Fano sweeps.
    pub const V_GAMMAS: [f64; 3] = [0.0, 6.32, 632.0];
}
