//! Linearized (weak-noise) fluctuation analysis.
//!
//! Every net process `z` in {J, R, S, U, D, Q} contributes a rate fluctuation
//! `g_z . dx + f_z`, where `dx` collects the population and photon-number
//! fluctuations, `g_z` is the gradient of the rate at steady state and `f_z`
//! a white Langevin force whose spectral density is the total (not net) jump
//! rate of the process. In the frequency domain
//!
//! ```text
//! i omega dx = sum_z nu_z (g_z . dx + f_z)
//! ```
//!
//! with `nu_z` the stoichiometry of the process. Atom conservation eliminates
//! the pump-source population, leaving a square system of size 3 or 4 that is
//! solved per frequency. The photo-current fluctuation is
//! `dQ = alpha dm + q`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexLu;
use crate::model::{LaserParams, Pumping, SchemeKind, LEVELS};
use crate::quadrature::integrate_even_over_line;
use crate::steady::{solve_steady, SteadyState};

/// Index of the photon number in fluctuation vectors; levels occupy `0..4`.
const M: usize = LEVELS;
const DIM: usize = LEVELS + 1;

/// Relative pivot threshold below which the linearized system is singular.
const PIVOT_RTOL: f64 = 1e-14;

/// Relative accuracy requested from the Fano-factor quadrature.
pub const FANO_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Force {
    J,
    R,
    S,
    U,
    D,
    Q,
}

impl Force {
    pub const ALL: [Force; 6] = [Force::J, Force::R, Force::S, Force::U, Force::D, Force::Q];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Force::J => "j",
            Force::R => "r",
            Force::S => "s",
            Force::U => "u",
            Force::D => "d",
            Force::Q => "q",
        }
    }
}

/// Which fluctuation the coefficients describe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Target {
    /// Photo-current `dQ`.
    Photocurrent,
    /// Intra-cavity photon number `dm`.
    PhotonNumber,
}

/// Spectral densities of the six Langevin forces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LangevinWeights {
    pub sigma_j: f64,
    pub sigma_r: f64,
    pub sigma_s: f64,
    pub sigma_u: f64,
    pub sigma_d: f64,
    pub sigma_q: f64,
}

impl LangevinWeights {
    pub fn get(&self, z: Force) -> f64 {
        match z {
            Force::J => self.sigma_j,
            Force::R => self.sigma_r,
            Force::S => self.sigma_s,
            Force::U => self.sigma_u,
            Force::D => self.sigma_d,
            Force::Q => self.sigma_q,
        }
    }

    pub fn from_steady(params: &LaserParams, ss: &SteadyState) -> Self {
        let n = &ss.populations;
        let m = ss.m;
        let (p, l) = (params.pump, params.ell());
        let scheme = params.scheme;
        let sigma_u = if !scheme.uses_upper_decay() {
            0.0
        } else if params.p_u.is_infinite() {
            ss.rates.u
        } else {
            params.p_u * n[3]
        };
        Self {
            sigma_j: p * n[scheme.pump_source()] + l * p * n[scheme.pumped_level()],
            sigma_r: (m + 1.0) * n[2] + m * n[1],
            sigma_s: params.gamma * n[2],
            sigma_u,
            sigma_d: if scheme.uses_lower_decay() { params.p_d * n[1] } else { 0.0 },
            sigma_q: params.alpha * m,
        }
    }
}

/// Complex weight of every Langevin force in the target fluctuation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseCoefficients {
    pub omega: f64,
    pub target: Target,
    pub c: [Complex64; 6],
}

impl NoiseCoefficients {
    pub fn get(&self, z: Force) -> Complex64 {
        self.c[z.index()]
    }

    /// `sum_z |c_z|^2 sigma_z`.
    pub fn weighted_power(&self, w: &LangevinWeights) -> f64 {
        Force::ALL.iter().map(|&z| self.get(z).norm_sqr() * w.get(z)).sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct Process {
    force: Force,
    gradient: [f64; DIM],
    /// Coefficient of the population inversion `n2 - n1` in the rate,
    /// kept apart from `gradient` because it is of order `m`.
    stimulated: f64,
    stoich: [f64; DIM],
}

fn transfer(from: usize, to: usize, photons: f64) -> [f64; DIM] {
    let mut v = [0.0; DIM];
    v[from] -= 1.0;
    v[to] += 1.0;
    v[M] = photons;
    v
}

fn plain(force: Force, gradient: [f64; DIM], stoich: [f64; DIM]) -> Process {
    Process { force, gradient, stimulated: 0.0, stoich }
}

fn processes(params: &LaserParams, ss: &SteadyState) -> Vec<Process> {
    let scheme = params.scheme;
    let n = &ss.populations;
    let m = ss.m;
    let (p, l) = (params.pump, params.ell());
    let src = scheme.pump_source();
    // A four-level laser with infinitely fast upper decay pumps straight
    // into the upper working level.
    let level3_eliminated = scheme == SchemeKind::Four4 && params.p_u.is_infinite();
    let top = if level3_eliminated { 2 } else { scheme.pumped_level() };

    let mut out = Vec::with_capacity(6);

    let mut g = [0.0; DIM];
    g[src] = p;
    if !level3_eliminated {
        g[top] -= l * p;
    }
    out.push(plain(Force::J, g, transfer(src, top, 0.0)));

    if scheme.uses_upper_decay() && !level3_eliminated {
        let mut g = [0.0; DIM];
        g[3] = params.p_u;
        out.push(plain(Force::U, g, transfer(3, 2, 0.0)));
    }

    // (m+1) dn2 - m dn1 = dn2 + m (dn2 - dn1)
    let mut g = [0.0; DIM];
    g[2] = 1.0;
    // Inversion taken from the balance (m+1) n2 - m n1 = alpha m when m is
    // large enough for the direct difference to lose precision.
    g[M] = if m >= 1.0 { params.alpha - n[2] / m } else { n[2] - n[1] };
    out.push(Process { force: Force::R, gradient: g, stimulated: m, stoich: transfer(2, 1, 1.0) });

    let mut g = [0.0; DIM];
    g[2] = params.gamma;
    out.push(plain(Force::S, g, transfer(2, 1, 0.0)));

    if scheme.uses_lower_decay() {
        let mut g = [0.0; DIM];
        g[1] = params.p_d;
        out.push(plain(Force::D, g, transfer(1, 0, 0.0)));
    }

    let mut g = [0.0; DIM];
    g[M] = params.alpha;
    let mut nu = [0.0; DIM];
    nu[M] = -1.0;
    out.push(plain(Force::Q, g, nu));
    out
}

/// A laser linearized around its steady state, ready for per-frequency
/// evaluation.
///
/// The source population is eliminated through atom conservation and one
/// remaining population is replaced by the inversion `n2 - n1`, so the
/// order-`m` stimulated-emission terms occupy a single column and large
/// photon numbers do not cost precision.
#[derive(Clone, Debug)]
pub struct LinearizedLaser {
    pub params: LaserParams,
    pub steady: SteadyState,
    pub weights: LangevinWeights,
    dim: usize,
    /// Drift matrix in the transformed variables, row-major.
    drift: Vec<f64>,
    /// Transformed stoichiometry column per force.
    inputs: [Vec<f64>; 6],
}

impl LinearizedLaser {
    pub fn new(params: &LaserParams) -> Result<Self> {
        let steady = solve_steady(params)?;
        Ok(Self::from_steady(params, steady))
    }

    pub fn from_steady(params: &LaserParams, steady: SteadyState) -> Self {
        let scheme = params.scheme;
        let src = scheme.pump_source();
        let level3_eliminated = scheme == SchemeKind::Four4 && params.p_u.is_infinite();
        let mut active: Vec<usize> = scheme
            .levels()
            .iter()
            .copied()
            .filter(|&k| k != src && !(level3_eliminated && k == 3))
            .collect();
        active.push(M);
        let dim = active.len();

        // Gradients act on the retained variables once the source population
        // is written as minus the sum of the others.
        let reduce = |g: &[f64; DIM]| -> Vec<f64> {
            active.iter().map(|&k| if k == M { g[k] } else { g[k] - g[src] }).collect()
        };
        let mut inversion = [0.0; DIM];
        inversion[2] = 1.0;
        inversion[1] = -1.0;
        let w = reduce(&inversion);
        // Retained population swapped for the inversion; its weight is +-1.
        let pivot = w.iter().position(|x| x.abs() == 1.0).expect("inversion has a unit weight");

        let mut drift = vec![0.0; dim * dim];
        let mut inputs: [Vec<f64>; 6] = Default::default();
        for z in Force::ALL {
            inputs[z.index()] = vec![0.0; dim];
        }
        for pr in processes(params, &steady) {
            let mut nu: Vec<f64> = active.iter().map(|&i| pr.stoich[i]).collect();
            nu[pivot] = w.iter().zip(&nu).map(|(a, b)| a * b).sum();
            let g = reduce(&pr.gradient);
            let mut gt: Vec<f64> = (0..dim).map(|i| g[i] - w[i] * g[pivot] / w[pivot]).collect();
            gt[pivot] = g[pivot] / w[pivot] + pr.stimulated;
            for i in 0..dim {
                for k in 0..dim {
                    drift[i * dim + k] += nu[i] * gt[k];
                }
            }
            inputs[pr.force.index()] = nu;
        }
        let weights = LangevinWeights::from_steady(params, &steady);
        Self { params: params.clone(), steady, weights, dim, drift, inputs }
    }

    /// Response of every retained variable to every force at `omega`,
    /// as `responses[force][variable]`.
    fn responses(&self, omega: f64) -> Result<Vec<Vec<Complex64>>> {
        let dim = self.dim;
        let mut mat = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                mat[i * dim + k] = Complex64::new(-self.drift[i * dim + k], 0.0);
            }
            mat[i * dim + i] += Complex64::new(0.0, omega);
        }
        let lu = ComplexLu::factor(dim, mat, PIVOT_RTOL).ok_or(Error::SingularSystem { omega })?;
        Ok(self
            .inputs
            .iter()
            .map(|b| {
                let rhs: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                lu.solve(&rhs)
            })
            .collect())
    }

    pub fn coefficients(&self, omega: f64, target: Target) -> Result<NoiseCoefficients> {
        let resp = self.responses(omega)?;
        let m_idx = self.dim - 1;
        let mut c = [Complex64::new(0.0, 0.0); 6];
        for z in Force::ALL {
            let dm = resp[z.index()][m_idx];
            c[z.index()] = match target {
                Target::PhotonNumber => dm,
                Target::Photocurrent => {
                    let direct = if z == Force::Q { 1.0 } else { 0.0 };
                    dm * self.params.alpha + direct
                }
            };
        }
        Ok(NoiseCoefficients { omega, target, c })
    }

    /// Photo-current spectral density normalized to the shot-noise level.
    pub fn photocurrent_spectrum(&self, omega: f64) -> Result<f64> {
        let c = self.coefficients(omega, Target::Photocurrent)?;
        Ok(c.weighted_power(&self.weights) / self.weights.sigma_q)
    }

    /// Spectral density of the photon-number fluctuation (not normalized).
    pub fn photon_spectrum(&self, omega: f64) -> Result<f64> {
        let c = self.coefficients(omega, Target::PhotonNumber)?;
        Ok(c.weighted_power(&self.weights))
    }

    /// Rate used to compactify the frequency axis.
    pub fn characteristic_rate(&self) -> f64 {
        self.params.max_rate().max(self.steady.derived.script_p)
    }

    /// Photon-number variance from the frequency integral of its spectrum.
    pub fn photon_variance(&self) -> Result<f64> {
        let mut err = None;
        let integral = integrate_even_over_line(
            |w| match self.photon_spectrum(w) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            self.characteristic_rate(),
            FANO_RTOL,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(integral.value),
        }
    }

    pub fn fano(&self) -> Result<f64> {
        Ok(self.photon_variance()? / self.steady.m)
    }
}

/// Weights of the Langevin forces in the target fluctuation at `omega`.
pub fn solve_fluctuations(ss: &SteadyState, params: &LaserParams, omega: f64, target: Target) -> Result<NoiseCoefficients> {
    LinearizedLaser::from_steady(params, *ss).coefficients(omega, target)
}

/// Shot-noise-normalized photo-current spectral density at `omega`.
pub fn spectral_density(params: &LaserParams, omega: f64) -> Result<f64> {
    LinearizedLaser::new(params)?.photocurrent_spectrum(omega)
}

/// Spectral density of the intra-cavity photon-number fluctuation.
pub fn photon_spectral_density(params: &LaserParams, omega: f64) -> Result<f64> {
    LinearizedLaser::new(params)?.photon_spectrum(omega)
}

/// Intra-cavity Fano factor `var(m) / <m>` of the linearized model.
pub fn fano_analytic(params: &LaserParams) -> Result<f64> {
    LinearizedLaser::new(params)?.fano()
}

/// Regime of a zero-frequency closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ClosedFormCase {
    /// No spontaneous decay between working levels, `m >> 1`.
    Gamma0,
    /// Many atoms per detector constant, any spontaneous decay.
    LargeN,
    /// Both of the above.
    Both,
}

impl ClosedFormCase {
    fn name(self) -> &'static str {
        match self {
            ClosedFormCase::Gamma0 => "gamma0",
            ClosedFormCase::LargeN => "largeN",
            ClosedFormCase::Both => "both",
        }
    }
}

/// Zero-frequency normalized photo-current spectral density from the
/// closed-form expressions of each regime.
pub fn closed_form_s0(params: &LaserParams, case: ClosedFormCase) -> Result<f64> {
    params.validate()?;
    if matches!(case, ClosedFormCase::Gamma0 | ClosedFormCase::Both) && params.gamma != 0.0 {
        return Err(Error::CaseMismatch { case: case.name(), reason: format!("requires gamma = 0, got {}", params.gamma) });
    }
    let d = crate::steady::derived_params(params);
    let (nn, pp) = (d.script_n, d.script_p);
    let (p, l, g) = (params.pump, params.ell(), params.gamma);
    let (pu, pd) = (params.p_u, params.p_d);
    let s = match (params.scheme, case) {
        (SchemeKind::Four4, ClosedFormCase::Gamma0) => {
            1.0 + 2.0 / (nn - 1.0).powi(2) + 8.0 * pp * pp / (pd * pd) + (6.0 - 4.0 * nn) * pp / ((nn - 1.0) * pd)
                + 2.0 * (1.0 + l) * pp * pp / (pu * pu)
                + 2.0 * pp * (2.0 * pp - pd) / (pd * pu)
        }
        (SchemeKind::Four4, ClosedFormCase::LargeN) => {
            1.0 + 2.0 * g / (pd - g) - (4.0 * pp + 2.0 * g) / pd + 8.0 * pp * (pp + g) / (pd * pd)
                - 8.0 * pp * pp * g / pd.powi(3)
                + 2.0 * pp * (g - pd) * (pd - 2.0 * pp) / (pd * pd * pu)
                - 2.0 * (1.0 + l) * pp * pp * (g - pd) / (pd * pu * pu)
        }
        (SchemeKind::Four4, ClosedFormCase::Both) => {
            if pu.is_infinite() {
                // Limit of the expression below as p_u grows without bound.
                1.0 - 2.0 * p * pd / (2.0 * p + pd).powi(2)
            } else {
                let k = p + p * l + pu;
                1.0 - 2.0 * p * pd * pu * (pd + 2.0 * k) / (2.0 * p * pu + pd * k).powi(2)
            }
        }
        (SchemeKind::Lambda3, ClosedFormCase::Gamma0) => {
            let a = 1.0 + l - nn;
            1.0 + 2.0 * (1.0 + l + l * nn) / (a * a) + 4.0 * (2.0 + l) * pp * pp / (pd * pd)
                - 2.0 * (3.0 + 2.0 * l - 2.0 * nn) * pp / (a * pd)
        }
        (SchemeKind::Lambda3, ClosedFormCase::LargeN) => {
            1.0 + 2.0 * g / (pd - g) - 2.0 * (2.0 * pp + g) / pd
                + 2.0 * pp * (2.0 * (2.0 + l) * pp + (4.0 + l) * g) / (pd * pd)
                - 4.0 * (2.0 + l) * pp * pp * g / pd.powi(3)
        }
        (SchemeKind::Lambda3, ClosedFormCase::Both) => 1.0 - 4.0 * p * pd / (p * (2.0 + l) + pd).powi(2),
        (SchemeKind::V3, ClosedFormCase::Gamma0) => {
            1.0 + (2.0 * nn + 1.0) / (2.0 * nn - 1.0).powi(2) + (1.0 + 2.0 * l) * pp * pp / (2.0 * pu * pu)
                - (4.0 * nn - 1.0) * pp / (2.0 * (2.0 * nn - 1.0) * pu)
        }
        (SchemeKind::V3, ClosedFormCase::LargeN) => {
            1.0 + 2.0 * g / (pp - g) - pp / pu + pp * (pp * (1.0 + 2.0 * l) - g) / (2.0 * pu * pu)
                + (1.0 + 2.0 * l) * pp * pp * g / (4.0 * pu.powi(3))
                - 2.0 * pp * pp * g / ((pp - g) * (pp * g + 2.0 * (pp - g) * pu))
        }
        (SchemeKind::V3, ClosedFormCase::Both) => 1.0 - 4.0 * p * pu / (p * (1.0 + 2.0 * l) + 2.0 * pu).powi(2),
    };
    Ok(s)
}

/// Pump conditions minimizing the zero-frequency photo-current noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Optimum {
    pub s_min: f64,
    /// `P / p_u` at the optimum, for schemes with an upper decay.
    pub pump_over_p_u: Option<f64>,
    /// `P / p_d` at the optimum, for schemes with a lower decay.
    pub pump_over_p_d: Option<f64>,
}

/// Absolute minimum of the zero-frequency noise (no spontaneous decay,
/// many atoms) and the pump ratios achieving it.
pub fn optimum_conditions(scheme: SchemeKind, pumping: Pumping) -> Optimum {
    let l = pumping.ell();
    match scheme {
        SchemeKind::Four4 => Optimum {
            s_min: (1.0 + 2.0 * l) / (3.0 + 4.0 * l),
            pump_over_p_u: Some(1.0 / (1.0 + l)),
            pump_over_p_d: Some((1.0 + 2.0 * l) / (2.0 * (1.0 + l))),
        },
        SchemeKind::Lambda3 => Optimum {
            s_min: (1.0 + l) / (2.0 + l),
            pump_over_p_u: None,
            pump_over_p_d: Some(1.0 / (2.0 + l)),
        },
        SchemeKind::V3 => Optimum {
            s_min: (1.0 + 4.0 * l) / (2.0 + 4.0 * l),
            pump_over_p_u: Some(2.0 / (1.0 + 2.0 * l)),
            pump_over_p_d: None,
        },
    }
}

/// Four-level optimum at finite effective atom number `script_n = N / alpha`.
pub fn optimum_four_level_finite(pumping: Pumping, script_n: f64) -> Optimum {
    let l = pumping.ell();
    let n = script_n;
    let s_min = (2.0 * n * (n - 1.0) + 11.0 + l * (4.0 * n * (n - 1.0) + 15.0)) / (2.0 * (3.0 + 4.0 * l) * (n - 1.0).powi(2));
    Optimum {
        s_min,
        pump_over_p_u: Some(1.0 / (1.0 + l)),
        pump_over_p_d: Some((n * (1.0 + 2.0 * l) - (2.0 + 3.0 * l)) / ((1.0 + l) * (2.0 * n - 1.0))),
    }
}
