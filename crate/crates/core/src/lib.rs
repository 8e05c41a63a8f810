//! Photon statistics of three- and four-level single-mode lasers.
//!
//! Two independent engines live here. [`gillespie`] runs the exact jump
//! process of pump, working-level and detector events, producing detection
//! times and time-weighted photon-number moments. [`langevin`] linearizes the
//! rate equations around the closed-form steady state of [`steady`] and
//! evaluates photo-current spectra, intra-cavity spectra and Fano factors.
//! [`spectra`] turns detection times into shot-noise-normalized spectra with
//! confidence bands so the two engines can be compared bin by bin.

pub mod error;
pub mod gillespie;
pub mod langevin;
mod linalg;
pub mod model;
pub mod quadrature;
pub mod spectra;
pub mod stats;
pub mod steady;
pub mod table;

pub use error::{Error, Result};
pub use gillespie::{fano_from_trajectory, mean_rates, simulate, SimConfig, Trajectory};
pub use langevin::{
    closed_form_s0, fano_analytic, optimum_conditions, photon_spectral_density,
    solve_fluctuations, spectral_density, ClosedFormCase, Force, NoiseCoefficients, Target,
};
pub use model::{event_table, EventKind, EventSpec, LaserParams, MicroState, Pumping, SchemeKind};
pub use spectra::{aggregate_runs, periodogram, smooth, Spectrum};
pub use steady::{m_saturation, solve_steady, threshold_gamma, threshold_pump, SteadyState};
