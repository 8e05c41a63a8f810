//! Level schemes, laser parameters and per-scheme event tables.
//!
//! Occupancies are stored in a fixed four-slot array indexed by the level
//! label, so a V-type laser uses slots 1..=3 and a Λ-type laser slots 0..=2.
//! Unused slots stay pinned at zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of level slots in a [`MicroState`].
pub const LEVELS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Three levels {0,1,2}; the pump feeds the upper working level directly.
    Lambda3,
    /// Three levels {1,2,3}; the lower working level is also the pump source.
    V3,
    /// Four levels {0,1,2,3}.
    Four4,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Lambda3, SchemeKind::V3, SchemeKind::Four4];

    /// Level labels used by the scheme, in increasing energy.
    pub fn levels(self) -> &'static [usize] {
        match self {
            SchemeKind::Lambda3 => &[0, 1, 2],
            SchemeKind::V3 => &[1, 2, 3],
            SchemeKind::Four4 => &[0, 1, 2, 3],
        }
    }

    /// Level the pump takes atoms from.
    pub fn pump_source(self) -> usize {
        match self {
            SchemeKind::V3 => 1,
            SchemeKind::Lambda3 | SchemeKind::Four4 => 0,
        }
    }

    /// Level the pump delivers atoms to.
    pub fn pumped_level(self) -> usize {
        match self {
            SchemeKind::Lambda3 => 2,
            SchemeKind::V3 | SchemeKind::Four4 => 3,
        }
    }

    pub fn uses_upper_decay(self) -> bool {
        !matches!(self, SchemeKind::Lambda3)
    }

    pub fn uses_lower_decay(self) -> bool {
        !matches!(self, SchemeKind::V3)
    }
}

/// Pump coherence: whether the pumped level may return to the pump source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Pumping {
    Incoherent,
    Coherent,
}

impl Pumping {
    /// The 0/1 weight of the pump-return transition.
    pub fn ell(self) -> f64 {
        match self {
            Pumping::Incoherent => 0.0,
            Pumping::Coherent => 1.0,
        }
    }
}

impl TryFrom<u8> for Pumping {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Pumping::Incoherent),
            1 => Ok(Pumping::Coherent),
            other => Err(format!("ell must be 0 or 1, got {other}")),
        }
    }
}

impl From<Pumping> for u8 {
    fn from(p: Pumping) -> u8 {
        match p {
            Pumping::Incoherent => 0,
            Pumping::Coherent => 1,
        }
    }
}

/// Physical parameters of a single-mode laser plus detector.
///
/// Rates are per unit time, the unit being fixed by the stimulated transition
/// probability per photon. `p_u` is ignored by [`SchemeKind::Lambda3`] and
/// `p_d` by [`SchemeKind::V3`]. The four-level analytic engines accept
/// `p_u = f64::INFINITY`, which removes level 3 from the dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserParams {
    pub scheme: SchemeKind,
    /// Number of active atoms.
    pub atoms: u64,
    /// Pump rate from the source level.
    pub pump: f64,
    pub ell: Pumping,
    /// Upper decay rate, pumped level to upper working level.
    #[serde(default)]
    pub p_u: f64,
    /// Lower decay rate, lower working level to ground.
    #[serde(default)]
    pub p_d: f64,
    /// Spontaneous decay between the working levels into other modes.
    #[serde(default)]
    pub gamma: f64,
    /// Detector absorption constant: photons are absorbed at rate `alpha * m`.
    pub alpha: f64,
}

impl LaserParams {
    pub fn four_level(atoms: u64, pump: f64, ell: Pumping, p_u: f64, p_d: f64, gamma: f64, alpha: f64) -> Self {
        Self { scheme: SchemeKind::Four4, atoms, pump, ell, p_u, p_d, gamma, alpha }
    }

    pub fn lambda(atoms: u64, pump: f64, ell: Pumping, p_d: f64, gamma: f64, alpha: f64) -> Self {
        Self { scheme: SchemeKind::Lambda3, atoms, pump, ell, p_u: 0.0, p_d, gamma, alpha }
    }

    pub fn v_type(atoms: u64, pump: f64, ell: Pumping, p_u: f64, gamma: f64, alpha: f64) -> Self {
        Self { scheme: SchemeKind::V3, atoms, pump, ell, p_u, p_d: 0.0, gamma, alpha }
    }

    pub fn ell(&self) -> f64 {
        self.ell.ell()
    }

    pub fn n_atoms(&self) -> f64 {
        self.atoms as f64
    }

    /// Checks signs and finiteness. `p_u` may be `+inf` for the four-level
    /// scheme; every other rate must be finite.
    pub fn validate(&self) -> Result<()> {
        if self.atoms < 1 {
            return Err(Error::NoAtoms(self.atoms));
        }
        let named = [
            ("pump", self.pump),
            ("p_u", self.p_u),
            ("p_d", self.p_d),
            ("gamma", self.gamma),
            ("alpha", self.alpha),
        ];
        for (name, value) in named {
            if value.is_nan() {
                return Err(Error::NonFiniteRate { name, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeRate { name, value });
            }
            let infinite_ok = name == "p_u" && self.scheme == SchemeKind::Four4;
            if value.is_infinite() && !infinite_ok {
                return Err(Error::NonFiniteRate { name, value });
            }
        }
        if self.alpha <= 0.0 {
            return Err(Error::NonPositiveAlpha(self.alpha));
        }
        Ok(())
    }

    /// Largest finite rate constant relevant to the scheme.
    pub fn max_rate(&self) -> f64 {
        let mut r = self.alpha.max(self.pump).max(self.gamma);
        if self.scheme.uses_upper_decay() && self.p_u.is_finite() {
            r = r.max(self.p_u);
        }
        if self.scheme.uses_lower_decay() {
            r = r.max(self.p_d);
        }
        r
    }

    /// Returns a copy with the named parameter replaced. Used by sweeps.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = self.clone();
        match name {
            "pump" => p.pump = value,
            "p_u" => p.p_u = value,
            "p_d" => p.p_d = value,
            "gamma" => p.gamma = value,
            "alpha" => p.alpha = value,
            "atoms" => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::NoAtoms(value.max(0.0) as u64));
                }
                p.atoms = value as u64;
            }
            _ => {
                return Err(Error::InvalidConfig(format!("unknown parameter `{name}`")));
            }
        }
        Ok(p)
    }
}

/// Integer occupancies per level slot and the cavity photon number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
pub struct MicroState {
    pub n: [u64; LEVELS],
    pub m: u64,
}

impl MicroState {
    /// All atoms in the pump-source level, empty cavity.
    pub fn ground(params: &LaserParams) -> Self {
        let mut n = [0; LEVELS];
        n[params.scheme.pump_source()] = params.atoms;
        Self { n, m: 0 }
    }

    pub fn total_atoms(&self) -> u64 {
        self.n.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    PhotonAbsorption,
    PumpAbsorption,
    PumpEmission,
    CoherentEmission,
    CoherentAbsorption,
    SpontaneousDecay,
    UpperDecay,
    LowerDecay,
}

impl EventKind {
    pub const COUNT: usize = 8;

    pub const ALL: [EventKind; Self::COUNT] = [
        EventKind::PhotonAbsorption,
        EventKind::PumpAbsorption,
        EventKind::PumpEmission,
        EventKind::CoherentEmission,
        EventKind::CoherentAbsorption,
        EventKind::SpontaneousDecay,
        EventKind::UpperDecay,
        EventKind::LowerDecay,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::PhotonAbsorption => "photon-absorption",
            EventKind::PumpAbsorption => "pump-absorption",
            EventKind::PumpEmission => "pump-emission",
            EventKind::CoherentEmission => "coherent-emission",
            EventKind::CoherentAbsorption => "coherent-absorption",
            EventKind::SpontaneousDecay => "spontaneous-decay",
            EventKind::UpperDecay => "upper-decay",
            EventKind::LowerDecay => "lower-decay",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How an event's rate depends on the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateLaw {
    /// `coef * m`.
    Photons { coef: f64 },
    /// `coef * n[level]`.
    Occupancy { level: usize, coef: f64 },
    /// `(m + 1) * n[level]`, stimulated plus spontaneous emission into the mode.
    Emission { level: usize },
    /// `m * n[level]`.
    Absorption { level: usize },
}

/// One kind of elementary event with its rate law and state increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventSpec {
    pub kind: EventKind,
    pub law: RateLaw,
    /// Atom moves `from -> to`, if the event is an atomic transition.
    pub transfer: Option<(usize, usize)>,
    /// Change in photon number: -1, 0 or +1.
    pub photon_delta: i8,
}

impl EventSpec {
    #[inline]
    pub fn rate(&self, state: &MicroState) -> f64 {
        match self.law {
            RateLaw::Photons { coef } => coef * state.m as f64,
            RateLaw::Occupancy { level, coef } => coef * state.n[level] as f64,
            RateLaw::Emission { level } => (state.m + 1) as f64 * state.n[level] as f64,
            RateLaw::Absorption { level } => state.m as f64 * state.n[level] as f64,
        }
    }

    /// Applies the increment. Only called for events with positive rate,
    /// which guarantees the source level and photon count are nonempty.
    #[inline]
    pub fn apply(&self, state: &mut MicroState) {
        if let Some((from, to)) = self.transfer {
            state.n[from] -= 1;
            state.n[to] += 1;
        }
        match self.photon_delta {
            1 => state.m += 1,
            -1 => state.m -= 1,
            _ => {}
        }
    }

    /// Increment as a signed vector over `(n0, n1, n2, n3, m)`.
    pub fn delta(&self) -> [i64; LEVELS + 1] {
        let mut d = [0i64; LEVELS + 1];
        if let Some((from, to)) = self.transfer {
            d[from] -= 1;
            d[to] += 1;
        }
        d[LEVELS] = self.photon_delta as i64;
        d
    }
}

fn occupancy(kind: EventKind, from: usize, to: usize, coef: f64) -> EventSpec {
    EventSpec { kind, law: RateLaw::Occupancy { level: from, coef }, transfer: Some((from, to)), photon_delta: 0 }
}

/// Complete event list for the parameter set's scheme.
///
/// Pump-return events are always present; with incoherent pumping their
/// rate is identically zero. Rates must be finite, so the `p_u = inf`
/// sentinel is rejected here.
pub fn event_table(params: &LaserParams) -> Result<Vec<EventSpec>> {
    params.validate()?;
    if params.p_u.is_infinite() {
        return Err(Error::NonFiniteRate { name: "p_u", value: params.p_u });
    }
    let p = params.pump;
    let lp = params.ell() * p;
    let photon_absorption = EventSpec {
        kind: EventKind::PhotonAbsorption,
        law: RateLaw::Photons { coef: params.alpha },
        transfer: None,
        photon_delta: -1,
    };
    let emission = EventSpec {
        kind: EventKind::CoherentEmission,
        law: RateLaw::Emission { level: 2 },
        transfer: Some((2, 1)),
        photon_delta: 1,
    };
    let absorption = EventSpec {
        kind: EventKind::CoherentAbsorption,
        law: RateLaw::Absorption { level: 1 },
        transfer: Some((1, 2)),
        photon_delta: -1,
    };
    let spontaneous = occupancy(EventKind::SpontaneousDecay, 2, 1, params.gamma);

    let table = match params.scheme {
        SchemeKind::V3 => vec![
            photon_absorption,
            occupancy(EventKind::PumpAbsorption, 1, 3, p),
            occupancy(EventKind::PumpEmission, 3, 1, lp),
            emission,
            absorption,
            spontaneous,
            occupancy(EventKind::UpperDecay, 3, 2, params.p_u),
        ],
        SchemeKind::Four4 => vec![
            occupancy(EventKind::PumpAbsorption, 0, 3, p),
            occupancy(EventKind::PumpEmission, 3, 0, lp),
            occupancy(EventKind::UpperDecay, 3, 2, params.p_u),
            emission,
            absorption,
            spontaneous,
            occupancy(EventKind::LowerDecay, 1, 0, params.p_d),
            photon_absorption,
        ],
        SchemeKind::Lambda3 => vec![
            occupancy(EventKind::PumpAbsorption, 0, 2, p),
            occupancy(EventKind::PumpEmission, 2, 0, lp),
            emission,
            absorption,
            spontaneous,
            occupancy(EventKind::LowerDecay, 1, 0, params.p_d),
            photon_absorption,
        ],
    };
    Ok(table)
}
