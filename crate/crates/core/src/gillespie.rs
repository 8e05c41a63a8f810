//! Exact event-by-event simulation of the laser-plus-detector jump process.
//!
//! Waiting times are exponential with the total rate, the event kind is
//! drawn in proportion to its rate, and only the photon-absorption instants
//! after burn-in are kept. Photon-number moments are time weighted: `m` is
//! piecewise constant between events.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{event_table, EventKind, EventSpec, LaserParams, MicroState};
use crate::steady::NetRates;

/// In release builds the atom-conservation invariant is checked on every
/// `CONSERVATION_STRIDE`-th event.
const CONSERVATION_STRIDE: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Total simulated time.
    pub duration: f64,
    /// Discarded initial time. `None` selects `max(10 / alpha, 0.05 * duration)`.
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Distinguishes parallel runs sharing a seed; selects the RNG stream.
    #[serde(default)]
    pub run_index: u64,
    /// Store `m` at each detection instant.
    #[serde(default)]
    pub record_m: bool,
    /// Number of equal-length batches the recorded window is split into.
    #[serde(default = "one")]
    pub batches: usize,
    /// Record a time-weighted histogram of `m` over `0..cap`; the last bin
    /// collects everything at or above `cap - 1`.
    #[serde(default)]
    pub histogram_cap: Option<usize>,
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(duration: f64, seed: u64) -> Self {
        Self { duration, burn_in: None, seed, run_index: 0, record_m: false, batches: 1, histogram_cap: None }
    }

    pub fn with_run_index(mut self, run_index: u64) -> Self {
        self.run_index = run_index;
        self
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn resolved_burn_in(&self, params: &LaserParams) -> f64 {
        self.burn_in.unwrap_or_else(|| (10.0 / params.alpha).max(0.05 * self.duration))
    }

    fn check(&self, burn_in: f64) -> Result<()> {
        if !(self.duration.is_finite() && burn_in.is_finite()) {
            return Err(Error::InvalidConfig("duration and burn-in must be finite".into()));
        }
        if burn_in < 0.0 || self.duration <= burn_in {
            return Err(Error::InvalidConfig(format!(
                "need duration > burn_in >= 0, got duration {} and burn_in {burn_in}",
                self.duration
            )));
        }
        if self.batches == 0 {
            return Err(Error::InvalidConfig("batches must be at least 1".into()));
        }
        if self.histogram_cap == Some(0) {
            return Err(Error::InvalidConfig("histogram cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-kind event counters, indexed by [`EventKind::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts(pub [u64; EventKind::COUNT]);

impl EventCounts {
    pub fn get(&self, kind: EventKind) -> u64 {
        self.0[kind.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    fn add(&mut self, other: &EventCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }
}

/// Statistics of one time slice of the recorded window.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatchStats {
    pub duration: f64,
    pub event_counts: EventCounts,
    /// Time integrals of `m - m_shift` and `(m - m_shift)^2`.
    m_integral: f64,
    m2_integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub scheme: crate::model::SchemeKind,
    /// Photon-absorption instants in `(burn_in, duration]`, ascending.
    pub detection_times: Vec<f64>,
    /// Photon number just before each detection, if requested.
    pub detection_m: Option<Vec<u64>>,
    pub m_time_average: f64,
    pub m_second_moment_time_average: f64,
    pub event_counts: EventCounts,
    pub effective_duration: f64,
    pub burn_in: f64,
    pub duration: f64,
    /// Events processed, burn-in included.
    pub total_events: u64,
    pub batches: Vec<BatchStats>,
    /// Fraction of recorded time spent at each photon number.
    pub m_histogram: Option<Vec<f64>>,
    /// State at the end of the run.
    pub final_state: MicroState,
    m_shift: f64,
}

impl Trajectory {
    /// Detection times shifted so the recorded window starts at zero.
    pub fn detection_times_from_start(&self) -> Vec<f64> {
        self.detection_times.iter().map(|t| t - self.burn_in).collect()
    }

    /// Time-weighted variance of `m`, computed from shifted moments.
    pub fn m_variance(&self) -> f64 {
        let int1 = self.batches.iter().map(|b| b.m_integral).sum();
        let int2 = self.batches.iter().map(|b| b.m2_integral).sum();
        moments(int1, int2, self.effective_duration).1
    }

    /// Per-batch `(mean m, Fano factor)` pairs.
    pub fn batch_moments(&self) -> Vec<(f64, f64)> {
        self.batches
            .iter()
            .map(|b| {
                let (mean, var) = moments(b.m_integral, b.m2_integral, b.duration);
                let mean = mean + self.m_shift;
                (mean, var / mean)
            })
            .collect()
    }

    /// Writes detection times one per line at full precision.
    pub fn write_detection_times<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.detection_times {
            writeln!(w, "{t:?}")?;
        }
        Ok(())
    }
}

fn moments(int1: f64, int2: f64, duration: f64) -> (f64, f64) {
    let mean = int1 / duration;
    let var = (int2 / duration - mean * mean).max(0.0);
    (mean, var)
}

/// RNG for one run: ChaCha8 keyed by the seed, stream selected by run index.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// The jump process: event table, current state, clock and RNG.
pub struct JumpProcess {
    table: Vec<EventSpec>,
    rates: Vec<f64>,
    pub state: MicroState,
    pub time: f64,
    rng: ChaCha8Rng,
}

impl JumpProcess {
    pub fn new(params: &LaserParams, seed: u64, run_index: u64) -> Result<Self> {
        let table = event_table(params)?;
        let rates = vec![0.0; table.len()];
        Ok(Self { table, rates, state: MicroState::ground(params), time: 0.0, rng: run_rng(seed, run_index) })
    }

    pub fn table(&self) -> &[EventSpec] {
        &self.table
    }

    /// Draws the waiting time and the index of the next event from the
    /// current state without applying it.
    #[inline]
    pub fn propose(&mut self) -> Result<(f64, usize)> {
        let mut total = 0.0;
        for (r, e) in self.rates.iter_mut().zip(&self.table) {
            *r = e.rate(&self.state);
            total += *r;
        }
        if total <= 0.0 {
            return Err(Error::FrozenChain { time: self.time });
        }
        let u: f64 = self.rng.random();
        let dt = -(1.0 - u).ln() / total;
        if !dt.is_finite() {
            return Err(Error::NonFiniteStep { time: self.time });
        }
        let target = self.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = self.rates.len() - 1;
        for (i, r) in self.rates.iter().enumerate() {
            acc += r;
            if target < acc {
                chosen = i;
                break;
            }
        }
        // Guard against rounding landing on a zero-rate tail entry.
        while self.rates[chosen] == 0.0 {
            chosen -= 1;
        }
        Ok((dt, chosen))
    }

    #[inline]
    pub fn apply(&mut self, index: usize) -> EventKind {
        let e = &self.table[index];
        e.apply(&mut self.state);
        e.kind
    }
}

/// One processed event, passed to observers of [`simulate_observed`].
#[derive(Clone, Copy, Debug)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub state: MicroState,
}

/// Runs one trajectory.
pub fn simulate(params: &LaserParams, cfg: &SimConfig) -> Result<Trajectory> {
    simulate_inner(params, cfg, None::<fn(&EventRecord)>)
}

/// Runs one trajectory, calling `observer` after every applied event.
pub fn simulate_observed<F: FnMut(&EventRecord)>(params: &LaserParams, cfg: &SimConfig, observer: F) -> Result<Trajectory> {
    simulate_inner(params, cfg, Some(observer))
}

/// Runs `runs` independent trajectories with run indices `0..runs`.
/// Results are returned in run-index order.
pub fn simulate_runs(params: &LaserParams, cfg: &SimConfig, runs: u64) -> Result<Vec<Trajectory>> {
    (0..runs)
        .into_par_iter()
        .map(|i| simulate(params, &cfg.clone().with_run_index(i)))
        .collect()
}

struct Recorder {
    burn_in: f64,
    batch_len: f64,
    batches: Vec<BatchStats>,
    current: usize,
    next_boundary: f64,
    histogram: Option<Vec<f64>>,
    m_shift: f64,
}

impl Recorder {
    /// Adds the time-weighted contribution of `m` over `[t0, t1]`, clipped to
    /// the recorded window and split across batch boundaries.
    #[inline]
    fn accumulate(&mut self, t0: f64, t1: f64, m: u64) {
        let mut a = t0.max(self.burn_in);
        if t1 <= a {
            return;
        }
        let x = m as f64 - self.m_shift;
        loop {
            let b = t1.min(self.next_boundary);
            let dt = b - a;
            if dt > 0.0 {
                let batch = &mut self.batches[self.current];
                batch.m_integral += x * dt;
                batch.m2_integral += x * x * dt;
                if let Some(h) = self.histogram.as_mut() {
                    let idx = (m as usize).min(h.len() - 1);
                    h[idx] += dt;
                }
            }
            if t1 <= self.next_boundary || self.current + 1 == self.batches.len() {
                break;
            }
            self.current += 1;
            self.next_boundary = self.burn_in + self.batch_len * (self.current + 1) as f64;
            a = b;
        }
    }
}

fn simulate_inner<F: FnMut(&EventRecord)>(params: &LaserParams, cfg: &SimConfig, mut observer: Option<F>) -> Result<Trajectory> {
    let burn_in = cfg.resolved_burn_in(params);
    cfg.check(burn_in)?;
    let mut process = JumpProcess::new(params, cfg.seed, cfg.run_index)?;
    let n_atoms = params.atoms;
    let duration = cfg.duration;
    let window = duration - burn_in;
    let batch_len = window / cfg.batches as f64;

    let mut rec = Recorder {
        burn_in,
        batch_len,
        batches: vec![BatchStats { duration: batch_len, ..Default::default() }; cfg.batches],
        current: 0,
        next_boundary: if cfg.batches == 1 { f64::INFINITY } else { burn_in + batch_len },
        histogram: cfg.histogram_cap.map(|c| vec![0.0; c]),
        m_shift: 0.0,
    };
    let mut shift_set = false;
    let mut detections = Vec::new();
    let mut detection_m = cfg.record_m.then(Vec::new);
    let mut total_events = 0u64;

    loop {
        let (dt, idx) = process.propose()?;
        let t_next = process.time + dt;
        if !shift_set && t_next > burn_in {
            rec.m_shift = process.state.m as f64;
            shift_set = true;
        }
        rec.accumulate(process.time, t_next.min(duration), process.state.m);
        if t_next > duration {
            break;
        }
        let m_before = process.state.m;
        let kind = process.apply(idx);
        process.time = t_next;
        total_events += 1;

        if cfg!(debug_assertions) || total_events.is_multiple_of(CONSERVATION_STRIDE) {
            let total = process.state.total_atoms();
            if total != n_atoms {
                return Err(Error::InvalidConfig(format!("atom count drifted to {total} at t = {t_next}")));
            }
        }

        if t_next > burn_in {
            let b = if cfg.batches == 1 {
                0
            } else {
                (((t_next - burn_in) / batch_len) as usize).min(cfg.batches - 1)
            };
            rec.batches[b].event_counts.0[kind.index()] += 1;
            if kind == EventKind::PhotonAbsorption {
                detections.push(t_next);
                if let Some(v) = detection_m.as_mut() {
                    v.push(m_before);
                }
            }
        }
        if let Some(obs) = observer.as_mut() {
            obs(&EventRecord { time: t_next, kind, state: process.state });
        }
    }

    let mut event_counts = EventCounts::default();
    for b in &rec.batches {
        event_counts.add(&b.event_counts);
    }
    let int1: f64 = rec.batches.iter().map(|b| b.m_integral).sum();
    let int2: f64 = rec.batches.iter().map(|b| b.m2_integral).sum();
    let (mean_shifted, var) = moments(int1, int2, window);
    let m_time_average = mean_shifted + rec.m_shift;
    let m_histogram = rec.histogram.map(|h| h.into_iter().map(|x| x / window).collect());

    Ok(Trajectory {
        scheme: params.scheme,
        detection_times: detections,
        detection_m,
        m_time_average,
        m_second_moment_time_average: var + m_time_average * m_time_average,
        event_counts,
        effective_duration: window,
        burn_in,
        duration,
        total_events,
        batches: rec.batches,
        m_histogram,
        final_state: process.state,
        m_shift: rec.m_shift,
    })
}

/// Time-weighted Fano factor `var(m) / <m>` of a trajectory.
pub fn fano_from_trajectory(traj: &Trajectory) -> Result<f64> {
    if traj.m_time_average <= 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(traj.m_variance() / traj.m_time_average)
}

/// Average event rates over the recorded window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanRates {
    pub per_kind: [f64; EventKind::COUNT],
    /// Net process rates estimated from paired counts.
    pub net: NetRates,
}

impl MeanRates {
    pub fn rate(&self, kind: EventKind) -> f64 {
        self.per_kind[kind.index()]
    }
}

fn rates_from_counts(scheme: crate::model::SchemeKind, counts: &EventCounts, duration: f64) -> MeanRates {
    let mut per_kind = [0.0; EventKind::COUNT];
    for (r, c) in per_kind.iter_mut().zip(counts.0.iter()) {
        *r = *c as f64 / duration;
    }
    let k = |kind: EventKind| per_kind[kind.index()];
    let j = k(EventKind::PumpAbsorption) - k(EventKind::PumpEmission);
    let r = k(EventKind::CoherentEmission) - k(EventKind::CoherentAbsorption);
    let s = k(EventKind::SpontaneousDecay);
    let u = if scheme.uses_upper_decay() { k(EventKind::UpperDecay) } else { j };
    let d = if scheme.uses_lower_decay() { k(EventKind::LowerDecay) } else { r + s };
    let q = k(EventKind::PhotonAbsorption);
    MeanRates { per_kind, net: NetRates { j, r, s, u, d, q } }
}

/// Event counts divided by the recorded duration, plus net-rate estimates.
/// For schemes without an upper (lower) decay the corresponding net rate is
/// reported as the flux through it, matching [`crate::steady::NetRates`].
pub fn mean_rates(traj: &Trajectory) -> MeanRates {
    rates_from_counts(traj.scheme, &traj.event_counts, traj.effective_duration)
}

/// [`mean_rates`] evaluated separately on each batch.
pub fn batch_mean_rates(traj: &Trajectory) -> Vec<MeanRates> {
    traj.batches
        .iter()
        .map(|b| rates_from_counts(traj.scheme, &b.event_counts, b.duration))
        .collect()
}

/// Writes the `t,event_kind,m,n0,n1,n2,n3` header used by trajectory dumps.
pub fn write_dump_header<W: Write>(w: &mut W) -> io::Result<()> {
    writeln!(w, "t,event_kind,m,n0,n1,n2,n3")
}

pub fn write_dump_row<W: Write>(w: &mut W, rec: &EventRecord) -> io::Result<()> {
    let n = rec.state.n;
    writeln!(w, "{:?},{},{},{},{},{},{}", rec.time, rec.kind.label(), rec.state.m, n[0], n[1], n[2], n[3])
}
