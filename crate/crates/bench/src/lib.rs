//! Fixed workloads shared by the benchmarks.

use lasernoise_core::table::presets;
use lasernoise_core::{simulate, LaserParams, Pumping, SimConfig};

/// Parameter sets at the scale of the published Monte Carlo runs.
pub fn workloads() -> Vec<(&'static str, LaserParams)> {
    vec![
        ("v3_small", presets::v_small(1265.0, Pumping::Incoherent, 0.0)),
        ("v3_coherent", presets::v_small(422.0, Pumping::Coherent, 6.32)),
        ("four_1000", LaserParams::four_level(1000, 100.0, Pumping::Incoherent, 316.0, 632.0, 6.32, 6.32)),
        ("four_1e5", presets::four_level(316.0, Pumping::Incoherent, 63.2)),
    ]
}

/// Detection times of one simulated run, shifted to start at zero.
pub fn detection_record(params: &LaserParams, duration: f64) -> (Vec<f64>, f64) {
    let t = simulate(params, &SimConfig::new(duration, 1)).expect("workload simulates");
    (t.detection_times_from_start(), t.effective_duration)
}
