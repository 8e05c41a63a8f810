use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use lasernoise_core::gillespie::simulate_runs;
use lasernoise_core::langevin::LinearizedLaser;
use lasernoise_core::spectra::{aggregate_runs, bins_up_to, periodogram, smooth, Spectrum};
use lasernoise_core::stats::t_interval95;
use lasernoise_core::steady::derived_params;
use lasernoise_core::table::optimum_table;
use lasernoise_core::{fano_from_trajectory, simulate, solve_steady, LaserParams, SimConfig};
use rayon::prelude::*;

use crate::output::{opt, Sink};
use crate::spec::RunSpec;
use crate::Options;

pub const STEADY_HEADER: &str = "P,m,n0,n1,n2,n3,J,R,S,U,D,Q";
pub const DEFAULT_SMOOTH: usize = 8;
pub const DEFAULT_OMEGA_POINTS: usize = 400;

fn sim_config(spec: &RunSpec, opts: &Options) -> Result<SimConfig> {
    let mut cfg = spec.sim.clone().context("this command needs a `sim` section in the config")?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn runs(spec: &RunSpec, opts: &Options, default: u64) -> u64 {
    opts.runs.or(spec.runs).unwrap_or(default)
}

fn coords(x: &[f64]) -> String {
    x.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Ten times the largest rate that shapes the spectrum.
pub fn default_omega_max(p: &LaserParams) -> f64 {
    10.0 * p.max_rate().max(derived_params(p).script_p)
}

pub fn steady(spec: &RunSpec, sink: &Sink) -> Result<()> {
    let (_, points) = spec.points()?;
    let rows = points
        .par_iter()
        .map(|(_, p)| {
            let ss = solve_steady(p)?;
            let n = ss.populations;
            let r = ss.rates;
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                p.pump, ss.m, n[0], n[1], n[2], n[3], r.j, r.r, r.s, r.u, r.d, r.q
            ))
        })
        .collect::<Result<Vec<String>>>()?;
    sink.write_csv("steady.csv", STEADY_HEADER, &rows)
}

pub fn sweep(spec: &RunSpec, sink: &Sink) -> Result<()> {
    let (names, points) = spec.points()?;
    let rows = points
        .par_iter()
        .map(|(x, p)| {
            let lin = LinearizedLaser::new(p)?;
            let n = lin.steady.populations;
            let s0 = lin.photocurrent_spectrum(0.0)?;
            let fano = lin.fano()?;
            Ok(format!("{},{},{},{},{},{},{s0},{fano}", coords(x), lin.steady.m, n[0], n[1], n[2], n[3]))
        })
        .collect::<Result<Vec<String>>>()?;
    sink.write_csv("sweep.csv", &format!("{},m,n0,n1,n2,n3,s0,fano", names.join(",")), &rows)
}

pub fn mc(spec: &RunSpec, opts: &Options, sink: &Sink) -> Result<()> {
    let cfg = sim_config(spec, opts)?;
    let n = runs(spec, opts, 1);
    if n == 0 {
        bail!("--runs must be at least 1");
    }
    let trajs = simulate_runs(&spec.params, &cfg, n)?;
    let mut rows = Vec::with_capacity(trajs.len());
    let mut fanos = Vec::with_capacity(trajs.len());
    let mut means = Vec::with_capacity(trajs.len());
    for (k, t) in trajs.iter().enumerate() {
        let f = fano_from_trajectory(t).ok();
        if let Some(f) = f {
            fanos.push(f);
        }
        means.push(t.m_time_average);
        rows.push(format!(
            "{k},{},{},{},{},{}",
            t.m_time_average,
            t.m_variance(),
            opt(f),
            t.total_events,
            t.detection_times.len()
        ));
    }
    sink.write_csv("mc.csv", "run,m_mean,m_variance,fano,events,detections", &rows)?;

    let lin = LinearizedLaser::new(&spec.params).ok();
    let mut summary = Vec::new();
    let iv = t_interval95(&means);
    summary.push(format!("m,{},{},{},{}", iv.mean, iv.low, iv.high, opt(lin.as_ref().map(|l| l.steady.m))));
    if !fanos.is_empty() {
        let iv = t_interval95(&fanos);
        let analytic = lin.as_ref().and_then(|l| l.fano().ok());
        summary.push(format!("fano,{},{},{},{}", iv.mean, iv.low, iv.high, opt(analytic)));
    }
    sink.write_csv("mc_summary.csv", "quantity,mean,ci_low,ci_high,analytic", &summary)
}

pub fn fano(spec: &RunSpec, opts: &Options, sink: &Sink) -> Result<()> {
    let (names, points) = spec.points()?;
    let n = runs(spec, opts, 0);
    let cfg = if n > 0 { Some(sim_config(spec, opts)?) } else { None };
    let rows = points
        .iter()
        .map(|(x, p)| {
            let m = solve_steady(p)?.m;
            let analytic = LinearizedLaser::new(p).and_then(|l| l.fano()).ok();
            let mut row = format!("{},{m},{}", coords(x), opt(analytic));
            match &cfg {
                Some(cfg) => {
                    let f: Vec<f64> =
                        simulate_runs(p, cfg, n)?.iter().filter_map(|t| fano_from_trajectory(t).ok()).collect();
                    if f.is_empty() {
                        row.push_str(",,,");
                    } else {
                        let iv = t_interval95(&f);
                        write!(row, ",{},{},{}", iv.mean, iv.low, iv.high).unwrap();
                    }
                }
                None => row.push_str(",,,"),
            }
            Ok(row)
        })
        .collect::<Result<Vec<String>>>()?;
    sink.write_csv("fano.csv", &format!("{},m,fano_analytic,fano_mc,ci_low,ci_high", names.join(",")), &rows)
}

pub fn spectrum(spec: &RunSpec, opts: &Options, sink: &Sink) -> Result<()> {
    let p = &spec.params;
    let sspec = spec.spectrum.unwrap_or_default();
    let omega_max = opts.omega_max.or(sspec.omega_max).unwrap_or_else(|| default_omega_max(p));
    let points = opts.omega_points.or(sspec.omega_points).unwrap_or(DEFAULT_OMEGA_POINTS);
    let half_width = opts.smooth.or(sspec.smooth).unwrap_or(DEFAULT_SMOOTH);
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        bail!("omega_max must be positive and finite, got {omega_max}");
    }
    if points == 0 {
        bail!("the frequency grid is empty (omega_points = 0)");
    }

    let lin = LinearizedLaser::new(p)?;
    let omega: Vec<f64> = (1..=points).map(|k| omega_max * k as f64 / points as f64).collect();
    let s = omega.iter().map(|&w| lin.photocurrent_spectrum(w)).collect::<lasernoise_core::Result<Vec<f64>>>()?;
    let analytic = Spectrum { omega, s, ci_low: None, ci_high: None, n_runs: 0 };

    let n = runs(spec, opts, 0);
    if n == 0 {
        return sink.write_spectrum("spectrum_analytic.csv", &analytic);
    }
    let cfg = sim_config(spec, opts)?;
    let smoothed = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = simulate(p, &cfg.clone().with_run_index(k))?;
            let bins = bins_up_to(omega_max, t.effective_duration);
            let raw = periodogram(&t.detection_times_from_start(), t.effective_duration, bins)?;
            Ok(if half_width > 0 { smooth(&raw, half_width) } else { raw })
        })
        .collect::<lasernoise_core::Result<Vec<Spectrum>>>()?;
    let agg = aggregate_runs(&smoothed)?;
    sink.write_spectrum("spectrum_analytic.csv", &analytic)?;
    sink.write_spectrum("spectrum_mc.csv", &agg)
}

pub fn table2(sink: &Sink) -> Result<()> {
    let rows: Vec<String> = optimum_table()?
        .iter()
        .map(|r| {
            let p = &r.params;
            let ratio = |x: f64| if x > 0.0 { Some(p.pump / x) } else { None };
            format!(
                "{:?},{},{},{},{},{},{},{},{}",
                r.scheme,
                p.ell.ell(),
                opt(ratio(p.p_u)),
                opt(ratio(p.p_d)),
                r.s_min,
                r.fano_expected,
                r.s0,
                r.fano,
                r.mismatch
            )
        })
        .collect();
    sink.write_csv("table2.csv", "scheme,ell,p_over_p_u,p_over_p_d,s_min,fano_expected,s0,fano,mismatch", &rows)
}
