//! Run specifications: one JSON file per experiment.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lasernoise_core::{LaserParams, SimConfig};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub params: LaserParams,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub runs: Option<u64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Outer axis for two-dimensional grids; requires `sweep`.
    #[serde(default)]
    pub sweep2: Option<Sweep>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
}

/// Grid over one laser parameter: explicit values, a log-spaced range, or both.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub log_range: Option<LogRange>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub smooth: Option<usize>,
}

/// Axis names, and each grid point's coordinates with its parameters.
pub type Grid = (Vec<String>, Vec<(Vec<f64>, LaserParams)>);

impl Sweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let mut out = self.values.clone();
        if let Some(r) = self.log_range {
            if !(r.from > 0.0 && r.to > 0.0) {
                bail!("log_range bounds must be positive, got {} and {}", r.from, r.to);
            }
            match r.points {
                0 => {}
                1 => out.push(r.from),
                n => {
                    let (a, b) = (r.from.ln(), r.to.ln());
                    out.extend((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()));
                }
            }
        }
        if out.is_empty() {
            bail!("sweep over `{}` has an empty grid", self.param);
        }
        Ok(out)
    }
}

impl RunSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: RunSpec = serde_json::from_str(text)?;
        spec.params.validate()?;
        if spec.sweep2.is_some() && spec.sweep.is_none() {
            bail!("`sweep2` needs a `sweep` axis");
        }
        for s in spec.sweep.iter().chain(&spec.sweep2) {
            let grid = s.grid()?;
            spec.params.with_param(&s.param, grid[0])?;
        }
        Ok(spec)
    }

    /// Axis names and `(coordinates, params)` for every grid point, outer
    /// axis first. Without a sweep the single point is labelled by its pump.
    pub fn points(&self) -> Result<Grid> {
        let Some(inner) = &self.sweep else {
            return Ok((vec!["pump".into()], vec![(vec![self.params.pump], self.params.clone())]));
        };
        let outer = match &self.sweep2 {
            Some(o) => o.grid()?.into_iter().map(|y| Ok((vec![y], self.params.with_param(&o.param, y)?))).collect::<Result<Vec<_>>>()?,
            None => vec![(vec![], self.params.clone())],
        };
        let inner_grid = inner.grid()?;
        let mut pts = Vec::with_capacity(outer.len() * inner_grid.len());
        for (coords, base) in outer {
            for &x in &inner_grid {
                let mut c = coords.clone();
                c.push(x);
                pts.push((c, base.with_param(&inner.param, x)?));
            }
        }
        let names = self.sweep2.iter().chain([inner]).map(|s| s.param.clone()).collect();
        Ok((names, pts))
    }
}
