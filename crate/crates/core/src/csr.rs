//! Monte-Carlo test of complete spatial randomness based on rank functions.
//!
//! The null model is a binomial pattern of fixed size in the unit square.
//! Its mean rank function is estimated from one batch of simulations and
//! the null distribution of squared distances to that mean from a second,
//! independent batch. A pattern is rejected when its squared distance
//! exceeds the `1 - p` quantile of the null distances.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{alpha_filtration, PointPattern, Window};
use crate::io::json_err;
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::pointproc::{derive_seed, gen_binomial, ProcessSpec};
use crate::rankspace::{mean, rank_from_diagram, Grid, Quadrature, RankFunction, WeightFunction};

const MEAN_STREAM: u64 = 0;
const NULL_STREAM: u64 = 1;

/// Alpha-filtration persistence diagram of a pattern.
pub fn pattern_diagram(pattern: &PointPattern) -> Result<PersistenceDiagram> {
    Ok(compute_persistence(&alpha_filtration(pattern)?))
}

/// Parameters of a null-model fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsrFitConfig {
    /// Patterns averaged into the mean rank function.
    pub n_mean: usize,
    /// Independent patterns giving the null distance distribution.
    pub n_null: usize,
    /// Points per binomial pattern.
    pub n_points: usize,
    #[serde(default = "default_p_level")]
    pub p_level: f64,
    pub seed: u64,
}

fn default_p_level() -> f64 {
    0.05
}

impl CsrFitConfig {
    /// 300 mean patterns, 200 null patterns of 100 points, `p = 0.05`.
    pub fn full_scale(seed: u64) -> Self {
        Self { n_mean: 300, n_null: 200, n_points: 100, p_level: 0.05, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n_mean < 2 || self.n_null < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 mean and 2 null patterns, got {} and {}",
                self.n_mean, self.n_null
            )));
        }
        if self.n_points == 0 {
            return Err(Error::InvalidArgument("patterns need at least one point".into()));
        }
        if !(self.p_level > 0.0 && self.p_level < 1.0) {
            return Err(Error::InvalidArgument(format!("p_level must lie in (0, 1), got {}", self.p_level)));
        }
        Ok(())
    }
}

/// Fitted null model for one homology dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrModel {
    pub dim: usize,
    pub grid: Grid,
    pub phi: WeightFunction,
    pub mean: RankFunction,
    /// Squared distances of the null patterns to `mean`, ascending.
    pub null_distances: Vec<f64>,
    pub cutoff: f64,
    pub p_level: f64,
    pub n_points: usize,
    pub n_mean: usize,
    pub seed: u64,
}

/// Result of testing one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub distance_sq: f64,
    pub reject: bool,
}

/// Empirical quantile with "higher" interpolation: the order statistic at
/// 0-based position `ceil((n - 1) q)` of the ascending `sorted` sample.
pub fn quantile_higher(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("quantile level must lie in [0, 1], got {q}")));
    }
    // The slack keeps e.g. 20 * 0.95 from rounding up past an exact integer.
    let pos = (((sorted.len() - 1) as f64) * q - 1e-9).ceil().max(0.0) as usize;
    Ok(sorted[pos.min(sorted.len() - 1)])
}

impl CsrModel {
    /// Squared distance of `f` to the mean and the test decision.
    pub fn test_rank(&self, f: &RankFunction) -> Result<TestOutcome> {
        if f.grid() != self.mean.grid() || f.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        let q = Quadrature::new(self.grid, self.phi);
        let distance_sq = q.distance_sq(f.values(), self.mean.values());
        Ok(TestOutcome { distance_sq, reject: distance_sq > self.cutoff })
    }

    pub fn test_diagram(&self, diagram: &PersistenceDiagram) -> Result<TestOutcome> {
        self.test_rank(&rank_from_diagram(diagram, self.dim, self.grid))
    }

    pub fn test_pattern(&self, pattern: &PointPattern) -> Result<TestOutcome> {
        if pattern.window() != &Window::unit(2) {
            return Err(Error::InvalidPattern("CSR test expects a pattern in the unit square".into()));
        }
        self.test_diagram(&pattern_diagram(pattern)?)
    }
}

/// Fits null models for several homology dimensions from one shared set
/// of simulated patterns; the result follows the order of `dims`.
pub fn fit_csr_models(config: &CsrFitConfig, dims: &[usize], grid: Grid, phi: WeightFunction) -> Result<Vec<CsrModel>> {
    config.validate()?;
    let diagrams = |stream: u64, count: usize| -> Result<Vec<PersistenceDiagram>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(config.seed, stream, i as u64);
                pattern_diagram(&gen_binomial(config.n_points, &Window::unit(2), seed)?)
            })
            .collect()
    };
    let mean_diagrams = diagrams(MEAN_STREAM, config.n_mean)?;
    let null_diagrams = diagrams(NULL_STREAM, config.n_null)?;
    let q = Quadrature::new(grid, phi);
    dims.iter()
        .map(|&dim| {
            let ranks: Vec<RankFunction> = mean_diagrams.par_iter().map(|d| rank_from_diagram(d, dim, grid)).collect();
            let avg = mean(&ranks)?;
            let mut null_distances: Vec<f64> = null_diagrams
                .par_iter()
                .map(|d| q.distance_sq(rank_from_diagram(d, dim, grid).values(), avg.values()))
                .collect();
            null_distances.sort_by(f64::total_cmp);
            let cutoff = quantile_higher(&null_distances, 1.0 - config.p_level)?;
            Ok(CsrModel {
                dim,
                grid,
                phi,
                mean: avg,
                null_distances,
                cutoff,
                p_level: config.p_level,
                n_points: config.n_points,
                n_mean: config.n_mean,
                seed: config.seed,
            })
        })
        .collect()
}

pub fn fit_csr(config: &CsrFitConfig, dim: usize, grid: Grid, phi: WeightFunction) -> Result<CsrModel> {
    Ok(fit_csr_models(config, &[dim], grid, phi)?.remove(0))
}

/// Rejection counts: one row per tested dimension, one column per model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTable {
    pub dims: Vec<usize>,
    pub models: Vec<String>,
    pub n_test: usize,
    /// `counts[row][col]` rejections out of `n_test`.
    pub counts: Vec<Vec<usize>>,
}

impl PowerTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test");
        for m in &self.models {
            write!(out, ",{m}").unwrap();
        }
        out.push('\n');
        for (dim, row) in self.dims.iter().zip(&self.counts) {
            write!(out, "dim {dim}").unwrap();
            for c in row {
                write!(out, ",{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Right-aligned plain-text table.
    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self.dims.iter().map(|d| format!("dim {d}")).collect();
        let first = labels.iter().map(String::len).chain(["test".len()]).max().unwrap_or(4);
        let widths: Vec<usize> = self
            .models
            .iter()
            .enumerate()
            .map(|(c, m)| self.counts.iter().map(|row| row[c].to_string().len()).chain([m.len()]).max().unwrap())
            .collect();
        let mut out = format!("{:<first$}", "test");
        for (m, w) in self.models.iter().zip(&widths) {
            write!(out, "  {m:>w$}").unwrap();
        }
        out.push('\n');
        for (label, row) in labels.iter().zip(&self.counts) {
            write!(out, "{label:<first$}").unwrap();
            for (c, w) in row.iter().zip(&widths) {
                write!(out, "  {c:>w$}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Tests `n_test` patterns from each spec against every model. Pattern `t`
/// of spec `s` uses seed `derive_seed(seed, s, t)`, so the table does not
/// depend on scheduling.
pub fn power_study(specs: &[ProcessSpec], n_test: usize, models: &[CsrModel], seed: u64) -> Result<PowerTable> {
    for spec in specs {
        spec.validate()?;
    }
    let mut counts = vec![vec![0usize; specs.len()]; models.len()];
    for (s, spec) in specs.iter().enumerate() {
        let rejections: Vec<Vec<bool>> = (0..n_test)
            .into_par_iter()
            .map(|t| {
                let pattern = spec.generate(derive_seed(seed, s as u64, t as u64))?;
                let diagram = pattern_diagram(&pattern)?;
                models.iter().map(|m| m.test_diagram(&diagram).map(|o| o.reject)).collect()
            })
            .collect::<Result<_>>()?;
        for row in rejections {
            for (k, reject) in row.into_iter().enumerate() {
                counts[k][s] += reject as usize;
            }
        }
    }
    Ok(PowerTable {
        dims: models.iter().map(|m| m.dim).collect(),
        models: specs.iter().map(|s| s.label().to_string()).collect(),
        n_test,
        counts,
    })
}

/// JSON part of a saved model; the mean rank function is stored
/// separately in the rank-function CSV format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsrModelHeader {
    pub dim: usize,
    pub grid: String,
    pub phi: String,
    pub p_level: f64,
    pub cutoff: f64,
    pub n_points: usize,
    pub n_mean: usize,
    pub n_null: usize,
    pub seed: u64,
    pub null_distances: Vec<f64>,
}

impl CsrModelHeader {
    pub fn of(model: &CsrModel) -> Self {
        Self {
            dim: model.dim,
            grid: model.grid.to_string(),
            phi: model.phi.to_string(),
            p_level: model.p_level,
            cutoff: model.cutoff,
            n_points: model.n_points,
            n_mean: model.n_mean,
            n_null: model.null_distances.len(),
            seed: model.seed,
            null_distances: model.null_distances.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("header serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_err)
    }

    /// Reassembles a model, checking the header against the mean function.
    pub fn into_model(self, mean: RankFunction) -> Result<CsrModel> {
        let grid: Grid = self.grid.parse()?;
        let phi: WeightFunction = self.phi.parse()?;
        if *mean.grid() != grid || mean.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        if self.null_distances.len() != self.n_null
            || self.null_distances.iter().any(|d| !d.is_finite() || *d < 0.0)
            || self.null_distances.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::InvalidArgument(
                "null distances must be n_null sorted finite nonnegative values".into(),
            ));
        }
        if !(self.p_level > 0.0 && self.p_level < 1.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidArgument("p_level must lie in (0, 1) and cutoff must be finite".into()));
        }
        Ok(CsrModel {
            dim: self.dim,
            grid,
            phi,
            mean,
            null_distances: self.null_distances,
            cutoff: self.cutoff,
            p_level: self.p_level,
            n_points: self.n_points,
            n_mean: self.n_mean,
            seed: self.seed,
        })
    }
}
