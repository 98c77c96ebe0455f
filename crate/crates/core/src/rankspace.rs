//! Rank functions on a triangular grid and the weighted L2 geometry on them.
//!
//! A rank function `β_k(a, b)` counts diagram points born at or before `a`
//! that are still alive after `b`. On a grid it is stored at the nodes
//! `(x_i, y_j)` with `i <= j`, and integrals over `{x <= y}` are replaced
//! by a node quadrature weighted by `φ(y - x)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

/// Uniform grid of `m` nodes per axis over `[a0, a1]`, restricted to `x <= y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a0: f64,
    pub a1: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(a0: f64, a1: f64, m: usize) -> Result<Self> {
        if !(a0.is_finite() && a1.is_finite() && 0.0 <= a0 && a0 < a1) {
            return Err(Error::InvalidArgument(format!("grid bounds must satisfy 0 <= a0 < a1, got [{a0}, {a1}]")));
        }
        if m < 2 {
            return Err(Error::InvalidArgument(format!("grid resolution must be at least 2, got {m}")));
        }
        Ok(Self { a0, a1, m })
    }

    /// Default for ~100 points in the unit square.
    pub fn unit_square_default() -> Self {
        Self { a0: 0.0, a1: 0.5, m: 100 }
    }

    pub fn spacing(&self) -> f64 {
        (self.a1 - self.a0) / (self.m - 1) as f64
    }

    /// Coordinate of node `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.a1
        } else {
            self.a0 + i as f64 * self.spacing()
        }
    }

    pub fn len(&self) -> usize {
        self.m * (self.m + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of node `(i, j)`, `i <= j`: rows by `i`, then `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.m);
        i * self.m - i * i.saturating_sub(1) / 2 + (j - i)
    }

    /// All `(i, j)` node pairs in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |i| (i..self.m).map(move |j| (i, j)))
    }

    /// Node coordinates `(x, y)` in storage order.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.nodes().map(|(i, j)| (self.coord(i), self.coord(j))).collect()
    }

    /// Area of the part of `{a0 <= x <= y <= a1}` closest to node `(i, j)`.
    fn cell_area(&self, i: usize, j: usize) -> f64 {
        let h = self.spacing();
        let last = self.m - 1;
        if i == j {
            if i == 0 || i == last {
                h * h / 8.0
            } else {
                h * h / 2.0
            }
        } else {
            let fx = if i == 0 { 0.5 } else { 1.0 };
            let fy = if j == last { 0.5 } else { 1.0 };
            h * h * fx * fy
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?},{:?},{}", self.a0, self.a1, self.m)
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `a0,a1,M`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("grid must be 'a0,a1,M', got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let a0: f64 = parts[0].parse().map_err(|_| bad())?;
        let a1: f64 = parts[1].parse().map_err(|_| bad())?;
        let m: usize = parts[2].parse().map_err(|_| bad())?;
        Grid::new(a0, a1, m)
    }
}

/// Weight `φ(t)` on lifetimes `t = y - x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightFunction {
    /// `φ ≡ 1` on the grid window.
    #[default]
    Indicator,
    /// `φ(t) = exp(-rate * t)`.
    Exponential { rate: f64 },
}

impl WeightFunction {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponential weight needs a positive rate, got {rate}")));
        }
        Ok(WeightFunction::Exponential { rate })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            WeightFunction::Indicator => 1.0,
            WeightFunction::Exponential { rate } => (-rate * t).exp(),
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Indicator => write!(f, "indicator"),
            WeightFunction::Exponential { rate } => write!(f, "exp:{rate:?}"),
        }
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    /// Parses `indicator` or `exp:<rate>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "indicator" {
            return Ok(WeightFunction::Indicator);
        }
        if let Some(rate) = s.strip_prefix("exp:") {
            let rate: f64 =
                rate.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad exponential rate in '{s}'")))?;
            return WeightFunction::exponential(rate);
        }
        Err(Error::InvalidArgument(format!("weight must be 'indicator' or 'exp:<rate>', got '{s}'")))
    }
}

/// Quadrature weights `area(i, j) * φ(y_j - x_i)` for one grid and weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    grid: Grid,
    phi: WeightFunction,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(grid: Grid, phi: WeightFunction) -> Self {
        let weights =
            grid.nodes().map(|(i, j)| grid.cell_area(i, j) * phi.eval(grid.coord(j) - grid.coord(i))).collect();
        Self { grid, phi, weights }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phi(&self) -> &WeightFunction {
        &self.phi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w u v` over the nodes.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.weights.len());
        debug_assert_eq!(v.len(), self.weights.len());
        self.weights.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
    }

    /// `Σ w (u - v)^2`.
    pub fn distance_sq(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u).zip(v).map(|((w, a), b)| w * (a - b) * (a - b)).sum()
    }
}

/// A (possibly averaged) rank function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RankFunction {
    grid: Grid,
    dim: usize,
    values: Vec<f64>,
}

impl RankFunction {
    /// Wraps raw node values; they must be finite and nonnegative.
    pub fn from_values(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "rank function needs {} values for grid M={}, got {}",
                grid.len(),
                grid.m,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidArgument(format!("rank function value {v} is negative or non-finite")));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn zero(grid: Grid, dim: usize) -> Self {
        Self { grid, dim, values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    fn check_compatible(&self, other: &RankFunction) -> Result<()> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Most negative inclusion-exclusion value
    /// `β(c,b) - β(a,b) - β(c,d) + β(a,d)` over grid rectangles
    /// `a <= c <= b <= d`, or 0 when none is negative.
    ///
    /// Every such rectangle is a disjoint union of unit cells
    /// `[i, i+1] x [j, j+1]` with `i + 1 <= j`, so the unit cells are scanned.
    pub fn min_inclusion_exclusion(&self) -> f64 {
        let m = self.grid.m;
        let mut worst = 0.0f64;
        for i in 0..m.saturating_sub(1) {
            for j in (i + 1)..(m - 1) {
                let q = self.at(i + 1, j) - self.at(i, j) - self.at(i + 1, j + 1) + self.at(i, j + 1);
                worst = worst.min(q);
            }
        }
        worst
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.min_inclusion_exclusion() >= -tol
    }
}

/// Nonnegative slack allowed by [`RankFunction::is_monotone`] for averaged functions.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// First index `i` with `coord(i) >= t`, or `m` if none.
fn first_node_at_or_above(grid: &Grid, t: f64) -> usize {
    if t <= grid.a0 {
        return 0;
    }
    if t > grid.a1 {
        return grid.m;
    }
    let guess = ((t - grid.a0) / grid.spacing()).ceil() as usize;
    let mut i = guess.min(grid.m);
    while i > 0 && grid.coord(i - 1) >= t {
        i -= 1;
    }
    while i < grid.m && grid.coord(i) < t {
        i += 1;
    }
    i
}

/// Discretizes dimension-`dim` points of `diagram`: the value at `(x, y)`
/// counts points with `birth <= x` and `death > y`. Essential classes count
/// at every node right of their birth (their death acts as +∞, beyond the grid).
pub fn rank_from_diagram(diagram: &PersistenceDiagram, dim: usize, grid: Grid) -> RankFunction {
    let m = grid.m;
    // 2D difference array over the full m x m square, masked to i <= j afterwards.
    let mut diff = vec![0i64; (m + 1) * (m + 1)];
    for p in diagram.in_dim(dim) {
        let i_lo = first_node_at_or_above(&grid, p.birth);
        // Nodes with y < death, i.e. j < first_node_at_or_above(death).
        let j_hi = if p.death.is_infinite() { m } else { first_node_at_or_above(&grid, p.death) };
        if i_lo >= m || j_hi == 0 {
            continue;
        }
        diff[i_lo * (m + 1)] += 1;
        diff[i_lo * (m + 1) + j_hi] -= 1;
    }
    // Rows: the rectangle spans i in [i_lo, m); prefix over i then j.
    let mut dense = vec![0i64; m * m];
    let mut row = vec![0i64; m + 1];
    for i in 0..m {
        for j in 0..=m {
            row[j] += diff[i * (m + 1) + j];
        }
        let mut acc = 0;
        for j in 0..m {
            acc += row[j];
            dense[i * m + j] = acc;
        }
    }
    let values = grid.nodes().map(|(i, j)| dense[i * m + j] as f64).collect();
    RankFunction { grid, dim, values }
}

/// Weighted L2 distance `d_φ(f, h)`.
pub fn distance(f: &RankFunction, h: &RankFunction, phi: &WeightFunction) -> Result<f64> {
    f.check_compatible(h)?;
    let q = Quadrature::new(f.grid, *phi);
    Ok(q.distance_sq(&f.values, &h.values).sqrt())
}

/// A signed function on a grid, e.g. a centered rank function or a
/// principal component.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    /// `f - base`.
    pub fn centered(f: &RankFunction, base: &RankFunction) -> Result<Self> {
        f.check_compatible(base)?;
        Ok(Self { grid: f.grid, values: f.values.iter().zip(&base.values).map(|(a, b)| a - b).collect() })
    }
}

/// Weighted inner product `⟨u, v⟩ = ∫ u v φ(y - x) dx dy`.
pub fn inner_product(u: &GridFunction, v: &GridFunction, phi: &WeightFunction) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    Ok(Quadrature::new(u.grid, *phi).dot(&u.values, &v.values))
}

/// Pointwise mean of rank functions sharing a grid and dimension.
pub fn mean(functions: &[RankFunction]) -> Result<RankFunction> {
    let first = functions.first().ok_or(Error::EmptyInput)?;
    let mut sum = vec![0.0; first.values.len()];
    for f in functions {
        first.check_compatible(f)?;
        for (s, v) in sum.iter_mut().zip(&f.values) {
            *s += v;
        }
    }
    let n = functions.len() as f64;
    Ok(RankFunction { grid: first.grid, dim: first.dim, values: sum.into_iter().map(|s| s / n).collect() })
}
