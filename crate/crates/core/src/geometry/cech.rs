//! Brute-force Čech filtration for small point sets.

use super::{circumsphere, squared_distance, FilteredComplex, PointPattern, Simplex};
use crate::error::{Error, Result};

/// Default cap on the number of points accepted by [`cech_oracle`].
pub const CECH_DEFAULT_LIMIT: usize = 10;

/// Radius of the minimum enclosing ball of `points`.
///
/// The ball is determined by a support set of at most `dim + 1` points lying
/// on its boundary, so every such subset's smallest circumsphere is tried
/// and the smallest one containing all points wins.
pub fn minimum_enclosing_radius(points: &[&[f64]]) -> f64 {
    let n = points.len();
    if n <= 1 {
        return 0.0;
    }
    let max_support = (points[0].len() + 1).min(n);
    let mut best = f64::INFINITY;
    let mut subset = Vec::with_capacity(max_support);
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > max_support {
            continue;
        }
        subset.clear();
        subset.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| points[i]));
        let Some((center, r2)) = circumsphere(&subset) else { continue };
        if r2.sqrt() >= best {
            continue;
        }
        let slack = r2 * 1e-12 + 1e-300;
        if points.iter().all(|p| squared_distance(p, &center) <= r2 + slack) {
            best = r2.sqrt();
        }
    }
    best
}

/// Full Čech filtration on all simplices with at most `max_dim + 1` vertices,
/// each valued at the minimum enclosing ball radius of its vertices.
pub fn cech_oracle(pattern: &PointPattern, max_dim: usize) -> Result<FilteredComplex> {
    cech_oracle_with_limit(pattern, max_dim, CECH_DEFAULT_LIMIT)
}

pub fn cech_oracle_with_limit(pattern: &PointPattern, max_dim: usize, limit: usize) -> Result<FilteredComplex> {
    let n = pattern.len();
    if n > limit {
        return Err(Error::TooLarge { count: n, limit });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if max_dim >= n || max_dim > 3 {
        return Err(Error::InvalidArgument(format!("max_dim {max_dim} out of range for {n} points")));
    }
    let mut simplices = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > max_dim + 1 {
            continue;
        }
        let verts: Vec<u32> = (0..n as u32).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<&[f64]> = verts.iter().map(|&v| pattern.point(v as usize)).collect();
        simplices.push((Simplex::new(&verts)?, minimum_enclosing_radius(&pts)));
    }
    FilteredComplex::new(pattern.dim(), simplices)
}
