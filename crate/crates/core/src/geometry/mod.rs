//! Point patterns, simplices and filtered complexes.
//!
//! The alpha filtration is built on top of an incremental Delaunay
//! triangulation ([`delaunay`]); a brute-force Čech filtration
//! ([`cech_oracle`]) is provided for cross-checking small inputs.

mod alpha;
mod cech;
mod delaunay;

pub use alpha::alpha_filtration;
pub use cech::{cech_oracle, minimum_enclosing_radius, CECH_DEFAULT_LIMIT};
pub use delaunay::delaunay;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box, one `(min, max)` pair per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Window {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || !(2..=3).contains(&min.len()) {
            return Err(Error::InvalidPattern(format!(
                "window must have 2 or 3 axes, got {} mins and {} maxes",
                min.len(),
                max.len()
            )));
        }
        for (lo, hi) in min.iter().zip(&max) {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidPattern(format!("invalid window axis [{lo}, {hi}]")));
            }
        }
        Ok(Self { min, max })
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self { min: vec![0.0; dim], max: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.min.iter().zip(&self.max)).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    pub fn volume(&self) -> f64 {
        self.min.iter().zip(&self.max).map(|(lo, hi)| hi - lo).product()
    }

    fn bounding(dim: usize, coords: &[f64]) -> Self {
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for a in 0..dim {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        Self { min, max }
    }
}

/// A finite set of points in a 2D or 3D window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    dim: usize,
    coords: Vec<f64>,
    window: Window,
}

impl PointPattern {
    /// Builds a pattern, checking that every point is finite and inside `window`.
    ///
    /// An empty pattern is allowed (a Poisson draw may produce one); the
    /// geometric operations reject it.
    pub fn new(points: Vec<Vec<f64>>, window: Window) -> Result<Self> {
        let dim = window.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidPattern(format!("point {i} has {} coordinates, window has {dim}", p.len())));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, window)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, window: Window) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if window.dim() != dim {
            return Err(Error::InvalidPattern("window dimension differs from point dimension".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidPattern("coordinate count is not a multiple of dimension".into()));
        }
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPattern(format!("point {i} has a non-finite coordinate")));
            }
            if !window.contains(p) {
                return Err(Error::InvalidPattern(format!("point {i} lies outside the window")));
            }
        }
        Ok(Self { dim, coords, window })
    }

    /// Pattern whose window is the bounding box of its points.
    pub fn with_bounding_window(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidPattern("points have differing dimensions".into()));
        }
        let coords: Vec<f64> = points.into_iter().flatten().collect();
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPattern("non-finite coordinate".into()));
        }
        let window = Window::bounding(dim, &coords);
        Self::from_flat(dim, coords, window)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Multiplies every coordinate (and the window) by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        let window = Window {
            min: self.window.min.iter().map(|x| x * factor).collect(),
            max: self.window.max.iter().map(|x| x * factor).collect(),
        };
        Self::from_flat(self.dim, self.coords.iter().map(|x| x * factor).collect(), window)
    }
}

/// A simplex as a strictly increasing list of at most four vertex indices.
///
/// The derived ordering compares dimension first and then the vertex
/// tuple lexicographically, which is the tie-break used by the filtration.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    len: u8,
    verts: [u32; 4],
}

impl Simplex {
    /// Sorts the vertices; rejects repeated vertices and more than four.
    pub fn new(vertices: &[u32]) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 4 {
            return Err(Error::InvalidFiltration(format!("simplex with {} vertices", vertices.len())));
        }
        let mut verts = [0u32; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        verts[..vertices.len()].sort_unstable();
        if verts[..vertices.len()].windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFiltration("simplex with repeated vertex".into()));
        }
        Ok(Self { len: vertices.len() as u8, verts })
    }

    pub fn vertex(v: u32) -> Self {
        Self { len: 1, verts: [v, 0, 0, 0] }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Codimension-one faces, in the order "drop vertex 0, drop vertex 1, ...".
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.len as usize;
        let count = if n > 1 { n } else { 0 };
        (0..count).map(move |skip| {
            let mut verts = [0u32; 4];
            let mut k = 0;
            for (i, v) in self.vertices().iter().enumerate() {
                if i != skip {
                    verts[k] = *v;
                    k += 1;
                }
            }
            Simplex { len: (n - 1) as u8, verts }
        })
    }

    /// Every nonempty face, including the simplex itself.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.len as usize;
        (1u32..(1 << n))
            .map(|mask| {
                let mut verts = [0u32; 4];
                let mut k = 0;
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        verts[k] = self.verts[i];
                        k += 1;
                    }
                }
                Simplex { len: k as u8, verts }
            })
            .collect()
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices())
    }
}

/// Simplices with filtration radii, kept in filtration order:
/// by value, then dimension, then vertex tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    ambient_dim: usize,
    simplices: Vec<(Simplex, f64)>,
}

/// Total order used for filtrations.
pub(crate) fn filtration_order(a: &(Simplex, f64), b: &(Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}

impl FilteredComplex {
    /// Validates and sorts. Every face must be present, values must be
    /// finite, nonnegative and monotone along face relations.
    pub fn new(ambient_dim: usize, mut simplices: Vec<(Simplex, f64)>) -> Result<Self> {
        simplices.sort_by(filtration_order);
        let complex = Self { ambient_dim, simplices };
        complex.validate()?;
        Ok(complex)
    }

    pub(crate) fn from_sorted_unchecked(ambient_dim: usize, simplices: Vec<(Simplex, f64)>) -> Self {
        Self { ambient_dim, simplices }
    }

    pub fn validate(&self) -> Result<()> {
        let mut value_of = std::collections::HashMap::with_capacity(self.simplices.len());
        for (s, v) in &self.simplices {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidFiltration(format!("simplex {s:?} has value {v}")));
            }
            if value_of.insert(*s, *v).is_some() {
                return Err(Error::InvalidFiltration(format!("simplex {s:?} listed twice")));
            }
        }
        for (s, v) in &self.simplices {
            for f in s.facets() {
                match value_of.get(&f) {
                    None => return Err(Error::InvalidFiltration(format!("face {f:?} of {s:?} missing"))),
                    Some(fv) if fv > v => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {f:?} has value {fv} above coface {s:?} value {v}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn simplices(&self) -> &[(Simplex, f64)] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.simplices.iter().map(|(s, _)| s.dim()).max().unwrap_or(0)
    }

    /// Filtration value of `simplex`, if present.
    pub fn value(&self, simplex: &Simplex) -> Option<f64> {
        self.simplices.iter().find(|(s, _)| s == simplex).map(|(_, v)| *v)
    }
}

/// Circumcenter of the smallest sphere through `points` (all of which lie
/// on it), i.e. the circumcenter within their affine hull, and its squared
/// radius. Returns `None` when the points are affinely dependent.
pub fn circumsphere(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let p0 = points[0];
    let k = points.len() - 1;
    if k == 0 {
        return Some((p0.to_vec(), 0.0));
    }
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Gram system 2 <d_j, d_l> lambda_l = |d_j|^2, solved by Gaussian elimination.
    let mut a = vec![vec![0.0; k + 1]; k];
    for j in 0..k {
        for l in 0..k {
            a[j][l] = 2.0 * dot(&diffs[j], &diffs[l]);
        }
        a[j][k] = dot(&diffs[j], &diffs[j]);
    }
    let scale = a.iter().map(|r| r[..k].iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(0.0, f64::max);
    for col in 0..k {
        let pivot = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..k {
            if row != col {
                let factor = a[row][col] / a[col][col];
                if factor != 0.0 {
                    for c in col..=k {
                        a[row][c] -= factor * a[col][c];
                    }
                }
            }
        }
    }
    let mut center = p0.to_vec();
    for j in 0..k {
        let lambda = a[j][k] / a[j][j];
        for (c, d) in center.iter_mut().zip(&diffs[j]) {
            *c += lambda * d;
        }
    }
    let r2 =
        points.iter().map(|p| p.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).fold(0.0, f64::max);
    Some((center, r2))
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_sorts_and_rejects_repeats() {
        let s = Simplex::new(&[3, 1, 2]).unwrap();
        assert_eq!(s.vertices(), &[1, 2, 3]);
        assert!(Simplex::new(&[1, 1]).is_err());
        assert!(Simplex::new(&[]).is_err());
        let facets: Vec<_> = s.facets().collect();
        assert_eq!(facets.len(), 3);
        assert_eq!(facets[0].vertices(), &[2, 3]);
        assert_eq!(s.faces().len(), 7);
        assert_eq!(Simplex::vertex(4).facets().count(), 0);
    }

    #[test]
    fn simplex_order_is_dimension_then_lexicographic() {
        let a = Simplex::new(&[5]).unwrap();
        let b = Simplex::new(&[0, 1]).unwrap();
        let c = Simplex::new(&[0, 2]).unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn pattern_rejects_points_outside_window() {
        let err = PointPattern::new(vec![vec![0.5, 1.5]], Window::unit(2)).unwrap_err();
        assert!(matches!(err, Error::InvalidPattern(_)));
        assert!(PointPattern::new(vec![vec![f64::NAN, 0.5]], Window::unit(2)).is_err());
        assert!(PointPattern::new(vec![vec![0.5, 0.5, 0.5, 0.5]], Window::unit(2)).is_err());
    }

    #[test]
    fn bounding_window_covers_points() {
        let p = PointPattern::with_bounding_window(vec![vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(p.window().min, vec![1.0, -2.0]);
        assert_eq!(p.window().max, vec![3.0, 4.0]);
    }

    #[test]
    fn circumsphere_of_right_triangle_is_centered_on_hypotenuse() {
        let (c, r2) = circumsphere(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
        assert!((r2 - 2.0).abs() < 1e-14);
        let (_, r2) = circumsphere(&[&[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0]]).unwrap();
        assert!((r2 - 1.0).abs() < 1e-15);
        assert!(circumsphere(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]).is_none());
    }

    #[test]
    fn filtered_complex_rejects_missing_face_and_nonmonotone_values() {
        let v0 = Simplex::vertex(0);
        let v1 = Simplex::vertex(1);
        let e = Simplex::new(&[0, 1]).unwrap();
        assert!(FilteredComplex::new(2, vec![(v0, 0.0), (e, 1.0)]).is_err());
        assert!(FilteredComplex::new(2, vec![(v0, 0.0), (v1, 2.0), (e, 1.0)]).is_err());
        let ok = FilteredComplex::new(2, vec![(e, 1.0), (v1, 0.0), (v0, 0.0)]).unwrap();
        assert_eq!(ok.simplices()[0].0, v0);
        assert_eq!(ok.value(&e), Some(1.0));
    }
}
