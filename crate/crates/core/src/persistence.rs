//! Persistent homology over Z/2 by boundary-matrix reduction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FilteredComplex;

/// Pairs whose lifetime is below this fraction of their death value are
/// treated as zero-persistence and dropped. Degenerate configurations
/// (cospherical points) give equal values up to rounding.
pub const ZERO_PERSISTENCE_RTOL: f64 = 1e-12;

/// One homology class: born at `birth`, dies at `death` (infinite for
/// essential classes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Multiset of diagram points across all homology dimensions, sorted by
/// `(dim, birth, death)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    /// Builds a diagram, enforcing `0 <= birth < death` (death may be `inf`).
    pub fn new(mut points: Vec<DiagramPoint>) -> Result<Self> {
        for p in &points {
            if !p.birth.is_finite() || p.birth < 0.0 || p.death.is_nan() || p.death == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!("invalid diagram point {p:?}")));
            }
            if p.death <= p.birth {
                return Err(Error::InvalidArgument(format!("diagram point {p:?} has death <= birth")));
            }
        }
        sort_points(&mut points);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Points of homology dimension `dim`.
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn essential_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for p in self.points.iter().filter(|p| p.is_essential()) {
            *counts.entry(p.dim).or_insert(0) += 1;
        }
        counts
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    /// Multiset union.
    pub fn merged(&self, other: &PersistenceDiagram) -> PersistenceDiagram {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        sort_points(&mut points);
        PersistenceDiagram { points }
    }
}

fn sort_points(points: &mut [DiagramPoint]) {
    points.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
}

/// Column of a boundary matrix: sorted row indices with nonzero entries.
type Column = Vec<u32>;

/// Symmetric difference of two sorted columns.
fn add_columns(target: &Column, other: &Column) -> Column {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        match target[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&other[j..]);
    out
}

/// Result of reducing the boundary matrix: `pairs` holds (creator, destroyer)
/// column indices and `essential` the unpaired creators.
pub(crate) struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub essential: Vec<usize>,
}

pub(crate) fn reduce(complex: &FilteredComplex) -> Pairing {
    let simplices = complex.simplices();
    let n = simplices.len();
    let index: HashMap<_, _> = simplices.iter().enumerate().map(|(i, (s, _))| (*s, i as u32)).collect();
    let mut columns: Vec<Column> = simplices
        .iter()
        .map(|(s, _)| {
            let mut col: Column = s.facets().map(|f| index[&f]).collect();
            col.sort_unstable();
            col
        })
        .collect();

    let max_dim = complex.max_dim();
    let mut pivot_col: Vec<u32> = vec![u32::MAX; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    // Highest dimension first so that pivots clear the columns they kill.
    for dim in (1..=max_dim).rev() {
        for j in 0..n {
            if simplices[j].0.dim() != dim {
                continue;
            }
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_col[low as usize];
                if owner == u32::MAX {
                    break;
                }
                col = add_columns(&col, &columns[owner as usize]);
            }
            if let Some(&low) = col.last() {
                pivot_col[low as usize] = j as u32;
                cleared[low as usize] = true;
                pairs.push((low as usize, j));
            }
            columns[j] = col;
        }
    }
    let essential = (0..n).filter(|&i| columns[i].is_empty() && pivot_col[i] == u32::MAX && !cleared[i]).collect();
    pairs.sort_unstable();
    Pairing { pairs, essential }
}

/// Persistence diagram of a filtered complex.
///
/// Simplices are processed in filtration order (value, dimension, vertex
/// tuple). Each reduced column pairs the simplex owning its lowest entry
/// with the column's simplex; unpaired creators give essential classes.
/// Zero-persistence pairs are discarded.
pub fn compute_persistence(complex: &FilteredComplex) -> PersistenceDiagram {
    let simplices = complex.simplices();
    let Pairing { pairs, essential } = reduce(complex);
    let mut points = Vec::with_capacity(pairs.len() + essential.len());
    for (birth_idx, death_idx) in pairs {
        let (s, birth) = simplices[birth_idx];
        let death = simplices[death_idx].1;
        if death - birth > ZERO_PERSISTENCE_RTOL * death.abs() {
            points.push(DiagramPoint { dim: s.dim(), birth, death });
        }
    }
    for i in essential {
        let (s, birth) = simplices[i];
        points.push(DiagramPoint { dim: s.dim(), birth, death: f64::INFINITY });
    }
    sort_points(&mut points);
    PersistenceDiagram { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{alpha_filtration, PointPattern, Simplex, Window};
    use crate::pointproc::gen_binomial;

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v).unwrap()
    }

    #[test]
    fn two_points_merge_at_edge_value() {
        let c = FilteredComplex::new(2, vec![(s(&[0]), 0.0), (s(&[1]), 0.0), (s(&[0, 1]), 1.0)]).unwrap();
        let d = compute_persistence(&c);
        assert_eq!(
            d.points(),
            &[
                DiagramPoint { dim: 0, birth: 0.0, death: 1.0 },
                DiagramPoint { dim: 0, birth: 0.0, death: f64::INFINITY },
            ]
        );
        assert_eq!(d.essential_counts().get(&0), Some(&1));
    }

    #[test]
    fn hollow_triangle_has_essential_loop() {
        let c = FilteredComplex::new(
            2,
            vec![
                (s(&[0]), 0.0),
                (s(&[1]), 0.0),
                (s(&[2]), 0.0),
                (s(&[0, 1]), 1.0),
                (s(&[1, 2]), 1.0),
                (s(&[0, 2]), 2.0),
            ],
        )
        .unwrap();
        let d = compute_persistence(&c);
        let h1: Vec<_> = d.in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!(h1[0].birth, 2.0);
        assert!(h1[0].is_essential());
    }

    #[test]
    fn equilateral_triangle_loop() {
        let p =
            PointPattern::with_bounding_window(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3f64.sqrt()]]).unwrap();
        let d = compute_persistence(&alpha_filtration(&p).unwrap());
        let h1: Vec<_> = d.in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-12);
        assert!((h1[0].death - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(d.in_dim(0).count(), 3);
    }

    #[test]
    fn counts_reconcile_with_complex() {
        for seed in 0..5 {
            let p = gen_binomial(60, &Window::unit(2), seed).unwrap();
            let c = alpha_filtration(&p).unwrap();
            let pairing = reduce(&c);
            assert_eq!(c.len(), 2 * pairing.pairs.len() + pairing.essential.len());
            let d = compute_persistence(&c);
            assert_eq!(d.essential_counts(), BTreeMap::from([(0, 1)]));
            assert_eq!(pairing.pairs.iter().filter(|(b, _)| c.simplices()[*b].0.dim() == 0).count() + 1, 60);
            assert!(d.points().iter().all(|p| p.dim < 2 && p.birth < p.death));
        }
    }

    #[test]
    fn diagram_new_validates_points() {
        assert!(PersistenceDiagram::new(vec![DiagramPoint { dim: 0, birth: 1.0, death: 1.0 }]).is_err());
        assert!(PersistenceDiagram::new(vec![DiagramPoint { dim: 0, birth: -1.0, death: 1.0 }]).is_err());
        assert!(PersistenceDiagram::new(vec![DiagramPoint { dim: 0, birth: f64::NAN, death: 1.0 }]).is_err());
        let d = PersistenceDiagram::new(vec![
            DiagramPoint { dim: 1, birth: 0.1, death: 0.2 },
            DiagramPoint { dim: 0, birth: 0.0, death: f64::INFINITY },
        ])
        .unwrap();
        assert_eq!(d.points()[0].dim, 0);
        assert_eq!(d.max_dim(), Some(1));
    }
}
