//! Alpha filtration values on the Delaunay complex.
//!
//! A simplex is valued at the radius of its smallest circumsphere when that
//! sphere's open ball holds no other input point (Gabriel); otherwise it
//! enters together with its earliest coface. For Delaunay simplices it is
//! enough to test the apices of the cofaces.

use std::collections::HashMap;

use super::{circumsphere, delaunay, filtration_order, squared_distance, FilteredComplex, PointPattern, Simplex};
use crate::error::Result;

/// Relative slack for "strictly inside" in the Gabriel test; points within
/// this band of the sphere count as on it.
const GABRIEL_SLACK: f64 = 1e-10;

/// Alpha filtration (radius convention) of a 2D or 3D point pattern. It has
/// the same persistent homology as the Čech filtration of the points.
pub fn alpha_filtration(pattern: &PointPattern) -> Result<FilteredComplex> {
    let d = pattern.dim();
    let tops = delaunay(pattern)?;

    // levels[k] lists the k-simplices; cofaces[k][i] indexes into levels[k + 1].
    let mut levels: Vec<Vec<Simplex>> = vec![Vec::new(); d + 1];
    let mut cofaces: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];
    levels[d] = tops;
    for k in (1..=d).rev() {
        let mut index: HashMap<Simplex, usize> = HashMap::with_capacity(levels[k].len() * 2);
        let mut lower = Vec::new();
        let mut lower_cofaces: Vec<Vec<usize>> = Vec::new();
        for (si, s) in levels[k].iter().enumerate() {
            for f in s.facets() {
                let fi = *index.entry(f).or_insert_with(|| {
                    lower.push(f);
                    lower_cofaces.push(Vec::new());
                    lower.len() - 1
                });
                lower_cofaces[fi].push(si);
            }
        }
        levels[k - 1] = lower;
        cofaces[k - 1] = lower_cofaces;
    }

    let coords = |s: &Simplex| -> Vec<&[f64]> { s.vertices().iter().map(|&v| pattern.point(v as usize)).collect() };
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
    values[d] = levels[d]
        .iter()
        .map(|s| circumsphere(&coords(s)).expect("Delaunay cells are full-dimensional").1.sqrt())
        .collect();
    for k in (1..d).rev() {
        let (upper_levels, upper_values) = (&levels[k + 1], &values[k + 1]);
        let vals = levels[k]
            .iter()
            .zip(&cofaces[k])
            .map(|(s, cos)| {
                let (center, r2) = circumsphere(&coords(s)).expect("faces of Delaunay cells are nondegenerate");
                let attached = cos.iter().any(|&ci| {
                    let apex = upper_levels[ci]
                        .vertices()
                        .iter()
                        .find(|v| !s.vertices().contains(v))
                        .expect("coface has one extra vertex");
                    squared_distance(pattern.point(*apex as usize), &center) < r2 * (1.0 - GABRIEL_SLACK)
                });
                let earliest = cos.iter().map(|&ci| upper_values[ci]).fold(f64::INFINITY, f64::min);
                if attached {
                    earliest
                } else {
                    r2.sqrt().min(earliest)
                }
            })
            .collect();
        values[k] = vals;
    }
    values[0] = vec![0.0; levels[0].len()];

    let mut simplices: Vec<(Simplex, f64)> =
        levels.into_iter().zip(values).flat_map(|(l, v)| l.into_iter().zip(v)).collect();
    simplices.sort_by(filtration_order);
    let complex = FilteredComplex::from_sorted_unchecked(d, simplices);
    debug_assert!(complex.validate().is_ok());
    Ok(complex)
}
