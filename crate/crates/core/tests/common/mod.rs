//! Independent oracles shared by the integration tests. None of them call
//! the reduction or discretization code they are used to check.

#![allow(dead_code)]

use rankfield::{DiagramPoint, FilteredComplex, Grid, PersistenceDiagram, Simplex};

/// Rank over Z/2 of the matrix whose columns are the given bit vectors.
pub fn z2_rank(mut columns: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = columns.first().map_or(0, Vec::len);
    for bit in 0..words * 64 {
        let (w, b) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..columns.len()).find(|&c| columns[c][w] & b != 0) else {
            continue;
        };
        columns.swap(rank, p);
        let pivot = columns[rank].clone();
        for c in (rank + 1)..columns.len() {
            if columns[c][w] & b != 0 {
                for (x, y) in columns[c].iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dense linear-algebra rank of `H_k(K_a) -> H_k(K_b)` for `a <= b`:
/// `dim Z_k(K_a) - dim(B_k(K_b) ∩ C_k(K_a))`, where the intersection has
/// dimension `rank ∂_{k+1}(K_b) - rank(P ∂_{k+1}(K_b))` with `P`
/// projecting away the `k`-simplices of `K_a`.
pub fn persistent_betti(complex: &FilteredComplex, k: usize, a: f64, b: f64) -> usize {
    let simplices = complex.simplices();
    let k_simplices: Vec<(Simplex, f64)> = simplices.iter().copied().filter(|(s, _)| s.dim() == k).collect();
    let row_of = |s: &Simplex| k_simplices.iter().position(|(t, _)| t == s).unwrap();
    let words = k_simplices.len().div_ceil(64).max(1);
    let boundary_columns = |dim: usize, limit: f64, keep_row: &dyn Fn(usize) -> bool| -> Vec<Vec<u64>> {
        simplices
            .iter()
            .filter(|(s, v)| s.dim() == dim && *v <= limit)
            .map(|(s, _)| {
                let mut col = vec![0u64; words];
                for f in s.facets() {
                    let r = row_of(&f);
                    if keep_row(r) {
                        col[r / 64] ^= 1 << (r % 64);
                    }
                }
                col
            })
            .collect()
    };
    let n_k_a = k_simplices.iter().filter(|(_, v)| *v <= a).count();
    // Columns of ∂_k live in C_{k-1}; compute them with their own row space.
    let rank_dk = if k == 0 {
        0
    } else {
        let lower: Vec<Simplex> = simplices.iter().filter(|(s, _)| s.dim() == k - 1).map(|(s, _)| *s).collect();
        let lw = lower.len().div_ceil(64).max(1);
        let cols = k_simplices
            .iter()
            .filter(|(_, v)| *v <= a)
            .map(|(s, _)| {
                let mut col = vec![0u64; lw];
                for f in s.facets() {
                    let r = lower.iter().position(|t| *t == f).unwrap();
                    col[r / 64] ^= 1 << (r % 64);
                }
                col
            })
            .collect();
        z2_rank(cols)
    };
    let rank_up = z2_rank(boundary_columns(k + 1, b, &|_| true));
    let rank_up_outside = z2_rank(boundary_columns(k + 1, b, &|r| k_simplices[r].1 > a));
    n_k_a - rank_dk - (rank_up - rank_up_outside)
}

/// Betti number of `K_a`.
pub fn betti(complex: &FilteredComplex, k: usize, a: f64) -> usize {
    persistent_betti(complex, k, a, a)
}

/// Points of `diagram` in dimension `k` with `birth <= a` and `death > b`.
pub fn diagram_count(diagram: &PersistenceDiagram, k: usize, a: f64, b: f64) -> usize {
    diagram.points().iter().filter(|p| p.dim == k && p.birth <= a && p.death > b).count()
}

/// Rank-function values by a direct double loop over nodes and points.
pub fn naive_rank_values(diagram: &PersistenceDiagram, k: usize, grid: &Grid) -> Vec<f64> {
    let mut values = Vec::new();
    for i in 0..grid.m {
        for j in i..grid.m {
            let (x, y) = (grid.coord(i), grid.coord(j));
            let mut count = 0.0;
            for p in diagram.points() {
                if p.dim == k && p.birth <= x && p.death > y {
                    count += 1.0;
                }
            }
            values.push(count);
        }
    }
    values
}

/// Multiset equality of the points in dimensions `< max_dim` up to `tol`.
pub fn diagrams_match(a: &PersistenceDiagram, b: &PersistenceDiagram, max_dim: usize, tol: f64) -> bool {
    let pick = |d: &PersistenceDiagram| -> Vec<DiagramPoint> {
        d.points().iter().copied().filter(|p| p.dim < max_dim).collect()
    };
    let (pa, pb) = (pick(a), pick(b));
    let close = |x: f64, y: f64| (x.is_infinite() && y.is_infinite() && x == y) || (x - y).abs() <= tol;
    let mut used = vec![false; pb.len()];
    pa.len() == pb.len()
        && pa.iter().all(|p| {
            let hit = pb
                .iter()
                .enumerate()
                .position(|(i, q)| !used[i] && q.dim == p.dim && close(p.birth, q.birth) && close(p.death, q.death));
            hit.map(|i| used[i] = true).is_some()
        })
}

/// All distinct filtration values, ascending.
pub fn critical_values(complex: &FilteredComplex) -> Vec<f64> {
    let mut v: Vec<f64> = complex.simplices().iter().map(|(_, x)| *x).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
