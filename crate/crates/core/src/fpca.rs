//! Functional principal component analysis of rank functions.
//!
//! The functions are centered at their pointwise mean and the `n x n`
//! matrix of weighted inner products `D_il = ⟨ṽ_i, ṽ_l⟩` is diagonalized.
//! For an eigenpair `(λ, a)` of `D` the component is the unit-norm
//! function along `Σ_i a_i ṽ_i`, and `λ` is the sum of its squared scores.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;
use crate::rankspace::{mean, Grid, GridFunction, Quadrature, RankFunction, WeightFunction};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// A fitted functional PCA.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub grid: Grid,
    pub dim: usize,
    pub phi: WeightFunction,
    pub mean: RankFunction,
    /// Unit-norm principal component functions `ζ_j`.
    pub components: Vec<GridFunction>,
    /// Retained eigenvalues `λ_j`, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Sum of all (clamped) eigenvalues of the Gram matrix.
    pub total_variance: f64,
    /// `scores[i][j] = ⟨ζ_j, f_i - mean⟩`.
    pub scores: Vec<Vec<f64>>,
    /// `λ_j / total_variance` for each retained component.
    pub explained_variance_ratio: Vec<f64>,
    /// Gram eigenvector `a` behind each component (sign matched to `ζ_j`).
    pub coefficients: Vec<Vec<f64>>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Fraction of variance explained by the first `k` components.
    pub fn cumulative_explained(&self, k: usize) -> f64 {
        self.explained_variance_ratio.iter().take(k).sum()
    }

    /// Scores `⟨ζ_j, f - mean⟩` of a new function.
    pub fn project(&self, f: &RankFunction) -> Result<Vec<f64>> {
        self.project_centered(&GridFunction::centered(f, &self.mean)?)
    }

    /// Scores `⟨ζ_j, u⟩` of an already centered function.
    pub fn project_centered(&self, u: &GridFunction) -> Result<Vec<f64>> {
        if u.grid != self.grid || u.values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        let q = Quadrature::new(self.grid, self.phi);
        Ok(self.components.iter().map(|z| q.dot(&z.values, &u.values)).collect())
    }
}

fn centered_values(functions: &[RankFunction]) -> Result<(RankFunction, Vec<Vec<f64>>)> {
    let avg = mean(functions)?;
    let centered =
        functions.iter().map(|f| GridFunction::centered(f, &avg).map(|g| g.values)).collect::<Result<Vec<_>>>()?;
    Ok((avg, centered))
}

fn gram(q: &Quadrature, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let upper: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|i| (i..n).map(|l| q.dot(&vectors[i], &vectors[l])).collect()).collect();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for l in i..n {
            d[i][l] = upper[i][l - i];
            d[l][i] = upper[i][l - i];
        }
    }
    d
}

/// Weighted Gram matrix of the mean-centered functions.
pub fn gram_matrix(functions: &[RankFunction], phi: &WeightFunction) -> Result<Vec<Vec<f64>>> {
    let (avg, centered) = centered_values(functions)?;
    Ok(gram(&Quadrature::new(*avg.grid(), *phi), &centered))
}

/// Scores of every function on the component with Gram coefficients `a`,
/// computed from the Gram matrix alone: `(D a)_i / sqrt(aᵀ D a)`.
pub fn scores_from_gram(gram: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    let da: Vec<f64> = gram.iter().map(|row| row.iter().zip(a).map(|(d, x)| d * x).sum()).collect();
    let norm = a.iter().zip(&da).map(|(x, y)| x * y).sum::<f64>().sqrt();
    da.into_iter().map(|v| v / norm).collect()
}

/// Fits a PCA with up to `r` components (`r <= n - 1`). Components with
/// numerically zero variance are omitted, so fewer than `r` may be kept.
pub fn fit(functions: &[RankFunction], phi: &WeightFunction, r: usize) -> Result<PcaModel> {
    let n = functions.len();
    if n < 2 {
        return Err(Error::TooFewFunctions { needed: 2, got: n });
    }
    if r > n - 1 {
        return Err(Error::InvalidArgument(format!("requested {r} components from {n} functions (at most {})", n - 1)));
    }
    let (avg, centered) = centered_values(functions)?;
    let grid = *avg.grid();
    let q = Quadrature::new(grid, *phi);
    let d = gram(&q, &centered);
    let eig = jacobi_eigen(&d);

    let total_variance: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
    // Centering leaves rounding residue of order eps^2 times the raw energy.
    let energy: f64 = functions.iter().map(|f| q.dot(f.values(), f.values())).sum();
    let lead = eig.values.first().copied().unwrap_or(0.0);
    let significant = |l: f64| lead > 1e-20 * energy && l > RANK_TOL * lead;

    let mut model = PcaModel {
        grid,
        dim: avg.dim(),
        phi: *phi,
        mean: avg,
        components: Vec::new(),
        eigenvalues: Vec::new(),
        total_variance,
        scores: vec![Vec::new(); n],
        explained_variance_ratio: Vec::new(),
        coefficients: Vec::new(),
    };
    for (lambda, a) in eig.values.iter().zip(&eig.vectors).take(r) {
        if !significant(*lambda) {
            break;
        }
        let mut u = vec![0.0; grid.len()];
        for (ai, v) in a.iter().zip(&centered) {
            for (uk, vk) in u.iter_mut().zip(v) {
                *uk += ai * vk;
            }
        }
        let norm = q.dot(&u, &u).sqrt();
        let peak = u.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if peak < 0.0 { -1.0 } else { 1.0 };
        let zeta: Vec<f64> = u.iter().map(|x| sign * x / norm).collect();
        for (row, v) in model.scores.iter_mut().zip(&centered) {
            row.push(q.dot(&zeta, v));
        }
        model.coefficients.push(a.iter().map(|x| sign * x).collect());
        model.components.push(GridFunction { grid, values: zeta });
        model.eigenvalues.push(*lambda);
        model.explained_variance_ratio.push(lambda / total_variance);
    }
    Ok(model)
}
