//! Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

/// Eigenpairs of a symmetric matrix, sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 100;

/// Diagonalizes `a` (row-major, `n x n`, assumed symmetric) by cyclic
/// Jacobi rotations, sweeping pairs `(p, q)` with `p < q` in row order
/// until the off-diagonal mass is negligible.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> SymmetricEigen {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let frob: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).map(|(p, q)| m[p][q] * m[p][q]).sum();
        if off == 0.0 || off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                // Entries negligible against both diagonal terms are zeroed outright.
                let g = 100.0 * apq.abs();
                if m[p][p].abs() + g == m[p][p].abs() && m[q][q].abs() + g == m[q][q].abs() {
                    m[p][q] = 0.0;
                    m[q][p] = 0.0;
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y][y].total_cmp(&m[x][x]).then(x.cmp(&y)));
    SymmetricEigen {
        values: order.iter().map(|&k| m[k][k]).collect(),
        vectors: order.iter().map(|&k| v.iter().map(|row| row[k]).collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[Vec<f64>], lambda: f64, x: &[f64]) -> f64 {
        a.iter()
            .zip(x)
            .map(|(row, xi)| row.iter().zip(x).map(|(r, xj)| r * xj).sum::<f64>() - lambda * xi)
            .map(|r| r * r)
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn two_by_two() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = jacobi_eigen(&a);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        for (l, x) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&a, *l, x) < 1e-14);
        }
    }

    #[test]
    fn matches_nalgebra_on_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let e = jacobi_eigen(&a);
        let reference = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]).symmetric_eigen();
        let mut expected: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        for (got, want) in e.values.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12);
        }
        for (l, x) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&a, *l, x) < 1e-12);
            let norm: f64 = x.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_and_empty_matrices() {
        let e = jacobi_eigen(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
        assert_eq!(e.values, vec![0.0; 3]);
        assert!(jacobi_eigen(&[]).values.is_empty());
    }
}
