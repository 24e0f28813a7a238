use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::TabularModel;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel matrix must be {n}×{n}, got {rows}×{cols}")]
    BadShape { n: usize, rows: usize, cols: usize },
    #[error("kernel matrix is not positive semidefinite (pivot {pivot} at index {index})")]
    NotPsd { pivot: f64, index: usize },
}

/// Kernel choice for squared-MMD computations on category spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Gaussian kernel on the integer embedding of categories:
    /// `k(i, j) = exp(−(i−j)² / (2σ²))`. Always positive semidefinite.
    Gaussian { sigma: f64 },
    /// Explicit kernel matrix; validated for positive semidefiniteness.
    Matrix { entries: Vec<Vec<f64>> },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian { sigma: 1.0 }
    }
}

impl KernelSpec {
    /// Materializes the kernel matrix for `n` categories. For joints the
    /// integer embedding becomes the 2-D grid point `(i, j)` with squared
    /// Euclidean distance in the exponent.
    fn matrix(&self, n: usize, grid: Option<(usize, usize)>) -> Result<Vec<Vec<f64>>, KernelError> {
        match self {
            KernelSpec::Gaussian { sigma } => {
                let coord = |k: usize| -> (f64, f64) {
                    match grid {
                        Some((_, nz)) => ((k / nz) as f64, (k % nz) as f64),
                        None => (k as f64, 0.0),
                    }
                };
                let mut m = vec![vec![0.0; n]; n];
                for a in 0..n {
                    for b in 0..n {
                        let (xa, ya) = coord(a);
                        let (xb, yb) = coord(b);
                        let d2 = (xa - xb).powi(2) + (ya - yb).powi(2);
                        m[a][b] = (-d2 / (2.0 * sigma * sigma)).exp();
                    }
                }
                Ok(m)
            }
            KernelSpec::Matrix { entries } => {
                if entries.len() != n || entries.iter().any(|r| r.len() != n) {
                    return Err(KernelError::BadShape {
                        n,
                        rows: entries.len(),
                        cols: entries.first().map_or(0, Vec::len),
                    });
                }
                check_psd(entries)?;
                Ok(entries.clone())
            }
        }
    }
}

/// Cholesky-style PSD check with a small tolerance for semi-definite
/// matrices (zero pivots are allowed, negative ones are not).
fn check_psd(k: &[Vec<f64>]) -> Result<(), KernelError> {
    let n = k.len();
    let mut a: Vec<Vec<f64>> = k.to_vec();
    let scale: f64 = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    for i in 0..n {
        let pivot = a[i][i];
        if pivot < -tol {
            return Err(KernelError::NotPsd { pivot, index: i });
        }
        if pivot <= tol {
            continue;
        }
        for r in i + 1..n {
            let f = a[r][i] / pivot;
            for c in i..n {
                a[r][c] -= f * a[i][c];
            }
        }
    }
    Ok(())
}

/// Exact squared MMD between two probability vectors under the kernel:
/// `(a − b)ᵀ K (a − b)`, computed on the full vectors, no sampling.
pub fn mmd_marginal(
    a: &[f64],
    b: &[f64],
    kernel: &KernelSpec,
    grid: Option<(usize, usize)>,
) -> Result<f64, KernelError> {
    let n = a.len();
    let k = kernel.matrix(n, grid)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += d[i] * k[i][j] * d[j];
        }
    }
    Ok(acc.max(0.0))
}

/// Squared MMD between the aggregate latent q(z) and the prior p(z).
pub fn mmd_z(m: &TabularModel, kernel: &KernelSpec) -> Result<f64, KernelError> {
    let q_z = m.distributions().q_z;
    mmd_marginal(&q_z, &m.p_z, kernel, None)
}
