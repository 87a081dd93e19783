//! Polyhedral seminorms `sigma(v) = max_i |a_i . v|` with rank, kernel, and
//! Jacobian computations.
//!
//! This sup-of-functionals form is closed under everything the toolkit needs:
//! finite-difference derivative rows of coordinate functions produce exactly
//! such seminorms, and the Jacobian `J_n(sigma) = w_n / vol({sigma <= 1})`
//! is computable either exactly (half-space intersection, `n <= 3`) or by
//! seeded Monte Carlo sampling of a bounding box.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::halfspace::symmetric_polytope_volume;
use crate::vecmath::{dot, norm2, unit_ball_volume};

/// A seminorm `v -> max_i |rows[i] . v|` on `R^dim`.
///
/// The row list may be empty (the zero seminorm). Rows are plain linear
/// functionals; no normalization is assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Seminorm {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

/// A Monte Carlo estimate of the unit-ball volume with its sampling error.
#[derive(Debug, Clone, Copy)]
pub struct VolumeEstimate {
    /// Estimated volume of `{ sigma <= 1 }`.
    pub value: f64,
    /// One-sigma standard error of `value`.
    pub std_dev: f64,
    /// Volume of the sampling box.
    pub box_volume: f64,
    /// Fraction of samples that landed inside the ball.
    pub hit_fraction: f64,
}

impl Seminorm {
    pub fn new(rows: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "seminorm dimension must be >= 1".into(),
            ));
        }
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("seminorm row".into()));
            }
        }
        Ok(Self { rows, dim })
    }

    /// The zero seminorm on `R^dim`.
    pub fn zero(dim: usize) -> Self {
        Self {
            rows: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Appends a functional row, shrinking the unit ball.
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Evaluates `max_i |rows[i] . v|`; 0 for an empty row set.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| dot(r, v).abs())
            .fold(0.0, f64::max))
    }

    fn singular_values(&self) -> Vec<f64> {
        if self.rows.is_empty() {
            return Vec::new();
        }
        let m = DMatrix::from_fn(self.rows.len(), self.dim, |i, j| self.rows[i][j]);
        m.singular_values().iter().copied().collect()
    }

    /// Default numerical-rank threshold: `max(m, n) * eps * sigma_max`.
    pub fn default_rank_threshold(&self) -> f64 {
        let sv = self.singular_values();
        let sigma_max = sv.first().copied().unwrap_or(0.0);
        self.rows.len().max(self.dim) as f64 * f64::EPSILON * sigma_max
    }

    /// Numerical rank of the row matrix at the default threshold.
    pub fn rank(&self) -> usize {
        self.rank_with_threshold(self.default_rank_threshold())
    }

    /// Numerical rank with a caller-supplied singular-value threshold.
    pub fn rank_with_threshold(&self, tau: f64) -> usize {
        self.singular_values().iter().filter(|s| **s > tau).count()
    }

    /// Orthonormal basis of the numerical null space `{v : sigma(v) = 0}`.
    ///
    /// Length is `dim - rank`. Computed from the symmetric eigendecomposition
    /// of the Gram matrix `A^T A`, whose small-eigenvalue eigenvectors span
    /// the null space even when there are fewer rows than columns.
    pub fn kernel_basis(&self) -> Vec<Vec<f64>> {
        if self.rows.is_empty() {
            // whole space
            return (0..self.dim)
                .map(|j| {
                    let mut e = vec![0.0; self.dim];
                    e[j] = 1.0;
                    e
                })
                .collect();
        }
        let n = self.dim;
        let mut gram = DMatrix::zeros(n, n);
        for row in &self.rows {
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += row[i] * row[j];
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(gram);
        let tau = self.default_rank_threshold();
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        // numerically-zero eigenvalues of the Gram sit at eps * lambda_max,
        // above the squared singular-value threshold
        let lambda_tau = (tau * tau).max(self.rows.len().max(n) as f64 * f64::EPSILON * lambda_max);
        let mut basis = Vec::new();
        for (k, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda <= lambda_tau {
                basis.push(eig.eigenvectors.column(k).iter().copied().collect());
            }
        }
        basis
    }

    /// Jacobian `J_n(sigma) = w_n / vol({sigma <= 1})`, estimated by seeded
    /// Monte Carlo over the row-derived bounding box.
    ///
    /// Returns exactly 0 when `rank < dim` (the unit ball is unbounded); no
    /// sampling happens in that case. Deterministic for a fixed seed.
    pub fn jacobian(&self, samples: usize, seed: u64) -> Result<f64> {
        if samples == 0 {
            return Err(Error::InvalidInput("samples must be >= 1".into()));
        }
        if self.rank() < self.dim {
            return Ok(0.0);
        }
        let est = self.unit_ball_volume_mc(samples, seed)?;
        Ok(unit_ball_volume(self.dim) / est.value)
    }

    /// Jacobian via the exact half-space-intersection volume (`dim <= 3`).
    pub fn jacobian_exact(&self) -> Result<f64> {
        if self.rank() < self.dim {
            return Ok(0.0);
        }
        let vol = symmetric_polytope_volume(&self.rows, self.dim)?;
        Ok(unit_ball_volume(self.dim) / vol)
    }

    /// Monte Carlo volume of `{sigma <= 1}`; requires full rank.
    pub fn unit_ball_volume_mc(&self, samples: usize, seed: u64) -> Result<VolumeEstimate> {
        if samples == 0 {
            return Err(Error::InvalidInput("samples must be >= 1".into()));
        }
        if self.rank() < self.dim {
            return Err(Error::InvalidInput(
                "unit ball is unbounded for rank-deficient seminorms".into(),
            ));
        }
        let half_widths = self.bounding_box()?;
        let box_volume: f64 = half_widths.iter().map(|b| 2.0 * b).product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        let mut v = vec![0.0; self.dim];
        for _ in 0..samples {
            for (x, b) in v.iter_mut().zip(&half_widths) {
                *x = rng.random_range(-*b..=*b);
            }
            let val = self
                .rows
                .iter()
                .map(|r| dot(r, &v).abs())
                .fold(0.0, f64::max);
            if val <= 1.0 {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        Ok(VolumeEstimate {
            value: box_volume * p,
            std_dev: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
            box_volume,
            hit_fraction: p,
        })
    }

    /// Axis-aligned half-widths of a box containing `{sigma <= 1}`.
    ///
    /// Picks `dim` independent rows with the largest leverage scores; if `A`
    /// is that square matrix, the ball sits inside `A^{-1}([-1,1]^dim)`,
    /// whose bounding box has half-width `sum_k |A^{-1}[j,k]|` on axis `j`.
    fn bounding_box(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let m = self.rows.len();
        let mat = DMatrix::from_fn(m, n, |i, j| self.rows[i][j]);
        let svd = mat.clone().svd(true, false);
        let u = svd.u.as_ref().expect("requested u");
        let mut order: Vec<usize> = (0..m).collect();
        let leverage: Vec<f64> = (0..m)
            .map(|i| u.row(i).iter().map(|x| x * x).sum::<f64>())
            .collect();
        order.sort_by(|a, b| leverage[*b].total_cmp(&leverage[*a]).then(a.cmp(b)));

        // greedy selection keeping the chosen rows independent
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in order {
            let mut resid = self.rows[i].clone();
            for q in &ortho {
                let c = dot(q, &resid);
                for (r, qk) in resid.iter_mut().zip(q) {
                    *r -= c * qk;
                }
            }
            let rn = norm2(&resid);
            if rn > 1e-12 * norm2(&self.rows[i]).max(1.0) {
                resid.iter_mut().for_each(|x| *x /= rn);
                ortho.push(resid);
                chosen.push(i);
                if chosen.len() == n {
                    break;
                }
            }
        }
        if chosen.len() < n {
            return Err(Error::InvalidInput(
                "could not select n independent rows".into(),
            ));
        }
        let a = DMatrix::from_fn(n, n, |i, j| self.rows[chosen[i]][j]);
        let a_inv = a
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("selected rows are singular".into()))?;
        Ok((0..n)
            .map(|j| a_inv.row(j).iter().map(|x| x.abs()).sum())
            .collect())
    }
}
