//! Metric targets for sampled maps.
//!
//! A target knows how to measure distance between stored value vectors. Three
//! kinds are supported: embedded targets (value vectors in `R^M` under the
//! Euclidean or sup norm), oracle targets (a caller-supplied pairwise
//! distance), and Heisenberg targets, whose points are `(x, y, t)` triples in
//! `R^{2n+1}` and whose distance is the Euclidean distance of the `(x, y)`
//! projections. For horizontal data the projection distance is exactly the
//! infinitesimal Carnot-Caratheodory distance; purely vertical displacements
//! are invisible to it and are flagged separately by the horizontality
//! machinery in [`crate::heisenberg`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vecmath::{euclid_dist, sup_dist};

/// Norm used by embedded targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedNorm {
    Euclidean,
    Sup,
}

/// Pairwise distance callback for oracle targets.
pub type DistanceFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum MetricTarget {
    /// Values are vectors in `R^dim` under the named norm.
    Embedded { norm: EmbedNorm, dim: usize },
    /// Values are opaque feature vectors; distance comes from the callback.
    Oracle { dist: DistanceFn, dim: usize },
    /// Values are `(x_1..x_n, y_1..y_n, t)` with the projected metric.
    Heisenberg { n: usize },
}

impl fmt::Debug for MetricTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Embedded { norm, dim } => {
                write!(f, "Embedded {{ norm: {norm:?}, dim: {dim} }}")
            }
            Self::Oracle { dim, .. } => write!(f, "Oracle {{ dim: {dim} }}"),
            Self::Heisenberg { n } => write!(f, "Heisenberg {{ n: {n} }}"),
        }
    }
}

impl MetricTarget {
    pub fn euclidean(dim: usize) -> Self {
        Self::Embedded {
            norm: EmbedNorm::Euclidean,
            dim,
        }
    }

    pub fn sup(dim: usize) -> Self {
        Self::Embedded {
            norm: EmbedNorm::Sup,
            dim,
        }
    }

    /// Length of the stored value vectors.
    pub fn value_dim(&self) -> usize {
        match self {
            Self::Embedded { dim, .. } | Self::Oracle { dim, .. } => *dim,
            Self::Heisenberg { n } => 2 * n + 1,
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Self::Embedded {
                norm: EmbedNorm::Euclidean,
                ..
            } => euclid_dist(a, b),
            Self::Embedded {
                norm: EmbedNorm::Sup,
                ..
            } => sup_dist(a, b),
            Self::Oracle { dist, .. } => dist(a, b),
            Self::Heisenberg { n } => euclid_dist(&a[..2 * n], &b[..2 * n]),
        }
    }

    pub fn is_embedded(&self) -> bool {
        matches!(self, Self::Embedded { .. })
    }

    /// Spot-checks the metric axioms on random value triples.
    ///
    /// Embedded and Heisenberg targets satisfy them by construction; oracle
    /// callbacks are validated here at load time. A failure aborts the load
    /// since a silent non-metric corrupts everything downstream.
    pub fn validate_on_samples(
        &self,
        values: &[Vec<f64>],
        triples: usize,
        seed: u64,
    ) -> Result<()> {
        if values.len() < 2 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..triples {
            let i = rng.random_range(0..values.len());
            let j = rng.random_range(0..values.len());
            let k = rng.random_range(0..values.len());
            let dij = self.distance(&values[i], &values[j]);
            let dji = self.distance(&values[j], &values[i]);
            let dik = self.distance(&values[i], &values[k]);
            let dkj = self.distance(&values[k], &values[j]);
            if !dij.is_finite() || dij < 0.0 {
                return Err(Error::MetricViolation(format!(
                    "distance({i},{j}) = {dij} is not a finite nonnegative value"
                )));
            }
            let scale = dij.abs().max(dji.abs()).max(1e-12);
            if (dij - dji).abs() > 1e-9 * scale {
                return Err(Error::MetricViolation(format!(
                    "asymmetric distance at pair ({i},{j}): {dij} vs {dji}"
                )));
            }
            if i == j && dij != 0.0 {
                return Err(Error::MetricViolation(format!(
                    "nonzero self-distance at {i}: {dij}"
                )));
            }
            if dij > dik + dkj + 1e-9 * (dik + dkj).max(1e-12) {
                return Err(Error::MetricViolation(format!(
                    "triangle inequality fails on ({i},{j},{k}): {dij} > {dik} + {dkj}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_distances() {
        let e = MetricTarget::euclidean(2);
        assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        let s = MetricTarget::sup(2);
        assert_eq!(s.distance(&[0.0, 0.0], &[3.0, 4.0]), 4.0);
    }

    #[test]
    fn heisenberg_distance_ignores_t() {
        let t = MetricTarget::Heisenberg { n: 1 };
        assert_eq!(t.distance(&[0.0, 0.0, 5.0], &[3.0, 4.0, -2.0]), 5.0);
    }

    #[test]
    fn oracle_validation_catches_triangle_violation() {
        // d(u,v) = |u-v|^2 on the line violates the triangle inequality
        let t = MetricTarget::Oracle {
            dist: Arc::new(|a, b| (a[0] - b[0]) * (a[0] - b[0])),
            dim: 1,
        };
        let values: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        assert!(t.validate_on_samples(&values, 1000, 3).is_err());
    }

    #[test]
    fn oracle_validation_accepts_snowflake() {
        let t = MetricTarget::Oracle {
            dist: Arc::new(|a, b| (a[0] - b[0]).abs().sqrt()),
            dim: 1,
        };
        let values: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        assert!(t.validate_on_samples(&values, 1000, 3).is_ok());
    }
}
