//! Maps from the unit cube sampled on a regular grid, with componentwise
//! gradients, metric-derivative seminorms, landmark embeddings, and the
//! rank stratification of the derivative field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::seminorm::Seminorm;
use crate::target::{EmbedNorm, MetricTarget};

/// Number of random triples used to validate oracle targets at load time.
const ORACLE_VALIDATION_TRIPLES: usize = 1000;

/// A map `f: [0,1]^d -> X` stored by its values on a grid.
#[derive(Debug, Clone)]
pub struct SampledMap {
    domain: GridDomain,
    target: MetricTarget,
    /// Flattened values, `value_dim` coordinates per grid point in row-major
    /// grid order.
    values: Vec<f64>,
    lipschitz: f64,
}

impl SampledMap {
    /// Samples `f` on a `points_per_axis^dim` grid and estimates the
    /// Lipschitz constant as the maximum difference quotient over
    /// axis-adjacent grid pairs.
    pub fn from_function(
        dim: usize,
        points_per_axis: usize,
        target: MetricTarget,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let domain = GridDomain::new(dim, points_per_axis)?;
        let m = target.value_dim();
        let mut values = Vec::with_capacity(domain.num_points() * m);
        for i in 0..domain.num_points() {
            let v = f(&domain.point(i));
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("map value at grid index {i}")));
            }
            values.extend_from_slice(&v);
        }
        Self::from_values(domain, target, values)
    }

    /// Wraps pre-computed grid values (row-major order, `value_dim` per point).
    pub fn from_values(domain: GridDomain, target: MetricTarget, values: Vec<f64>) -> Result<Self> {
        let m = target.value_dim();
        if values.len() != domain.num_points() * m {
            return Err(Error::DimensionMismatch {
                expected: domain.num_points() * m,
                got: values.len(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("grid values".into()));
        }
        let mut map = Self {
            domain,
            target,
            values,
            lipschitz: 0.0,
        };
        if let MetricTarget::Oracle { .. } = map.target {
            let sample: Vec<Vec<f64>> = (0..map.domain.num_points().min(256))
                .map(|i| map.value(i).to_vec())
                .collect();
            map.target
                .validate_on_samples(&sample, ORACLE_VALIDATION_TRIPLES, 0x6f7261636c65)?;
        }
        map.lipschitz = map.estimate_lipschitz();
        Ok(map)
    }

    fn estimate_lipschitz(&self) -> f64 {
        let h = self.domain.spacing();
        let mut l: f64 = 0.0;
        for (u, v) in self.domain.adjacent_pairs() {
            l = l.max(self.target.distance(self.value(u), self.value(v)) / h);
        }
        l
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn target(&self) -> &MetricTarget {
        &self.target
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value_dim(&self) -> usize {
        self.target.value_dim()
    }

    /// Value vector at a linear grid index.
    pub fn value(&self, linear: usize) -> &[f64] {
        let m = self.value_dim();
        &self.values[linear * m..(linear + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distance in the target between the values at two grid indices.
    pub fn image_distance(&self, u: usize, v: usize) -> f64 {
        self.target.distance(self.value(u), self.value(v))
    }

    /// Central-difference derivative of every coordinate function at an
    /// interior grid point: an `M x d` matrix, `O(h^2)` accurate for `C^2`
    /// data.
    ///
    /// Boundary points are rejected; one-sided stencils would pollute the
    /// rank statistics downstream.
    pub fn componentwise_gradient(&self, linear: usize) -> Result<Vec<Vec<f64>>> {
        if !self.target.is_embedded() {
            return Err(Error::Unsupported(
                "componentwise gradient needs an embedded target".into(),
            ));
        }
        self.gradient_rows(linear)
    }

    fn gradient_rows(&self, linear: usize) -> Result<Vec<Vec<f64>>> {
        if !self.domain.is_interior(linear) {
            return Err(Error::InvalidInput(format!(
                "grid index {linear} is not interior"
            )));
        }
        let d = self.domain.dim();
        let m = self.value_dim();
        let two_h = 2.0 * self.domain.spacing();
        let mut rows = vec![vec![0.0; d]; m];
        for a in 0..d {
            let s = self.domain.axis_stride(a);
            let plus = self.value(linear + s);
            let minus = self.value(linear - s);
            for (i, row) in rows.iter_mut().enumerate() {
                row[a] = (plus[i] - minus[i]) / two_h;
            }
        }
        Ok(rows)
    }

    /// The metric-derivative seminorm at an interior point: rows are the
    /// finite-difference gradients of the coordinate functions, so
    /// `sigma(v) = max_i |grad f_i . v|`.
    ///
    /// For sup-normed embedded targets this is the finite truncation of the
    /// sup-over-gradients formula; Euclidean targets should normally be
    /// passed through [`kuratowski_embed`](Self::kuratowski_embed) first so
    /// the sup form approximates the Euclidean metric derivative from below
    /// with vanishing defect as landmarks densify.
    pub fn metric_derivative(&self, linear: usize) -> Result<Seminorm> {
        if !self.target.is_embedded() {
            return Err(Error::Unsupported(
                "metric derivative needs an embedded target; embed oracle or \
                 Heisenberg targets with kuratowski_embed first"
                    .into(),
            ));
        }
        Seminorm::new(self.gradient_rows(linear)?, self.domain.dim())
    }

    /// Directional speed estimate at an interior point along a grid axis,
    /// from the two adjacent half-chords. Works for every target kind.
    pub fn directional_speed(&self, linear: usize, axis: usize) -> Result<f64> {
        if !self.domain.is_interior(linear) {
            return Err(Error::InvalidInput(format!(
                "grid index {linear} is not interior"
            )));
        }
        let s = self.domain.axis_stride(axis);
        let h = self.domain.spacing();
        Ok(
            (self.image_distance(linear - s, linear) + self.image_distance(linear, linear + s))
                / (2.0 * h),
        )
    }

    /// Embeds the map through distance-to-landmark coordinates: coordinate
    /// `j` of the new map is `x -> d(f(x), f(p_j))`, and the new target is
    /// the sup norm on the `K` coordinates. Every coordinate is 1-Lipschitz,
    /// so the embedded distance lower-bounds the original one and converges
    /// to it on the sample as landmarks densify.
    pub fn kuratowski_embed(&self, landmarks: &[usize]) -> Result<(SampledMap, KuratowskiInfo)> {
        if landmarks.is_empty() {
            return Err(Error::InvalidInput("need at least one landmark".into()));
        }
        for &p in landmarks {
            if p >= self.domain.num_points() {
                return Err(Error::InvalidInput(format!(
                    "landmark index {p} out of range"
                )));
            }
        }
        let k = landmarks.len();
        let n_pts = self.domain.num_points();
        let mut values = Vec::with_capacity(n_pts * k);
        let mut covering_radius: f64 = 0.0;
        for i in 0..n_pts {
            let mut min_d = f64::INFINITY;
            for &p in landmarks {
                let d = self.image_distance(i, p);
                values.push(d);
                min_d = min_d.min(d);
            }
            covering_radius = covering_radius.max(min_d);
        }
        let embedded = SampledMap::from_values(
            self.domain.clone(),
            MetricTarget::Embedded {
                norm: EmbedNorm::Sup,
                dim: k,
            },
            values,
        )?;
        Ok((
            embedded,
            KuratowskiInfo {
                landmarks: landmarks.to_vec(),
                covering_radius,
            },
        ))
    }

    /// Farthest-point landmark selection in the image metric, seeded at the
    /// image of the grid origin. Deterministic.
    pub fn farthest_point_landmarks(&self, count: usize) -> Vec<usize> {
        let n = self.domain.num_points();
        let count = count.min(n).max(1);
        let mut landmarks = vec![0usize];
        let mut min_dist: Vec<f64> = (0..n).map(|i| self.image_distance(i, 0)).collect();
        while landmarks.len() < count {
            let (next, &d) = min_dist
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty grid");
            if d <= 0.0 {
                break; // image exhausted: all remaining points duplicate a landmark
            }
            landmarks.push(next);
            for (i, slot) in min_dist.iter_mut().enumerate() {
                let di = self.image_distance(i, next);
                if di < *slot {
                    *slot = di;
                }
            }
        }
        landmarks
    }

    /// Ensures a sup-embedded view of the map: sup targets pass through,
    /// anything else is embedded through `k` farthest-point landmarks.
    pub fn sup_view(&self, k: usize) -> Result<(SampledMap, Option<KuratowskiInfo>)> {
        match &self.target {
            MetricTarget::Embedded {
                norm: EmbedNorm::Sup,
                ..
            } => Ok((self.clone(), None)),
            _ => {
                let landmarks = self.farthest_point_landmarks(k);
                let (m, info) = self.kuratowski_embed(&landmarks)?;
                Ok((m, Some(info)))
            }
        }
    }

    /// Post-composes the stored values with `g` into a new target.
    pub fn post_compose(
        &self,
        target: MetricTarget,
        g: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<SampledMap> {
        let m = target.value_dim();
        let mut values = Vec::with_capacity(self.domain.num_points() * m);
        for i in 0..self.domain.num_points() {
            let v = g(self.value(i));
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: v.len(),
                });
            }
            values.extend_from_slice(&v);
        }
        SampledMap::from_values(self.domain.clone(), target, values)
    }
}

/// Landmark metadata from a Kuratowski embedding.
///
/// `covering_radius` is the maximum image distance from a sampled value to
/// its nearest landmark image; it bounds the (uncertified) truncation defect
/// of the finite sup form.
#[derive(Debug, Clone)]
pub struct KuratowskiInfo {
    pub landmarks: Vec<usize>,
    pub covering_radius: f64,
}

/// Per-point metric-derivative statistics over the interior of the grid.
///
/// Seminorms are not stored (they are cheap to recompute via
/// [`SampledMap::metric_derivative`]); ranks, Jacobians, and the rank strata
/// are.
#[derive(Debug, Clone)]
pub struct MetricDerivativeField {
    /// Threshold used for the numerical rank.
    pub tau: f64,
    /// Rank per grid point; `None` on the boundary.
    pub ranks: Vec<Option<usize>>,
    /// Jacobian per grid point; `None` on the boundary.
    pub jacobians: Vec<Option<f64>>,
    /// Interior indices grouped by rank: `strata[k]` is `E_k`.
    pub strata: Vec<Vec<usize>>,
    /// Fraction of interior points per rank.
    pub fractions: Vec<f64>,
}

impl MetricDerivativeField {
    /// Fraction of interior points with rank at most `k`.
    pub fn fraction_rank_at_most(&self, k: usize) -> f64 {
        self.fractions.iter().take(k + 1).sum()
    }
}

/// Default rank threshold separating `O(h^2)` finite-difference noise from
/// genuine singular values of order `L`.
pub fn default_rank_threshold(map: &SampledMap) -> f64 {
    10.0 * map.domain().spacing() * map.lipschitz()
}

/// Computes seminorm rank, Jacobian, and strata at every interior point.
///
/// The map must be sup-embedded (see [`SampledMap::sup_view`]). Jacobians use
/// the exact polytope volume for `d <= 3` (and are exactly 0 wherever
/// `rank < d`); higher dimensions fall back to seeded Monte Carlo.
pub fn rank_field(map: &SampledMap, tau: f64) -> Result<MetricDerivativeField> {
    if !map.target().is_embedded() {
        return Err(Error::Unsupported(
            "rank_field needs an embedded target; use sup_view first".into(),
        ));
    }
    let d = map.domain().dim();
    let n_pts = map.domain().num_points();
    let mut ranks = vec![None; n_pts];
    let mut jacobians = vec![None; n_pts];
    let mut strata = vec![Vec::new(); d + 1];
    let mut interior = 0usize;
    let mut mc_rng = ChaCha8Rng::seed_from_u64(0x4a61636f);
    for i in 0..n_pts {
        if !map.domain().is_interior(i) {
            continue;
        }
        interior += 1;
        let sn = map.metric_derivative(i)?;
        let rank = sn.rank_with_threshold(tau);
        let jac = if rank < d {
            0.0
        } else if d <= 3 {
            sn.jacobian_exact()?
        } else {
            sn.jacobian(20_000, mc_rng.random())?
        };
        ranks[i] = Some(rank);
        jacobians[i] = Some(jac);
        strata[rank].push(i);
    }
    let fractions = strata
        .iter()
        .map(|s| s.len() as f64 / interior.max(1) as f64)
        .collect();
    Ok(MetricDerivativeField {
        tau,
        ranks,
        jacobians,
        strata,
        fractions,
    })
}
