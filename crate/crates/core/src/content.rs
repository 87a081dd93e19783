//! Hausdorff content of image point clouds, dyadic mapping content by
//! dynamic programming, and pointwise density estimates.
//!
//! All content values are certified upper bounds: the greedy ball cover is an
//! admissible cover, and the dyadic DP returns the exact infimum over dyadic
//! covers of bounded depth given the per-cube image contents it is fed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridSubset};
use crate::sampled_map::SampledMap;
use crate::target::MetricTarget;
use crate::vecmath::unit_ball_volume;

/// Number of geometric steps in a scale ladder tied to a reference length;
/// radii run from the reference down to reference/32.
const LADDER_STEPS: usize = 6;

/// A closed dyadic cube `prod [index_i * 2^-depth, (index_i + 1) * 2^-depth]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub depth: u32,
    pub index: Vec<u32>,
}

impl DyadicCube {
    pub fn root(dim: usize) -> Self {
        Self {
            depth: 0,
            index: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn side(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }

    pub fn diam(&self) -> f64 {
        (self.dim() as f64).sqrt() * self.side()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| i as f64 * s).collect()
    }

    /// The `2^dim` children partitioning this cube.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| DyadicCube {
                depth: self.depth + 1,
                index: (0..d)
                    .map(|a| 2 * self.index[a] + ((mask >> a) & 1) as u32)
                    .collect(),
            })
            .collect()
    }

    /// True when the closed cube contains the point `i*h` per axis.
    ///
    /// Uses integer arithmetic (`i * 2^depth` against `index * (N-1)`), so
    /// lattice points on cube faces belong to every cube that touches them.
    pub fn contains_grid_point(&self, multi: &[usize], points_per_axis: usize) -> bool {
        let n1 = (points_per_axis - 1) as u64;
        let scale = 1u64 << self.depth;
        multi.iter().zip(&self.index).all(|(&i, &idx)| {
            let lhs = i as u64 * scale;
            lhs >= idx as u64 * n1 && lhs <= (idx as u64 + 1) * n1
        })
    }

    /// Linear indices of the grid points inside the closed cube.
    pub fn grid_points(&self, domain: &GridDomain) -> Vec<usize> {
        let n1 = (domain.points_per_axis() - 1) as u64;
        let scale = 1u64 << self.depth;
        // per-axis inclusive range: idx*(N-1) <= i*2^depth <= (idx+1)*(N-1)
        let ranges: Vec<(usize, usize)> = self
            .index
            .iter()
            .map(|&idx| {
                let lo_num = idx as u64 * n1;
                let hi_num = (idx as u64 + 1) * n1;
                let lo = lo_num.div_ceil(scale) as usize;
                let hi = (hi_num / scale) as usize;
                (lo, hi)
            })
            .collect();
        let mut out = Vec::new();
        let mut multi: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return out;
        }
        loop {
            out.push(domain.linear_index(&multi));
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if multi[axis] < ranges[axis].1 {
                    multi[axis] += 1;
                    break;
                }
                multi[axis] = ranges[axis].0;
            }
        }
    }
}

/// What kind of bound a [`ContentReport`] certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// An upper bound realized by the stored cover.
    Upper,
    /// The exact infimum over dyadic covers of the stated depth, given the
    /// per-cube image contents.
    ExactAtResolution,
}

/// A ball in the certifying cover of a Hausdorff-content estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallCover {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Cover {
    Balls { balls: Vec<BallCover> },
    Cubes { cubes: Vec<DyadicCube> },
}

/// Parameters echoed with every content value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContentParams {
    pub n: usize,
    pub m: Option<usize>,
    pub scales: Vec<f64>,
    pub max_depth: Option<u32>,
}

/// A content value plus the cover certifying it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContentReport {
    pub value: f64,
    pub cover: Cover,
    pub bound_kind: BoundKind,
    pub params: ContentParams,
}

/// Geometric ladder `reference * (1/2)^j`, `j = 0..LADDER_STEPS`.
pub fn scale_ladder(reference: f64) -> Vec<f64> {
    (0..LADDER_STEPS)
        .map(|j| reference * 0.5f64.powi(j as i32))
        .collect()
}

/// Pairwise (tree) summation: deterministic and exact on lists of equal
/// power-of-two summands, which keeps scale-invariant DP ties exact.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        k => pairwise_sum(&xs[..k / 2]) + pairwise_sum(&xs[k / 2..]),
    }
}

/// Greedy covering count: farthest-point centers until every point sits
/// within `r` of one. Returns the chosen center indices.
fn greedy_cover(points: &[Vec<f64>], target: &MetricTarget, r: f64) -> Vec<usize> {
    let mut centers = vec![0usize];
    let mut min_dist: Vec<f64> = points
        .iter()
        .map(|p| target.distance(p, &points[0]))
        .collect();
    loop {
        let (far, &d) = min_dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty point set");
        if d <= r {
            return centers;
        }
        centers.push(far);
        for (i, p) in points.iter().enumerate() {
            let di = target.distance(p, &points[far]);
            if di < min_dist[i] {
                min_dist[i] = di;
            }
        }
    }
}

/// Upper bound on the `n`-dimensional Hausdorff content of a finite point
/// set, by greedy ball covers over a ladder of radii.
///
/// For each radius `r` the cover costs `count * w_n * r^n` (each ball is a
/// set of diameter at most `2r`); the minimum over the ladder is returned
/// with its certifying cover.
pub fn hausdorff_content(
    points: &[Vec<f64>],
    target: &MetricTarget,
    n: usize,
    scales: &[f64],
) -> Result<ContentReport> {
    if n == 0 {
        return Err(Error::InvalidInput("content order n must be >= 1".into()));
    }
    if scales.is_empty()
        || scales.windows(2).any(|w| w[1] >= w[0])
        || scales.iter().any(|&r| r <= 0.0)
    {
        return Err(Error::InvalidInput(
            "scales must be a strictly decreasing ladder of positive radii".into(),
        ));
    }
    let params = ContentParams {
        n,
        m: None,
        scales: scales.to_vec(),
        max_depth: None,
    };
    if points.is_empty() {
        return Ok(ContentReport {
            value: 0.0,
            cover: Cover::Balls { balls: Vec::new() },
            bound_kind: BoundKind::Upper,
            params,
        });
    }
    let wn = unit_ball_volume(n);
    let mut best: Option<(f64, Vec<usize>, f64)> = None;
    for &r in scales {
        let centers = greedy_cover(points, target, r);
        let cost = centers.len() as f64 * wn * r.powi(n as i32);
        if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
            best = Some((cost, centers, r));
        }
    }
    let (value, centers, radius) = best.expect("nonempty ladder");
    Ok(ContentReport {
        value,
        cover: Cover::Balls {
            balls: centers
                .into_iter()
                .map(|c| BallCover {
                    center: points[c].clone(),
                    radius,
                })
                .collect(),
        },
        bound_kind: BoundKind::Upper,
        params,
    })
}

/// Exact image-content callback for analytic test maps: given a cube,
/// returns the `n`-content of the image of the full cube.
pub type ImageContentOracle<'a> = &'a dyn Fn(&DyadicCube) -> f64;

/// Image-content estimate for one cube: the exact oracle if supplied, else a
/// greedy ball cover of the sampled image with a ladder tied to the cube
/// size (radii from `L * diam(Q)` down to `L * diam(Q) / 32`).
fn cube_image_content(
    map: &SampledMap,
    cube: &DyadicCube,
    pts: &[usize],
    n: usize,
    oracle: Option<ImageContentOracle<'_>>,
) -> Result<f64> {
    if pts.is_empty() {
        return Ok(0.0);
    }
    if let Some(o) = oracle {
        return Ok(o(cube));
    }
    let image: Vec<Vec<f64>> = pts.iter().map(|&i| map.value(i).to_vec()).collect();
    let reference = (map.lipschitz() * cube.diam()).max(f64::MIN_POSITIVE);
    let ladder = scale_ladder(reference);
    Ok(hausdorff_content(&image, map.target(), n, &ladder)?.value)
}

/// Cost a dyadic cube contributes when used in a cover: the image-content
/// estimate of its subset points times `diam^m`. Empty cubes cost 0.
pub fn cube_cost(
    map: &SampledMap,
    subset: &GridSubset,
    cube: &DyadicCube,
    n: usize,
    m: usize,
    oracle: Option<ImageContentOracle<'_>>,
) -> Result<f64> {
    let pts: Vec<usize> = cube
        .grid_points(map.domain())
        .into_iter()
        .filter(|&i| subset.contains(i))
        .collect();
    if pts.is_empty() {
        return Ok(0.0);
    }
    Ok(cube_image_content(map, cube, &pts, n, oracle)? * cube.diam().powi(m as i32))
}

/// Dyadic mapping content by bottom-up dynamic programming.
///
/// `cost(Q) = min(image_content(Q, E) * diam(Q)^m, sum over children)`, with
/// empty cubes costing 0 and the recursion cut at `max_depth`. Ties prefer
/// the parent cube, so for scale-invariant costs the root is among the
/// optimal covers. The result is the exact infimum over dyadic antichain
/// covers of depth at most `max_depth`, given the per-cube image contents.
pub fn mapping_content_dp(
    map: &SampledMap,
    subset: &GridSubset,
    n: usize,
    m: usize,
    max_depth: u32,
    oracle: Option<ImageContentOracle<'_>>,
) -> Result<ContentReport> {
    let d = map.domain().dim();
    if n == 0 {
        return Err(Error::InvalidInput("content order n must be >= 1".into()));
    }
    if n + m != d {
        return Err(Error::InvalidInput(format!(
            "n + m must equal the domain dimension: {n} + {m} != {d}"
        )));
    }
    if 1usize << max_depth > map.domain().points_per_axis() - 1 {
        return Err(Error::InvalidInput(format!(
            "2^max_depth must not exceed N-1 = {}, got depth {max_depth}",
            map.domain().points_per_axis() - 1
        )));
    }
    if subset.len() != map.domain().num_points() {
        return Err(Error::InvalidInput("subset does not match the grid".into()));
    }
    let mut cover = Vec::new();
    let value = dp_cost(
        map,
        subset,
        n,
        m,
        max_depth,
        oracle,
        &DyadicCube::root(d),
        &mut cover,
    )?;
    Ok(ContentReport {
        value,
        cover: Cover::Cubes { cubes: cover },
        bound_kind: BoundKind::ExactAtResolution,
        params: ContentParams {
            n,
            m: Some(m),
            scales: Vec::new(),
            max_depth: Some(max_depth),
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn dp_cost(
    map: &SampledMap,
    subset: &GridSubset,
    n: usize,
    m: usize,
    max_depth: u32,
    oracle: Option<ImageContentOracle<'_>>,
    cube: &DyadicCube,
    cover: &mut Vec<DyadicCube>,
) -> Result<f64> {
    let pts: Vec<usize> = cube
        .grid_points(map.domain())
        .into_iter()
        .filter(|&i| subset.contains(i))
        .collect();
    if pts.is_empty() {
        return Ok(0.0);
    }
    let own = cube_image_content(map, cube, &pts, n, oracle)? * cube.diam().powi(m as i32);
    if cube.depth == max_depth {
        cover.push(cube.clone());
        return Ok(own);
    }
    let mut child_cover = Vec::new();
    let mut child_costs = Vec::new();
    for child in cube.children() {
        child_costs.push(dp_cost(
            map,
            subset,
            n,
            m,
            max_depth,
            oracle,
            &child,
            &mut child_cover,
        )?);
    }
    let child_sum = pairwise_sum(&child_costs);
    if own <= child_sum {
        cover.push(cube.clone());
        Ok(own)
    } else {
        cover.append(&mut child_cover);
        Ok(child_sum)
    }
}

/// Bounds for the arbitrary-set variant of the mapping content.
///
/// Dyadic cubes are admissible arbitrary sets, so the DP value is an upper
/// bound; no nontrivial lower bound is computable from samples, and none is
/// claimed.
pub fn hat_content_bounds(
    map: &SampledMap,
    subset: &GridSubset,
    n: usize,
    m: usize,
    max_depth: u32,
    oracle: Option<ImageContentOracle<'_>>,
) -> Result<(f64, ContentReport)> {
    let upper = mapping_content_dp(map, subset, n, m, max_depth, oracle)?;
    Ok((0.0, upper))
}

/// Recomputes the cost of a stored cover and checks it covers the subset.
///
/// Returns the recomputed value; errors if some subset point is uncovered.
pub fn verify_cover(
    map: &SampledMap,
    subset: &GridSubset,
    n: usize,
    m: usize,
    report: &ContentReport,
    oracle: Option<ImageContentOracle<'_>>,
) -> Result<f64> {
    let cubes = match &report.cover {
        Cover::Cubes { cubes } => cubes,
        Cover::Balls { .. } => {
            return Err(Error::InvalidInput(
                "verify_cover expects a dyadic-cube cover".into(),
            ))
        }
    };
    let mut covered = vec![false; map.domain().num_points()];
    let mut total = 0.0;
    for cube in cubes {
        let pts: Vec<usize> = cube
            .grid_points(map.domain())
            .into_iter()
            .filter(|&i| subset.contains(i))
            .collect();
        for &p in &pts {
            covered[p] = true;
        }
        total += cube_image_content(map, cube, &pts, n, oracle)? * cube.diam().powi(m as i32);
    }
    for i in subset.indices() {
        if !covered[i] {
            return Err(Error::InvalidInput(format!(
                "cover misses subset grid point {i}"
            )));
        }
    }
    Ok(total)
}

/// Density ratios of a map at one interior point over a radius ladder.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    pub point: usize,
    pub radii: Vec<f64>,
    /// `H^n(f(B(x,r))) / (w_n r^n)` per radius.
    pub ratios: Vec<f64>,
    /// Max of the ratios at the 3 smallest radii.
    pub upper: f64,
    /// Min of the ratios at the 3 smallest radii.
    pub lower: f64,
}

/// Estimates upper and lower `n`-densities at an interior grid point.
///
/// The limsup/liminf cannot be taken at finite resolution; the reported
/// upper/lower values are the max/min over the three smallest radii of the
/// ladder, a fixed convention echoed in the output.
pub fn density(map: &SampledMap, point: usize, n: usize, radii: &[f64]) -> Result<DensityEstimate> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "radii must be strictly decreasing".into(),
        ));
    }
    if !map.domain().is_interior(point) {
        return Err(Error::InvalidInput(
            "density needs an interior point".into(),
        ));
    }
    let h = map.domain().spacing();
    let bdist = map.domain().boundary_distance(point);
    let x = map.domain().point(point);
    let wn = unit_ball_volume(n);
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in radii {
        if r < h {
            return Err(Error::InvalidInput(format!(
                "radius {r} is below the grid resolution {h}"
            )));
        }
        if r >= bdist {
            return Err(Error::InvalidInput(format!(
                "radius {r} reaches the boundary (distance {bdist})"
            )));
        }
        let ball: Vec<Vec<f64>> = (0..map.domain().num_points())
            .filter(|&i| {
                let p = map.domain().point(i);
                p.iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    <= r
            })
            .map(|i| map.value(i).to_vec())
            .collect();
        if ball.len() < 10 {
            return Err(Error::InvalidInput(format!(
                "ball of radius {r} contains only {} grid points (need >= 10)",
                ball.len()
            )));
        }
        // sub-ladder tied to the ball size; rungs below the image sample
        // spacing see the finiteness of the sample and under-report, so
        // read ratios at radii well above the grid scale
        let ladder = scale_ladder((map.lipschitz() * r).max(f64::MIN_POSITIVE));
        let content = hausdorff_content(&ball, map.target(), n, &ladder)?.value;
        ratios.push(content / (wn * r.powi(n as i32)));
    }
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    Ok(DensityEstimate {
        point,
        radii: radii.to_vec(),
        ratios: ratios.clone(),
        upper: tail.iter().copied().fold(0.0, f64::max),
        lower: tail.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euclid() -> MetricTarget {
        MetricTarget::euclidean(2)
    }

    #[test]
    fn cube_children_partition_parent_points() {
        let g = GridDomain::new(2, 9).unwrap();
        let root = DyadicCube::root(2);
        let child_pts: std::collections::BTreeSet<usize> = root
            .children()
            .iter()
            .flat_map(|c| c.grid_points(&g))
            .collect();
        let root_pts: std::collections::BTreeSet<usize> =
            root.grid_points(&g).into_iter().collect();
        assert_eq!(child_pts, root_pts);
        assert_eq!(root_pts.len(), 81);
    }

    #[test]
    fn boundary_grid_points_belong_to_multiple_cubes() {
        let g = GridDomain::new(2, 9).unwrap();
        let mid = g.linear_index(&[4, 4]);
        let owners: usize = DyadicCube::root(2)
            .children()
            .iter()
            .filter(|c| c.grid_points(&g).contains(&mid))
            .count();
        assert_eq!(owners, 4);
    }

    #[test]
    fn content_of_empty_set_is_zero() {
        let r = hausdorff_content(&[], &euclid(), 2, &[0.5, 0.25]).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn content_of_single_point_shrinks_with_ladder() {
        let pts = vec![vec![0.3, 0.3]];
        let coarse = hausdorff_content(&pts, &euclid(), 2, &[0.5]).unwrap();
        let fine = hausdorff_content(&pts, &euclid(), 2, &scale_ladder(0.5)).unwrap();
        assert!(fine.value < coarse.value);
        let r_min = 0.5 / 32.0;
        assert!((fine.value - unit_ball_volume(2) * r_min * r_min).abs() < 1e-12);
    }

    #[test]
    fn two_content_of_segment_vanishes_with_scale() {
        // k balls of radius 1/(2k) cover a unit segment, so the 2-content
        // bound at radius r is about w_2 * r * (1/(2r) + 1) * r -> 0
        let pts: Vec<Vec<f64>> = (0..10_000).map(|i| vec![i as f64 / 9_999.0, 0.0]).collect();
        let coarse = hausdorff_content(&pts, &euclid(), 2, &[0.25])
            .unwrap()
            .value;
        let fine = hausdorff_content(&pts, &euclid(), 2, &[0.01])
            .unwrap()
            .value;
        let finer = hausdorff_content(&pts, &euclid(), 2, &[0.002])
            .unwrap()
            .value;
        assert!(fine < coarse);
        assert!(finer < fine);
        // greedy needs at most ~1/r centers on a unit segment
        let r = 0.002;
        let bound = unit_ball_volume(2) * (1.0 / r + 2.0) * r * r;
        assert!(finer <= bound, "{finer} > {bound}");
    }

    #[test]
    fn two_content_of_unit_square_near_area() {
        let side = 100;
        let pts: Vec<Vec<f64>> = (0..side * side)
            .map(|i| {
                vec![
                    (i % side) as f64 / (side - 1) as f64,
                    (i / side) as f64 / (side - 1) as f64,
                ]
            })
            .collect();
        let ladder = [0.25, 0.125, 0.0625, 0.03125];
        let v = hausdorff_content(&pts, &euclid(), 2, &ladder)
            .unwrap()
            .value;
        // area 1 within the covering inefficiency factor
        assert!((1.0 - 1e-9..=4.0).contains(&v), "got {v}");
    }

    #[test]
    fn ladder_must_decrease() {
        assert!(hausdorff_content(&[vec![0.0, 0.0]], &euclid(), 2, &[0.1, 0.2]).is_err());
        assert!(hausdorff_content(&[vec![0.0, 0.0]], &euclid(), 0, &[0.1]).is_err());
    }

    fn projection_map(n_axis: usize) -> SampledMap {
        SampledMap::from_function(3, n_axis, MetricTarget::euclidean(2), |p| vec![p[0], p[1]])
            .unwrap()
    }

    fn square_oracle(cube: &DyadicCube) -> f64 {
        let s = cube.side();
        s * s
    }

    #[test]
    fn dp_projection_with_exact_oracle_is_sqrt3_at_every_depth() {
        let f = projection_map(9);
        let e = GridSubset::full(f.domain());
        for depth in 0..=3 {
            let r = mapping_content_dp(&f, &e, 2, 1, depth, Some(&square_oracle)).unwrap();
            assert!(
                (r.value - 3f64.sqrt()).abs() < 1e-12,
                "depth {depth}: {}",
                r.value
            );
        }
        // ties prefer the parent, so the root cube is the reported cover
        let r = mapping_content_dp(&f, &e, 2, 1, 3, Some(&square_oracle)).unwrap();
        match r.cover {
            Cover::Cubes { ref cubes } => {
                assert_eq!(cubes.len(), 1);
                assert_eq!(cubes[0], DyadicCube::root(3));
            }
            _ => panic!("expected cube cover"),
        }
    }

    #[test]
    fn dp_segment_oracle_gives_zero() {
        let f =
            SampledMap::from_function(3, 9, MetricTarget::euclidean(1), |p| vec![p[0]]).unwrap();
        let e = GridSubset::full(f.domain());
        let zero_oracle = |_: &DyadicCube| 0.0;
        for depth in 0..=3 {
            let r = mapping_content_dp(&f, &e, 2, 1, depth, Some(&zero_oracle)).unwrap();
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn dp_constant_map_is_zero_with_sampled_estimator() {
        let f = SampledMap::from_function(3, 9, MetricTarget::euclidean(2), |_| vec![0.5, 0.5])
            .unwrap();
        let e = GridSubset::full(f.domain());
        let r = mapping_content_dp(&f, &e, 2, 1, 2, None).unwrap();
        assert!(r.value < 1e-12, "got {}", r.value);
    }

    #[test]
    fn dp_rejects_bad_codimension_and_depth() {
        let f = projection_map(9);
        let e = GridSubset::full(f.domain());
        assert!(mapping_content_dp(&f, &e, 2, 2, 1, None).is_err());
        assert!(mapping_content_dp(&f, &e, 2, 1, 4, None).is_err()); // 2^4 > 8
    }

    #[test]
    fn dp_monotone_in_depth_and_subset() {
        let f = SampledMap::from_function(2, 9, MetricTarget::euclidean(2), |p| {
            vec![(2.0 * p[0]).sin(), p[0] * p[1]]
        })
        .unwrap();
        let full = GridSubset::full(f.domain());
        let mut prev = f64::INFINITY;
        for depth in 0..=3 {
            let v = mapping_content_dp(&f, &full, 1, 1, depth, None)
                .unwrap()
                .value;
            assert!(v <= prev + 1e-12, "depth {depth}: {v} > {prev}");
            prev = v;
        }
        let small = full.minus_slab(f.domain(), 0, 4);
        let v_small = mapping_content_dp(&f, &small, 1, 1, 3, None).unwrap().value;
        let v_full = mapping_content_dp(&f, &full, 1, 1, 3, None).unwrap().value;
        assert!(v_small <= v_full + 1e-12);
    }

    #[test]
    fn hat_bounds_wrap_dp() {
        let f = projection_map(9);
        let e = GridSubset::full(f.domain());
        let (lo, up) = hat_content_bounds(&f, &e, 2, 1, 2, Some(&square_oracle)).unwrap();
        assert_eq!(lo, 0.0);
        assert!((up.value - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn verify_cover_matches_dp_value() {
        let f = SampledMap::from_function(2, 9, MetricTarget::euclidean(2), |p| {
            vec![p[0] * p[0], p[1]]
        })
        .unwrap();
        let e = GridSubset::full(f.domain());
        let r = mapping_content_dp(&f, &e, 1, 1, 3, None).unwrap();
        let recomputed = verify_cover(&f, &e, 1, 1, &r, None).unwrap();
        assert!((recomputed - r.value).abs() <= 1e-12 * r.value.max(1.0));
    }

    #[test]
    fn density_of_identity_plane_is_order_one() {
        // the grid must resolve the smallest ladder rung (r/32 > h), so the
        // full-rank signal is not collapsed by sampling
        let f =
            SampledMap::from_function(2, 129, MetricTarget::euclidean(2), |p| p.to_vec()).unwrap();
        let center = f.domain().linear_index(&[64, 64]);
        let est = density(&f, center, 2, &[0.45, 0.4, 0.35]).unwrap();
        for r in &est.ratios {
            assert!(*r >= 0.9 && *r <= 4.0, "ratio {r}");
        }
        assert!(est.upper >= est.lower);
    }

    #[test]
    fn density_of_coordinate_map_decays() {
        let f =
            SampledMap::from_function(2, 65, MetricTarget::euclidean(1), |p| vec![p[0]]).unwrap();
        let center = f.domain().linear_index(&[32, 32]);
        let est = density(&f, center, 2, &[0.45, 0.4, 0.35]).unwrap();
        // image is a segment: covering cost scales with r * ladder floor
        assert!(est.upper < 0.25, "upper {}", est.upper);
    }

    #[test]
    fn density_of_constant_map_is_zero() {
        let f = SampledMap::from_function(2, 33, MetricTarget::euclidean(2), |_| vec![0.0, 0.0])
            .unwrap();
        let center = f.domain().linear_index(&[16, 16]);
        let est = density(&f, center, 2, &[0.3, 0.2, 0.1]).unwrap();
        assert!(est.upper <= 1e-12);
    }

    #[test]
    fn density_rejects_sub_resolution_radius() {
        let f =
            SampledMap::from_function(2, 9, MetricTarget::euclidean(2), |p| p.to_vec()).unwrap();
        let center = f.domain().linear_index(&[4, 4]);
        assert!(density(&f, center, 2, &[0.3, 0.01]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn prop_cube_children_tile(depth in 0u32..3, ix in 0u32..4, iy in 0u32..4) {
            let ix = ix % (1 << depth).max(1);
            let iy = iy % (1 << depth).max(1);
            let cube = DyadicCube { depth, index: vec![ix, iy] };
            let g = GridDomain::new(2, 17).unwrap();
            let parent: std::collections::BTreeSet<usize> =
                cube.grid_points(&g).into_iter().collect();
            let union: std::collections::BTreeSet<usize> = cube
                .children()
                .iter()
                .flat_map(|c| c.grid_points(&g))
                .collect();
            prop_assert_eq!(parent, union);
        }
    }
}
