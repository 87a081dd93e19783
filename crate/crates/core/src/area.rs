//! Curve length and speed, oriented area of closed planar curves, a Stokes
//! cross-check on triangulated disks, and numerical verification of the
//! area, coarea, and length-preservation identities.

use crate::error::{Error, Result};
use crate::sampled_map::SampledMap;
use crate::target::MetricTarget;
use crate::vecmath::euclid_dist;

/// Distance used between consecutive curve points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMetric {
    Euclidean,
    Sup,
    /// Euclidean distance of the first `2n` coordinates of `(x, y, t)`
    /// points; the length of a horizontal curve under this metric is its
    /// Carnot-Caratheodory length.
    HeisenbergProjection,
}

impl CurveMetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Self::Euclidean => euclid_dist(a, b),
            Self::Sup => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Self::HeisenbergProjection => {
                let k = a.len() - 1;
                euclid_dist(&a[..k], &b[..k])
            }
        }
    }
}

/// A polyline in a metric space: strictly increasing parameters with one
/// point per parameter.
#[derive(Debug, Clone)]
pub struct Curve {
    params: Vec<f64>,
    points: Vec<Vec<f64>>,
    closed: bool,
    metric: CurveMetric,
}

/// Relative tolerance for snapping the endpoints of a closed curve.
const CLOSE_TOL: f64 = 1e-9;

impl Curve {
    pub fn new(params: Vec<f64>, points: Vec<Vec<f64>>, metric: CurveMetric) -> Result<Self> {
        if params.len() != points.len() || params.len() < 2 {
            return Err(Error::InvalidInput(
                "curve needs matching params/points lists of length >= 2".into(),
            ));
        }
        if params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "curve parameters must strictly increase".into(),
            ));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput(
                "curve points must share one dimension".into(),
            ));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("curve points".into()));
        }
        let scale = points.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
        let closed =
            metric.distance(&points[0], points.last().expect("len >= 2")) <= CLOSE_TOL * scale;
        Ok(Self {
            params,
            points,
            closed,
            metric,
        })
    }

    /// Builds a closed curve, appending the first point if needed.
    pub fn closed(
        mut params: Vec<f64>,
        mut points: Vec<Vec<f64>>,
        metric: CurveMetric,
    ) -> Result<Self> {
        if points.len() >= 2 && points.first() != points.last() {
            let step = params[params.len() - 1] - params[params.len() - 2];
            params.push(params[params.len() - 1] + step.max(f64::MIN_POSITIVE));
            points.push(points[0].clone());
        }
        let c = Self::new(params, points, metric)?;
        if !c.closed {
            return Err(Error::InvalidInput("curve endpoints do not match".into()));
        }
        Ok(c)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn metric(&self) -> CurveMetric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Polygonal length: a lower bound on the true length, exact for
    /// polygonal data.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| self.metric.distance(&w[0], &w[1]))
            .sum()
    }

    /// Running polygonal length at each node (the arc-length parameter).
    pub fn prefix_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.points.windows(2) {
            acc += self.metric.distance(&w[0], &w[1]);
            out.push(acc);
        }
        out
    }

    /// Central-difference speed at an interior node.
    pub fn speed(&self, i: usize) -> Result<f64> {
        if i == 0 || i + 1 >= self.points.len() {
            return Err(Error::InvalidInput(
                "speed needs an interior node index".into(),
            ));
        }
        Ok(self
            .metric
            .distance(&self.points[i - 1], &self.points[i + 1])
            / (self.params[i + 1] - self.params[i - 1]))
    }
}

/// Signed (oriented) area enclosed by a closed planar curve, by the shoelace
/// rule `1/2 sum x_i (y_{i+1} - y_{i-1})` over the cyclic node list.
pub fn oriented_area(curve: &Curve) -> Result<f64> {
    if !curve.is_closed() {
        return Err(Error::InvalidInput(
            "oriented area needs a closed curve".into(),
        ));
    }
    if curve.dim() != 2 {
        return Err(Error::InvalidInput(
            "oriented area needs planar points".into(),
        ));
    }
    // drop the duplicated closing node and sum cyclically
    let pts = &curve.points()[..curve.len() - 1];
    let k = pts.len();
    let mut s = 0.0;
    for i in 0..k {
        let prev = &pts[(i + k - 1) % k];
        let next = &pts[(i + 1) % k];
        s += pts[i][0] * (next[1] - prev[1]);
    }
    Ok(0.5 * s)
}

/// Outcome of the Stokes cross-check: boundary shoelace area vs the summed
/// signed areas of the image triangles of a disk triangulation.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct StokesReport {
    pub boundary_area: f64,
    pub interior_area: f64,
    pub gap: f64,
}

/// Checks the boundary-area/interior-determinant identity for a map on the
/// unit disk.
///
/// The disk is triangulated with `rings` concentric rings of `sectors`
/// sectors each; `gamma` is evaluated at the nodes and the signed areas of
/// the image triangles sum to the integral of `det D(gamma)` of the
/// piecewise-linear interpolant. The supplied boundary curve must agree with
/// `gamma` on the boundary nodes.
pub fn stokes_check(
    gamma: impl Fn(&[f64; 2]) -> [f64; 2],
    boundary: &Curve,
    rings: usize,
    sectors: usize,
) -> Result<StokesReport> {
    if !boundary.is_closed() || boundary.dim() != 2 {
        return Err(Error::InvalidInput(
            "boundary must be a closed planar curve".into(),
        ));
    }
    if rings < 1 || sectors < 3 {
        return Err(Error::InvalidInput(
            "need rings >= 1 and sectors >= 3".into(),
        ));
    }
    // node (r, j): radius r/rings, angle 2 pi j / sectors; ring 0 is the center
    let node = |r: usize, j: usize| -> [f64; 2] {
        let rad = r as f64 / rings as f64;
        let th = 2.0 * std::f64::consts::PI * (j % sectors) as f64 / sectors as f64;
        [rad * th.cos(), rad * th.sin()]
    };
    // boundary agreement: compare gamma at the outer ring against the curve
    let scale = boundary
        .points()
        .iter()
        .flatten()
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    for j in 0..sectors {
        let p = node(rings, j);
        let g = gamma(&p);
        let t = j as f64 / sectors as f64;
        let b = sample_closed(boundary, t);
        let d = euclid_dist(&g, &b);
        if d > 1e-6 * scale {
            return Err(Error::InvalidInput(format!(
                "gamma disagrees with the boundary curve at sector {j} (gap {d})"
            )));
        }
    }
    let tri_area = |a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]| -> f64 {
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    };
    let mut interior = 0.0;
    for r in 0..rings {
        for j in 0..sectors {
            let j1 = j + 1;
            if r == 0 {
                let a = gamma(&node(0, 0));
                let b = gamma(&node(1, j));
                let c = gamma(&node(1, j1));
                interior += tri_area(&a, &b, &c);
            } else {
                let a = gamma(&node(r, j));
                let b = gamma(&node(r + 1, j));
                let c = gamma(&node(r + 1, j1));
                let d = gamma(&node(r, j1));
                interior += tri_area(&a, &b, &c) + tri_area(&a, &c, &d);
            }
        }
    }
    let boundary_area = oriented_area(boundary)?;
    Ok(StokesReport {
        boundary_area,
        interior_area: interior,
        gap: (boundary_area - interior).abs(),
    })
}

/// Point of a closed curve at normalized parameter `t` in `[0, 1)`, by
/// linear interpolation in the parameter.
fn sample_closed(curve: &Curve, t: f64) -> Vec<f64> {
    let p0 = curve.params()[0];
    let p1 = *curve.params().last().expect("nonempty");
    let target = p0 + t.rem_euclid(1.0) * (p1 - p0);
    let idx = curve
        .params()
        .partition_point(|&p| p <= target)
        .clamp(1, curve.len() - 1);
    let (a, b) = (idx - 1, idx);
    let w = (target - curve.params()[a]) / (curve.params()[b] - curve.params()[a]);
    curve.points()[a]
        .iter()
        .zip(&curve.points()[b])
        .map(|(x, y)| x + w * (y - x))
        .collect()
}

/// Two sides of an integral identity and their gap.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Verifies the top-dimensional area formula for a sampled map on `[0,1]`:
/// the Jacobian integral of the metric derivative against `g` equals the
/// multiplicity-weighted image integral.
///
/// The left side is a midpoint Riemann sum of `g(x) * J_1(md(f,x)) * h` over
/// interior points. The right side partitions the image into cells of size
/// `rho`, measures each cell by the branch-averaged clipped polyline length,
/// and weighs it by the sum of `g` over preimage branches (domain-adjacency
/// clusters), which is how multiplicity is counted at finite resolution.
pub fn area_formula_check(
    map: &SampledMap,
    g: impl Fn(&[f64]) -> f64,
    rho: f64,
) -> Result<IdentityReport> {
    let d = map.domain().dim();
    if d != 1 {
        return Err(Error::Unsupported(
            "area_formula_check is implemented for one-dimensional domains".into(),
        ));
    }
    // cells must live in the coordinates the target metric sees: all of
    // them for embedded targets, the horizontal ones for Heisenberg points
    let metric_dim = match map.target() {
        MetricTarget::Embedded { dim, .. } => *dim,
        MetricTarget::Heisenberg { n } => 2 * n,
        MetricTarget::Oracle { .. } => {
            return Err(Error::Unsupported(
                "area_formula_check needs coordinate-backed targets; embed \
                 oracle targets first"
                    .into(),
            ))
        }
    };
    let h = map.domain().spacing();
    let n_pts = map.domain().num_points();
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::InvalidInput(
            "clustering radius must be positive".into(),
        ));
    }
    if rho < 2.0 * h * map.lipschitz() {
        return Err(Error::InvalidInput(format!(
            "clustering radius {rho} is below the image resolution {}",
            2.0 * h * map.lipschitz()
        )));
    }

    // lhs: J_1 of the 1-D metric-derivative seminorm is exactly the speed
    let mut lhs = 0.0;
    for i in 1..n_pts - 1 {
        let speed = map.image_distance(i - 1, i + 1) / (2.0 * h);
        lhs += g(&map.domain().point(i)) * speed * h;
    }

    // rhs: bucket the image polyline segments into cells of size rho along
    // the image axes; per cell, branches are runs of consecutive domain
    // segments, the cell measure is the branch-mean clipped length
    let cell_of = |v: &[f64]| -> Vec<i64> {
        v[..metric_dim]
            .iter()
            .map(|x| (x / rho).floor() as i64)
            .collect()
    };
    use std::collections::BTreeMap;
    // cell -> list of (segment index, clipped length, g at segment midpoint)
    let mut cells: BTreeMap<Vec<i64>, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for s in 0..n_pts - 1 {
        let a = map.value(s);
        let b = map.value(s + 1);
        let seg_len = map.target().distance(a, b);
        let gmid = 0.5 * (g(&map.domain().point(s)) + g(&map.domain().point(s + 1)));
        // split the segment between the cells of its endpoints by midpoint
        // subdivision fine enough that each chunk stays inside one cell
        let chunks = (euclid_dist(&a[..metric_dim], &b[..metric_dim]) / rho)
            .ceil()
            .max(1.0) as usize
            * 2;
        let mut acc: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for c in 0..chunks {
            let t = (c as f64 + 0.5) / chunks as f64;
            let p: Vec<f64> = (0..metric_dim).map(|k| a[k] + t * (b[k] - a[k])).collect();
            *acc.entry(cell_of(&p)).or_insert(0.0) += seg_len / chunks as f64;
        }
        for (cell, len) in acc {
            cells.entry(cell).or_default().push((s, len, gmid));
        }
    }
    let mut rhs = 0.0;
    for entries in cells.values() {
        // branches: maximal runs of consecutive segment indices
        let mut idx: Vec<usize> = entries.iter().map(|e| e.0).collect();
        idx.sort_unstable();
        idx.dedup();
        let mut branch_of = BTreeMap::new();
        let mut branch = 0usize;
        for w in 0..idx.len() {
            if w > 0 && idx[w] > idx[w - 1] + 1 {
                branch += 1;
            }
            branch_of.insert(idx[w], branch);
        }
        let n_branches = branch + 1;
        let mut branch_len = vec![0.0; n_branches];
        let mut branch_g = vec![(0.0, 0.0); n_branches]; // (sum g*len, sum len)
        for (s, len, gmid) in entries {
            let b = branch_of[s];
            branch_len[b] += len;
            branch_g[b].0 += gmid * len;
            branch_g[b].1 += len;
        }
        let cell_measure = branch_len.iter().sum::<f64>() / n_branches as f64;
        let g_sum: f64 = branch_g
            .iter()
            .map(|(gw, lw)| if *lw > 0.0 { gw / lw } else { 0.0 })
            .sum();
        rhs += cell_measure * g_sum;
    }
    Ok(IdentityReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Verifies the coarea identity for a sampled map into `R^1`: the integral
/// of `|grad F|` over the subset equals the integral over image values of
/// the fiber measure `H^m`.
///
/// Fibers are measured by crossing counts: the image range is split into
/// resolution-matched slabs, and for each slab midpoint `y` the rows along
/// the steepest axis are scanned for sign changes of `F - y`; each crossing
/// contributes one `h^m` slice. Only interior grid points participate on
/// both sides.
pub fn coarea_check(
    map: &SampledMap,
    subset: Option<&crate::grid::GridSubset>,
) -> Result<IdentityReport> {
    if map.value_dim() != 1 || !map.target().is_embedded() {
        return Err(Error::Unsupported(
            "coarea_check needs an embedded target of dimension exactly 1".into(),
        ));
    }
    let d = map.domain().dim();
    let h = map.domain().spacing();
    let n_ax = map.domain().points_per_axis();
    let in_subset = |i: usize| subset.is_none_or(|s| s.contains(i));

    // lhs: |J_F| = |grad F| for n = 1
    let mut lhs = 0.0;
    let mut grad_sums = vec![0.0; d];
    for i in map.domain().interior_indices() {
        if !in_subset(i) {
            continue;
        }
        let rows = map.componentwise_gradient(i)?;
        let norm = rows[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        lhs += norm * h.powi(d as i32);
        for (a, s) in grad_sums.iter_mut().enumerate() {
            *s += rows[0][a].abs();
        }
    }

    // steepest axis hosts the crossing scan
    let axis = grad_sums
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(a, _)| a)
        .unwrap_or(0);

    // image range over interior subset points
    let mut fmin = f64::INFINITY;
    let mut fmax = f64::NEG_INFINITY;
    for i in map.domain().interior_indices() {
        if in_subset(i) {
            fmin = fmin.min(map.value(i)[0]);
            fmax = fmax.max(map.value(i)[0]);
        }
    }
    if fmin >= fmax {
        return Ok(IdentityReport {
            lhs,
            rhs: 0.0,
            gap: lhs.abs(),
        });
    }
    let slab = (h * map.lipschitz()).max(f64::MIN_POSITIVE);
    let n_slabs = ((fmax - fmin) / slab).ceil().max(1.0) as usize;
    let dy = (fmax - fmin) / n_slabs as f64;

    // enumerate rows: interior lattice lines along `axis`
    let stride = map.domain().axis_stride(axis);
    let mut row_starts = Vec::new();
    for i in 0..map.domain().num_points() {
        let multi = map.domain().multi_index(i);
        if multi[axis] == 1
            && multi
                .iter()
                .enumerate()
                .all(|(a, &c)| a == axis || (c > 0 && c + 1 < n_ax))
        {
            row_starts.push(i);
        }
    }
    let mut rhs = 0.0;
    for j in 0..n_slabs {
        let y = fmin + (j as f64 + 0.5) * dy;
        let mut crossings = 0usize;
        for &start in &row_starts {
            for k in 0..n_ax - 3 {
                let i0 = start + k * stride;
                let i1 = i0 + stride;
                if !(in_subset(i0) && in_subset(i1)) {
                    continue;
                }
                let f0 = map.value(i0)[0] - y;
                let f1 = map.value(i1)[0] - y;
                if (f0 < 0.0 && f1 >= 0.0) || (f0 >= 0.0 && f1 < 0.0) {
                    crossings += 1;
                }
            }
        }
        rhs += dy * crossings as f64 * h.powi((d - 1) as i32);
    }
    Ok(IdentityReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// A post-map applied to stored target values, with its own target metric.
pub trait PostMap {
    fn apply(&self, value: &[f64]) -> Vec<f64>;
    fn target(&self) -> MetricTarget;
}

/// Report of the length-preservation check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LengthPreservationReport {
    /// Worst relative disagreement of prefix lengths along grid lines.
    pub hypothesis_gap: f64,
    /// True when the hypothesis holds within the supplied tolerance.
    pub hypothesis_holds: bool,
    /// Fraction of interior points where the directional metric-derivative
    /// estimates of the composed and original maps agree within `10 h L`.
    pub md_agreement_fraction: f64,
    /// Worst directional metric-derivative gap.
    pub md_max_gap: f64,
    /// Jacobian-integral comparison (the `g = 1` measure identity); `None`
    /// when the composed map could not be compared in the current domain
    /// dimension.
    pub measure_identity: Option<IdentityReport>,
    /// Full area-formula gaps for both maps in one-dimensional domains.
    pub area_formula_original: Option<IdentityReport>,
    pub area_formula_composed: Option<IdentityReport>,
}

/// Checks that a post-map preserves lengths along grid lines and, when it
/// does, that the directional metric derivatives of the composed and
/// original maps agree, along with the `g = 1` measure identity.
///
/// If the hypothesis fails beyond `rel_tol` the conclusion is reported as
/// unverified (the report flags the failure) rather than asserted.
pub fn length_preserving_check(
    phi: &dyn PostMap,
    map: &SampledMap,
    rel_tol: f64,
) -> Result<LengthPreservationReport> {
    let composed = map.post_compose(phi.target(), |v| phi.apply(v))?;
    let d = map.domain().dim();
    let n_ax = map.domain().points_per_axis();

    // (i) hypothesis: prefix image lengths along every grid line agree
    let mut hyp_gap: f64 = 0.0;
    for axis in 0..d {
        let stride = map.domain().axis_stride(axis);
        for start in 0..map.domain().num_points() {
            if map.domain().multi_index(start)[axis] != 0 {
                continue;
            }
            let mut len_f = 0.0;
            let mut len_g = 0.0;
            for k in 0..n_ax - 1 {
                let u = start + k * stride;
                let v = u + stride;
                len_f += map.image_distance(u, v);
                len_g += composed.image_distance(u, v);
                let scale = len_f.abs().max(1e-12);
                hyp_gap = hyp_gap.max((len_f - len_g).abs() / scale);
            }
        }
    }
    let hypothesis_holds = hyp_gap <= rel_tol;

    // (ii) conclusion: directional metric-derivative estimates agree
    let tol = 10.0 * map.domain().spacing() * map.lipschitz().max(composed.lipschitz());
    let mut agree = 0usize;
    let mut total = 0usize;
    let mut md_max_gap: f64 = 0.0;
    if hypothesis_holds {
        for i in map.domain().interior_indices() {
            let mut point_ok = true;
            for axis in 0..d {
                let sf = map.directional_speed(i, axis)?;
                let sg = composed.directional_speed(i, axis)?;
                let gap = (sf - sg).abs();
                md_max_gap = md_max_gap.max(gap);
                if gap > tol {
                    point_ok = false;
                }
            }
            total += 1;
            if point_ok {
                agree += 1;
            }
        }
    }

    // (iii) measure identity with g = 1: Jacobian integrals agree, plus the
    // full area-formula gaps when the domain is one-dimensional
    let mut measure_identity = None;
    let mut af_orig = None;
    let mut af_comp = None;
    if hypothesis_holds {
        if d == 1 {
            let rho = 3.0 * map.domain().spacing() * map.lipschitz().max(1e-12);
            let a = area_formula_check(map, |_| 1.0, rho)?;
            let b = area_formula_check(&composed, |_| 1.0, rho)?;
            measure_identity = Some(IdentityReport {
                lhs: a.lhs,
                rhs: b.lhs,
                gap: (a.lhs - b.lhs).abs(),
            });
            af_orig = Some(a);
            af_comp = Some(b);
        } else if d <= 3 && map.target().is_embedded() && composed.target().is_embedded() {
            let tau = crate::sampled_map::default_rank_threshold(map);
            let jf = jacobian_integral(map, tau)?;
            let jg = jacobian_integral(&composed, tau)?;
            measure_identity = Some(IdentityReport {
                lhs: jf,
                rhs: jg,
                gap: (jf - jg).abs(),
            });
        }
    }

    Ok(LengthPreservationReport {
        hypothesis_gap: hyp_gap,
        hypothesis_holds,
        md_agreement_fraction: if total > 0 {
            agree as f64 / total as f64
        } else {
            1.0
        },
        md_max_gap,
        measure_identity,
        area_formula_original: af_orig,
        area_formula_composed: af_comp,
    })
}

/// Midpoint Riemann sum of `J_d(md(f, x))` over interior points.
fn jacobian_integral(map: &SampledMap, tau: f64) -> Result<f64> {
    let field = crate::sampled_map::rank_field(map, tau)?;
    let hd = map.domain().spacing().powi(map.domain().dim() as i32);
    Ok(field.jacobians.iter().flatten().map(|j| j * hd).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(k: usize, r: f64) -> Curve {
        let params: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let points: Vec<Vec<f64>> = (0..=k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        Curve::new(params, points, CurveMetric::Euclidean).unwrap()
    }

    #[test]
    fn length_of_unit_circle() {
        let c = circle(10_000, 1.0);
        assert!(c.is_closed());
        assert!((c.length() - 2.0 * PI).abs() < 1e-6, "len {}", c.length());
    }

    #[test]
    fn length_of_constant_and_segment() {
        let c = Curve::new(
            vec![0.0, 1.0],
            vec![vec![1.0, 2.0], vec![1.0, 2.0]],
            CurveMetric::Euclidean,
        )
        .unwrap();
        assert_eq!(c.length(), 0.0);
        let s = Curve::new(
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0], vec![3.0, 4.0]],
            CurveMetric::Euclidean,
        )
        .unwrap();
        assert_eq!(s.length(), 5.0);
    }

    #[test]
    fn speed_of_linear_curve() {
        let params: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let points: Vec<Vec<f64>> = params.iter().map(|t| vec![2.0 * t]).collect();
        let c = Curve::new(params, points, CurveMetric::Euclidean).unwrap();
        for i in 1..10 {
            assert!((c.speed(i).unwrap() - 2.0).abs() < 1e-12);
        }
        assert!(c.speed(0).is_err());
        assert!(c.speed(10).is_err());
    }

    #[test]
    fn speed_of_arc_length_circle_is_one() {
        let k = 10_000;
        let params: Vec<f64> = (0..=k).map(|i| 2.0 * PI * i as f64 / k as f64).collect();
        let points: Vec<Vec<f64>> = params.iter().map(|t| vec![t.cos(), t.sin()]).collect();
        let c = Curve::new(params, points, CurveMetric::Euclidean).unwrap();
        for i in (1..k).step_by(997) {
            assert!((c.speed(i).unwrap() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn oriented_area_of_circle() {
        let c = circle(10_000, 1.0);
        let a = oriented_area(&c).unwrap();
        assert!((a - PI).abs() < 1e-6, "area {a}");
    }

    #[test]
    fn oriented_area_signs_and_invariances() {
        let c = circle(512, 1.0);
        let a = oriented_area(&c).unwrap();
        // orientation reversal flips the sign (termwise exact, reordered sum)
        let rev_pts: Vec<Vec<f64>> = c.points().iter().rev().cloned().collect();
        let rev = Curve::new(c.params().to_vec(), rev_pts, CurveMetric::Euclidean).unwrap();
        assert!((oriented_area(&rev).unwrap() + a).abs() <= 1e-12 * a.abs().max(1.0));
        // translation invariance is exact for closed curves
        let shifted: Vec<Vec<f64>> = c
            .points()
            .iter()
            .map(|p| vec![p[0] + 5.0, p[1] - 3.0])
            .collect();
        let t = Curve::new(c.params().to_vec(), shifted, CurveMetric::Euclidean).unwrap();
        let at = oriented_area(&t).unwrap();
        assert!((at - a).abs() <= 1e-12 * a.abs().max(1.0));
        // cyclic reindexing preserves the value
        let k = c.len() - 1;
        let shift = 137;
        let mut cyc: Vec<Vec<f64>> = (0..k)
            .map(|i| c.points()[(i + shift) % k].clone())
            .collect();
        cyc.push(cyc[0].clone());
        let cy = Curve::new(c.params().to_vec(), cyc, CurveMetric::Euclidean).unwrap();
        assert!((oriented_area(&cy).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn oriented_area_of_figure_eight_cancels() {
        // (sin 2t, sin t): two lobes of equal area and opposite orientation
        let k = 10_000;
        let params: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let points: Vec<Vec<f64>> = (0..=k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![(2.0 * t).sin(), t.sin()]
            })
            .collect();
        let c = Curve::new(params, points, CurveMetric::Euclidean).unwrap();
        assert!(oriented_area(&c).unwrap().abs() < 1e-4);
    }

    #[test]
    fn oriented_area_rejects_open_curves() {
        let c = Curve::new(
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            CurveMetric::Euclidean,
        )
        .unwrap();
        assert!(oriented_area(&c).is_err());
    }

    #[test]
    fn area_stable_under_uniform_perturbation() {
        // |A(gamma_n) - A(gamma)| <= C sup|gamma_n - gamma| for curves of
        // bounded length; C is about ||gamma'|| + length here
        let fine = circle(4096, 1.0);
        let a = oriented_area(&fine).unwrap();
        for k in [32usize, 64, 128, 256] {
            let coarse = circle(k, 1.0);
            let ac = oriented_area(&coarse).unwrap();
            // sup distance between the polygon and the circle parameterization
            let sup: f64 = PI / k as f64; // chord sagitta bound ~ (pi/k)^2/2, param gap ~ pi/k
            let c_measured = (ac - a).abs() / sup;
            assert!(c_measured <= 4.0 * PI, "k={k}: C={c_measured}");
        }
    }

    #[test]
    fn stokes_identity_on_disk() {
        let boundary = circle(2048, 1.0);
        let r = stokes_check(|p| [p[0], p[1]], &boundary, 48, 256).unwrap();
        assert!((r.boundary_area - PI).abs() < 1e-4);
        assert!((r.interior_area - PI).abs() < 1e-3);
        assert!(r.gap < 1e-3, "gap {}", r.gap);
    }

    #[test]
    fn stokes_rank_one_map_gives_exact_zero() {
        let k = 512;
        let params: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let points: Vec<Vec<f64>> = (0..=k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![t.cos(), 0.0]
            })
            .collect();
        let boundary = Curve::new(params, points, CurveMetric::Euclidean).unwrap();
        let r = stokes_check(|p| [p[0], 0.0], &boundary, 16, 128).unwrap();
        assert_eq!(r.interior_area, 0.0);
        assert_eq!(r.boundary_area, 0.0);
    }

    #[test]
    fn stokes_cone_extension_of_circle() {
        let boundary = circle(2048, 1.0);
        // radial cone: scales the boundary values linearly toward 0
        let r = stokes_check(
            |p| {
                let rad = (p[0] * p[0] + p[1] * p[1]).sqrt();
                if rad == 0.0 {
                    [0.0, 0.0]
                } else {
                    [p[0], p[1]]
                }
            },
            &boundary,
            32,
            256,
        )
        .unwrap();
        assert!((r.interior_area - PI).abs() < 1e-3);
    }

    #[test]
    fn stokes_rejects_mismatched_boundary() {
        let boundary = circle(256, 0.5);
        assert!(stokes_check(|p| [p[0], p[1]], &boundary, 8, 64).is_err());
    }

    use crate::target::MetricTarget;

    #[test]
    fn area_formula_linear_map() {
        let f =
            SampledMap::from_function(1, 2001, MetricTarget::euclidean(1), |p| vec![2.0 * p[0]])
                .unwrap();
        let rho = 3.0 * f.domain().spacing() * f.lipschitz();
        let r = area_formula_check(&f, |_| 1.0, rho).unwrap();
        assert!((r.lhs - 2.0).abs() < 5e-3, "lhs {}", r.lhs);
        assert!((r.rhs - 2.0).abs() < 5e-3, "rhs {}", r.rhs);
    }

    #[test]
    fn area_formula_fold_counts_multiplicity_two() {
        let f = SampledMap::from_function(1, 4001, MetricTarget::euclidean(1), |p| {
            vec![(2.0 * p[0] - 1.0).abs()]
        })
        .unwrap();
        let rho = 3.0 * f.domain().spacing() * f.lipschitz();
        let r = area_formula_check(&f, |_| 1.0, rho).unwrap();
        assert!((r.lhs - 2.0).abs() < 5e-3, "lhs {}", r.lhs);
        assert!(r.gap / r.rhs <= 1e-2, "rhs {} gap {}", r.rhs, r.gap);
    }

    #[test]
    fn area_formula_constant_map() {
        let f =
            SampledMap::from_function(1, 101, MetricTarget::euclidean(1), |_| vec![0.25]).unwrap();
        let r = area_formula_check(&f, |_| 1.0, 0.01).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn area_formula_gap_shrinks_under_refinement() {
        let gap_at = |n: usize| {
            let f = SampledMap::from_function(1, n, MetricTarget::euclidean(1), |p| {
                vec![(2.0 * p[0] - 1.0).abs()]
            })
            .unwrap();
            // fixed rho across refinements
            let r = area_formula_check(&f, |_| 1.0, 0.01).unwrap();
            r.gap
        };
        let g1 = gap_at(1001);
        let g2 = gap_at(2001);
        assert!(g2 <= g1 + 1e-9, "gap grew: {g1} -> {g2}");
    }

    #[test]
    fn coarea_of_coordinate_function() {
        let f =
            SampledMap::from_function(2, 201, MetricTarget::euclidean(1), |p| vec![p[0]]).unwrap();
        let r = coarea_check(&f, None).unwrap();
        assert!(r.gap <= 1e-2, "lhs {} rhs {} gap {}", r.lhs, r.rhs, r.gap);
        assert!((r.lhs - 1.0).abs() < 2e-2);
    }

    #[test]
    fn coarea_of_quadratic() {
        let f =
            SampledMap::from_function(2, 201, MetricTarget::euclidean(1), |p| vec![p[0] * p[0]])
                .unwrap();
        let r = coarea_check(&f, None).unwrap();
        assert!(r.gap <= 1e-2, "lhs {} rhs {} gap {}", r.lhs, r.rhs, r.gap);
    }

    #[test]
    fn coarea_of_constant_map() {
        let f =
            SampledMap::from_function(2, 21, MetricTarget::euclidean(1), |_| vec![0.5]).unwrap();
        let r = coarea_check(&f, None).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn coarea_banach_indicatrix_on_the_line() {
        // d = 1, m = 0: the fiber integral is the Banach indicatrix, whose
        // integral is the total variation = integral of |F'|
        let f = SampledMap::from_function(1, 2001, MetricTarget::euclidean(1), |p| {
            vec![(2.0 * p[0] - 1.0).abs()]
        })
        .unwrap();
        let r = coarea_check(&f, None).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-2, "lhs {}", r.lhs);
        assert!(r.gap < 2e-2, "gap {}", r.gap);
    }

    struct Rotation(f64);
    impl PostMap for Rotation {
        fn apply(&self, v: &[f64]) -> Vec<f64> {
            let (s, c) = self.0.sin_cos();
            vec![c * v[0] - s * v[1], s * v[0] + c * v[1]]
        }
        fn target(&self) -> MetricTarget {
            MetricTarget::euclidean(2)
        }
    }

    struct Scaling(f64);
    impl PostMap for Scaling {
        fn apply(&self, v: &[f64]) -> Vec<f64> {
            v.iter().map(|x| self.0 * x).collect()
        }
        fn target(&self) -> MetricTarget {
            MetricTarget::euclidean(2)
        }
    }

    #[test]
    fn length_preservation_rotation_passes() {
        let f = SampledMap::from_function(2, 17, MetricTarget::euclidean(2), |p| {
            vec![p[0] * p[1], p[0] - 0.3 * p[1]]
        })
        .unwrap();
        let r = length_preserving_check(&Rotation(0.7), &f, 1e-9).unwrap();
        assert!(r.hypothesis_holds, "gap {}", r.hypothesis_gap);
        assert!((r.md_agreement_fraction - 1.0).abs() < 1e-12);
        assert!(r.md_max_gap < 1e-12);
        let mi = r.measure_identity.unwrap();
        assert!(mi.gap < 1e-9 * mi.lhs.abs().max(1.0));
    }

    #[test]
    fn length_preservation_scaling_is_flagged() {
        let f =
            SampledMap::from_function(2, 9, MetricTarget::euclidean(2), |p| p.to_vec()).unwrap();
        let r = length_preserving_check(&Scaling(2.0), &f, 1e-6).unwrap();
        assert!(!r.hypothesis_holds);
        assert!(
            (r.hypothesis_gap - 1.0).abs() < 1e-9,
            "ratio-1 {}",
            r.hypothesis_gap
        );
        assert!(r.measure_identity.is_none());
    }
}
