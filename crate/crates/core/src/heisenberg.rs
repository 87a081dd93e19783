//! Heisenberg-group arithmetic, horizontal curves and lifts, projected
//! lengths, and the projection area formula for one-rectifiable sets.
//!
//! Points of the group live in `R^n x R^n x R` with the product
//!
//! ```text
//!   (x, y, t) * (x', y', t') = (x + x', y + y', t + t' + 2 sum_j (y_j x'_j - x_j y'_j))
//! ```
//!
//! A curve is horizontal when `dt = 2 sum_j (y_j dx_j - x_j dy_j)` along it;
//! for such curves, length in the Carnot-Caratheodory metric equals the
//! Euclidean length of the `(x, y)` projection, and every length here is
//! computed through that identity. Point-to-point CC distance (a geodesic
//! problem) is deliberately not provided.

use std::collections::BTreeMap;

use crate::area::{Curve, CurveMetric, IdentityReport};
use crate::error::{Error, Result};
use crate::vecmath::euclid_dist;

/// Default horizontality tolerance per unit of parameter span.
pub const HORIZONTALITY_TOL: f64 = 1e-6;

/// A point `(x, y, t)` of the n-th Heisenberg group.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl HeisenbergPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite("Heisenberg point".into()));
        }
        Ok(Self { x, y, t })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }

    /// Flat coordinates `(x_1..x_n, y_1..y_n, t)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.x.clone();
        out.extend_from_slice(&self.y);
        out.push(self.t);
        out
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() < 3 || flat.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "flat Heisenberg point needs odd length >= 3, got {}",
                flat.len()
            )));
        }
        let n = (flat.len() - 1) / 2;
        Self::new(flat[..n].to_vec(), flat[n..2 * n].to_vec(), flat[2 * n])
    }
}

/// The group product.
pub fn group_mul(p: &HeisenbergPoint, q: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: q.n(),
        });
    }
    let twist: f64 = (0..p.n()).map(|j| p.y[j] * q.x[j] - p.x[j] * q.y[j]).sum();
    HeisenbergPoint::new(
        p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect(),
        p.y.iter().zip(&q.y).map(|(a, b)| a + b).collect(),
        p.t + q.t + 2.0 * twist,
    )
}

/// Lifts a planar polyline in `R^{2n}` to a horizontal polyline in the
/// group, starting at height `t0`.
///
/// The `t`-increment per segment is `2 sum_j (ybar_j dx_j - xbar_j dy_j)`
/// with midpoint values, which integrates the contact form exactly along
/// each chord; projecting the lift reproduces the input bit for bit.
pub fn horizontal_lift(planar: &Curve, t0: f64) -> Result<Curve> {
    if !planar.dim().is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "planar curve dimension must be even (R^{2n})".into(),
        ));
    }
    if !t0.is_finite() {
        return Err(Error::NonFinite("lift base height".into()));
    }
    let n = planar.dim() / 2;
    let mut t = t0;
    let mut points = Vec::with_capacity(planar.len());
    for (k, p) in planar.points().iter().enumerate() {
        if k > 0 {
            let prev = &planar.points()[k - 1];
            t += lift_increment(prev, p, n);
        }
        let mut flat = p.clone();
        flat.push(t);
        points.push(flat);
    }
    Curve::new(
        planar.params().to_vec(),
        points,
        CurveMetric::HeisenbergProjection,
    )
}

fn lift_increment(a: &[f64], b: &[f64], n: usize) -> f64 {
    let mut inc = 0.0;
    for j in 0..n {
        let xm = 0.5 * (a[j] + b[j]);
        let ym = 0.5 * (a[n + j] + b[n + j]);
        inc += ym * (b[j] - a[j]) - xm * (b[n + j] - a[n + j]);
    }
    2.0 * inc
}

/// Drops the `t` coordinate, returning the planar projection.
pub fn project(curve: &Curve) -> Result<Curve> {
    let dim = curve.dim();
    if dim.is_multiple_of(2) || dim < 3 {
        return Err(Error::InvalidInput(
            "expected a Heisenberg curve with odd dimension >= 3".into(),
        ));
    }
    let points: Vec<Vec<f64>> = curve
        .points()
        .iter()
        .map(|p| p[..dim - 1].to_vec())
        .collect();
    Curve::new(curve.params().to_vec(), points, CurveMetric::Euclidean)
}

/// Maximum per-segment violation of the contact condition, normalized by
/// the parameter step: `|dt - 2 sum (ybar dx - xbar dy)| / ds`.
pub fn horizontality_defect(curve: &Curve) -> Result<f64> {
    let dim = curve.dim();
    if dim.is_multiple_of(2) || dim < 3 {
        return Err(Error::InvalidInput(
            "expected a Heisenberg curve with odd dimension >= 3".into(),
        ));
    }
    let n = (dim - 1) / 2;
    let mut worst: f64 = 0.0;
    for k in 1..curve.len() {
        let a = &curve.points()[k - 1];
        let b = &curve.points()[k];
        let ds = curve.params()[k] - curve.params()[k - 1];
        let dt = b[dim - 1] - a[dim - 1];
        let expected = lift_increment(&a[..dim - 1], &b[..dim - 1], n);
        worst = worst.max((dt - expected).abs() / ds);
    }
    Ok(worst)
}

/// Carnot-Caratheodory length through the projection identity, with the
/// horizontality defect attached.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CcLength {
    pub value: f64,
    pub defect: f64,
    /// True when the defect is within tolerance; a false flag means the
    /// curve moves vertically and the projected length undercounts.
    pub horizontal: bool,
}

/// Euclidean length of the projection, flagged by the horizontality defect
/// against `tol` per unit of parameter span (defaults available via
/// [`HORIZONTALITY_TOL`]).
pub fn cc_length(curve: &Curve, tol: f64) -> Result<CcLength> {
    let defect = horizontality_defect(curve)?;
    let span = curve.params()[curve.len() - 1] - curve.params()[0];
    let value = project(curve)?.length();
    Ok(CcLength {
        value,
        defect,
        horizontal: defect <= tol * span.max(1.0),
    })
}

/// Verifies the projection area formula on a union of horizontal curves:
/// the arc-length integral of `g` over the curves equals the integral over
/// the projected set of the multiplicity-weighted `g`.
///
/// The right side partitions the projected point cloud into cells of size
/// `rho`; within a cell, branches are runs of consecutive segments of one
/// curve (different curves are always distinct branches), the cell measure
/// is the branch-averaged clipped projected length, and the weight is the
/// sum of branch-mean `g` values. Non-horizontal inputs are rejected since
/// the identity needs the projection to preserve lengths.
pub fn projection_area_formula_check(
    curves: &[Curve],
    g: impl Fn(&[f64]) -> f64,
    rho: f64,
) -> Result<IdentityReport> {
    if rho <= 0.0 {
        return Err(Error::InvalidInput(
            "clustering radius must be positive".into(),
        ));
    }
    let mut lhs = 0.0;
    // per cell: ((curve, segment), clipped length, g-weighted length)
    type CellEntries = Vec<((usize, usize), f64, f64)>;
    let mut cells: BTreeMap<Vec<i64>, CellEntries> = BTreeMap::new();
    for (ci, curve) in curves.iter().enumerate() {
        let defect = horizontality_defect(curve)?;
        let span = curve.params()[curve.len() - 1] - curve.params()[0];
        if defect > HORIZONTALITY_TOL * span.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "curve {ci} is not horizontal (defect {defect})"
            )));
        }
        let proj = project(curve)?;
        let dim = proj.dim();
        for s in 0..proj.len() - 1 {
            let a = &proj.points()[s];
            let b = &proj.points()[s + 1];
            let seg_len = euclid_dist(a, b);
            let gmid = 0.5 * (g(&curve.points()[s]) + g(&curve.points()[s + 1]));
            lhs += gmid * seg_len;
            if seg_len == 0.0 {
                continue;
            }
            let chunks = (seg_len / rho).ceil().max(1.0) as usize * 2;
            let mut acc: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
            for c in 0..chunks {
                let t = (c as f64 + 0.5) / chunks as f64;
                let p: Vec<i64> = (0..dim)
                    .map(|k| ((a[k] + t * (b[k] - a[k])) / rho).floor() as i64)
                    .collect();
                *acc.entry(p).or_insert(0.0) += seg_len / chunks as f64;
            }
            for (cell, len) in acc {
                cells
                    .entry(cell)
                    .or_default()
                    .push(((ci, s), len, gmid * len));
            }
        }
    }
    let mut rhs = 0.0;
    for entries in cells.values() {
        let mut keys: Vec<(usize, usize)> = entries.iter().map(|e| e.0).collect();
        keys.sort_unstable();
        keys.dedup();
        // branch id per key: new branch at curve changes or segment gaps
        let mut branch_of = BTreeMap::new();
        let mut branch = 0usize;
        for w in 0..keys.len() {
            if w > 0 && (keys[w].0 != keys[w - 1].0 || keys[w].1 > keys[w - 1].1 + 1) {
                branch += 1;
            }
            branch_of.insert(keys[w], branch);
        }
        let n_branches = branch + 1;
        let mut blen = vec![0.0; n_branches];
        let mut bg = vec![0.0; n_branches];
        for (key, len, gw) in entries {
            let b = branch_of[key];
            blen[b] += len;
            bg[b] += gw;
        }
        let measure = blen.iter().sum::<f64>() / n_branches as f64;
        let gsum: f64 = (0..n_branches)
            .map(|b| if blen[b] > 0.0 { bg[b] / blen[b] } else { 0.0 })
            .sum();
        rhs += measure * gsum;
    }
    Ok(IdentityReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}
