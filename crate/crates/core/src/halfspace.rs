//! Exact volume of centrally symmetric polytopes `{x : |a_i . x| <= 1}` in
//! dimension 1, 2, and 3.
//!
//! The polytope is described by half-spaces only; no vertex enumeration is
//! performed. Each facet lies on a plane `c . x = 1` for some directed normal
//! `c` in `{a_i, -a_i}`, and with the origin interior the volume decomposes as
//!
//! ```text
//!   vol = (1/n) * sum over facets of dist(0, facet plane) * H^{n-1}(facet)
//! ```
//!
//! Facet measures come from clipping the plane against the remaining
//! constraints: an interval intersection in 2D, a Sutherland-Hodgman polygon
//! clip in 3D. Redundant constraints clip to empty facets and contribute 0,
//! so no irredundancy preprocessing is needed.

use crate::error::{Error, Result};
use crate::vecmath::{dot, norm2};

const DEDUP_REL_TOL: f64 = 1e-9;

/// Directed constraints `c . x <= 1`, one pair per input row, with exact
/// duplicates (same plane) removed so facets are not double counted.
fn directed_constraints(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let nrm = norm2(row);
        if nrm <= f64::MIN_POSITIVE {
            continue; // zero row constrains nothing
        }
        for sign in [1.0, -1.0] {
            let c: Vec<f64> = row.iter().map(|v| sign * v).collect();
            let dup = out.iter().any(|d| {
                d.iter()
                    .zip(&c)
                    .all(|(x, y)| (x - y).abs() <= DEDUP_REL_TOL * nrm)
            });
            if !dup {
                out.push(c);
            }
        }
    }
    out
}

/// Exact volume of `{x in R^n : |a_i . x| <= 1 for all i}`.
///
/// Supported for `n <= 3`; the rows must span `R^n`, otherwise the set is
/// unbounded and an error is returned. Callers that want the Jacobian
/// convention (rank-deficient => 0) should check the rank first.
pub fn symmetric_polytope_volume(rows: &[Vec<f64>], n: usize) -> Result<f64> {
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!(
            "exact polytope volume implemented for n in 1..=3, got {n}"
        )));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
    }
    let cons = directed_constraints(rows);
    match n {
        1 => {
            let amax = cons.iter().map(|c| c[0].abs()).fold(0.0, f64::max);
            if amax <= f64::MIN_POSITIVE {
                return Err(Error::InvalidInput("unbounded polytope (rank 0)".into()));
            }
            Ok(2.0 / amax)
        }
        2 => volume_2d(&cons),
        _ => volume_3d(&cons),
    }
}

fn volume_2d(cons: &[Vec<f64>]) -> Result<f64> {
    let mut area = 0.0;
    let mut bounded_dirs = 0usize;
    for c in cons {
        let nc = norm2(c);
        // facet on the line c.x = 1, parameterized p + t*d with d _|_ c
        let p = [c[0] / (nc * nc), c[1] / (nc * nc)];
        let d = [-c[1] / nc, c[0] / nc];
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for other in cons {
            if std::ptr::eq(other, c) {
                continue;
            }
            // other . (p + t d) <= 1
            let slope = dot(other, &d);
            let offset = 1.0 - dot(other, &p);
            if slope.abs() <= 1e-15 * norm2(other) {
                if offset < 0.0 {
                    lo = 1.0;
                    hi = 0.0;
                    break;
                }
            } else if slope > 0.0 {
                hi = hi.min(offset / slope);
            } else {
                lo = lo.max(offset / slope);
            }
        }
        if hi > lo {
            if !(hi.is_finite() && lo.is_finite()) {
                return Err(Error::InvalidInput(
                    "unbounded polytope (rows do not span R^2)".into(),
                ));
            }
            area += 0.5 * (1.0 / nc) * (hi - lo);
            bounded_dirs += 1;
        }
    }
    if bounded_dirs < 3 {
        return Err(Error::InvalidInput(
            "unbounded polytope (rows do not span R^2)".into(),
        ));
    }
    Ok(area)
}

fn volume_3d(cons: &[Vec<f64>]) -> Result<f64> {
    // seed square side for in-plane clipping; anything containing the
    // bounded polytope's facets works, so take a crude norm bound
    let min_norm = cons.iter().map(|c| norm2(c)).fold(f64::INFINITY, f64::min);
    if !min_norm.is_finite() || min_norm <= f64::MIN_POSITIVE {
        return Err(Error::InvalidInput("degenerate constraint set".into()));
    }
    let seed = 4.0 / min_norm + 4.0;

    let mut vol = 0.0;
    let mut any_facet = false;
    for c in cons {
        let nc = norm2(c);
        let p0: Vec<f64> = c.iter().map(|v| v / (nc * nc)).collect();
        let (u, v) = plane_basis(c);
        // start polygon: the big square [-seed, seed]^2 in (u,v) coordinates
        let mut poly: Vec<[f64; 2]> =
            vec![[-seed, -seed], [seed, -seed], [seed, seed], [-seed, seed]];
        for other in cons {
            if std::ptr::eq(other, c) {
                continue;
            }
            // other . (p0 + s u + t v) <= 1  ~  alpha*s + beta*t <= gamma
            let alpha = dot(other, &u);
            let beta = dot(other, &v);
            let gamma = 1.0 - dot(other, &p0);
            poly = clip_polygon(&poly, alpha, beta, gamma);
            if poly.is_empty() {
                break;
            }
        }
        let a = polygon_area(&poly);
        if a > 0.0 {
            // a facet clipped only by the seed square means the polytope leaks
            let max_coord = poly
                .iter()
                .flat_map(|p| p.iter())
                .fold(0.0_f64, |m, x| m.max(x.abs()));
            if max_coord >= seed * 0.999 {
                return Err(Error::InvalidInput(
                    "unbounded polytope (rows do not span R^3)".into(),
                ));
            }
            vol += (1.0 / nc) * a / 3.0;
            any_facet = true;
        }
    }
    if !any_facet {
        return Err(Error::InvalidInput(
            "unbounded polytope (rows do not span R^3)".into(),
        ));
    }
    Ok(vol)
}

/// Orthonormal basis of the plane orthogonal to `c` (len 3).
fn plane_basis(c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = norm2(c);
    let w = [c[0] / n, c[1] / n, c[2] / n];
    let pick = if w[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut u = [
        pick[1] * w[2] - pick[2] * w[1],
        pick[2] * w[0] - pick[0] * w[2],
        pick[0] * w[1] - pick[1] * w[0],
    ];
    let un = norm2(&u);
    u.iter_mut().for_each(|x| *x /= un);
    let v = [
        w[1] * u[2] - w[2] * u[1],
        w[2] * u[0] - w[0] * u[2],
        w[0] * u[1] - w[1] * u[0],
    ];
    (u.to_vec(), v.to_vec())
}

/// Sutherland-Hodgman clip of a convex polygon by `alpha*s + beta*t <= gamma`.
fn clip_polygon(poly: &[[f64; 2]], alpha: f64, beta: f64, gamma: f64) -> Vec<[f64; 2]> {
    if poly.is_empty() {
        return Vec::new();
    }
    if alpha == 0.0 && beta == 0.0 {
        return if gamma >= 0.0 {
            poly.to_vec()
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::with_capacity(poly.len() + 2);
    let inside = |p: &[f64; 2]| alpha * p[0] + beta * p[1] <= gamma;
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let cin = inside(&cur);
        let nin = inside(&nxt);
        if cin {
            out.push(cur);
        }
        if cin != nin {
            let fc = alpha * cur[0] + beta * cur[1] - gamma;
            let fn_ = alpha * nxt[0] + beta * nxt[1] - gamma;
            let t = fc / (fc - fn_);
            out.push([
                cur[0] + t * (nxt[0] - cur[0]),
                cur[1] + t * (nxt[1] - cur[1]),
            ]);
        }
    }
    out
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    (s * 0.5).abs()
}
