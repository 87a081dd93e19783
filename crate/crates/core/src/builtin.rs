//! Builtin sampled maps with closed-form structure, so tests and the CLI
//! never depend on external data.

use std::f64::consts::PI;

use crate::area::{Curve, CurveMetric};
use crate::content::DyadicCube;
use crate::error::{Error, Result};
use crate::heisenberg::horizontal_lift;
use crate::sampled_map::SampledMap;
use crate::target::MetricTarget;

/// Names of the builtin maps, for registries and CLIs.
pub const BUILTIN_NAMES: &[&str] = &[
    "constant",
    "coordinate",
    "quadratic",
    "projection",
    "fold",
    "sine",
    "identity2",
    "circle",
    "spiral",
    "example-plateau",
];

/// Constructs a builtin map by name on a `points_per_axis` grid.
///
/// Domain dimensions are intrinsic to some maps (`projection` is 3-D,
/// `identity2` 2-D, `spiral`/`circle`/`example-plateau` 1-D); for the others
/// `dim` picks the domain dimension.
pub fn builtin_map(name: &str, dim: usize, points_per_axis: usize) -> Result<SampledMap> {
    match name {
        "constant" => {
            SampledMap::from_function(dim, points_per_axis, MetricTarget::euclidean(1), |_| {
                vec![0.5]
            })
        }
        "coordinate" => {
            SampledMap::from_function(dim, points_per_axis, MetricTarget::euclidean(1), |p| {
                vec![p[0]]
            })
        }
        "quadratic" => {
            SampledMap::from_function(dim, points_per_axis, MetricTarget::euclidean(1), |p| {
                vec![p[0] * p[0]]
            })
        }
        "projection" => {
            SampledMap::from_function(3, points_per_axis, MetricTarget::euclidean(2), |p| {
                vec![p[0], p[1]]
            })
        }
        "fold" => {
            SampledMap::from_function(dim, points_per_axis, MetricTarget::euclidean(1), |p| {
                vec![(2.0 * p[0] - 1.0).abs()]
            })
        }
        "sine" => {
            SampledMap::from_function(dim, points_per_axis, MetricTarget::euclidean(1), |p| {
                vec![(3.0 * p[0]).sin()]
            })
        }
        "identity2" => {
            SampledMap::from_function(2, points_per_axis, MetricTarget::euclidean(2), |p| {
                p.to_vec()
            })
        }
        "circle" => {
            SampledMap::from_function(1, points_per_axis, MetricTarget::euclidean(2), |p| {
                let t = 2.0 * PI * p[0];
                vec![t.cos() / (2.0 * PI), t.sin() / (2.0 * PI)]
            })
        }
        "spiral" => spiral_lift(points_per_axis),
        "example-plateau" => example_plateau(points_per_axis),
        _ => Err(Error::InvalidInput(format!(
            "unknown builtin map '{name}' (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// Exact image-content oracle for a builtin map at content order `n`, when
/// the image geometry has a closed form.
///
/// - `projection` with `n = 2`: the image of a cube of side `s` is an
///   `s x s` square, content `s^2`.
/// - rank-deficient builtins (`constant`, `coordinate`, `fold`, `sine`)
///   with `n = 2`: images of cubes are points or arcs, content 0.
pub fn builtin_oracle(name: &str, n: usize) -> Option<fn(&DyadicCube) -> f64> {
    match (name, n) {
        ("projection", 2) => Some(|cube| {
            let s = cube.side();
            s * s
        }),
        ("constant" | "coordinate" | "quadratic" | "fold" | "sine", 2) => Some(|_| 0.0),
        _ => None,
    }
}

/// The planar spiral used by the lift checks: radius growing linearly with
/// two full turns.
pub fn planar_spiral(samples: usize) -> Curve {
    let params: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let points: Vec<Vec<f64>> = params
        .iter()
        .map(|s| {
            let r = 0.1 + 0.3 * s;
            let th = 4.0 * PI * s;
            vec![r * th.cos(), r * th.sin()]
        })
        .collect();
    Curve::new(params, points, CurveMetric::Euclidean).expect("valid spiral")
}

/// Horizontal lift of the planar spiral as a 1-D sampled map into the
/// first Heisenberg group.
fn spiral_lift(points_per_axis: usize) -> Result<SampledMap> {
    let lift = horizontal_lift(&planar_spiral(points_per_axis), 0.0)?;
    let values: Vec<f64> = lift.points().iter().flatten().copied().collect();
    SampledMap::from_values(
        crate::grid::GridDomain::new(1, points_per_axis)?,
        MetricTarget::Heisenberg { n: 1 },
        values,
    )
}

/// The piecewise map `[0,3] -> [0,2]` (identity, unit plateau, shifted
/// identity) rescaled to the unit domain: `f(s) = plateau(3s)`.
pub fn example_plateau(points_per_axis: usize) -> Result<SampledMap> {
    SampledMap::from_function(1, points_per_axis, MetricTarget::euclidean(1), |p| {
        let u = 3.0 * p[0];
        let v = if u <= 1.0 {
            u
        } else if u <= 2.0 {
            1.0
        } else {
            u - 1.0
        };
        vec![v]
    })
}
