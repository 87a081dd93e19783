//! Independent oracles shared by the integration tests. They re-derive
//! expected values by routes the library does not take: exhaustive
//! enumeration of dyadic antichain covers, and winding-number integration
//! of enclosed area.

#![allow(dead_code)]

use metricfact::content::{cube_cost, DyadicCube, ImageContentOracle};
use metricfact::grid::GridSubset;
use metricfact::sampled_map::SampledMap;

/// All antichain-cover costs of the dyadic subtree rooted at `cube`, down
/// to `max_depth`. Per-child costs are combined with the same pairwise
/// summation tree the DP uses, so the minimum is comparable bit for bit;
/// the covers themselves are enumerated exhaustively.
fn antichain_costs(
    map: &SampledMap,
    subset: &GridSubset,
    cube: &DyadicCube,
    n: usize,
    m: usize,
    max_depth: u32,
    oracle: Option<ImageContentOracle<'_>>,
) -> Vec<f64> {
    let own = cube_cost(map, subset, cube, n, m, oracle).expect("cube cost");
    if cube.depth == max_depth {
        return vec![own];
    }
    let child_costs: Vec<Vec<f64>> = cube
        .children()
        .iter()
        .map(|c| antichain_costs(map, subset, c, n, m, max_depth, oracle))
        .collect();
    // cartesian product over child choices
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for costs in &child_costs {
        let mut next = Vec::with_capacity(combos.len() * costs.len());
        for combo in &combos {
            for &c in costs {
                let mut extended = combo.clone();
                extended.push(c);
                next.push(extended);
            }
        }
        combos = next;
    }
    let mut out: Vec<f64> = combos.iter().map(|c| pairwise_sum(c)).collect();
    out.push(own);
    out
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        k => pairwise_sum(&xs[..k / 2]) + pairwise_sum(&xs[k / 2..]),
    }
}

/// Minimum cost over every dyadic antichain cover, by brute force.
pub fn brute_force_mapping_content(
    map: &SampledMap,
    subset: &GridSubset,
    n: usize,
    m: usize,
    max_depth: u32,
    oracle: Option<ImageContentOracle<'_>>,
) -> f64 {
    let root = DyadicCube::root(map.domain().dim());
    antichain_costs(map, subset, &root, n, m, max_depth, oracle)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Oriented area by winding-number integration: integrates the winding
/// number of the closed polyline over a pixel grid covering its bounding
/// box. Independent of the shoelace route.
pub fn winding_number_area(points: &[Vec<f64>], pixels_per_axis: usize) -> f64 {
    let k = points.len() - 1; // closing node duplicated
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &points[..k] {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let pad_x = (xmax - xmin) * 0.01 + 1e-9;
    let pad_y = (ymax - ymin) * 0.01 + 1e-9;
    xmin -= pad_x;
    xmax += pad_x;
    ymin -= pad_y;
    ymax += pad_y;
    let dx = (xmax - xmin) / pixels_per_axis as f64;
    let dy = (ymax - ymin) / pixels_per_axis as f64;
    let mut total = 0.0;
    for i in 0..pixels_per_axis {
        for j in 0..pixels_per_axis {
            let px = xmin + (i as f64 + 0.5) * dx;
            let py = ymin + (j as f64 + 0.5) * dy;
            // winding number by summed signed angles
            let mut angle = 0.0;
            for s in 0..k {
                let ax = points[s][0] - px;
                let ay = points[s][1] - py;
                let bx = points[(s + 1) % k][0] - px;
                let by = points[(s + 1) % k][1] - py;
                angle += (ax * by - ay * bx).atan2(ax * bx + ay * by);
            }
            let winding = (angle / (2.0 * std::f64::consts::PI)).round();
            total += winding * dx * dy;
        }
    }
    total
}
