//! Cross-module properties: stability of the dyadic content under null-set
//! removal, the content-vs-density bound, and factorization diagnostics on
//! the plateau example.

mod common;

use metricfact::builtin::{builtin_map, builtin_oracle, example_plateau};
use metricfact::content::{cube_cost, density, mapping_content_dp, verify_cover, DyadicCube};
use metricfact::grid::GridSubset;
use metricfact::quotient::{
    factor_check, four_point_defect, pullback_metric, quotient, quotient_speed_agreement,
    recompute_defect,
};
use metricfact::sampled_map::SampledMap;
use metricfact::target::MetricTarget;

/// Removing one grid slab changes the DP value by no more than the total
/// cost of the max-depth cubes meeting the slab, and that budget shrinks
/// with depth for rank-deficient maps.
#[test]
fn null_set_stability_of_mapping_content() {
    let map = builtin_map("coordinate", 3, 17).unwrap();
    let full = GridSubset::full(map.domain());
    let slab_axis = 1usize;
    let slab_layer = 8usize;
    let cut = full.minus_slab(map.domain(), slab_axis, slab_layer);
    let mut budgets = Vec::new();
    for depth in [2u32, 3, 4] {
        let v_full = mapping_content_dp(&map, &full, 2, 1, depth, None)
            .unwrap()
            .value;
        let v_cut = mapping_content_dp(&map, &cut, 2, 1, depth, None)
            .unwrap()
            .value;
        assert!(v_cut <= v_full + 1e-12, "monotone in E at depth {depth}");
        // per-cube budget: max-depth cubes whose closure meets the slab
        let mut budget = 0.0;
        let side = 1usize << depth;
        let mut stack = vec![DyadicCube::root(3)];
        while let Some(c) = stack.pop() {
            if c.depth < depth {
                stack.extend(c.children());
                continue;
            }
            let meets_slab = c
                .grid_points(map.domain())
                .iter()
                .any(|&i| map.domain().multi_index(i)[slab_axis] == slab_layer);
            if meets_slab {
                budget += cube_cost(&map, &full, &c, 2, 1, None).unwrap();
            }
        }
        assert!(
            v_full - v_cut <= budget + 1e-12,
            "depth {depth}: gap {} exceeds budget {budget}",
            v_full - v_cut
        );
        assert!(side >= 4);
        budgets.push(budget);
    }
    assert!(
        budgets[2] < budgets[0],
        "slab budget should shrink with depth: {budgets:?}"
    );
}

/// Desk-scale version of the content-vs-lower-density bound: the DP value
/// is at most a fixed constant times the mean lower density over the cube.
#[test]
fn mapping_content_bounded_by_mean_lower_density() {
    const C: f64 = 40.0;
    for name in ["constant", "coordinate", "projection"] {
        let map = builtin_map(name, 3, 17).unwrap();
        let subset = GridSubset::full(map.domain());
        let value = mapping_content_dp(&map, &subset, 2, 1, 3, None)
            .unwrap()
            .value;
        // mean lower 2-density over a deterministic interior sample
        let radii = [0.42, 0.39, 0.36];
        let mut sum = 0.0;
        let mut count = 0;
        for idx in [[8usize, 8, 8], [7, 8, 9], [9, 7, 8], [8, 9, 7]] {
            let p = map.domain().linear_index(&idx);
            let est = density(&map, p, 2, &radii).unwrap();
            sum += est.lower;
            count += 1;
        }
        let mean_lower = sum / count as f64;
        assert!(
            value <= C * mean_lower + 1e-9,
            "{name}: content {value} vs C * mean density {}",
            C * mean_lower
        );
    }
}

/// The stored cover of a DP report re-validates: it covers the subset and
/// its recomputed cost equals the reported value.
#[test]
fn dp_cover_revalidates_on_builtins() {
    for name in ["coordinate", "sine"] {
        let map = builtin_map(name, 3, 9).unwrap();
        let subset = GridSubset::full(map.domain());
        let report = mapping_content_dp(&map, &subset, 2, 1, 2, None).unwrap();
        let recomputed = verify_cover(&map, &subset, 2, 1, &report, None).unwrap();
        assert!(
            (recomputed - report.value).abs() <= 1e-12 * report.value.max(1.0),
            "{name}: {recomputed} vs {}",
            report.value
        );
    }
    // oracle-backed cover revalidates with the same oracle
    let map = builtin_map("projection", 3, 9).unwrap();
    let subset = GridSubset::full(map.domain());
    let oracle = builtin_oracle("projection", 2).unwrap();
    let report = mapping_content_dp(&map, &subset, 2, 1, 3, Some(&oracle)).unwrap();
    let recomputed = verify_cover(&map, &subset, 2, 1, &report, Some(&oracle)).unwrap();
    assert_eq!(recomputed, report.value);
    // proper subsets revalidate too
    let cut = subset.minus_slab(map.domain(), 2, 4);
    let report = mapping_content_dp(&map, &cut, 2, 1, 2, None).unwrap();
    let recomputed = verify_cover(&map, &cut, 2, 1, &report, None).unwrap();
    assert!((recomputed - report.value).abs() <= 1e-12 * report.value.max(1.0));
}

/// Plateau-map factorization: psi is L-Lipschitz, phi does not expand, the
/// composition reproduces the map within the gluing slack, and the quotient
/// preserves directional speeds.
#[test]
fn plateau_factorization_diagnostics() {
    let n = 301usize;
    let map = example_plateau(n).unwrap();
    let h = map.domain().spacing();
    let pm = pullback_metric(&map);
    let mut z = quotient(&map, &pm, 2.0 * h).unwrap();
    let report = factor_check(&map, &mut z, 24, 11).unwrap();
    assert!(
        report.max_psi_ratio <= 1.0 + 1e-9,
        "psi ratio {}",
        report.max_psi_ratio
    );
    assert!(
        report.max_phi_ratio <= 1.0 + 1e-9,
        "phi ratio {}",
        report.max_phi_ratio
    );
    // glued pairs all live on the plateau, whose image is a single point
    assert!(report.max_glued_image_spread <= 1e-12);
    assert!(
        report.max_reproduction_error <= 4.0 * h,
        "repro {}",
        report.max_reproduction_error
    );

    let speed_gap = quotient_speed_agreement(&map, &mut z, 200, 7).unwrap();
    assert!(
        speed_gap <= 10.0 * h * map.lipschitz() + 1e-12,
        "speed gap {speed_gap}"
    );
}

/// Across the plateau the pullback distance vanishes: the image of any
/// path inside it has zero length.
#[test]
fn plateau_pullback_distance_vanishes_on_plateau() {
    let n = 3001usize;
    let map = example_plateau(n).unwrap();
    let mut pm = pullback_metric(&map);
    // domain points 1/3 and 2/3 bound the plateau
    let d = pm.distance(1000, 2000);
    assert!(d <= 1e-12, "plateau pullback distance {d}");
    // identity segment telescopes exactly
    let full = pm.distance(0, n - 1);
    assert!((full - 2.0).abs() <= 1e-9, "total image length {full}");
}

/// The four-point witness recomputes to the reported defect exactly
/// whenever the verdict is not-tree.
#[test]
fn not_tree_witness_is_sound() {
    let map = builtin_map("identity2", 2, 17).unwrap();
    let h = map.domain().spacing();
    let pm = pullback_metric(&map);
    let mut z = quotient(&map, &pm, h / 2.0).unwrap();
    let fp = four_point_defect(&mut z, 2000, 9).unwrap();
    assert!(fp.defect > 0.1);
    let again = recompute_defect(&mut z, &fp.witness);
    assert_eq!(again, fp.defect);
}

/// The coarea identity also holds with two-dimensional fibers: a coordinate
/// function on the cube has plane fibers of measure (1-h)^2.
#[test]
fn coarea_with_plane_fibers() {
    let gaps: Vec<f64> = [17usize, 33]
        .iter()
        .map(|&n| {
            let map = SampledMap::from_function(3, n, MetricTarget::euclidean(1), |p| vec![p[0]])
                .unwrap();
            let r = metricfact::area::coarea_check(&map, None).unwrap();
            let h = map.domain().spacing();
            assert!(
                r.gap <= 2.4 * h,
                "N={n}: lhs {} rhs {} gap {}",
                r.lhs,
                r.rhs,
                r.gap
            );
            r.gap
        })
        .collect();
    assert!(
        gaps[1] < gaps[0],
        "gap should shrink with refinement: {gaps:?}"
    );
}

/// Oracle targets flow through the landmark embedding into rank fields.
#[test]
fn oracle_target_rank_field_through_embedding() {
    use metricfact::target::MetricTarget;
    use std::sync::Arc;
    let target = MetricTarget::Oracle {
        dist: Arc::new(|a: &[f64], b: &[f64]| (a[0] - b[0]).abs()),
        dim: 1,
    };
    let map = SampledMap::from_function(2, 17, target, |p| vec![p[0]]).unwrap();
    let (view, info) = map.sup_view(16).unwrap();
    let info = info.expect("oracle targets must embed");
    assert!(info.covering_radius <= 1.0 / 15.0 + 1e-12);
    let field = metricfact::sampled_map::rank_field(
        &view,
        metricfact::sampled_map::default_rank_threshold(&view),
    )
    .unwrap();
    assert_eq!(field.fractions[1], 1.0);
}

/// The plateau quotient matches the collapsed image interval pointwise:
/// distances from the origin class reproduce the piecewise profile.
#[test]
fn plateau_quotient_profile_is_isometric() {
    let n = 301usize;
    let map = example_plateau(n).unwrap();
    let h = map.domain().spacing();
    let pm = pullback_metric(&map);
    let mut z = quotient(&map, &pm, 2.0 * h).unwrap();
    let profile = |s: f64| -> f64 {
        let u = 3.0 * s;
        if u <= 1.0 {
            u
        } else if u <= 2.0 {
            1.0
        } else {
            u - 1.0
        }
    };
    let origin = z.psi(0);
    for k in [30usize, 90, 105, 150, 195, 210, 270, 300] {
        let s = k as f64 * h;
        let d = z.distance(origin, z.psi(k));
        assert!(
            (d - profile(s)).abs() <= 4.0 * h,
            "s={s}: quotient distance {d} vs profile {}",
            profile(s)
        );
    }
}

/// Two-grid consistency: the sine map keeps rank <= 1 everywhere and its
/// quotient defect stays at the floating floor across refinements.
#[test]
fn rank_one_map_consistency_across_refinement() {
    use metricfact::sampled_map::{default_rank_threshold, rank_field};
    for n in [17usize, 33] {
        let map = SampledMap::from_function(2, n, MetricTarget::euclidean(1), |p| {
            vec![(3.0 * p[0]).sin()]
        })
        .unwrap();
        let field = rank_field(&map, default_rank_threshold(&map)).unwrap();
        assert!(field.fraction_rank_at_most(1) >= 1.0 - 1e-12, "N = {n}");
    }
}
