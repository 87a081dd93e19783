//! The condition dashboard: runs every computable factorization criterion
//! on one map and reports a consistency matrix with plots.
//!
//! Conditions (all with `n = 2`, so the domain must be at least
//! two-dimensional):
//!
//! - (a) the quotient is a tree within tolerance (four-point defect and
//!   loop areas),
//! - (b) the metric-derivative rank is at most 1 on almost every interior
//!   point,
//! - (c)/(d) upper and lower 2-density estimates vanish at desk scale,
//! - (e) the dyadic (2, d-2)-mapping content is small,
//! - (f) the arbitrary-cover content upper bound is small.
//!
//! Thresholds are scale-aware and echoed in the report next to the values
//! they judge.

use serde::Serialize;

use metricfact::builtin::builtin_map;
use metricfact::content::{density, mapping_content_dp};
use metricfact::grid::GridSubset;
use metricfact::quotient::{four_point_defect, pullback_metric, quotient, tree_certificate};
use metricfact::sampled_map::{default_rank_threshold, rank_field, SampledMap};
use metricfact::unit_ball_volume;

use crate::config::Config;
use crate::maps::{oracle_for, resolve};
use crate::output::{fmt_f64, OutDir};
use crate::svg::{line_plot, Series};
use crate::{CliError, MapArgs};

#[derive(Serialize)]
struct ConditionRecord {
    value: f64,
    threshold: f64,
    positive: bool,
    parameters: String,
}

#[derive(Serialize)]
struct DashboardDoc {
    map: Option<String>,
    dim: usize,
    grid: usize,
    lipschitz: f64,
    seed: u64,
    depth: u32,
    epsilon: f64,
    tau: f64,
    conditions: ConditionSet,
    consistent: bool,
    verdict: String,
}

#[derive(Serialize)]
struct ConditionSet {
    a_tree: ConditionRecord,
    b_rank_le_1: ConditionRecord,
    c_upper_density: ConditionRecord,
    d_lower_density: ConditionRecord,
    e_mapping_content: ConditionRecord,
    f_hat_content: ConditionRecord,
}

pub fn run(
    cfg: &Config,
    map_args: MapArgs,
    depth: Option<u32>,
    seed: Option<u64>,
    oracle: bool,
    out: Option<String>,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    if resolved.dim < 2 {
        return Err(CliError::Config(
            "dashboard needs a domain of dimension >= 2 (its content conditions use n = 2)".into(),
        ));
    }
    let seed = cfg.resolve(seed, "seed", 0)?;
    let max_depth_allowed = (resolved.grid - 1).ilog2();
    let depth = cfg.resolve(depth, "depth", 4u32.min(max_depth_allowed))?;
    let oracle = oracle || cfg.get("oracle") == Some("true");
    let out_dir = cfg
        .resolve_opt(out, "out")?
        .unwrap_or_else(|| "dashboard-out".to_string());
    let od = OutDir::create(&out_dir)?;

    let map = &resolved.map;
    let d = resolved.dim;
    let n_axis = resolved.grid;
    let h = map.domain().spacing();
    let l = map.lipschitz();

    // (b) rank field
    let (view, _info) = if map.target().is_embedded() {
        (map.clone(), None)
    } else {
        let (v, i) = map.sup_view(64)?;
        (v, Some(i))
    };
    let tau = default_rank_threshold(&view);
    let field = rank_field(&view, tau)?;
    let rank1_fraction = field.fraction_rank_at_most(1);
    let b = ConditionRecord {
        value: rank1_fraction,
        threshold: 0.99,
        positive: rank1_fraction >= 0.99,
        parameters: format!("tau={tau:e}"),
    };

    // (c)/(d) densities over a deterministic interior sample
    let radii = [0.42, 0.39, 0.36];
    let sample = density_sample_points(map, radii[0]);
    let mut upper_sum = 0.0;
    let mut lower_sum = 0.0;
    let mut density_rows = Vec::new();
    let mut density_series = Vec::new();
    for (si, &p) in sample.iter().enumerate() {
        let est = density(map, p, 2, &radii)?;
        upper_sum += est.upper;
        lower_sum += est.lower;
        for (r, ratio) in est.radii.iter().zip(&est.ratios) {
            density_rows.push(format!("{p},{},{}", fmt_f64(*r), fmt_f64(*ratio)));
        }
        density_series.push((
            format!("point {si}"),
            est.radii
                .iter()
                .zip(&est.ratios)
                .map(|(r, q)| (*r, *q))
                .collect::<Vec<_>>(),
        ));
    }
    let mean_upper = upper_sum / sample.len() as f64;
    let mean_lower = lower_sum / sample.len() as f64;
    let density_threshold = 0.3;
    // the smallest ladder rung must stay near the grid scale or the finite
    // sample under-reports full-rank content; flag when it does not
    let resolved_note = if radii[2] / 32.0 >= h / 4.0 {
        ""
    } else {
        " (warning: grid too coarse for the sub-ladder; ratios under-report)"
    };
    let density_params = format!(
        "radii={radii:?} sample_points={}{resolved_note}",
        sample.len()
    );
    let c = ConditionRecord {
        value: mean_upper,
        threshold: density_threshold,
        positive: mean_upper <= density_threshold,
        parameters: density_params.clone(),
    };
    let dd = ConditionRecord {
        value: mean_lower,
        threshold: density_threshold,
        positive: mean_lower <= density_threshold,
        parameters: density_params,
    };

    // (e)/(f) mapping content over depths
    let m_codim = d - 2;
    let ora = oracle_for(&resolved, 2, oracle)?;
    let ora_ref = ora.as_ref().map(|f| f as &dyn Fn(&_) -> f64);
    let subset = GridSubset::full(map.domain());
    let mut depth_values = Vec::new();
    for dep in 0..=depth {
        let v = mapping_content_dp(map, &subset, 2, m_codim, dep, ora_ref)?.value;
        depth_values.push((dep, v));
    }
    let content_value = depth_values.last().expect("nonempty depths").1;
    // threshold: a small fraction of the one-cube trivial bound
    let trivial = unit_ball_volume(2) / 4.0
        * (l * (d as f64).sqrt()).powi(2)
        * (d as f64).sqrt().powi(m_codim as i32);
    let content_threshold = 0.025 * trivial;
    let e = ConditionRecord {
        value: content_value,
        threshold: content_threshold,
        positive: content_value <= content_threshold,
        parameters: format!("depth={depth} oracle={oracle}"),
    };
    let f_cond = ConditionRecord {
        value: content_value,
        threshold: content_threshold,
        positive: content_value <= content_threshold,
        parameters: "upper bound from dyadic covers; lower bound 0".into(),
    };

    // (a) tree certificate; gluing at a tenth of the edge scale separates
    // exact plateaus from genuine motion
    let epsilon = h * l / 10.0;
    let pm = pullback_metric(map);
    let mut z = quotient(map, &pm, epsilon)?;
    let defect_tol = (8.0 * h * l.max(1.0)).min(0.25);
    let area_tol = 0.1;
    let cert = tree_certificate(map, &mut z, 2000, 8, seed, defect_tol, area_tol)?;
    let a = ConditionRecord {
        value: cert.four_point.defect.max(cert.loop_area.max_area),
        threshold: defect_tol.max(area_tol),
        positive: cert.is_tree_within_tolerance,
        parameters: format!(
            "epsilon={epsilon:e} classes={} defect={:e} loop_area={:e}",
            z.num_classes(),
            cert.four_point.defect,
            cert.loop_area.max_area
        ),
    };

    // defect across grid refinements, for the decay plot
    let mut defect_points = Vec::new();
    defect_points.push((h, cert.four_point.defect));
    if let Some(name) = &resolved.name {
        for div in [2usize, 4] {
            if (n_axis - 1) % div == 0 {
                let coarse_n = (n_axis - 1) / div + 1;
                if coarse_n >= 5 {
                    if let Ok(cmap) = builtin_map(name, d, coarse_n) {
                        let ch = cmap.domain().spacing();
                        let cpm = pullback_metric(&cmap);
                        let mut cz = quotient(&cmap, &cpm, ch * cmap.lipschitz() / 10.0)?;
                        let cfp = four_point_defect(&mut cz, 2000, seed)?;
                        defect_points.push((ch, cfp.defect));
                    }
                }
            }
        }
    }
    defect_points.sort_by(|x, y| x.0.total_cmp(&y.0));

    let records = [
        a.positive,
        b.positive,
        c.positive,
        dd.positive,
        e.positive,
        f_cond.positive,
    ];
    let consistent = records.iter().all(|&p| p) || records.iter().all(|&p| !p);
    let verdict = if records.iter().all(|&p| p) {
        "factors-through-tree"
    } else if records.iter().all(|&p| !p) {
        "does-not-factor"
    } else {
        "inconsistent"
    };

    let doc = DashboardDoc {
        map: resolved.name.clone(),
        dim: d,
        grid: n_axis,
        lipschitz: l,
        seed,
        depth,
        epsilon,
        tau,
        conditions: ConditionSet {
            a_tree: a,
            b_rank_le_1: b,
            c_upper_density: c,
            d_lower_density: dd,
            e_mapping_content: e,
            f_hat_content: f_cond,
        },
        consistent,
        verdict: verdict.to_string(),
    };
    od.write_json("dashboard.json", &doc)?;

    od.write_csv("density.csv", "point,radius,ratio", &density_rows)?;
    let depth_rows: Vec<String> = depth_values
        .iter()
        .map(|(dep, v)| format!("{dep},{}", fmt_f64(*v)))
        .collect();
    od.write_csv("content_depth.csv", "depth,value", &depth_rows)?;
    let defect_rows: Vec<String> = defect_points
        .iter()
        .map(|(hh, v)| format!("{},{}", fmt_f64(*hh), fmt_f64(*v)))
        .collect();
    od.write_csv("defect_h.csv", "h,defect", &defect_rows)?;

    let density_plot_series: Vec<Series<'_>> = density_series
        .iter()
        .map(|(label, pts)| Series {
            label,
            points: pts.clone(),
        })
        .collect();
    od.write_text(
        "density_vs_radius.svg",
        &line_plot(
            "density ratio vs radius",
            "radius",
            "ratio",
            &density_plot_series,
        ),
    )?;
    od.write_text(
        "content_vs_depth.svg",
        &line_plot(
            "mapping content vs dyadic depth",
            "depth",
            "value",
            &[Series {
                label: "dp value",
                points: depth_values
                    .iter()
                    .map(|(dep, v)| (*dep as f64, *v))
                    .collect(),
            }],
        ),
    )?;
    od.write_text(
        "defect_vs_h.svg",
        &line_plot(
            "four-point defect vs grid spacing",
            "h",
            "defect",
            &[Series {
                label: "defect",
                points: defect_points.clone(),
            }],
        ),
    )?;
    println!(
        "dashboard: map={} verdict={} (a={} b={} c={} d={} e={} f={})",
        resolved.name.as_deref().unwrap_or("<file>"),
        verdict,
        records[0],
        records[1],
        records[2],
        records[3],
        records[4],
        records[5],
    );
    Ok(())
}

/// Deterministic interior sample points with boundary distance above the
/// largest density radius: the center plus axis-offset neighbors.
fn density_sample_points(map: &SampledMap, r_max: f64) -> Vec<usize> {
    let domain = map.domain();
    let n = domain.points_per_axis();
    let d = domain.dim();
    let center = n / 2;
    let offset = (n / 16).max(1);
    let mut candidates = vec![vec![center; d]];
    for a in 0..d.min(3) {
        let mut plus = vec![center; d];
        plus[a] = center + offset;
        candidates.push(plus);
    }
    let mut out = Vec::new();
    for multi in candidates {
        if multi.iter().all(|&i| i < n) {
            let idx = domain.linear_index(&multi);
            if domain.boundary_distance(idx) > r_max && domain.is_interior(idx) {
                out.push(idx);
            }
        }
    }
    if out.is_empty() {
        out.push(domain.linear_index(&vec![center; d]));
    }
    out
}
