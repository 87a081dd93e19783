//! Subcommand handlers.

use serde::Serialize;

use metricfact::area::{area_formula_check, oriented_area, CurveMetric};
use metricfact::content::{hat_content_bounds, mapping_content_dp, verify_cover, ContentReport};
use metricfact::grid::GridSubset;
use metricfact::heisenberg::{
    cc_length, horizontal_lift, horizontality_defect, projection_area_formula_check,
    HORIZONTALITY_TOL,
};
use metricfact::quotient::{factor_check, pullback_metric, quotient, tree_certificate};
use metricfact::sampled_map::{default_rank_threshold, rank_field};

use crate::config::Config;
use crate::curves::{curve_to_csv, heisenberg_header, read_curve};
use crate::maps::{oracle_for, resolve};
use crate::output::{emit_json, fmt_f64, OutDir};
use crate::{CliError, Command, HeisenbergAction};

pub fn dispatch(command: Command, cfg: &Config) -> Result<(), CliError> {
    match command {
        Command::MdField {
            map,
            tau,
            landmarks,
            landmark_file,
            out,
        } => md_field(cfg, map, tau, landmarks, landmark_file, out),
        Command::Content {
            map,
            n,
            depth,
            oracle,
            out,
        } => content(cfg, map, n, depth, oracle, out),
        Command::VerifyCover {
            map,
            report,
            n,
            oracle,
        } => verify(cfg, map, report, n, oracle),
        Command::Factorize {
            map,
            epsilon,
            budget,
            loops,
            seed,
            out,
        } => factorize(cfg, map, epsilon, budget, loops, seed, out),
        Command::TreeCheck {
            map,
            epsilon,
            budget,
            loops,
            seed,
            defect_tol,
            area_tol,
            out,
        } => tree_check(
            cfg, map, epsilon, budget, loops, seed, defect_tol, area_tol, out,
        ),
        Command::AreaCheck {
            map,
            curve,
            closed,
            rho,
            out,
        } => area_check(cfg, map, curve, closed, rho, out),
        Command::CoareaCheck { map, out } => coarea(cfg, map, out),
        Command::Heisenberg { action } => heisenberg(cfg, action),
        Command::Dashboard {
            map,
            depth,
            seed,
            oracle,
            out,
        } => crate::dashboard::run(cfg, map, depth, seed, oracle, out),
    }
}

#[derive(Serialize)]
struct MdFieldReport {
    map: Option<String>,
    dim: usize,
    grid: usize,
    lipschitz: f64,
    tau: f64,
    landmarks: usize,
    kuratowski_covering_radius: Option<f64>,
    interior_points: usize,
    rank_fractions: Vec<f64>,
    strata_sizes: Vec<usize>,
    mean_jacobian_by_rank: Vec<f64>,
}

fn md_field(
    cfg: &Config,
    map_args: crate::MapArgs,
    tau: Option<f64>,
    landmarks: Option<usize>,
    landmark_file: Option<String>,
    out: Option<String>,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let landmarks = cfg.resolve(landmarks, "landmarks", 64)?;
    let landmark_file = match landmark_file {
        Some(f) => Some(f),
        None => cfg.get("landmark-file").map(|s| s.to_string()),
    };
    let (view, info) = if let Some(path) = landmark_file {
        let file = std::fs::File::open(&path)?;
        let indices = metricfact::mapio::read_landmarks(
            &mut std::io::BufReader::new(file),
            resolved.map.domain(),
        )?;
        let (v, i) = resolved.map.kuratowski_embed(&indices)?;
        (v, Some(i))
    } else if resolved.map.target().is_embedded() {
        (resolved.map.clone(), None)
    } else {
        let (v, i) = resolved.map.sup_view(landmarks)?;
        (v, i)
    };
    let tau = cfg.resolve(tau, "tau", default_rank_threshold(&view))?;
    let field = rank_field(&view, tau)?;
    let interior: usize = field.strata.iter().map(Vec::len).sum();
    let mean_jac: Vec<f64> = field
        .strata
        .iter()
        .map(|s| {
            if s.is_empty() {
                0.0
            } else {
                s.iter()
                    .map(|&i| field.jacobians[i].unwrap_or(0.0))
                    .sum::<f64>()
                    / s.len() as f64
            }
        })
        .collect();
    let report = MdFieldReport {
        map: resolved.name.clone(),
        dim: resolved.dim,
        grid: resolved.grid,
        lipschitz: resolved.map.lipschitz(),
        tau,
        landmarks,
        kuratowski_covering_radius: info.map(|i| i.covering_radius),
        interior_points: interior,
        rank_fractions: field.fractions.clone(),
        strata_sizes: field.strata.iter().map(Vec::len).collect(),
        mean_jacobian_by_rank: mean_jac,
    };
    let out = cfg.resolve_opt(out, "out")?;
    match out.as_deref() {
        Some(dir) => {
            let od = OutDir::create(dir)?;
            od.write_json("md_field.json", &report)?;
            let rows: Vec<String> = report
                .rank_fractions
                .iter()
                .enumerate()
                .map(|(k, f)| format!("{k},{},{}", report.strata_sizes[k], fmt_f64(*f)))
                .collect();
            od.write_csv("rank_histogram.csv", "rank,points,fraction", &rows)?;
            Ok(())
        }
        None => crate::output::print_json(&report),
    }
}

#[derive(Serialize)]
struct ContentCommandReport {
    map: Option<String>,
    dim: usize,
    grid: usize,
    n: usize,
    m: usize,
    depth: u32,
    oracle: bool,
    lipschitz: f64,
    dyadic: ContentReport,
    hat_lower_bound: f64,
    hat_upper_bound: f64,
}

fn content(
    cfg: &Config,
    map_args: crate::MapArgs,
    n: Option<usize>,
    depth: Option<u32>,
    oracle: bool,
    out: Option<String>,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let n = cfg.resolve(n, "n", 2)?;
    let max_depth_allowed = (resolved.grid - 1).ilog2();
    let depth = cfg.resolve(depth, "depth", 4u32.min(max_depth_allowed))?;
    let oracle = oracle || cfg.get("oracle") == Some("true");
    if resolved.dim < n {
        return Err(CliError::Config(format!(
            "content order n = {n} exceeds the domain dimension {}",
            resolved.dim
        )));
    }
    let m = resolved.dim - n;
    let ora = oracle_for(&resolved, n, oracle)?;
    let subset = GridSubset::full(resolved.map.domain());
    let ora_ref = ora.as_ref().map(|f| f as &dyn Fn(&_) -> f64);
    let report = mapping_content_dp(&resolved.map, &subset, n, m, depth, ora_ref)?;
    let (hat_lo, hat_up) = hat_content_bounds(&resolved.map, &subset, n, m, depth, ora_ref)?;
    let doc = ContentCommandReport {
        map: resolved.name.clone(),
        dim: resolved.dim,
        grid: resolved.grid,
        n,
        m,
        depth,
        oracle,
        lipschitz: resolved.map.lipschitz(),
        hat_lower_bound: hat_lo,
        hat_upper_bound: hat_up.value,
        dyadic: report,
    };
    let out = cfg.resolve_opt(out, "out")?;
    emit_json(out.as_deref(), "content.json", &doc)
}

fn verify(
    cfg: &Config,
    map_args: crate::MapArgs,
    report_path: String,
    n: Option<usize>,
    oracle: bool,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let text = std::fs::read_to_string(&report_path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("bad report '{report_path}': {e}")))?;
    // accept either a bare ContentReport or the content command document
    let (stored, n_doc, m_doc): (ContentReport, Option<usize>, Option<usize>) =
        if doc.get("dyadic").is_some() {
            (
                serde_json::from_value(doc["dyadic"].clone())
                    .map_err(|e| CliError::Config(format!("bad report: {e}")))?,
                doc["n"].as_u64().map(|v| v as usize),
                doc["m"].as_u64().map(|v| v as usize),
            )
        } else {
            (
                serde_json::from_value(doc)
                    .map_err(|e| CliError::Config(format!("bad report: {e}")))?,
                None,
                None,
            )
        };
    let n = cfg.resolve(n, "n", n_doc.unwrap_or(stored.params.n))?;
    let oracle = oracle || cfg.get("oracle") == Some("true");
    if resolved.dim < n {
        return Err(CliError::Config("content order exceeds dimension".into()));
    }
    let m = m_doc.unwrap_or(resolved.dim - n);
    let ora = oracle_for(&resolved, n, oracle)?;
    let ora_ref = ora.as_ref().map(|f| f as &dyn Fn(&_) -> f64);
    let subset = GridSubset::full(resolved.map.domain());
    let recomputed = verify_cover(&resolved.map, &subset, n, m, &stored, ora_ref)?;
    let gap = (recomputed - stored.value).abs();
    let ok = gap <= 1e-9 * stored.value.abs().max(1.0);
    println!(
        "verify-cover: stored {} recomputed {} gap {:.3e} -> {}",
        stored.value,
        recomputed,
        gap,
        if ok { "OK" } else { "MISMATCH" }
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "cover cost mismatch: stored {} vs recomputed {recomputed}",
            stored.value
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn tree_check(
    cfg: &Config,
    map_args: crate::MapArgs,
    epsilon: Option<f64>,
    budget: Option<usize>,
    loops: Option<usize>,
    seed: Option<u64>,
    defect_tol: Option<f64>,
    area_tol: Option<f64>,
    out: Option<String>,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let h = resolved.map.domain().spacing();
    let l = resolved.map.lipschitz();
    let epsilon = cfg.resolve(epsilon, "epsilon", 2.0 * h * l)?;
    let budget = cfg.resolve(budget, "budget", 2000)?;
    let loops = cfg.resolve(loops, "loops", 8)?;
    let seed = cfg.resolve(seed, "seed", 0)?;
    let defect_tol = cfg.resolve(defect_tol, "defect-tol", 8.0 * h)?;
    let area_tol = cfg.resolve(area_tol, "area-tol", 0.1)?;
    let pm = pullback_metric(&resolved.map);
    let mut z = quotient(&resolved.map, &pm, epsilon)?;
    let cert = tree_certificate(
        &resolved.map,
        &mut z,
        budget,
        loops,
        seed,
        defect_tol,
        area_tol,
    )?;
    #[derive(Serialize)]
    struct Doc {
        map: Option<String>,
        dim: usize,
        grid: usize,
        epsilon: f64,
        classes: usize,
        seed: u64,
        certificate: metricfact::quotient::TreeCertificate,
    }
    let doc = Doc {
        map: resolved.name.clone(),
        dim: resolved.dim,
        grid: resolved.grid,
        epsilon,
        classes: z.num_classes(),
        seed,
        certificate: cert,
    };
    let out = cfg.resolve_opt(out, "out")?;
    emit_json(out.as_deref(), "tree_certificate.json", &doc)
}

#[allow(clippy::too_many_arguments)]
fn factorize(
    cfg: &Config,
    map_args: crate::MapArgs,
    epsilon: Option<f64>,
    budget: Option<usize>,
    loops: Option<usize>,
    seed: Option<u64>,
    out: Option<String>,
) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let h = resolved.map.domain().spacing();
    let l = resolved.map.lipschitz();
    let epsilon = cfg.resolve(epsilon, "epsilon", 2.0 * h * l)?;
    let budget = cfg.resolve(budget, "budget", 2000)?;
    let loops = cfg.resolve(loops, "loops", 8)?;
    let seed = cfg.resolve(seed, "seed", 0)?;
    let pm = pullback_metric(&resolved.map);
    let mut z = quotient(&resolved.map, &pm, epsilon)?;
    let factor = factor_check(&resolved.map, &mut z, 24, seed ^ 0xfac7)?;
    let cert = tree_certificate(&resolved.map, &mut z, budget, loops, seed, 8.0 * h, 0.1)?;
    let out_dir = cfg
        .resolve_opt(out, "out")?
        .unwrap_or_else(|| "factorize-out".to_string());
    let od = OutDir::create(&out_dir)?;
    let class_rows: Vec<String> = z
        .psi_table()
        .iter()
        .enumerate()
        .map(|(v, c)| format!("{v},{c}"))
        .collect();
    od.write_csv("classes.csv", "vertex,class", &class_rows)?;
    let edge_rows: Vec<String> = z
        .contracted_edges()
        .iter()
        .map(|(a, b, w)| format!("{a},{b},{}", fmt_f64(*w)))
        .collect();
    od.write_csv("contracted_edges.csv", "class_a,class_b,weight", &edge_rows)?;
    let phi_rows: Vec<String> = (0..z.num_classes())
        .map(|c| {
            let coords: Vec<String> = z.phi(c).iter().map(|x| fmt_f64(*x)).collect();
            format!("{c},{},{}", z.representative(c), coords.join(","))
        })
        .collect();
    od.write_csv("phi.csv", "class,representative_vertex,value...", &phi_rows)?;
    #[derive(Serialize)]
    struct Doc {
        map: Option<String>,
        dim: usize,
        grid: usize,
        epsilon: f64,
        seed: u64,
        classes: usize,
        lipschitz: f64,
        factor: metricfact::quotient::FactorReport,
        certificate: metricfact::quotient::TreeCertificate,
    }
    od.write_json(
        "factorize.json",
        &Doc {
            map: resolved.name.clone(),
            dim: resolved.dim,
            grid: resolved.grid,
            epsilon,
            seed,
            classes: z.num_classes(),
            lipschitz: l,
            factor,
            certificate: cert,
        },
    )?;
    Ok(())
}

fn area_check(
    cfg: &Config,
    map_args: crate::MapArgs,
    curve: Option<String>,
    closed: bool,
    rho: Option<f64>,
    out: Option<String>,
) -> Result<(), CliError> {
    let out = cfg.resolve_opt(out, "out")?;
    let curve = match curve {
        Some(c) => Some(c),
        None => cfg.get("curve").map(|s| s.to_string()),
    };
    if let Some(path) = curve {
        let c = read_curve(&path, CurveMetric::Euclidean, closed)?;
        #[derive(Serialize)]
        struct CurveDoc {
            curve: String,
            nodes: usize,
            closed: bool,
            length: f64,
            oriented_area: Option<f64>,
        }
        let doc = CurveDoc {
            curve: path,
            nodes: c.len(),
            closed: c.is_closed(),
            length: c.length(),
            oriented_area: if c.is_closed() && c.dim() == 2 {
                Some(oriented_area(&c)?)
            } else {
                None
            },
        };
        return emit_json(out.as_deref(), "area.json", &doc);
    }
    let resolved = resolve(&map_args, cfg)?;
    let h = resolved.map.domain().spacing();
    let l = resolved.map.lipschitz();
    let rho = cfg.resolve(rho, "rho", 3.0 * h * l.max(1e-12))?;
    let report = area_formula_check(&resolved.map, |_| 1.0, rho)?;
    #[derive(Serialize)]
    struct Doc {
        map: Option<String>,
        grid: usize,
        rho: f64,
        lipschitz: f64,
        lhs: f64,
        rhs: f64,
        gap: f64,
    }
    emit_json(
        out.as_deref(),
        "area.json",
        &Doc {
            map: resolved.name.clone(),
            grid: resolved.grid,
            rho,
            lipschitz: l,
            lhs: report.lhs,
            rhs: report.rhs,
            gap: report.gap,
        },
    )
}

fn coarea(cfg: &Config, map_args: crate::MapArgs, out: Option<String>) -> Result<(), CliError> {
    let resolved = resolve(&map_args, cfg)?;
    let report = metricfact::area::coarea_check(&resolved.map, None)?;
    #[derive(Serialize)]
    struct Doc {
        map: Option<String>,
        dim: usize,
        grid: usize,
        lhs: f64,
        rhs: f64,
        gap: f64,
    }
    let out = cfg.resolve_opt(out, "out")?;
    emit_json(
        out.as_deref(),
        "coarea.json",
        &Doc {
            map: resolved.name.clone(),
            dim: resolved.dim,
            grid: resolved.grid,
            lhs: report.lhs,
            rhs: report.rhs,
            gap: report.gap,
        },
    )
}

fn heisenberg(cfg: &Config, action: HeisenbergAction) -> Result<(), CliError> {
    match action {
        HeisenbergAction::Lift { curve, t0, out } => {
            let t0 = cfg.resolve(t0, "t0", 0.0)?;
            let planar = read_curve(&curve, CurveMetric::Euclidean, false)?;
            if planar.dim() % 2 != 0 {
                return Err(CliError::Config(format!(
                    "planar curve must have an even coordinate count, got {}",
                    planar.dim()
                )));
            }
            let lift = horizontal_lift(&planar, t0)?;
            let csv = curve_to_csv(&lift, &heisenberg_header(planar.dim() / 2));
            let out = cfg.resolve_opt(out, "out")?;
            match out.as_deref() {
                Some(dir) => {
                    OutDir::create(dir)?.write_text("lifted.csv", &csv)?;
                    Ok(())
                }
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        HeisenbergAction::Check { curve, out } => {
            let c = read_curve(&curve, CurveMetric::HeisenbergProjection, false)?;
            let defect = horizontality_defect(&c)?;
            let length = cc_length(&c, HORIZONTALITY_TOL)?;
            #[derive(Serialize)]
            struct Doc {
                curve: String,
                nodes: usize,
                horizontality_defect: f64,
                horizontal: bool,
                cc_length: f64,
            }
            let doc = Doc {
                curve,
                nodes: c.len(),
                horizontality_defect: defect,
                horizontal: length.horizontal,
                cc_length: length.value,
            };
            if !length.horizontal {
                eprintln!(
                    "warning: curve is not horizontal (defect {defect:.3e}); projected length undercounts"
                );
            }
            let out = cfg.resolve_opt(out, "out")?;
            emit_json(out.as_deref(), "heisenberg_check.json", &doc)
        }
        HeisenbergAction::Area { curves, rho, out } => {
            let parsed: Result<Vec<_>, _> = curves
                .iter()
                .map(|p| read_curve(p, CurveMetric::HeisenbergProjection, false))
                .collect();
            let parsed = parsed?;
            let span: f64 = parsed.iter().map(|c| c.length()).sum::<f64>();
            let rho = cfg.resolve(rho, "rho", (span * 0.01).max(1e-9))?;
            let report = projection_area_formula_check(&parsed, |_| 1.0, rho)?;
            #[derive(Serialize)]
            struct Doc {
                curves: Vec<String>,
                rho: f64,
                lhs: f64,
                rhs: f64,
                gap: f64,
            }
            let out = cfg.resolve_opt(out, "out")?;
            emit_json(
                out.as_deref(),
                "heisenberg_area.json",
                &Doc {
                    curves,
                    rho,
                    lhs: report.lhs,
                    rhs: report.rhs,
                    gap: report.gap,
                },
            )
        }
    }
}
