//! Resolving a sampled map from a builtin name or a file.

use std::io::BufReader;

use metricfact::builtin::{builtin_map, builtin_oracle};
use metricfact::content::DyadicCube;
use metricfact::mapio;
use metricfact::sampled_map::SampledMap;

use crate::config::Config;
use crate::{CliError, MapArgs};

pub struct ResolvedMap {
    pub map: SampledMap,
    /// Builtin name when the map came from the registry.
    pub name: Option<String>,
    pub grid: usize,
    pub dim: usize,
}

pub fn resolve(args: &MapArgs, cfg: &Config) -> Result<ResolvedMap, CliError> {
    let name = match &args.map {
        Some(n) => Some(n.clone()),
        None => cfg.get("map").map(|s| s.to_string()),
    };
    let file = match &args.file {
        Some(f) => Some(f.clone()),
        None => cfg.get("file").map(|s| s.to_string()),
    };
    let dim = cfg.resolve(args.dim, "dim", 3)?;
    let grid = cfg.resolve(args.grid, "grid", 33)?;
    match (name, file) {
        (Some(name), None) => {
            let map = builtin_map(&name, dim, grid)?;
            Ok(ResolvedMap {
                dim: map.domain().dim(),
                grid: map.domain().points_per_axis(),
                map,
                name: Some(name),
            })
        }
        (None, Some(path)) => {
            let map = if path.ends_with(".smapb") || path.ends_with(".bin") {
                let data = std::fs::read(&path)?;
                mapio::read_binary(&data)?
            } else {
                let f = std::fs::File::open(&path)?;
                mapio::read_text(&mut BufReader::new(f))?
            };
            Ok(ResolvedMap {
                dim: map.domain().dim(),
                grid: map.domain().points_per_axis(),
                map,
                name: None,
            })
        }
        (Some(_), Some(_)) => Err(CliError::Config(
            "--map and --file are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Config(
            "one of --map or --file is required".into(),
        )),
    }
}

/// Closed-form image-content callback of a builtin map.
pub type BuiltinOracle = fn(&DyadicCube) -> f64;

/// Exact image oracle of a builtin map, when requested and available.
pub fn oracle_for(
    resolved: &ResolvedMap,
    n: usize,
    requested: bool,
) -> Result<Option<BuiltinOracle>, CliError> {
    if !requested {
        return Ok(None);
    }
    let Some(name) = &resolved.name else {
        return Err(CliError::Config(
            "--oracle needs a builtin map with a closed-form image".into(),
        ));
    };
    match builtin_oracle(name, n) {
        Some(o) => Ok(Some(o)),
        None => Err(CliError::Config(format!(
            "no exact image oracle for builtin '{name}' at order {n}"
        ))),
    }
}
