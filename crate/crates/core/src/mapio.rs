//! File formats for sampled maps and landmark lists.
//!
//! Text format (version 1), whitespace/line structured:
//!
//! ```text
//! smap 1
//! d=<dim> n=<points-per-axis> kind=<euclidean|sup|heisenberg> m=<value-dim>
//! <m floats>      # one line per grid point, row-major grid order
//! ...
//! ```
//!
//! Binary format (version 1), little-endian:
//!
//! ```text
//! magic "SMAPB1" | u32 dim | u32 points-per-axis | u8 kind | u32 value-dim
//! | dim^n * value-dim f64 values (row-major grid order)
//! ```
//!
//! Kind codes: 0 euclidean, 1 sup, 2 heisenberg (value-dim must be odd).
//! Landmark lists are text files with one grid linear index per line; blank
//! lines and `#` comments are ignored. Oracle targets have no file form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::sampled_map::SampledMap;
use crate::target::{EmbedNorm, MetricTarget};

const TEXT_MAGIC: &str = "smap 1";
const BINARY_MAGIC: &[u8; 6] = b"SMAPB1";

fn kind_code(target: &MetricTarget) -> Result<u8> {
    match target {
        MetricTarget::Embedded {
            norm: EmbedNorm::Euclidean,
            ..
        } => Ok(0),
        MetricTarget::Embedded {
            norm: EmbedNorm::Sup,
            ..
        } => Ok(1),
        MetricTarget::Heisenberg { .. } => Ok(2),
        MetricTarget::Oracle { .. } => Err(Error::Unsupported(
            "oracle targets cannot be serialized".into(),
        )),
    }
}

fn kind_from_code(code: u8, value_dim: usize) -> Result<MetricTarget> {
    match code {
        0 => Ok(MetricTarget::Embedded {
            norm: EmbedNorm::Euclidean,
            dim: value_dim,
        }),
        1 => Ok(MetricTarget::Embedded {
            norm: EmbedNorm::Sup,
            dim: value_dim,
        }),
        2 => {
            if value_dim.is_multiple_of(2) || value_dim < 3 {
                return Err(Error::InvalidInput(format!(
                    "heisenberg value dimension must be odd and >= 3, got {value_dim}"
                )));
            }
            Ok(MetricTarget::Heisenberg {
                n: (value_dim - 1) / 2,
            })
        }
        _ => Err(Error::InvalidInput(format!(
            "unknown target kind code {code}"
        ))),
    }
}

fn kind_name(target: &MetricTarget) -> &'static str {
    match target {
        MetricTarget::Embedded {
            norm: EmbedNorm::Euclidean,
            ..
        } => "euclidean",
        MetricTarget::Embedded {
            norm: EmbedNorm::Sup,
            ..
        } => "sup",
        MetricTarget::Heisenberg { .. } => "heisenberg",
        MetricTarget::Oracle { .. } => "oracle",
    }
}

/// Writes the text form of a sampled map.
pub fn write_text(map: &SampledMap, out: &mut dyn Write) -> Result<()> {
    kind_code(map.target())?;
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    writeln!(out, "{TEXT_MAGIC}").map_err(io)?;
    writeln!(
        out,
        "d={} n={} kind={} m={}",
        map.domain().dim(),
        map.domain().points_per_axis(),
        kind_name(map.target()),
        map.value_dim(),
    )
    .map_err(io)?;
    for i in 0..map.domain().num_points() {
        let row: Vec<String> = map.value(i).iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", row.join(" ")).map_err(io)?;
    }
    Ok(())
}

/// Reads the text form of a sampled map.
pub fn read_text(input: &mut dyn BufRead) -> Result<SampledMap> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("read failed: {e}"));
    let mut lines = input.lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty file".into()))?;
    if magic.map_err(io)?.trim() != TEXT_MAGIC {
        return Err(Error::InvalidInput(format!(
            "bad magic, expected '{TEXT_MAGIC}'"
        )));
    }
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("missing header line".into()))?
        .map_err(io)?;
    let mut dim = None;
    let mut n_axis = None;
    let mut kind = None;
    let mut m = None;
    for field in header.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("bad header field '{field}'")))?;
        match key {
            "d" => dim = Some(parse_usize(val)?),
            "n" => n_axis = Some(parse_usize(val)?),
            "m" => m = Some(parse_usize(val)?),
            "kind" => {
                kind = Some(match val {
                    "euclidean" => 0u8,
                    "sup" => 1,
                    "heisenberg" => 2,
                    other => return Err(Error::InvalidInput(format!("unknown kind '{other}'"))),
                })
            }
            other => return Err(Error::InvalidInput(format!("unknown header key '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::InvalidInput("header missing d".into()))?;
    let n_axis = n_axis.ok_or_else(|| Error::InvalidInput("header missing n".into()))?;
    let kind = kind.ok_or_else(|| Error::InvalidInput("header missing kind".into()))?;
    let m = m.ok_or_else(|| Error::InvalidInput("header missing m".into()))?;
    let domain = GridDomain::new(dim, n_axis)?;
    let target = kind_from_code(kind, m)?;
    let mut values = Vec::with_capacity(domain.num_points() * m);
    for (row_idx, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut count = 0;
        for tok in trimmed.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|e| {
                Error::InvalidInput(format!("bad float '{tok}' in record {row_idx}: {e}"))
            })?);
            count += 1;
        }
        if count != m {
            return Err(Error::InvalidInput(format!(
                "record {row_idx} has {count} coordinates, expected {m}"
            )));
        }
    }
    SampledMap::from_values(domain, target, values)
}

/// Writes the binary form of a sampled map.
pub fn write_binary(map: &SampledMap, out: &mut dyn Write) -> Result<()> {
    let code = kind_code(map.target())?;
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    out.write_all(BINARY_MAGIC).map_err(io)?;
    out.write_all(&(map.domain().dim() as u32).to_le_bytes())
        .map_err(io)?;
    out.write_all(&(map.domain().points_per_axis() as u32).to_le_bytes())
        .map_err(io)?;
    out.write_all(&[code]).map_err(io)?;
    out.write_all(&(map.value_dim() as u32).to_le_bytes())
        .map_err(io)?;
    for x in map.values() {
        out.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

/// Reads the binary form of a sampled map.
pub fn read_binary(data: &[u8]) -> Result<SampledMap> {
    if data.len() < BINARY_MAGIC.len() + 13 || &data[..6] != BINARY_MAGIC {
        return Err(Error::InvalidInput("bad binary map header".into()));
    }
    let u32_at = |off: usize| -> usize {
        u32::from_le_bytes(data[off..off + 4].try_into().expect("bounds checked")) as usize
    };
    let dim = u32_at(6);
    let n_axis = u32_at(10);
    let code = data[14];
    let m = u32_at(15);
    let domain = GridDomain::new(dim, n_axis)?;
    let target = kind_from_code(code, m)?;
    let expected = domain.num_points() * m;
    let payload = &data[19..];
    if payload.len() != expected * 8 {
        return Err(Error::InvalidInput(format!(
            "binary payload holds {} bytes, expected {}",
            payload.len(),
            expected * 8
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    SampledMap::from_values(domain, target, values)
}

/// Reads a landmark index list: one linear grid index per line.
pub fn read_landmarks(input: &mut dyn BufRead, domain: &GridDomain) -> Result<Vec<usize>> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("read failed: {e}"));
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(io)?;
        let t = line.split('#').next().unwrap_or("").trim().to_string();
        if t.is_empty() {
            continue;
        }
        let idx = parse_usize(&t)?;
        if idx >= domain.num_points() {
            return Err(Error::InvalidInput(format!(
                "landmark index {idx} out of range ({} points)",
                domain.num_points()
            )));
        }
        out.push(idx);
    }
    Ok(out)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|e| Error::InvalidInput(format!("bad integer '{s}': {e}")))
}
