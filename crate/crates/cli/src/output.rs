//! Deterministic report emission: JSON documents, CSV tables, SVG plots.
//! No timestamps, no map iteration, stable float formatting; identical
//! inputs produce identical bytes.

use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(path)?;
        Ok(Self {
            root: PathBuf::from(path),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("json encoding failed: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: &[String],
    ) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = String::with_capacity(rows.len() * 16 + header.len() + 2);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}

/// Prints a JSON document to stdout when no output directory is wanted.
pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("json encoding failed: {e}")))?;
    println!("{text}");
    Ok(())
}

pub fn emit_json<T: Serialize>(out: Option<&str>, name: &str, value: &T) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            OutDir::create(dir)?.write_json(name, value)?;
            Ok(())
        }
        None => print_json(value),
    }
}

/// Float formatting used across CSV output: shortest round-trip repr.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
