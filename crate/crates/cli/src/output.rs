//! File output. Numbers in CSV files carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use nls5::field::FieldFrame;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{failed, Result};

pub fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(failed)
}

pub fn json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(failed)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(failed)
}

pub fn frame(path: &Path, f: &FieldFrame) -> Result<()> {
    let file = File::create(path).with_context(|| format!("writing {}", path.display())).map_err(failed)?;
    let mut w = BufWriter::new(file);
    f.write_csv(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display())).map_err(failed)
}

/// Writes `header` and one row per record.
pub fn csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{header}")?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    write().with_context(|| format!("writing {}", path.display())).map_err(failed)
}

/// Writes the resolved configuration and returns the output directory.
pub fn echo(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    prepare(&dir)?;
    json(&dir.join("config.json"), cfg)?;
    Ok(dir)
}
