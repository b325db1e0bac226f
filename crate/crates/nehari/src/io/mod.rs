//! Configuration parsing, run manifests and CSV emission.
//!
//! All numeric output goes through [`format_float`], which serializes with 17
//! significant digits so every `f64` round-trips exactly; runs with identical
//! `(command, config, seed)` therefore produce byte-identical CSV files.

pub mod config;
pub mod manifest;

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::model::{Grid, GridDim, GridFunction};

/// 17-significant-digit scientific form: exact round-trip for `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV file: `# manifest <hash>` comment, optional extra comment
/// rows, a header row, then data rows.
pub fn write_csv(
    path: &Path,
    manifest_hash: &str,
    comments: &[String],
    header: &str,
    rows: &[String],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# manifest {manifest_hash}")?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{header}")?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

/// Serializes a field as a CSV column of nodal values under a `dim,n,h`
/// header row.
pub fn write_grid_function(path: &Path, manifest_hash: &str, u: &GridFunction) -> Result<()> {
    let grid = u.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# manifest {manifest_hash}")?;
    writeln!(out, "dim,n,h")?;
    writeln!(
        out,
        "{},{},{}",
        grid.dim().as_usize(),
        grid.n(),
        format_float(grid.h())
    )?;
    for v in u.values() {
        writeln!(out, "{}", format_float(*v))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a field written by [`write_grid_function`].
pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    use crate::error::Error;
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: missing header", path.display())))?;
    if header.trim() != "dim,n,h" {
        return Err(Error::Config(format!(
            "{}: expected 'dim,n,h' header, got '{header}'",
            path.display()
        )));
    }
    let meta = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: missing grid row", path.display())))?;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("{}: malformed grid row", path.display())));
    }
    let dim: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{}: bad dim '{}'", path.display(), parts[0])))?;
    let n: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{}: bad n '{}'", path.display(), parts[1])))?;
    let h: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{}: bad h '{}'", path.display(), parts[2])))?;
    let dim = match dim {
        1 => GridDim::One,
        2 => GridDim::Two,
        other => return Err(Error::Config(format!("{}: dim must be 1 or 2, got {other}", path.display()))),
    };
    let grid = Grid::new(dim, n, h * (n as f64 + 1.0))?;
    let mut values = Vec::with_capacity(grid.unknowns());
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| {
            Error::Config(format!("{}: bad value '{line}'", path.display()))
        })?);
    }
    GridFunction::new(grid, values)
}
