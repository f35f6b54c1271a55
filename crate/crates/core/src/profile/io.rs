//! CSV + JSON sidecar serialization for profiles.
//!
//! `<name>.csv` holds `x,value` rows; `<name>.json` holds the tails and the
//! step. Floats are written in Rust's shortest round-trip form, so reading a
//! file back reproduces the values bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid, Profile};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub left_tail: f64,
    pub right_tail: f64,
    pub step: f64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    x: f64,
    value: f64,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `u` to `path` (CSV) and its sidecar next to it (same stem, `.json`).
pub fn write_profile(u: &Profile, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for (x, &value) in u.grid().points().zip(u.values()) {
        w.serialize(Row { x, value })?;
    }
    w.flush()?;
    let side = ProfileSidecar {
        left_tail: u.left_tail(),
        right_tail: u.right_tail(),
        step: u.grid().step,
    };
    let f = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(f, &side)?;
    Ok(())
}

/// Reads a profile written by [`write_profile`].
pub fn read_profile(path: &Path) -> Result<Profile> {
    let side: ProfileSidecar =
        serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        xs.push(row.x);
        values.push(row.value);
    }
    if xs.len() < 2 {
        return invalid(format!("{}: fewer than two rows", path.display()));
    }
    let grid = Grid::new(xs[0], side.step, xs.len())?;
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.x(i)).abs() > 1e-9 * (1.0 + x.abs()) {
            return invalid(format!(
                "{}: row {i} has x = {x}, expected {} for step {}",
                path.display(),
                grid.x(i),
                side.step
            ));
        }
    }
    Profile::new(grid, values, side.left_tail, side.right_tail)
}
