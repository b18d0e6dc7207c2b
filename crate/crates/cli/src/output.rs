//! Long-format trajectory CSV and the JSON report writer.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nullflow_core::{Sym2, Trajectory};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "node", "g11", "g12", "g22", "u"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    t: f64,
    node: usize,
    g11: f64,
    g12: f64,
    g22: f64,
    u: Option<f64>,
}

/// One time slice read back from a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub metric: Vec<Sym2<f64>>,
    pub heat: Option<Vec<f64>>,
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Trajectory(e.to_string())
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for (k, (&t, metric)) in traj.times.iter().zip(&traj.metrics).enumerate() {
        let heat = traj.heat.as_ref().map(|h| h[k].values());
        for (node, g) in metric.components().iter().enumerate() {
            let row = Row { t, node, g11: g.xx, g12: g.xy, g22: g.yy, u: heat.map(|u| u[node]) };
            w.serialize(row).map_err(csv_error)?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<Slice>, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(CliError::Trajectory(format!("expected header {}", TRAJECTORY_HEADER.join(","))));
    }
    let mut slices: Vec<Slice> = Vec::new();
    for (line, row) in r.deserialize::<Row>().enumerate() {
        let row = row.map_err(csv_error)?;
        let fresh = slices.last().is_none_or(|s| s.t != row.t);
        if fresh {
            slices.push(Slice { t: row.t, metric: Vec::new(), heat: row.u.map(|_| Vec::new()) });
        }
        let slice = slices.last_mut().expect("slice exists");
        if row.node != slice.metric.len() {
            return Err(CliError::Trajectory(format!(
                "data row {}: expected node {}, found {}",
                line + 1,
                slice.metric.len(),
                row.node
            )));
        }
        slice.metric.push(Sym2::new(row.g11, row.g12, row.g22));
        match (&mut slice.heat, row.u) {
            (Some(h), Some(u)) => h.push(u),
            (None, None) => {}
            _ => return Err(CliError::Trajectory(format!("data row {}: u present on only some rows", line + 1))),
        }
    }
    if slices.is_empty() {
        return Err(CliError::Trajectory("no data rows".into()));
    }
    Ok(slices)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(CliError::io(path))?;
    f.write_all(text.as_bytes()).map_err(CliError::io(path))
}
