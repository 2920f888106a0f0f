//! CSV and JSON persistence.

use std::fs;
use std::path::Path;

use kwcseg_core::flow::TraceRecord;
use kwcseg_core::GridSignal;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `x,value` rows.
pub fn write_signal_csv(path: &Path, g: &GridSignal) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["x", "value"]).map_err(csv_err(path))?;
    for (x, y) in g.nodes().zip(g.samples()) {
        w.write_record([x.to_string(), y.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `x,u` rows, or `x,u,v` with the edge field averaged onto the nodes.
pub fn write_state_csv(path: &Path, u: &GridSignal, v: Option<&GridSignal>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let s = u.samples();
    match v {
        None => {
            w.write_record(["x", "u"]).map_err(csv_err(path))?;
            for (x, y) in u.nodes().zip(s) {
                w.write_record([x.to_string(), y.to_string()]).map_err(csv_err(path))?;
            }
        }
        Some(v) => {
            w.write_record(["x", "u", "v"]).map_err(csv_err(path))?;
            let nodal = node_average(v.samples());
            for ((x, y), z) in u.nodes().zip(s).zip(nodal) {
                w.write_record([x.to_string(), y.to_string(), z.to_string()])
                    .map_err(csv_err(path))?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

/// Edge values to node values: interior nodes take the mean of their two edges.
fn node_average(edges: &[f64]) -> Vec<f64> {
    let m = edges.len();
    (0..=m)
        .map(|i| match i {
            0 => edges[0],
            i if i == m => edges[m - 1],
            i => 0.5 * (edges[i - 1] + edges[i]),
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["t", "energy", "sup_change"]).map_err(csv_err(path))?;
    for r in trace {
        w.write_record([r.t.to_string(), r.energy.to_string(), r.sup_change.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads the first two columns of a headed CSV as `x` and values on a uniform grid.
pub fn read_signal_csv(path: &Path) -> Result<GridSignal> {
    read_columns(path, 2).and_then(|cols| grid_from(path, &cols[0], cols[1].clone()))
}

/// Reads a `final.csv`: `u` and, when present, the nodal `v` column.
pub fn read_state_csv(path: &Path) -> Result<(GridSignal, Option<Vec<f64>>)> {
    let cols = read_columns(path, 2)?;
    let u = grid_from(path, &cols[0], cols[1].clone())?;
    Ok((u, cols.get(2).cloned()))
}

fn read_columns(path: &Path, min: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let width = r.headers().map_err(csv_err(path))?.len();
    if width < min {
        return Err(HarnessError::Config(format!(
            "{}: expected at least {min} columns",
            path.display()
        )));
    }
    let mut cols = vec![Vec::new(); width];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            let value = field.trim().parse::<f64>().map_err(|e| {
                HarnessError::Config(format!("{} row {}: {e}", path.display(), line + 2))
            })?;
            c.push(value);
        }
    }
    Ok(cols)
}

fn grid_from(path: &Path, x: &[f64], values: Vec<f64>) -> Result<GridSignal> {
    let n = x.len();
    if n < 2 {
        return Err(HarnessError::Config(format!("{}: need at least 2 rows", path.display())));
    }
    let (a, b) = (x[0], x[n - 1]);
    let h = (b - a) / (n - 1) as f64;
    let uniform = x
        .iter()
        .enumerate()
        .all(|(i, &xi)| (xi - (a + i as f64 * h)).abs() <= 1e-9 * (b - a).abs().max(1.0));
    if !uniform {
        return Err(HarnessError::Config(format!("{}: x is not a uniform grid", path.display())));
    }
    Ok(GridSignal::new(a, b, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_round_trip() {
        let dir = std::env::temp_dir().join(format!("kwcseg-io-{}", std::process::id()));
        create_dir(&dir).unwrap();
        let path = dir.join("g.csv");
        let g = GridSignal::from_fn(0.0, 1.0, 11, |x| x * x - 0.3).unwrap();
        write_signal_csv(&path, &g).unwrap();
        let back = read_signal_csv(&path).unwrap();
        assert_eq!(back.samples(), g.samples());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn edge_field_to_nodes() {
        assert_eq!(node_average(&[1.0, 0.5, 1.0]), vec![1.0, 0.75, 0.75, 1.0]);
    }
}
