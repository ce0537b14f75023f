//! File formats: matrices as header-less CSV, runs and reports as JSON.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use mzreach::projsel::Selection;
use mzreach::{DataSet, Matrix};

use crate::experiments::CompareTable;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("non-numeric entry in {}", path.display()))?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        bail!("ragged rows in {}", path.display());
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Sidecar describing a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataManifest {
    pub seed: u64,
    pub lengths: Vec<usize>,
    pub state_dim: usize,
    pub input_dim: usize,
}

const DATA_FILES: [&str; 4] = ["xplus.csv", "xminus.csv", "uminus.csv", "noise.csv"];

pub fn write_dataset(dir: &Path, data: &DataSet, seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, m) in DATA_FILES.iter().zip([&data.xplus, &data.xminus, &data.uminus, &data.noise]) {
        write_matrix_csv(&dir.join(name), m)?;
    }
    let manifest = DataManifest {
        seed,
        lengths: data.lengths.clone(),
        state_dim: data.xplus.nrows(),
        input_dim: data.uminus.nrows(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn read_dataset(dir: &Path) -> Result<(DataSet, DataManifest)> {
    let manifest: DataManifest = read_json(&dir.join("manifest.json"))?;
    let [xplus, xminus, uminus, noise] = DATA_FILES.map(|name| read_matrix_csv(&dir.join(name)));
    let data = DataSet {
        xplus: xplus?,
        xminus: xminus?,
        uminus: uminus?,
        noise: noise?,
        lengths: manifest.lengths.clone(),
    };
    data.validate()?;
    Ok((data, manifest))
}

pub fn write_compare_csv(path: &Path, table: &CompareTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "seconds", "select_seconds", "volume", "ratio", "scaled_estimate", "std_error", "warnings"])?;
    w.write_record([
        "truth".to_string(),
        String::new(),
        String::new(),
        table.truth.value.to_string(),
        "1".to_string(),
        table.truth_scaled_estimate.to_string(),
        String::new(),
        String::new(),
    ])?;
    for row in &table.rows {
        w.write_record([
            row.method.to_string(),
            row.seconds.to_string(),
            row.select_seconds.to_string(),
            row.volume.value.to_string(),
            row.ratio.to_string(),
            row.scaled_estimate.to_string(),
            row.volume.std_error().to_string(),
            row.warnings.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Objective trace of an optimizer, one accepted or attempted step per row.
pub fn write_trace_csv(path: &Path, selection: &Selection) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if let Some(g) = &selection.givens {
        w.write_record(["iterate", "scale", "i1", "i2", "theta", "value"])?;
        for s in &g.best.trace {
            w.write_record([
                s.iterate.to_string(),
                s.scale.to_string(),
                s.i1.to_string(),
                s.i2.to_string(),
                s.theta.to_string(),
                s.value.to_string(),
            ])?;
        }
    } else if let Some(r) = &selection.riemannian {
        w.write_record(["start", "iteration", "value", "radius", "grad_norm", "ratio", "accepted"])?;
        for s in &r.trace {
            w.write_record([
                s.start.to_string(),
                s.iteration.to_string(),
                s.value.to_string(),
                s.radius.to_string(),
                s.grad_norm.to_string(),
                s.ratio.to_string(),
                s.accepted.to_string(),
            ])?;
        }
    } else {
        w.write_record(["value"])?;
        if let Some(v) = selection.value {
            w.write_record([v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mzreach::Rng;

    #[test]
    fn matrix_csv_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let m = Rng::new(1).normal_matrix(3, 4) * 1e-7;
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &m).unwrap();
        assert_eq!(read_matrix_csv(&path).unwrap(), m);
    }

    #[test]
    fn dataset_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let s = crate::scenario::Scenario::five_state();
        let data = s.generate_data().unwrap();
        write_dataset(dir.path(), &data, s.data.seed).unwrap();
        let (back, manifest) = read_dataset(dir.path()).unwrap();
        assert_eq!(back, data);
        assert_eq!(manifest.seed, 42);
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1,2\n3\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }
}
