use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wsaw_core::{Error, Result};

use crate::config::ExperimentConfig;

/// Rows of one CSV table, kept as strings so floats print in shortest round-trip form.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(name: &str, header: &[S]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    outputs: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Writes every table and `manifest.json` into the output directory.
pub fn write_all(cfg: &ExperimentConfig, tables: &[Table]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)?;
    let mut paths = Vec::with_capacity(tables.len() + 1);
    for t in tables {
        paths.push(t.write(&cfg.out)?);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        outputs: tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
        config: cfg,
    };
    let path = cfg.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    paths.push(path);
    Ok(paths)
}

/// Reads the resolved config back from a manifest (or from a bare config file).
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    let inner = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

pub fn f(x: f64) -> String {
    format!("{x}")
}

pub fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}
