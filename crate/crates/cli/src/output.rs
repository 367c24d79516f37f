//! CSV tables and the JSON run summary.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// `git describe` of the build, or the package version outside a checkout.
pub const VERSION: &str = env!("QP_SPECTRA_VERSION");

/// A table whose first column is always `schema_version`.
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        let mut h = vec!["schema_version".to_string()];
        h.extend(header.iter().map(|s| s.to_string()));
        Table {
            name: name.to_string(),
            header: h,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len() + 1, self.header.len(), "row width for {}", self.name);
        let mut r = vec![SCHEMA_VERSION.to_string()];
        r.extend(row);
        self.rows.push(r);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Formats a row of heterogeneous cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($crate::output::cell(&$cell)),*]
    };
}

pub fn cell<T: Display + ?Sized>(v: &T) -> String {
    v.to_string()
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_table(&self, table: &Table) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// `summary.json`: version, subcommand, config echo and results.
    pub fn write_summary(&self, command: &str, config: &ExperimentConfig, ok: bool, results: Value) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Summary<'a> {
            schema_version: u32,
            version: &'a str,
            command: &'a str,
            ok: bool,
            config: &'a ExperimentConfig,
            results: Value,
        }
        self.write_json(
            "summary",
            &Summary {
                schema_version: SCHEMA_VERSION,
                version: VERSION,
                command,
                ok,
                config,
                results,
            },
        )
    }
}
