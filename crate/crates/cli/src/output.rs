//! Persisted artifacts: report.json, CSV tables and SVG plots.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use attractorlab_core::{ReportEnvelope, TraceSeries};

use crate::plot::LinePlot;

/// Shortest decimal string that parses back to the same `f64`, in exponent form for
/// very small or large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(num).collect());
    }

    pub fn from_series(name: &str, series: &TraceSeries) -> Self {
        let mut t = Self::new(name, &["t", "value_re", "value_im"]);
        for (time, z) in series.times.iter().zip(&series.values) {
            t.push_nums(&[*time, z.re, z.im]);
        }
        t
    }
}

/// Everything one experiment produces. Only the coordinator writes it to disk.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub report: ReportEnvelope,
    /// Tables beyond the per-series CSVs derived from `report.series`.
    pub tables: Vec<Table>,
    pub plots: Vec<(String, LinePlot)>,
}

pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes report.json, one CSV per recorded series, the extra tables and the plots.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut written = Vec::new();
    let report = dir.join("report.json");
    let json = serde_json::to_string_pretty(&artifacts.report)?;
    fs::write(&report, json + "\n").with_context(|| format!("cannot write {}", report.display()))?;
    written.push(report);
    for (name, series) in &artifacts.report.series {
        written.push(write_table(dir, &Table::from_series(name, series))?);
    }
    for table in &artifacts.tables {
        written.push(write_table(dir, table)?);
    }
    for (name, plot) in &artifacts.plots {
        let path = dir.join(format!("{name}.svg"));
        fs::write(&path, plot.render()).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
