//! File writers. Floats are written with 17 significant digits so values
//! round-trip exactly and reruns with the same config are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use ssm_dynamics::graddyn::{ParamKind, RunStatus, Trajectory};

use crate::data::Dataset;
use crate::error::{LabError, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Tracks the files written under one output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn target(&mut self, rel: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
        Ok(path)
    }

    pub fn write_csv(&mut self, rel: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.target(rel)?;
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => LabError::io(&path, e),
            other => LabError::io(&path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let path = self.target(rel)?;
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| LabError::io(&path, e))
    }

    /// Adds files written by a nested run, prefixed with its subdirectory.
    pub fn adopt(&mut self, prefix: &str, files: &[String]) {
        self.files
            .extend(files.iter().map(|f| format!("{prefix}/{f}")));
    }
}

/// Column names for the flattened parameter vector.
pub fn param_columns(layer_sizes: &[usize]) -> Vec<String> {
    let stacked = layer_sizes.len() > 1;
    let mut cols = Vec::new();
    for (l, &n) in layer_sizes.iter().enumerate() {
        for which in ParamKind::ALL {
            for i in 0..n {
                cols.push(if stacked {
                    format!("{}{l}_{i}", which.name())
                } else {
                    format!("{}_{i}", which.name())
                });
            }
        }
    }
    cols
}

pub fn trajectory_table(traj: &Trajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = ["step", "t", "loss_freq", "lambda"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(param_columns(&traj.layer_sizes));
    let rows = traj
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                r.step.to_string(),
                fmt_f64(r.t),
                fmt_f64(r.loss_freq),
                fmt_f64(r.lambda),
            ];
            row.extend(r.params.iter().map(|&p| fmt_f64(p)));
            row
        })
        .collect();
    (header, rows)
}

pub fn response_table(traj: &Trajectory) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let header = ["step", "k", "re", "im"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for r in &traj.records {
        for (k, h) in r.response.as_ref()?.iter().enumerate() {
            rows.push(vec![r.step.to_string(), k.to_string(), fmt_f64(h.re), fmt_f64(h.im)]);
        }
    }
    Some((header, rows))
}

pub fn data_table(d: &Dataset) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["index", "u_time", "y_time", "u_re", "u_im", "y_re", "y_im"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = (0..d.len())
        .map(|i| {
            vec![
                i.to_string(),
                fmt_f64(d.u_time[i]),
                fmt_f64(d.y_time[i]),
                fmt_f64(d.u[i].re),
                fmt_f64(d.u[i].im),
                fmt_f64(d.y[i].re),
                fmt_f64(d.y[i].im),
            ]
        })
        .collect();
    (header, rows)
}

pub fn curve_table(columns: &[&str], series: &[&[f64]]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = columns.iter().map(|s| s.to_string()).collect();
    let len = series.first().map_or(0, |s| s.len());
    let rows = (0..len)
        .map(|i| series.iter().map(|s| fmt_f64(s[i])).collect())
        .collect();
    (header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum ManifestStatus {
    Completed,
    Diverged { step: usize, reason: String },
    Failed { error: String },
}

impl From<&RunStatus> for ManifestStatus {
    fn from(s: &RunStatus) -> Self {
        match s {
            RunStatus::Completed => ManifestStatus::Completed,
            RunStatus::Diverged { step, reason } => ManifestStatus::Diverged {
                step: *step,
                reason: reason.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config_name: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub status: ManifestStatus,
    pub files: Vec<String>,
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}
