//! On-disk formats: JSON-lines snapshots, CSV exports and the run manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use imcf_core::diagnostics::{CheckResult, CheckScope};
use imcf_core::flow::SingularTimeEstimate;
use imcf_core::{Mode, Snapshot, Trajectory};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::Error;

pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const AREA_FILE: &str = "area.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

/// JSON has no infinities; non-finite values are written as strings.
pub mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub scope: CheckScope,
    #[serde(with = "lenient_f64")]
    pub max_residual: f64,
    #[serde(with = "lenient_f64")]
    pub threshold: f64,
    pub pass: bool,
    pub details: String,
}

impl From<&CheckResult> for CheckRecord {
    fn from(c: &CheckResult) -> Self {
        Self {
            name: c.name.clone(),
            scope: c.scope,
            max_residual: c.max_residual,
            threshold: c.threshold,
            pass: c.pass,
            details: c.details.clone(),
        }
    }
}

impl CheckRecord {
    /// Bitwise equality, so NaN matches NaN.
    pub fn same_as(&self, other: &CheckRecord) -> bool {
        self.name == other.name
            && self.scope == other.scope
            && self.max_residual.to_bits() == other.max_residual.to_bits()
            && self.threshold.to_bits() == other.threshold.to_bits()
            && self.pass == other.pass
            && self.details == other.details
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotIndexEntry {
    pub line: usize,
    pub step: u64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flattening {
    #[serde(with = "lenient_f64")]
    pub initial_sup_u_minus_1: f64,
    #[serde(with = "lenient_f64")]
    pub final_sup_u_minus_1: f64,
    #[serde(with = "lenient_f64")]
    pub ratio: f64,
    /// Calibration target on `final_sup_u_minus_1`.
    pub target: f64,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub code_version: String,
    pub config: RunConfig,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub stop_reason: imcf_core::StopReason,
    pub steps: u64,
    pub final_t: f64,
    pub singular_time: Option<SingularTimeEstimate>,
    #[serde(with = "lenient_f64")]
    pub area_law_residual: f64,
    pub flattening: Flattening,
    pub checks: Vec<CheckRecord>,
    pub all_checks_pass: bool,
    pub snapshot_file: String,
    pub snapshots: Vec<SnapshotIndexEntry>,
}

pub fn write_snapshots(path: &Path, traj: &Trajectory) -> Result<(), Error> {
    let mut out = BufWriter::new(File::create(path)?);
    for s in &traj.snapshots {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots(path: &Path, mode: Mode, m: usize) -> Result<Trajectory, Error> {
    let reader = BufReader::new(File::open(path)?);
    let mut snapshots = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Snapshot = serde_json::from_str(&line)?;
        if s.values.len() != mode.node_count(m) {
            return Err(Error::Format(format!(
                "snapshot at step {} has {} values, expected {}",
                s.step,
                s.values.len(),
                mode.node_count(m)
            )));
        }
        snapshots.push(s);
    }
    Ok(Trajectory { mode, m, snapshots })
}

/// Long-format `u` profiles: one row per snapshot and node.
pub fn write_profiles(path: &Path, traj: &Trajectory) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "t", "node", "x", "y", "u"])?;
    let Some(first) = traj.snapshots.first() else {
        w.flush()?;
        return Ok(());
    };
    let grid = imcf_core::GraphFunction::new(traj.mode, traj.m, first.values.clone())?;
    for s in &traj.snapshots {
        for (node, v) in s.values.iter().enumerate() {
            let [x, y] = grid.position(node);
            w.write_record(&[
                s.step.to_string(),
                s.t.to_string(),
                node.to_string(),
                x.to_string(),
                y.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-snapshot scalars for plotting `A(t)`, curvature extrema and residuals.
pub fn write_area(path: &Path, traj: &Trajectory) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "step",
        "t",
        "area",
        "area_law_ratio",
        "min_h",
        "max_h",
        "min_kappa",
        "max_kappa",
        "rim_height",
        "sup_u_minus_1",
        "sup_du",
        "neumann_residual",
    ])?;
    let Some(first) = traj.snapshots.first() else {
        w.flush()?;
        return Ok(());
    };
    let (t0, a0) = (first.t, first.scalars.area);
    for s in &traj.snapshots {
        let c = &s.scalars;
        let ratio = c.area * (-(s.t - t0)).exp() / a0;
        let mut row = vec![s.step.to_string()];
        row.extend(
            [s.t, c.area, ratio, c.min_h, c.max_h, c.min_kappa, c.max_kappa, c.rim_height, c.sup_u_minus_1, c.sup_du, c.neumann_residual]
                .iter()
                .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `manifest.json` through a temporary file and a rename.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Error> {
    let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut out, manifest)?;
        out.write_all(b"\n")?;
        out.flush()?;
        out.get_ref().sync_all()?;
    }
    fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, Error> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
