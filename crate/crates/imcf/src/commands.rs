use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use imcf_core::chart::{conformal_factor, inverse_map, jet, sigma_metric};
use imcf_core::diagnostics::evaluate_trajectory;
use imcf_core::flow::{self, FlowError};
use imcf_core::geometry::{area, geometry_field, neumann_residual};
use imcf_core::initial_data::{validate, AdmissibilityReport};
use imcf_core::{ChartPoint, GraphFunction, Mode, StopReason};
use serde::Serialize;

use crate::config::{RunConfig, SweepConfig};
use crate::persist::{self, CheckRecord, Flattening, RunManifest, SnapshotIndexEntry};
use crate::{exit, Error};

/// `sup(u − 1)` at termination must fall to this value.
pub const FLATTENING_TARGET: f64 = 0.5;

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.stop_reason.is_numerical_failure() {
            exit::NUMERICAL
        } else {
            exit::OK
        }
    }
}

/// Runs one configuration and persists snapshots, CSV exports and the
/// manifest in its output directory.
pub fn run_config(config: &RunConfig) -> Result<RunSummary, Error> {
    run_into(config, &config.output_dir())
}

pub fn run_into(config: &RunConfig, dir: &Path) -> Result<RunSummary, Error> {
    config.validate()?;
    let u0 = config.initial_graph()?;
    let dir = dir.to_path_buf();
    fs::create_dir_all(&dir)?;

    let started = unix_now();
    let out = flow::run(u0, &config.policy, &config.thresholds).map_err(|e| match e {
        FlowError::Inadmissible(_) | FlowError::InvalidPolicy(_) => Error::Config(e.to_string()),
        other => Error::Flow(other),
    })?;
    let traj = &out.trajectory;

    persist::write_snapshots(&dir.join(persist::SNAPSHOTS_FILE), traj)?;
    if config.outputs.profiles_csv {
        persist::write_profiles(&dir.join(persist::PROFILES_FILE), traj)?;
    }
    if config.outputs.area_csv {
        persist::write_area(&dir.join(persist::AREA_FILE), traj)?;
    }

    let first = traj.snapshots.first().map(|s| s.scalars.sup_u_minus_1).unwrap_or(f64::NAN);
    let last = traj.snapshots.last().map(|s| s.scalars.sup_u_minus_1).unwrap_or(f64::NAN);
    let checks: Vec<CheckRecord> = out.checks.iter().map(CheckRecord::from).collect();
    let area_law_residual = out.checks.iter().find(|c| c.name == "area_law").map_or(f64::NAN, |c| c.max_residual);
    let manifest = RunManifest {
        format_version: persist::FORMAT_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        started_unix_s: started,
        finished_unix_s: unix_now(),
        stop_reason: out.stop,
        steps: out.state.steps,
        final_t: out.state.t,
        singular_time: out.singular_time.clone(),
        area_law_residual,
        flattening: Flattening {
            initial_sup_u_minus_1: first,
            final_sup_u_minus_1: last,
            ratio: last / first,
            target: FLATTENING_TARGET,
            met: last <= FLATTENING_TARGET,
        },
        all_checks_pass: checks.iter().all(|c| c.pass),
        checks,
        snapshot_file: persist::SNAPSHOTS_FILE.to_string(),
        snapshots: traj
            .snapshots
            .iter()
            .enumerate()
            .map(|(line, s)| SnapshotIndexEntry { line, step: s.step, t: s.t })
            .collect(),
    };
    persist::write_manifest(&dir, &manifest)?;
    Ok(RunSummary { dir, manifest })
}

pub fn cmd_run(config_path: &Path) -> i32 {
    let result = RunConfig::from_path(config_path).and_then(|c| run_config(&c));
    match result {
        Ok(summary) => {
            let m = &summary.manifest;
            eprintln!(
                "stop: {:?} after {} steps at t = {}; T* = {}; checks {}; output in {}",
                m.stop_reason,
                m.steps,
                m.final_t,
                m.singular_time.as_ref().map_or("n/a".to_string(), |s| s.t_star.to_string()),
                if m.all_checks_pass { "pass" } else { "FAIL" },
                summary.dir.display()
            );
            summary.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifiedCheck {
    #[serde(flatten)]
    pub check: CheckRecord,
    pub matches_manifest: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub manifest: PathBuf,
    pub snapshots: usize,
    pub index_consistent: bool,
    pub reproduced: bool,
    pub all_pass: bool,
    pub checks: Vec<VerifiedCheck>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.all_pass && self.reproduced && self.index_consistent
    }
}

/// Recomputes every check from the persisted snapshots and compares them
/// with the manifest.
pub fn verify_manifest(path: &Path) -> Result<VerifyReport, Error> {
    let manifest = persist::read_manifest(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let config = &manifest.config;
    let traj = persist::read_snapshots(&dir.join(&manifest.snapshot_file), config.mode, config.m)?;
    let index_consistent = traj.snapshots.len() == manifest.snapshots.len()
        && traj
            .snapshots
            .iter()
            .zip(&manifest.snapshots)
            .all(|(s, e)| s.step == e.step && s.t.to_bits() == e.t.to_bits());
    let recomputed: Vec<CheckRecord> =
        evaluate_trajectory(&traj, &config.thresholds)?.iter().map(CheckRecord::from).collect();
    let reproduced = recomputed.len() == manifest.checks.len();
    let checks: Vec<VerifiedCheck> = recomputed
        .into_iter()
        .enumerate()
        .map(|(i, check)| {
            let matches_manifest = manifest.checks.get(i).is_some_and(|c| c.same_as(&check));
            VerifiedCheck { check, matches_manifest }
        })
        .collect();
    Ok(VerifyReport {
        manifest: path.to_path_buf(),
        snapshots: traj.snapshots.len(),
        index_consistent,
        reproduced: reproduced && checks.iter().all(|c| c.matches_manifest),
        all_pass: checks.iter().all(|c| c.check.pass),
        checks,
    })
}

pub fn cmd_verify(path: &Path) -> i32 {
    match verify_manifest(path) {
        Ok(report) => {
            match serde_json::to_string_pretty(&report) {
                Ok(text) => {
                    // A closed pipe must not turn a verdict into a panic.
                    let _ = writeln!(std::io::stdout().lock(), "{text}");
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit::FAILURE;
                }
            }
            if report.ok() {
                exit::OK
            } else {
                exit::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn entry_dir_name(c: &RunConfig) -> String {
    format!("lambda{}_a{}_m{}", c.initial.lambda0(), c.initial.amplitude(), c.m)
}

/// Runs every sweep entry in its own subdirectory and writes `summary.csv`.
pub fn run_sweep(sweep: &SweepConfig) -> Result<(PathBuf, Vec<Option<StopReason>>), Error> {
    let root = sweep.base.output_dir();
    fs::create_dir_all(&root)?;
    let mut w = csv::Writer::from_path(root.join("summary.csv"))?;
    w.write_record([
        "lambda0",
        "amplitude",
        "m",
        "stop_reason",
        "steps",
        "final_t",
        "t_star",
        "area_law_residual",
        "boundary_height_residual",
        "boundary_h_residual",
        "final_sup_u_minus_1",
        "all_checks_pass",
        "error",
    ])?;
    let mut stops = Vec::new();
    for mut entry in sweep.entries() {
        entry.outputs.directory = root.join(entry_dir_name(&entry));
        let dir = entry.outputs.directory.clone();
        let (lambda0, amplitude, m) = (entry.initial.lambda0(), entry.initial.amplitude(), entry.m);
        let mut row = vec![lambda0.to_string(), amplitude.to_string(), m.to_string()];
        match run_into(&entry, &dir).map(|s| s.manifest) {
            Ok(man) => {
                let residual = |name: &str| {
                    man.checks.iter().find(|c| c.name == name).map_or(String::new(), |c| c.max_residual.to_string())
                };
                row.extend([
                    format!("{:?}", man.stop_reason),
                    man.steps.to_string(),
                    man.final_t.to_string(),
                    man.singular_time.as_ref().map_or(String::new(), |s| s.t_star.to_string()),
                    man.area_law_residual.to_string(),
                    residual("boundary_height_identity"),
                    residual("boundary_h_identity"),
                    man.flattening.final_sup_u_minus_1.to_string(),
                    man.all_checks_pass.to_string(),
                    String::new(),
                ]);
                stops.push(Some(man.stop_reason));
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(e.to_string());
                stops.push(None);
            }
        }
        w.write_record(&row)?;
        w.flush()?;
    }
    Ok((root, stops))
}

pub fn cmd_sweep(path: &Path) -> i32 {
    let sweep = match SweepConfig::from_path(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match run_sweep(&sweep) {
        Ok((root, stops)) => {
            eprintln!("{} entries; summary in {}", stops.len(), root.join("summary.csv").display());
            if stops.iter().flatten().any(|s| s.is_numerical_failure()) {
                exit::NUMERICAL
            } else {
                exit::OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Reads a profile CSV with header `r,u` (axisymmetric) or `x,u` (interval)
/// on the uniform grid of its row count.
pub fn read_profile<R: Read>(reader: R) -> Result<GraphFunction, Error> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let mode = match names.as_slice() {
        ["r", "u"] => Mode::Axisymmetric,
        ["x", "u"] => Mode::Interval,
        other => return Err(Error::Input(format!("profile header must be `r,u` or `x,u`, got {other:?}"))),
    };
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, Error> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Input(format!("row {}: column {} is not a number", row + 1, i + 1)))
        };
        coords.push(parse(0)?);
        values.push(parse(1)?);
    }
    let m = values.len();
    let u = GraphFunction::new(mode, m, values)?;
    for (node, &c) in coords.iter().enumerate() {
        let expect = u.position(node)[0];
        if (c - expect).abs() > 1e-9 {
            return Err(Error::Input(format!("node {node}: coordinate {c} is off the uniform grid (expected {expect})")));
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub m: usize,
    pub area: f64,
    pub neumann_residual: f64,
    pub admissibility: AdmissibilityReport,
}

/// Per-node geometry of a profile as CSV, plus a summary.
pub fn geometry_table<W: Write>(u: &GraphFunction, out: W) -> Result<ProfileSummary, Error> {
    let field = geometry_field(u)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "node",
        "coord",
        "u",
        "height",
        "mean_curvature",
        "kappa_min",
        "kappa_max",
        "v",
        "e_psi",
        "normal_height",
        "speed",
    ])?;
    for (node, s) in field.iter().enumerate() {
        w.write_record(&[
            node.to_string(),
            u.position(node)[0].to_string(),
            u.values()[node].to_string(),
            s.height.to_string(),
            s.mean_curvature.to_string(),
            s.kappa_min().to_string(),
            s.kappa_max().to_string(),
            s.v.to_string(),
            s.e_psi.to_string(),
            s.normal[0].to_string(),
            s.speed().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(ProfileSummary {
        m: u.m(),
        area: area(u, &field),
        neumann_residual: neumann_residual(u),
        admissibility: validate(u),
    })
}

pub fn cmd_geometry(path: &Path, summary_path: Option<&Path>) -> i32 {
    let result = fs::File::open(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        .and_then(read_profile)
        .and_then(|u| geometry_table(&u, std::io::stdout().lock()));
    match result {
        Ok(summary) => {
            eprintln!(
                "m = {}, area = {}, Neumann residual = {:e}, admissible = {}",
                summary.m, summary.area, summary.neumann_residual, summary.admissibility.pass
            );
            if let Some(p) = summary_path {
                let written = serde_json::to_string_pretty(&summary).map_err(Error::from).and_then(|t| Ok(fs::write(p, t)?));
                if let Err(e) = written {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Evaluates the chart on a CSV of points. Header `x1,x2,lambda` maps
/// forward with first derivatives; header `q0,q1,q2` inverts ambient points.
pub fn chart_table<R: Read, W: Write>(input: R, out: W) -> Result<usize, Error> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let forward = match names.as_slice() {
        ["x1", "x2", "lambda"] => true,
        ["q0", "q1", "q2"] => false,
        other => return Err(Error::Input(format!("chart header must be `x1,x2,lambda` or `q0,q1,q2`, got {other:?}"))),
    };
    let mut w = csv::Writer::from_writer(out);
    if forward {
        w.write_record([
            "x1", "x2", "lambda", "f0", "f1", "f2", "e_psi", "df_dlambda0", "df_dlambda1", "df_dlambda2", "df_dx1_0",
            "df_dx1_1", "df_dx1_2", "df_dx2_0", "df_dx2_1", "df_dx2_2", "sigma11", "sigma12", "sigma22",
        ])?;
    } else {
        w.write_record(["q0", "q1", "q2", "x1", "x2", "lambda"])?;
    }
    let mut rows = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let mut v = [0.0; 3];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = rec
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Input(format!("row {}: column {} is not a number", row + 1, i + 1)))?;
        }
        let mut out_row: Vec<f64> = v.to_vec();
        if forward {
            let p = ChartPoint::new([v[0], v[1]], v[2]).map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
            let j = jet(&p, 1);
            let s = sigma_metric(&p);
            out_row.extend(j.f);
            out_row.push(conformal_factor(&p));
            out_row.extend(j.d_lambda);
            out_row.extend(j.d_x[0]);
            out_row.extend(j.d_x[1]);
            out_row.extend([s[0][0], s[0][1], s[1][1]]);
        } else {
            let p = inverse_map(&v).map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
            out_row.extend([p.x[0], p.x[1], p.lambda]);
        }
        w.write_record(out_row.iter().map(|x| x.to_string()))?;
        rows += 1;
    }
    w.flush()?;
    Ok(rows)
}

pub fn cmd_chart(path: &Path) -> i32 {
    let result = fs::File::open(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        .and_then(|f| chart_table(f, std::io::stdout().lock()));
    match result {
        Ok(_) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
