//! Command implementations. Each returns the lines to print and any
//! warnings instead of printing itself.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rbinit_core::prelude::{RngNormals, StateVector};
use rbinit_sim::io::{read_log, write_log, write_snapshots};
use rbinit_sim::oracle::compare_with_oracle;
use rbinit_sim::realization::RunOutput;
use rbinit_sim::{rmse_sweep, rng_for, run_events, run_realization, synthesize, Stream};
use serde::Serialize;

use crate::{CliError, Command, RunConfig};

pub const TRACE_FILE: &str = "trace.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.jsonl";
pub const LOG_FILE: &str = "log.jsonl";
pub const RMSE_FILE: &str = "rmse.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

const SWEEP_REALIZATIONS: usize = 100;
const ORACLE_REALIZATIONS: usize = 50;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// One row per ranging event. Angles in degrees; truth columns are empty
/// when replaying a recorded log.
#[derive(Serialize)]
struct TraceRow {
    ranging_index: usize,
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    theta_deg: f64,
    var_x: f64,
    var_y: f64,
    var_z: f64,
    var_theta_deg2: f64,
    x0: f64,
    y0: f64,
    z0: f64,
    theta0_deg: f64,
    conditioned: bool,
    terminated: bool,
    true_x: Option<f64>,
    true_y: Option<f64>,
    true_z: Option<f64>,
    true_theta_deg: Option<f64>,
    error_m: Option<f64>,
}

pub fn execute(command: &Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Simulate => simulate(config),
        Command::RmseSweep => sweep(config),
        Command::Replay { log } => replay(log, config),
        Command::OracleCompare => oracle_compare(config),
        Command::DumpConfig => Ok(Report { summary: vec![config.to_toml()], ..Default::default() }),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn create(dir: &Path, name: &str, report: &mut Report) -> Result<(BufWriter<File>, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| io_err(&path, e))?;
    report.written.push(path.clone());
    Ok((BufWriter::new(f), path))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path, e))
}

fn write_trace(
    dir: &Path,
    run: &RunOutput,
    truth: Option<&[StateVector]>,
    report: &mut Report,
) -> Result<(), CliError> {
    let (w, path) = create(dir, TRACE_FILE, report)?;
    let mut out = csv::Writer::from_writer(w);
    for (i, e) in run.estimates.iter().enumerate() {
        let t = truth.and_then(|t| t.get(i));
        let row = TraceRow {
            ranging_index: e.ranging_index,
            t: e.t,
            x: e.estimate.x,
            y: e.estimate.y,
            z: e.estimate.z,
            theta_deg: e.estimate.theta.to_degrees(),
            var_x: e.cov_diag[0],
            var_y: e.cov_diag[1],
            var_z: e.cov_diag[2],
            var_theta_deg2: e.cov_diag[3].sqrt().to_degrees().powi(2),
            x0: e.x0_hat.x,
            y0: e.x0_hat.y,
            z0: e.x0_hat.z,
            theta0_deg: e.x0_hat.theta.to_degrees(),
            conditioned: e.conditioned,
            terminated: e.terminated,
            true_x: t.map(|t| t.x),
            true_y: t.map(|t| t.y),
            true_z: t.map(|t| t.z),
            true_theta_deg: t.map(|t| t.theta.to_degrees()),
            error_m: t.map(|t| e.estimate.position_distance(t)),
        };
        out.serialize(row).map_err(|e| io_err(&path, e))?;
    }
    let w = out.into_inner().map_err(|e| io_err(&path, e))?;
    finish(w, &path)
}

fn write_run_outputs(
    dir: &Path,
    run: &RunOutput,
    truth: Option<&[StateVector]>,
    report: &mut Report,
) -> Result<(), CliError> {
    write_trace(dir, run, truth, report)?;
    let (mut w, path) = create(dir, SNAPSHOT_FILE, report)?;
    write_snapshots(&mut w, &run.snapshots).map_err(|e| io_err(&path, e))?;
    finish(w, &path)
}

fn summarize_run(run: &RunOutput, report: &mut Report) {
    report.summary.push(format!("{} ranging events, {} particles", run.estimates.len(), run.particle_count));
    match run.termination_index {
        Some(i) => report.summary.push(format!("termination condition met at ranging {i}")),
        None => report.summary.push("termination condition not met".into()),
    }
    report.warnings.extend(run.warnings.iter().cloned());
}

fn simulate(config: &RunConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let settings = config.filter_settings(config.single_granularity()?)?;
    let result = run_realization(&scenario, &settings, config.seed, true)?;
    let synth = synthesize(&scenario, config.seed)?;
    let mut report = Report::default();
    write_run_outputs(&config.out, &result.run, Some(&result.truth), &mut report)?;
    let (mut w, path) = create(&config.out, LOG_FILE, &mut report)?;
    write_log(&mut w, &synth.events).map_err(|e| io_err(&path, e))?;
    finish(w, &path)?;
    summarize_run(&result.run, &mut report);
    report.summary.push(format!("final position error {:.3} m", result.final_error()));
    Ok(report)
}

fn replay(log: &Path, config: &RunConfig) -> Result<Report, CliError> {
    let settings = config.filter_settings(config.single_granularity()?)?;
    let file = File::open(log).map_err(|e| CliError::Config(format!("cannot open log {}: {e}", log.display())))?;
    let events = read_log(BufReader::new(file)).map_err(|e| match e {
        rbinit_sim::SimError::Parse { line, message } => {
            CliError::Config(format!("{} line {line}: {message}", log.display()))
        }
        other => other.into(),
    })?;
    let mut report = Report::default();
    if !events.iter().any(|e| matches!(e, rbinit_sim::LogEvent::Range(_))) {
        report.warnings.push(format!("{} has no ranging events; nothing written", log.display()));
        return Ok(report);
    }
    let mut normals = RngNormals(rng_for(config.seed, Stream::Filter));
    let run = run_events(&events, &settings, &mut normals, true)?;
    write_run_outputs(&config.out, &run, None, &mut report)?;
    summarize_run(&run, &mut report);
    Ok(report)
}

fn sweep(config: &RunConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let granularities = config.sweep_granularities();
    let template = config.filter_settings(granularities.first().copied().unwrap_or(90.0))?;
    let n = config.realizations_or(SWEEP_REALIZATIONS)?;
    let table = rmse_sweep(&scenario, &template, &granularities, n, config.seed)?;
    let mut report = Report::default();
    let (mut w, path) = create(&config.out, RMSE_FILE, &mut report)?;
    table.write_csv(&mut w).map_err(|e| io_err(&path, e))?;
    finish(w, &path)?;
    for g in &granularities {
        if let Some(r) = table.final_rmse(*g) {
            report.summary.push(format!("{g} deg: final RMSE {r:.3} m over {n} realizations"));
        }
    }
    report.warnings = table.warnings;
    Ok(report)
}

fn oracle_compare(config: &RunConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let settings = config.filter_settings(config.single_granularity()?)?;
    let n = config.realizations_or(ORACLE_REALIZATIONS)?;
    let c = compare_with_oracle(&scenario, &settings, config.oracle_particles, n, config.seed)?;
    let mut report = Report::default();
    let (w, path) = create(&config.out, COMPARISON_FILE, &mut report)?;
    let mut out = csv::Writer::from_writer(w);
    out.serialize(&c).map_err(|e| io_err(&path, e))?;
    let w = out.into_inner().map_err(|e| io_err(&path, e))?;
    finish(w, &path)?;
    report.summary.push(format!(
        "final RMSE: initializer {:.3} m ({} particles), oracle {:.3} m ({} particles), difference {:.3} m",
        c.rmse_init_m, c.init_particles, c.rmse_oracle_m, c.oracle_particles, c.rmse_difference_m
    ));
    report.summary.push(format!(
        "trig evaluations per realization: {:.0} vs {:.0}, ratio {:.1}",
        c.trig_init, c.trig_oracle, c.trig_ratio
    ));
    Ok(report)
}
