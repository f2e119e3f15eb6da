//! Orchestration of the subcommands: building runs from scenario files,
//! writing CSV time series and JSON summaries, and turning failed checks
//! into exit codes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use liepoisson::verify::{
    check_equivalence, check_port_balance, check_port_condition, standard_suite, CheckReport,
};
use liepoisson::{integrate_full, integrate_reduced, Coords, FullState, Trajectory};

use crate::config::{
    BuiltScenario, EquivalenceScenario, PortScenario, ScenarioConfig, SystemSpec,
};
use crate::error::{io_error, run_error, CliError};

pub struct RunOptions<'a> {
    pub out_dir: &'a Path,
    pub seed: u64,
    pub quiet: bool,
}

impl RunOptions<'_> {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn ensure_out_dir(&self) -> Result<(), CliError> {
        fs::create_dir_all(self.out_dir).map_err(|e| io_error(self.out_dir, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSummary {
    pub name: String,
    pub first: f64,
    pub min: f64,
    pub max: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub wall_time_s: f64,
    pub n_samples: usize,
    pub final_time: f64,
    pub state_columns: Vec<String>,
    pub final_state: Vec<f64>,
    pub diagnostics: Vec<DiagnosticSummary>,
}

fn full_columns() -> Vec<String> {
    let mut cols = Vec::with_capacity(12);
    for i in 1..=3 {
        for j in 1..=3 {
            cols.push(format!("a_{i}{j}"));
        }
    }
    for i in 1..=3 {
        cols.push(format!("pi_{i}"));
    }
    cols
}

fn full_flat(x: &FullState) -> Vec<f64> {
    let m = x.attitude.matrix();
    let mut flat = Vec::with_capacity(12);
    for i in 0..3 {
        for j in 0..3 {
            flat.push(m[(i, j)]);
        }
    }
    flat.extend([x.pi.x, x.pi.y, x.pi.z]);
    flat
}

fn write_csv<S>(
    path: &Path,
    traj: &Trajectory<S>,
    columns: &[String],
    flat: &dyn Fn(&S) -> Vec<f64>,
    every: usize,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut io = |e| io_error(path, e);
    let diag_names: Vec<&str> = traj.diagnostics.iter().map(|d| d.name.as_str()).collect();
    let header = std::iter::once("t".to_string())
        .chain(columns.iter().cloned())
        .chain(diag_names.iter().map(|s| s.to_string()))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(w, "{header}").map_err(&mut io)?;
    for i in (0..traj.len()).step_by(every) {
        let mut row = Vec::with_capacity(1 + columns.len() + diag_names.len());
        row.push(format!("{:.16e}", traj.times[i]));
        for v in flat(&traj.states[i]) {
            row.push(format!("{v:.16e}"));
        }
        for d in &traj.diagnostics {
            row.push(format!("{:.16e}", d.values[i]));
        }
        writeln!(w, "{}", row.join(",")).map_err(&mut io)?;
    }
    w.flush().map_err(&mut io)
}

fn diagnostic_summaries<S>(traj: &Trajectory<S>) -> Vec<DiagnosticSummary> {
    traj.diagnostics
        .iter()
        .map(|d| {
            let first = d.values[0];
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut drift = 0.0f64;
            for v in &d.values {
                min = min.min(*v);
                max = max.max(*v);
                drift = drift.max((v - first).abs());
            }
            DiagnosticSummary {
                name: d.name.clone(),
                first,
                min,
                max,
                drift,
            }
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

pub fn simulate(scenario: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(scenario)?;
    let built = cfg.build()?;
    opts.ensure_out_dir()?;
    let started = Instant::now();
    let (n_samples, final_time, state_columns, final_state, diagnostics, csv_path) = match &built {
        BuiltScenario::Reduced { sys, law, x0, spec } => {
            let traj = integrate_reduced(sys, law.as_ref(), x0, spec).map_err(run_error)?;
            let columns = x0.component_names();
            let csv_path = maybe_csv(&cfg, opts, &traj, &columns, &|s: &liepoisson::ReducedState| {
                (0..s.dim()).map(|i| s.coord(i)).collect()
            })?;
            let last = traj.states.last().expect("nonempty run");
            (
                traj.len(),
                *traj.times.last().expect("nonempty run"),
                columns,
                (0..last.dim()).map(|i| last.coord(i)).collect::<Vec<_>>(),
                diagnostic_summaries(&traj),
                csv_path,
            )
        }
        BuiltScenario::Full {
            params,
            law,
            x0,
            spec,
        } => {
            let traj = integrate_full(params, law.as_ref(), x0, spec).map_err(run_error)?;
            let columns = full_columns();
            let csv_path = maybe_csv(&cfg, opts, &traj, &columns, &full_flat)?;
            let last = traj.states.last().expect("nonempty run");
            (
                traj.len(),
                *traj.times.last().expect("nonempty run"),
                columns,
                full_flat(last),
                diagnostic_summaries(&traj),
                csv_path,
            )
        }
    };
    let summary = RunSummary {
        config: cfg.clone(),
        seed: opts.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        n_samples,
        final_time,
        state_columns,
        final_state,
        diagnostics,
    };
    let mut wrote = Vec::new();
    if let Some(p) = csv_path {
        wrote.push(p.display().to_string());
    }
    if cfg.outputs.summary {
        let path = opts.out_dir.join(format!("{}_summary.json", cfg.name));
        write_json(&path, &summary)?;
        wrote.push(path.display().to_string());
    }
    opts.say(format!(
        "{}: {} samples to t = {}, wall {:.3} s{}{}",
        cfg.name,
        summary.n_samples,
        summary.final_time,
        summary.wall_time_s,
        if wrote.is_empty() { "" } else { ", wrote " },
        wrote.join(" and ")
    ));
    Ok(())
}

fn maybe_csv<S>(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    traj: &Trajectory<S>,
    columns: &[String],
    flat: &dyn Fn(&S) -> Vec<f64>,
) -> Result<Option<PathBuf>, CliError> {
    if !cfg.outputs.csv {
        return Ok(None);
    }
    let path = opts.out_dir.join(format!("{}.csv", cfg.name));
    write_csv(&path, traj, columns, flat, cfg.outputs.every)?;
    Ok(Some(path))
}

fn finish_checks(
    reports: &[CheckReport],
    json_path: &Path,
    opts: &RunOptions,
) -> Result<(), CliError> {
    write_json(json_path, &reports)?;
    for r in reports {
        opts.say(format!(
            "[{}] {}: observed {:.3e} (tolerance {:.1e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.observed,
            r.tolerance
        ));
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::CheckFailure {
            failed,
            total: reports.len(),
        });
    }
    opts.say(format!(
        "all {} checks passed, report at {}",
        reports.len(),
        json_path.display()
    ));
    Ok(())
}

pub fn verify(opts: &RunOptions) -> Result<(), CliError> {
    opts.ensure_out_dir()?;
    let reports = standard_suite(opts.seed).map_err(run_error)?;
    finish_checks(&reports, &opts.out_dir.join("verify_report.json"), opts)
}

pub fn equivalence(scenario: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let cfg = EquivalenceScenario::load(scenario)?;
    let pairing = cfg.build()?;
    opts.ensure_out_dir()?;
    let report = check_equivalence(&pairing, cfg.samples, cfg.tolerance, opts.seed, cfg.perturb)
        .map_err(run_error)?;
    let path = opts.out_dir.join(format!("{}_equivalence.json", cfg.name));
    finish_checks(&[report], &path, opts)
}

pub fn port(scenario: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let cfg = PortScenario::load(scenario)?;
    let (port, dof) = cfg.build()?;
    opts.ensure_out_dir()?;
    let mut reports = vec![check_port_condition(
        &port,
        dof,
        cfg.samples,
        cfg.tolerance,
        opts.seed,
    )];
    if let Some(balance) = &cfg.balance {
        let SystemSpec::Reduced(sys) = balance.system.build()? else {
            return Err(CliError::Validation(
                "balance runs use a reduced system".into(),
            ));
        };
        let law = balance.control.build()?;
        if !law.admissible_for(&sys) {
            return Err(CliError::Validation(format!(
                "control law {:?} does not drive the channels of {:?}",
                law.name(),
                sys.name()
            )));
        }
        let x0 = balance.initial_state.build_reduced(&sys)?;
        let spec = liepoisson::IntegratorSpec::rk4(balance.step, balance.t_final);
        spec.validate().map_err(crate::error::config_error)?;
        let traj = integrate_reduced(&sys, Some(&law), &x0, &spec).map_err(run_error)?;
        reports.push(check_port_balance(&traj, balance.step, balance.tolerance).map_err(run_error)?);
    }
    let path = opts.out_dir.join(format!("{}_port.json", cfg.name));
    finish_checks(&reports, &path, opts)
}
