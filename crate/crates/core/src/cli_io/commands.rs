//! The `simulate`, `analyze` and `monitor` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::load_solver_config;
use super::manifest::{blob_hash, RunManifest, SnapshotEntry};
use super::snapshot::{read_snapshot, write_snapshot};
use super::tidy::{write_rows, Quantity, Row};
use crate::error::{Error, Result};
use crate::flux_analysis::{flux_report, FluxConfig, FluxReport};
use crate::littlewood_paley::{block_norms, BlockNorms};
use crate::nse_solver::{run_with, EnergyLedger};
use crate::regularity_monitor::{
    criterion_linfty_besov, criterion_lr_besov, criterion_tail_sup, criterion_time_integral,
    jump_functional, CriterionConfig, CriterionReport, History,
};
use crate::spectral_field::SpectralField;

pub const SNAPSHOT_DIR: &str = "snapshots";
pub const ENERGY_FILE: &str = "energy.csv";
pub const ANALYSIS_DIR: &str = "analysis";
pub const MONITOR_DIR: &str = "monitor";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "format {other:?} is not csv or json"
            ))),
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const KINETIC: Quantity = Quantity::new("kinetic_energy", "energy", "||u(t)||_2^2");
const DISSIPATION: Quantity = Quantity::new(
    "dissipation_integral",
    "energy",
    "2 nu int_0^t ||grad u||_2^2 ds",
);
const ENERGY_RESIDUAL: Quantity = Quantity::new(
    "energy_residual",
    "energy",
    "||u(t)||_2^2 + 2 nu int_0^t ||grad u||_2^2 ds - ||u(0)||_2^2",
);

fn energy_rows(ledger: &EnergyLedger) -> Vec<Row> {
    let residuals = ledger.residuals();
    let mut rows = Vec::with_capacity(3 * ledger.len());
    for i in 0..ledger.len() {
        let t = ledger.times[i];
        rows.push(KINETIC.row(t, None, ledger.kinetic[i]));
        rows.push(DISSIPATION.row(t, None, ledger.dissipation_integral[i]));
        rows.push(ENERGY_RESIDUAL.row(t, None, residuals[i]));
    }
    rows
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("{SNAPSHOT_DIR}/snap_{index:05}.nseb")
}

/// Runs the configured simulation into `run_dir`: snapshots, `energy.csv`
/// and `manifest.json`.
pub fn cmd_simulate(config_path: &Path, run_dir: &Path) -> Result<RunManifest> {
    let config = load_solver_config(config_path)?;
    create_dir(&run_dir.join(SNAPSHOT_DIR))?;
    let mut manifest = RunManifest::new(config.clone());
    log::info!(
        "simulate: n = {}, {} steps, {} snapshots into {}",
        config.grid.n(),
        config.total_steps()?,
        config.snapshot_count()?,
        run_dir.display()
    );
    let ledger = run_with(&config, |index, u| {
        let file = snapshot_file_name(index);
        let path = run_dir.join(&file);
        let written = write_snapshot(u, &path)?;
        manifest.snapshots.push(SnapshotEntry {
            index,
            time: u.time(),
            file,
            hash: blob_hash(&written.to_bytes()?),
        });
        log::info!("snapshot {index} at t = {:.6}", u.time());
        Ok(())
    })?;
    write_rows(&run_dir.join(ENERGY_FILE), &energy_rows(&ledger))?;
    manifest.add_artifact(run_dir, ENERGY_FILE)?;
    manifest.write(run_dir)?;
    Ok(manifest)
}

/// Verified manifest plus the decoded snapshots in time order.
pub fn load_run(run_dir: &Path) -> Result<(RunManifest, Vec<SpectralField>)> {
    let manifest = RunManifest::read(run_dir)?;
    manifest.verify(run_dir)?;
    if manifest.snapshots.is_empty() {
        return Err(Error::Manifest("run lists no snapshots".into()));
    }
    let fields = manifest
        .snapshots
        .iter()
        .map(|s| read_snapshot(&run_dir.join(&s.file)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, fields))
}

const PI_Q: Quantity = Quantity::new("Pi_q", "energy/time", "int tr[(u(x)u)_q . grad u_q] dx");
const TRANSPORT: Quantity = Quantity::new(
    "commutator_residual_q",
    "1",
    "|int tr[(u_q(x)u) . grad u_q] dx| / (||u_q(x)u||_2 ||grad u_q||_2)",
);
const IDENTITY: Quantity = Quantity::new(
    "identity_residual_q",
    "1",
    "Pi_q vs int tr[r_q . grad u_q] - int u_q . grad u_{<=q+2} . u_q",
);
const IDENTITY_Q1: Quantity = Quantity::new(
    "identity_residual_q_plus_1",
    "1",
    "Pi_q vs int tr[r_q . grad u_q] - int u_q . grad u_{<=q+1} . u_q",
);
const TERM_I: Quantity = Quantity::new(
    "I",
    "velocity^3 length^(1-eps)",
    "sum_{q>=Q} lambda_q^eps ||u_q||_3 sum_{p<=q} lambda_p^2 ||u_p||_3^2",
);
const TERM_II: Quantity = Quantity::new(
    "II",
    "velocity^3 length^(1-eps)",
    "sum_{q>=Q} lambda_q^(2+eps) ||u_q||_3 sum_{p>q} ||u_p||_3^2",
);
const TERM_III: Quantity = Quantity::new(
    "III",
    "velocity^3 length^(1-eps)",
    "sum_{q>=Q} lambda_q^(1+eps) ||u_q||_3^2 sum_{p<=q+1} lambda_p ||u_p||_3",
);
const REMAINDER: Quantity = Quantity::new(
    "R_Q",
    "velocity^3 length^(1-eps)",
    "sup_t sum_{q<Q} lambda_q^(2+eps) ||u_q||_3^3",
);
const RATIO_III: Quantity = Quantity::new(
    "ratio_iii",
    "1",
    "(I+II+III) / (sum_{q>=Q} lambda_q^(2+eps) ||u_q||_3^3 + R(Q))",
);
const TOTAL_FLUX: Quantity = Quantity::new("total_flux", "energy/time", "sum_q Pi_q");
const TOTAL_ABS_FLUX: Quantity = Quantity::new("total_abs_flux", "energy/time", "sum_q |Pi_q|");

fn flux_rows(reports: &[FluxReport]) -> Vec<Row> {
    let mut rows = Vec::new();
    for rep in reports {
        let t = rep.time;
        for r in &rep.rows {
            rows.push(PI_Q.row(t, Some(r.q), r.pi));
            let optional = [
                (&TRANSPORT, r.commutator_residual),
                (&IDENTITY, r.identity_residual),
                (&IDENTITY_Q1, r.identity_residual_q1),
            ];
            for (quantity, v) in optional {
                if let Some(v) = v {
                    rows.push(quantity.row(t, Some(r.q), v));
                }
            }
        }
        rows.push(TERM_I.row(t, None, rep.terms.i));
        rows.push(TERM_II.row(t, None, rep.terms.ii));
        rows.push(TERM_III.row(t, None, rep.terms.iii));
        rows.push(REMAINDER.row(t, None, rep.remainder));
        rows.push(RATIO_III.row(t, None, rep.ratio_iii));
        rows.push(TOTAL_FLUX.row(t, None, rep.total_flux));
        rows.push(TOTAL_ABS_FLUX.row(t, None, rep.total_abs_flux));
    }
    rows
}

/// Flux analysis of every snapshot in the run; writes `analysis/flux.{csv,json}`.
pub fn cmd_analyze(
    run_dir: &Path,
    config: &FluxConfig,
    format: OutputFormat,
) -> Result<Vec<FluxReport>> {
    config.validate()?;
    let (_, fields) = load_run(run_dir)?;
    let history: Vec<BlockNorms> = fields.iter().map(block_norms).collect();
    let reports = fields
        .iter()
        .map(|u| {
            log::info!("analyze: t = {:.6}", u.time());
            flux_report(u, &history, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let out = run_dir.join(ANALYSIS_DIR);
    create_dir(&out)?;
    match format {
        OutputFormat::Csv => write_rows(&out.join("flux.csv"), &flux_rows(&reports))?,
        OutputFormat::Json => write_json(&out.join("flux.json"), &reports)?,
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub config: CriterionConfig,
    pub nu: f64,
    pub tail_sup: CriterionReport,
    pub linfty_besov: CriterionReport,
    /// Absent for single-snapshot runs.
    pub jump: Option<CriterionReport>,
    pub time_integral: Option<CriterionReport>,
    /// `int ||u||^r_{B^{2/r-1}_{inf,inf}} dt` with the configured `r`.
    pub lr_besov: f64,
}

const TAIL_BLOCK: Quantity = Quantity::new(
    "lambda_q^-1 ||u_q||_inf",
    "length^2/time",
    "lambda_q^-1 ||u_q(t)||_inf",
);
const TAIL_SERIES: Quantity = Quantity::new(
    "tail_sup",
    "length^2/time",
    "max_{q>=Q_tail} lambda_q^-1 ||u_q(t)||_inf",
);
const BESOV_SERIES: Quantity = Quantity::new(
    "besov_minus1_inf",
    "length^2/time",
    "||u(t)||_{B^-1_inf,inf}",
);
const JUMP_SERIES: Quantity = Quantity::new(
    "jump",
    "length^2/time",
    "max_{t0 in window} ||u(t) - u(t0)||_{B^-1_inf,inf}",
);
const WINDOW_BLOCK: Quantity = Quantity::new(
    "window_integral_q",
    "(length^2/time)^r time",
    "int_{t0}^t (lambda_q^(2/r-1) ||u_q(s)||_inf)^r ds",
);
const WINDOW_SERIES: Quantity = Quantity::new(
    "window_integral",
    "(length^2/time)^r time",
    "max_{q>=Q_tail} int_{t-dt_snap}^t (lambda_q^(2/r-1) ||u_q(s)||_inf)^r ds",
);

fn criterion_rows(rep: &CriterionReport, block: Option<&Quantity>, series: &Quantity) -> Vec<Row> {
    let mut rows = Vec::new();
    for (i, &t) in rep.times.iter().enumerate() {
        if let (Some(b), Some(row)) = (block, rep.matrix.get(i)) {
            for (q, v) in rep.qs.iter().zip(row) {
                rows.push(b.row(t, Some(*q), *v));
            }
        }
        rows.push(series.row(t, None, rep.series[i]));
    }
    rows
}

/// Evaluates every criterion on the run; writes `monitor/report.json` and,
/// for CSV output, one long-format file per criterion.
pub fn cmd_monitor(
    run_dir: &Path,
    config: &CriterionConfig,
    format: OutputFormat,
) -> Result<MonitorReport> {
    config.validate()?;
    let (_, fields) = load_run(run_dir)?;
    let history = History::new(fields)?;
    let multi = history.len() >= 2;
    let report = MonitorReport {
        config: *config,
        nu: history.nu(),
        tail_sup: criterion_tail_sup(&history, config)?,
        linfty_besov: criterion_linfty_besov(&history, config)?,
        jump: multi
            .then(|| jump_functional(&history, config))
            .transpose()?,
        time_integral: multi
            .then(|| criterion_time_integral(&history, config))
            .transpose()?,
        lr_besov: criterion_lr_besov(&history, config.r)?,
    };
    let out = run_dir.join(MONITOR_DIR);
    create_dir(&out)?;
    write_json(&out.join("report.json"), &report)?;
    if format == OutputFormat::Csv {
        let mut files: Vec<(PathBuf, Vec<Row>)> = vec![
            (
                out.join("tail_sup.csv"),
                criterion_rows(&report.tail_sup, Some(&TAIL_BLOCK), &TAIL_SERIES),
            ),
            (
                out.join("linfty_besov.csv"),
                criterion_rows(&report.linfty_besov, None, &BESOV_SERIES),
            ),
        ];
        if let Some(j) = &report.jump {
            files.push((out.join("jump.csv"), criterion_rows(j, None, &JUMP_SERIES)));
        }
        if let Some(ti) = &report.time_integral {
            files.push((
                out.join("time_integral.csv"),
                criterion_rows(ti, Some(&WINDOW_BLOCK), &WINDOW_SERIES),
            ));
        }
        for (path, rows) in files {
            write_rows(&path, &rows)?;
        }
    }
    Ok(report)
}
