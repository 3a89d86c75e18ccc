//! Experiment execution and output rendering.
//!
//! Turns a parsed [`ExperimentConfig`](crate::config::ExperimentConfig) into
//! result records and renders them as CSV or JSON. CSV output is
//! deterministic byte-for-byte for a fixed config and seed: records are
//! produced in grid order and every numeric field is printed through the same
//! 12-significant-digit formatter. JSON output nests the resolved config next
//! to the records under an explicit `schema_version`, so a result file always
//! carries the experiment that produced it.

use serde::Serialize;

use crate::asymptotic::{asymptotic_mi, AsymptoticInput};
use crate::config::{ExperimentConfig, PrecoderScheme};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::montecarlo::{run_sweep, McConfig};
use crate::precoding::verify_power;

/// Which columns an experiment run fills in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Formula only: Monte Carlo columns stay empty, `trials` prints 0.
    AsymptoticOnly,
    /// Formula plus Monte Carlo estimate per grid point.
    Sweep,
}

impl RunMode {
    fn label(self) -> &'static str {
        match self {
            RunMode::AsymptoticOnly => "asymptotic",
            RunMode::Sweep => "sweep",
        }
    }
}

/// One output row of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub snr_db: f64,
    pub eta: f64,
    pub mi_asymptotic_bits: f64,
    pub mi_mc_mean: Option<f64>,
    pub mi_mc_std: Option<f64>,
    pub trials: usize,
}

/// Complete result document: what ran, under which config, and the rows.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub schema_version: u32,
    pub mode: String,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
}

pub const SCHEMA_VERSION: u32 = 1;

/// The fixed CSV column set.
pub const CSV_HEADER: &str = "snr_db,eta,mi_asymptotic_bits,mi_mc_mean,mi_mc_std,trials";

/// Runs the configured experiment. `seed` is the resolved master seed
/// (config value unless a command-line flag overrode it). Any solver failure
/// on any grid point aborts the run with the underlying error; no partial
/// output is produced.
pub fn run_experiment(config: &ExperimentConfig, seed: u64, mode: RunMode) -> Result<RunOutput> {
    let model = config.build_model()?;
    let precoders = config.build_precoders(&model, seed)?;
    let input = AsymptoticInput::from_model(&model, &precoders)?;
    let etas = config.eta_grid();

    let records = match mode {
        RunMode::AsymptoticOnly => config
            .snr_db
            .iter()
            .zip(&etas)
            .map(|(&snr_db, &eta)| {
                let mi = asymptotic_mi(&input.with_eta(eta)?)?;
                Ok(Record {
                    snr_db,
                    eta,
                    mi_asymptotic_bits: mi,
                    mi_mc_mean: None,
                    mi_mc_std: None,
                    trials: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        RunMode::Sweep => {
            let mc = McConfig::new(config.trials, seed, etas.clone())?;
            let sweep = run_sweep(&model, &precoders, &mc)?;
            config
                .snr_db
                .iter()
                .zip(sweep.records)
                .map(|(&snr_db, rec)| {
                    let mi = match rec.mi_asymptotic {
                        Some(mi) => mi,
                        // Re-run the failing solve to surface the typed error.
                        None => asymptotic_mi(&input.with_eta(rec.eta)?)?,
                    };
                    Ok(Record {
                        snr_db,
                        eta: rec.eta,
                        mi_asymptotic_bits: mi,
                        mi_mc_mean: Some(rec.mi_mc_mean),
                        mi_mc_std: Some(rec.mi_mc_std),
                        trials: rec.trials,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    Ok(RunOutput {
        schema_version: SCHEMA_VERSION,
        mode: mode.label().to_string(),
        config: config.clone(),
        records,
    })
}

/// Formats a float with 12 significant digits, trimming trailing zeros, so
/// grid values round-trip cleanly (`-5`, not `-4.99999999999989`).
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.11e}", v);
    let (_, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent parses");
    if (-5..=12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let mut s = format!("{:.*}", decimals, v);
        if s.contains('.') {
            s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
        }
        s
    } else {
        let (mantissa, _) = sci.split_once('e').expect("exponential format");
        let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{trimmed}e{exp}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// Renders the fixed-header CSV document (trailing newline included).
pub fn render_csv(records: &[Record]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_sig(r.snr_db),
            fmt_sig(r.eta),
            fmt_sig(r.mi_asymptotic_bits),
            fmt_opt(r.mi_mc_mean),
            fmt_opt(r.mi_mc_std),
            r.trials
        ));
    }
    out
}

/// Renders the JSON result document (trailing newline included).
pub fn render_json(output: &RunOutput) -> Result<String> {
    let mut text = serde_json::to_string_pretty(output)?;
    text.push('\n');
    Ok(text)
}

fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// One level of the aligned-precoder report.
#[derive(Debug, Clone, Serialize)]
pub struct PrecoderLevel {
    pub level: usize,
    /// Columns along which this level transmits: the eigenbasis of the next
    /// hop's transmit correlation, strongest eigenvalue first.
    pub output_basis: Vec<Vec<[f64; 2]>>,
    /// Eigenbasis of this level's receive correlation (absent at the source,
    /// which has no receive side).
    pub input_basis: Option<Vec<Vec<[f64; 2]>>>,
    /// Scaled diagonal magnitudes pairing strongest directions together.
    pub diagonal: Vec<f64>,
    pub trace: f64,
    pub budget: f64,
    pub slack: f64,
}

/// Aligned-precoder construction report.
#[derive(Debug, Clone, Serialize)]
pub struct PrecoderReport {
    pub schema_version: u32,
    pub scheme: String,
    pub levels: Vec<PrecoderLevel>,
    pub max_abs_slack: f64,
}

/// Builds the JSON report describing the aligned precoders of a config.
/// Only meaningful for the `optimal_directions` scheme; other schemes have
/// no eigenbasis structure to report and are rejected as a config error.
pub fn emit_precoders(config: &ExperimentConfig, seed: u64) -> Result<String> {
    if config.precoder != PrecoderScheme::OptimalDirections {
        return Err(Error::Config(
            "the precoders report requires the optimal_directions scheme".to_string(),
        ));
    }
    let model = config.build_model()?;
    let precoders = config.build_precoders(&model, seed)?;
    let power = verify_power(&model, &precoders)?;

    let mut levels = Vec::with_capacity(model.hops());
    for i in 0..model.hops() {
        let out_basis = model.stage(i + 1).u_t();
        let in_basis = if i == 0 { None } else { Some(model.stage(i).u_r()) };
        let p = precoders.level(i);
        // Recover the diagonal in the aligned bases; off-diagonal mass is
        // zero by construction, up to round-off.
        let aligned = match in_basis {
            None => out_basis.adjoint() * p,
            Some(u_r) => out_basis.adjoint() * p * u_r,
        };
        let diagonal: Vec<f64> = (0..aligned.nrows().min(aligned.ncols()))
            .map(|j| aligned[(j, j)].norm())
            .collect();
        let slack = &power.levels[i];
        levels.push(PrecoderLevel {
            level: i,
            output_basis: complex_rows(out_basis),
            input_basis: in_basis.map(complex_rows),
            diagonal,
            trace: slack.trace,
            budget: slack.budget,
            slack: slack.slack,
        });
    }

    let report = PrecoderReport {
        schema_version: SCHEMA_VERSION,
        scheme: "optimal_directions".to_string(),
        levels,
        max_abs_slack: power.max_abs_slack(),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok(text)
}
