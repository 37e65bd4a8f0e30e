//! Experiment configs, the three sweeps, and their CSV/JSON records.
//!
//! A config is one JSON document; command-line values override file values.
//! Every output byte is a function of the resolved config: numbers are
//! written with 17 significant digits, undefined conditionals as the token
//! `undefined`, lines end in `\n`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gppt::{self, ClockDetector, DelaySetting, Route};
use crate::optics_mc::{
    self, CoincidenceTable, EstimatedConditional, Mode, PlateSource, ShotConfig,
};
use crate::paw::{self, singlet_ket, ClockParams, ConditionalTable};
use crate::rng::derive_seed;
use crate::tomography::{self, CountModel, ProjectionSetting, TomographyData};

pub const TOOL: &str = "relclock";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    /// 2 for config errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) | HarnessError::Runtime(_) => 1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    PawObserver,
    PawSuperobserver,
    Gppt,
}

impl ExperimentMode {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentMode::PawObserver => "paw-observer",
            ExperimentMode::PawSuperobserver => "paw-superobserver",
            ExperimentMode::Gppt => "gppt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<ExperimentMode>,
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// First clock reading; the second is `t1 + π/(2ω)`.
    #[serde(default)]
    pub t1: f64,
    /// Plate-A phases in radians.
    #[serde(rename = "plate_A_values", default)]
    pub plate_a_values: Vec<f64>,
    /// Clock delay phases `δ_B = ωτ` in radians.
    #[serde(rename = "delta_B_values", default)]
    pub delta_b_values: Vec<f64>,
    /// Monte Carlo shots per point; 0 means analytic only.
    #[serde(default)]
    pub shots: u64,
    /// Trials per tomography setting; 0 skips simulated tomography.
    #[serde(default)]
    pub exposure: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub count_model: CountModel,
    /// Echoed into the record verbatim; never taken from the wall clock.
    #[serde(default)]
    pub timestamp: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: None,
            omega: 1.0,
            t1: 0.0,
            plate_a_values: Vec::new(),
            delta_b_values: Vec::new(),
            shots: 0,
            exposure: 0,
            seed: 0,
            output_path: None,
            format: OutputFormat::Csv,
            count_model: CountModel::Binomial,
            timestamp: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config JSON: {e}")))
    }

    pub fn mode(&self) -> Result<ExperimentMode, HarnessError> {
        self.mode.ok_or_else(|| config_err("mode missing"))
    }

    pub fn clock(&self) -> Result<ClockParams, HarnessError> {
        ClockParams::new(self.omega, self.t1).map_err(|e| config_err(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mode = self.mode()?;
        self.clock()?;
        if !self.t1.is_finite() {
            return Err(config_err("t1 must be finite"));
        }
        let finite = |name: &str, v: &[f64]| match v.iter().find(|x| !x.is_finite()) {
            Some(x) => Err(config_err(format!("{name} contains non-finite value {x}"))),
            None => Ok(()),
        };
        finite("plate_A_values", &self.plate_a_values)?;
        finite("delta_B_values", &self.delta_b_values)?;
        match mode {
            ExperimentMode::PawObserver | ExperimentMode::PawSuperobserver => {
                if self.plate_a_values.is_empty() {
                    return Err(config_err("plate_A_values empty"));
                }
            }
            ExperimentMode::Gppt => {
                if self.delta_b_values.is_empty() {
                    return Err(config_err("delta_B_values empty"));
                }
            }
        }
        Ok(())
    }
}

/// `n` equispaced phases on `[0, 2π)`.
pub fn equispaced(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub shots: Option<u64>,
    pub exposure: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    pub equispaced: Option<usize>,
}

/// Precedence: command line, then config file, then defaults. A `mode` in
/// the file must agree with the subcommand.
pub fn resolve_config(
    mode: ExperimentMode,
    file_json: Option<&str>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match file_json {
        Some(text) => ExperimentConfig::from_json(text)?,
        None => ExperimentConfig::default(),
    };
    if let Some(file_mode) = cfg.mode {
        if file_mode != mode {
            return Err(config_err(format!(
                "config mode {} does not match command {}",
                file_mode.name(),
                mode.name()
            )));
        }
    }
    cfg.mode = Some(mode);
    if let Some(v) = overrides.shots {
        cfg.shots = v;
    }
    if let Some(v) = overrides.exposure {
        cfg.exposure = v;
    }
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = &overrides.out {
        cfg.output_path = Some(v.clone());
    }
    if let Some(v) = overrides.format {
        cfg.format = v;
    }
    if let Some(n) = overrides.equispaced {
        if n == 0 {
            return Err(config_err("--equispaced needs at least one point"));
        }
        cfg.plate_a_values = equispaced(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

// ── Record types ────────────────────────────────────────────────────────────

/// A numeric cell that is either finite or the token `undefined`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub Option<f64>);

impl Num {
    pub fn value(&self) -> Option<f64> {
        self.0
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v.is_finite().then_some(v))
    }
}

impl From<Option<f64>> for Num {
    fn from(v: Option<f64>) -> Self {
        Num(v.filter(|x| x.is_finite()))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Token(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Num(Some(v))),
            Raw::Token(t) if t == "undefined" => Ok(Num(None)),
            Raw::Token(t) => Err(serde::de::Error::custom(format!("unexpected token {t:?}"))),
        }
    }
}

/// Monte Carlo estimate and its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hat: Num,
    pub err: Num,
}

impl From<Option<EstimatedConditional>> for Estimate {
    fn from(e: Option<EstimatedConditional>) -> Self {
        Self {
            hat: e.map(|e| e.p_hat).into(),
            err: e.map(|e| e.stderr).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverRow {
    pub plate_a_rad: f64,
    pub p3g1: Num,
    pub p3g2: Num,
    pub p4g1: Num,
    pub p4g2: Num,
    /// `[P3|1, P3|2, P4|1, P4|2]` estimates when shots > 0.
    pub estimates: Option<[Estimate; 4]>,
    pub counts: Option<CoincidenceTable>,
}

/// The observer's own plot: system photon V or H at the two clock readings,
/// pooled over every plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockViewRow {
    pub clock_time: f64,
    pub p_v: Num,
    pub p_h: Num,
    pub p_v_est: Option<Estimate>,
    pub p_h_est: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperobserverRow {
    pub plate_a_rad: f64,
    pub fidelity_exact: f64,
    pub postselect_prob: f64,
    pub fidelity_mle: Option<f64>,
    pub mle_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpptRow {
    pub delta_b_rad: f64,
    pub t_plus_tau_1: f64,
    pub p3_t1: f64,
    pub t_plus_tau_2: f64,
    pub p3_t2: f64,
    pub p3_t1_quad: f64,
    pub p3_t2_quad: f64,
    pub p3_t1_est: Option<Estimate>,
    pub p3_t2_est: Option<Estimate>,
    pub counts: Option<CoincidenceTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Results {
    PawObserver {
        rows: Vec<ObserverRow>,
        clock_view: Vec<ClockViewRow>,
    },
    PawSuperobserver {
        rows: Vec<SuperobserverRow>,
    },
    Gppt {
        rows: Vec<GpptRow>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub timestamp: Option<String>,
    pub config: ExperimentConfig,
    pub results: Results,
}

// ── Commands ────────────────────────────────────────────────────────────────

pub fn run(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    config.validate()?;
    let results = match config.mode()? {
        ExperimentMode::PawObserver => cmd_paw_observer(config)?,
        ExperimentMode::PawSuperobserver => cmd_paw_superobserver(config)?,
        ExperimentMode::Gppt => cmd_gppt(config)?,
    };
    Ok(RunRecord {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: config.timestamp.clone(),
        config: config.clone(),
        results,
    })
}

fn runtime(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

fn estimates_of(table: &CoincidenceTable) -> [Estimate; 4] {
    let e = optics_mc::estimate_conditionals(table);
    [e.p3g1.into(), e.p3g2.into(), e.p4g1.into(), e.p4g2.into()]
}

/// Observer mode: per plate the exact conditionals, optional shot estimates,
/// and the pooled clock-time view.
pub fn cmd_paw_observer(config: &ExperimentConfig) -> Result<Results, HarnessError> {
    let clock = config.clock()?;
    let state = paw::make_singlet().with_clock(clock);
    let rows: Vec<ObserverRow> = config
        .plate_a_values
        .par_iter()
        .enumerate()
        .map(|(i, &plate)| {
            let table = paw::observer_conditionals(&state, plate / clock.omega());
            let counts = if config.shots > 0 {
                let shot_cfg = ShotConfig {
                    n_shots: config.shots,
                    seed: derive_seed(config.seed, i as u64),
                    mode: Mode::PawObserver,
                    plates: PlateSource::List(vec![plate]),
                    delta_b: 0.0,
                };
                Some(optics_mc::sample_shots(&shot_cfg).map_err(runtime)?)
            } else {
                None
            };
            Ok(ObserverRow {
                plate_a_rad: plate,
                p3g1: table.p31.into(),
                p3g2: table.p32.into(),
                p4g1: table.p41.into(),
                p4g2: table.p42.into(),
                estimates: counts.as_ref().map(estimates_of),
                counts,
            })
        })
        .collect::<Result<_, HarnessError>>()?;

    // Pool joint probabilities over plates: the observer cannot tell them apart.
    let n = config.plate_a_values.len() as f64;
    let mut joint = [0.0; 4];
    for &plate in &config.plate_a_values {
        let psi = paw::evolve_global(&state, plate / clock.omega(), 0.0);
        for (k, j) in joint.iter_mut().enumerate() {
            *j += psi.amplitude(k).norm_sqr() / n;
        }
    }
    let pooled = ConditionalTable::from_joint(joint);
    let pooled_counts = rows
        .iter()
        .filter_map(|r| r.counts)
        .reduce(|a, b| CoincidenceTable {
            n31: a.n31 + b.n31,
            n32: a.n32 + b.n32,
            n41: a.n41 + b.n41,
            n42: a.n42 + b.n42,
            discarded: a.discarded + b.discarded,
            n_shots: a.n_shots + b.n_shots,
            seed: config.seed,
        });
    let est = pooled_counts.as_ref().map(estimates_of);
    let clock_view = vec![
        ClockViewRow {
            clock_time: clock.t1(),
            p_v: pooled.p31.into(),
            p_h: pooled.p41.into(),
            p_v_est: est.map(|e| e[0]),
            p_h_est: est.map(|e| e[2]),
        },
        ClockViewRow {
            clock_time: clock.t2(),
            p_v: pooled.p32.into(),
            p_h: pooled.p42.into(),
            p_v_est: est.map(|e| e[1]),
            p_h_est: est.map(|e| e[3]),
        },
    ];
    Ok(Results::PawObserver { rows, clock_view })
}

/// Super-observer mode: exact erased-state fidelity per plate, plus simulated
/// tomography and MLE when `exposure > 0`.
pub fn cmd_paw_superobserver(config: &ExperimentConfig) -> Result<Results, HarnessError> {
    let clock = config.clock()?;
    let state = paw::make_singlet().with_clock(clock);
    let target = singlet_ket();
    let settings = tomography::standard_16_settings();
    let rows = config
        .plate_a_values
        .par_iter()
        .enumerate()
        .map(|(i, &plate)| {
            let erased =
                paw::superobserver_erased_state(&state, plate / clock.omega()).map_err(runtime)?;
            let fidelity_exact =
                crate::qcore::fidelity_pure(&erased.rho, &target).map_err(runtime)?;
            let (fidelity_mle, mle_iterations) = if config.exposure > 0 {
                let data = tomography::simulate_counts(
                    &erased.rho,
                    &settings,
                    config.exposure,
                    derive_seed(config.seed, i as u64),
                    config.count_model,
                )
                .map_err(runtime)?;
                let rec = tomography::reconstruct_mle(&data).map_err(runtime)?;
                (
                    Some(tomography::fidelity_report(&rec, &target).map_err(runtime)?),
                    rec.iterations,
                )
            } else {
                (None, None)
            };
            Ok(SuperobserverRow {
                plate_a_rad: plate,
                fidelity_exact,
                postselect_prob: erased.postselect_prob,
                fidelity_mle,
                mle_iterations,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(Results::PawSuperobserver { rows })
}

/// Two-time mode: closed-form and quadrature conditionals per delay, plus
/// pooled shot estimates when `shots > 0`. Shots start from the singlet and
/// lose the clock's V path at the first splitter; with no plate list the
/// plate phase is drawn uniformly on `[0, 2π)`.
pub fn cmd_gppt(config: &ExperimentConfig) -> Result<Results, HarnessError> {
    let clock = config.clock()?;
    let rows = config
        .delta_b_values
        .par_iter()
        .enumerate()
        .map(|(i, &delta_b)| {
            let delay = DelaySetting::from_phase(delta_b);
            let tau = delay.tau(clock.omega());
            let closed = |k| gppt::two_time_conditional(k, delay, Route::Closed).map_err(runtime);
            let quad = |k| gppt::two_time_conditional(k, delay, Route::default()).map_err(runtime);
            let counts = if config.shots > 0 {
                let plates = if config.plate_a_values.is_empty() {
                    PlateSource::ContinuousUniform
                } else {
                    PlateSource::List(config.plate_a_values.clone())
                };
                let shot_cfg = ShotConfig {
                    n_shots: config.shots,
                    seed: derive_seed(config.seed, i as u64),
                    mode: Mode::GpptWithPbs1,
                    plates,
                    delta_b,
                };
                Some(optics_mc::sample_shots(&shot_cfg).map_err(runtime)?)
            } else {
                None
            };
            let est = counts.as_ref().map(estimates_of);
            Ok(GpptRow {
                delta_b_rad: delta_b,
                t_plus_tau_1: clock.t1() + tau,
                p3_t1: closed(ClockDetector::D1)?,
                t_plus_tau_2: clock.t2() + tau,
                p3_t2: closed(ClockDetector::D2)?,
                p3_t1_quad: quad(ClockDetector::D1)?,
                p3_t2_quad: quad(ClockDetector::D2)?,
                p3_t1_est: est.map(|e| e[0]),
                p3_t2_est: est.map(|e| e[1]),
                counts,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(Results::Gppt { rows })
}

// ── Emitters ────────────────────────────────────────────────────────────────

/// 17 significant digits, scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_cell(n: Num) -> String {
    match n.0 {
        Some(v) => fmt_num(v),
        None => "undefined".to_string(),
    }
}

fn push_est(cells: &mut Vec<String>, e: &Option<Estimate>) {
    if let Some(e) = e {
        cells.push(fmt_cell(e.hat));
        cells.push(fmt_cell(e.err));
    }
}

fn push_line(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn emit_csv(record: &RunRecord) -> String {
    let mut out = String::new();
    match &record.results {
        Results::PawObserver { rows, .. } => {
            let mut header = "plate_A_rad,P3g1,P3g2,P4g1,P4g2".to_string();
            if rows.iter().any(|r| r.estimates.is_some()) {
                for name in ["P3g1", "P3g2", "P4g1", "P4g2"] {
                    let _ = write!(header, ",{name}_hat,{name}_err");
                }
            }
            push_line(&mut out, &[header]);
            for r in rows {
                let mut cells = vec![
                    fmt_num(r.plate_a_rad),
                    fmt_cell(r.p3g1),
                    fmt_cell(r.p3g2),
                    fmt_cell(r.p4g1),
                    fmt_cell(r.p4g2),
                ];
                if let Some(est) = &r.estimates {
                    for e in est {
                        push_est(&mut cells, &Some(*e));
                    }
                }
                push_line(&mut out, &cells);
            }
        }
        Results::PawSuperobserver { rows } => {
            let mle = rows.iter().any(|r| r.fidelity_mle.is_some());
            let mut header = "plate_A_rad,fidelity_exact,postselect_prob".to_string();
            if mle {
                header.push_str(",fidelity_mle,mle_iterations");
            }
            push_line(&mut out, &[header]);
            for r in rows {
                let mut cells = vec![
                    fmt_num(r.plate_a_rad),
                    fmt_num(r.fidelity_exact),
                    fmt_num(r.postselect_prob),
                ];
                if mle {
                    cells.push(fmt_cell(Num(r.fidelity_mle)));
                    cells.push(
                        r.mle_iterations
                            .map_or("undefined".to_string(), |n| n.to_string()),
                    );
                }
                push_line(&mut out, &cells);
            }
        }
        Results::Gppt { rows } => {
            let mut header =
                "delta_B_rad,t_plus_tau_1,p3_t1,t_plus_tau_2,p3_t2,p3_t1_quad,p3_t2_quad"
                    .to_string();
            if rows.iter().any(|r| r.p3_t1_est.is_some()) {
                header.push_str(",p3_t1_hat,p3_t1_err,p3_t2_hat,p3_t2_err");
            }
            push_line(&mut out, &[header]);
            for r in rows {
                let mut cells: Vec<String> = [
                    r.delta_b_rad,
                    r.t_plus_tau_1,
                    r.p3_t1,
                    r.t_plus_tau_2,
                    r.p3_t2,
                    r.p3_t1_quad,
                    r.p3_t2_quad,
                ]
                .into_iter()
                .map(fmt_num)
                .collect();
                push_est(&mut cells, &r.p3_t1_est);
                push_est(&mut cells, &r.p3_t2_est);
                push_line(&mut out, &cells);
            }
        }
    }
    out
}

/// The observer's clock-time view as its own CSV; `None` for other modes.
pub fn emit_clock_view_csv(record: &RunRecord) -> Option<String> {
    let Results::PawObserver { clock_view, .. } = &record.results else {
        return None;
    };
    let mut out = String::new();
    let with_est = clock_view.iter().any(|r| r.p_v_est.is_some());
    let mut header = "clock_time,p_V,p_H".to_string();
    if with_est {
        header.push_str(",p_V_hat,p_V_err,p_H_hat,p_H_err");
    }
    push_line(&mut out, &[header]);
    for r in clock_view {
        let mut cells = vec![fmt_num(r.clock_time), fmt_cell(r.p_v), fmt_cell(r.p_h)];
        push_est(&mut cells, &r.p_v_est);
        push_est(&mut cells, &r.p_h_est);
        push_line(&mut out, &cells);
    }
    Some(out)
}

pub fn emit_json(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("record is serializable");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<RunRecord, HarnessError> {
    serde_json::from_str(text)
        .map_err(|e| HarnessError::Runtime(format!("invalid record JSON: {e}")))
}

/// `out.csv` → `out.clock_view.csv`.
pub fn clock_view_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.clock_view.{ext}"))
}

/// Writes the record in the configured format. Observer-mode CSV output
/// also writes the clock-time view next to the main file.
pub fn write_outputs(
    record: &RunRecord,
    path: &Path,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    match format {
        OutputFormat::Json => std::fs::write(path, emit_json(record)).map_err(io)?,
        OutputFormat::Csv => {
            std::fs::write(path, emit_csv(record)).map_err(io)?;
            if let Some(view) = emit_clock_view_csv(record) {
                let side = clock_view_path(path);
                std::fs::write(&side, view)
                    .map_err(|e| HarnessError::Io(format!("{}: {e}", side.display())))?;
            }
        }
    }
    Ok(())
}

// ── Tomography data files ───────────────────────────────────────────────────

pub const TOMOGRAPHY_HEADER: &str =
    "label,clock_qwp_rad,clock_hwp_rad,rest_qwp_rad,rest_hwp_rad,count,exposure";

pub fn tomography_csv(data: &TomographyData) -> String {
    let mut out = String::new();
    push_line(&mut out, &[TOMOGRAPHY_HEADER.to_string()]);
    for (s, &c) in data.settings.iter().zip(&data.counts) {
        push_line(
            &mut out,
            &[
                s.label.clone(),
                fmt_num(s.clock_qwp),
                fmt_num(s.clock_hwp),
                fmt_num(s.rest_qwp),
                fmt_num(s.rest_hwp),
                c.to_string(),
                data.exposure.to_string(),
            ],
        );
    }
    out
}

pub fn parse_tomography_csv(text: &str) -> Result<TomographyData, HarnessError> {
    let bad = |line: usize, msg: &str| config_err(format!("tomography CSV line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TOMOGRAPHY_HEADER => {}
        _ => return Err(bad(1, "missing or wrong header")),
    }
    let mut settings = Vec::new();
    let mut counts = Vec::new();
    let mut exposure = None;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(bad(i + 1, "expected 7 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad angle"));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad(i + 1, "bad integer"));
        settings.push(ProjectionSetting {
            label: f[0].to_string(),
            clock_qwp: num(f[1])?,
            clock_hwp: num(f[2])?,
            rest_qwp: num(f[3])?,
            rest_hwp: num(f[4])?,
        });
        counts.push(int(f[5])?);
        let e = int(f[6])?;
        if *exposure.get_or_insert(e) != e {
            return Err(bad(i + 1, "exposure differs between rows"));
        }
    }
    TomographyData::new(settings, counts, exposure.unwrap_or(0))
        .map_err(|e| config_err(e.to_string()))
}
