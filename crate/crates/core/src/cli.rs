//! Scenario files and the experiment commands behind the `channel-nts` binary.
//!
//! Scenarios are JSON; long traces are written as CSV with the column order
//! documented on each command. Floats in CSV use the shortest decimal that
//! parses back to the same value, with `inf`, `-inf` and `nan` spelled out.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::baselines::{blahut_arimoto_capacity, CapacityResult, NamedChannel, DEFAULT_CAPACITY_TOL};
use crate::error::{Error, Result};
use crate::exponents::error_exponent;
use crate::nts::{
    check_arimoto_fixed_point, nts_run, stall_level_identity, tail_mean_rho, ArimotoReport, RunOptions, RunOutcome,
    RunStatus, StallIdentity, SystemState,
};
use crate::prob::{Distribution, Orientation, StochasticMatrix};
use crate::sim::{
    fit_acceptance_exponent, run_session, tune_threshold, verify_type_concentration, ConcentrationReport, DecoderMode,
    DriftSchedule, SegmentSummary, SimConfig,
};

/// Exit status for a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status for an unexpected failure.
pub const EXIT_INTERNAL: i32 = 1;
/// Exit status for an unreadable or invalid scenario.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a scenario whose exponent or experiment is infeasible.
pub const EXIT_INFEASIBLE: i32 = 3;

/// Process exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidDistribution(_) | Error::Dimension(_) => EXIT_CONFIG,
        Error::Infeasible(_) | Error::ExperimentInfeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INTERNAL,
    }
}

/// Formats a float as the shortest decimal that round-trips.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

mod extended_float {
    //! `Option<f64>` as a JSON number, or the strings `"inf"` / `"-inf"`.
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) if *x > 0.0 => s.serialize_str("inf"),
            Some(x) if *x < 0.0 => s.serialize_str("-inf"),
            Some(_) => s.serialize_str("nan"),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Number(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) => match t.as_str() {
                "inf" | "+inf" => Ok(Some(f64::INFINITY)),
                "-inf" => Ok(Some(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// A channel given by name and parameter, or as rows `P(·|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Named(NamedChannel),
    Matrix(Vec<Vec<f64>>),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<StochasticMatrix> {
        match self {
            ChannelSpec::Named(c) => c.build(),
            ChannelSpec::Matrix(rows) => StochasticMatrix::new(rows.clone(), Orientation::YGivenX),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKeyword {
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    Keyword(InputKeyword),
    Vector(Vec<f64>),
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::Keyword(InputKeyword::Uniform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKeyword {
    FromChannel,
}

/// Initial `Φ`: the channel posterior, or rows `Φ(·|y)` one per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Keyword(PhiKeyword),
    Matrix(Vec<Vec<f64>>),
}

impl Default for PhiSpec {
    fn default() -> Self {
        PhiSpec::Keyword(PhiKeyword::FromChannel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftEntry {
    pub at_block: usize,
    pub channel: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// A scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub channel: ChannelSpec,
    #[serde(default)]
    pub q0: InputSpec,
    #[serde(default)]
    pub phi0: PhiSpec,
    /// Threshold `T` in nats; accepts `"inf"` and `"-inf"`.
    #[serde(default, with = "extended_float", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Margin with `T = rate + delta`, used when `t` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drift: Vec<DriftEntry>,
    #[serde(default)]
    pub outputs: OutputSettings,
    /// Iteration cap for `iterate` and `figure2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// Points on the rate axis of `figure2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Accepted blocks per blocklength in `concentration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_target: Option<u64>,
    /// Blocklengths of `concentration`; defaults to `[n]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocklengths: Option<Vec<usize>>,
    /// Target `n·Ê` when `concentration` tunes the threshold itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_n_exponent: Option<f64>,
}

fn default_decoder() -> DecoderMode {
    DecoderMode::Genie
}

/// Minimum rate-grid size of `figure2`.
pub const MIN_GRID_POINTS: usize = 100;

fn at(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Config(format!("{field}: {e}"))
}

impl ScenarioConfig {
    /// A scenario with the given channel and every other field defaulted.
    pub fn for_channel(channel: ChannelSpec) -> Self {
        Self {
            channel,
            q0: InputSpec::default(),
            phi0: PhiSpec::default(),
            t: None,
            delta: None,
            rate: None,
            n: None,
            blocks: None,
            seed: 0,
            decoder: DecoderMode::Genie,
            drift: Vec::new(),
            outputs: OutputSettings::default(),
            max_iters: None,
            grid_points: None,
            accepted_target: None,
            blocklengths: None,
            target_n_exponent: None,
        }
    }

    pub fn channel_matrix(&self) -> Result<StochasticMatrix> {
        self.channel.build().map_err(at("channel"))
    }

    pub fn initial_state(&self, p: &StochasticMatrix) -> Result<SystemState> {
        let q = match &self.q0 {
            InputSpec::Keyword(InputKeyword::Uniform) => Distribution::uniform(p.num_conditions()),
            InputSpec::Vector(v) => Distribution::new(v.clone()),
        }
        .map_err(at("q0"))?;
        if q.len() != p.num_conditions() {
            return Err(Error::Config(format!(
                "q0: {} entries for a channel with {} inputs",
                q.len(),
                p.num_conditions()
            )));
        }
        let state = match &self.phi0 {
            PhiSpec::Keyword(PhiKeyword::FromChannel) => SystemState::from_channel(q, p),
            PhiSpec::Matrix(rows) => {
                let phi = StochasticMatrix::new(rows.clone(), Orientation::XGivenY).map_err(at("phi0"))?;
                if phi.num_conditions() != p.num_outcomes() {
                    return Err(Error::Config(format!(
                        "phi0: {} rows for a channel with {} outputs",
                        phi.num_conditions(),
                        p.num_outcomes()
                    )));
                }
                SystemState::new(q, phi)
            }
        };
        state.map_err(at("phi0"))
    }

    /// `t`, or `rate + delta` when only the margin is given.
    pub fn threshold(&self) -> Result<f64> {
        match (self.t, self.delta, self.rate) {
            (Some(_), Some(_), _) => Err(Error::Config("t and delta are mutually exclusive".into())),
            (Some(t), None, _) if t.is_nan() => Err(Error::Config("t: NaN".into())),
            (Some(t), None, _) => Ok(t),
            (None, Some(d), Some(r)) => Ok(r + d),
            (None, Some(_), None) => Err(Error::Config("delta: needs rate".into())),
            (None, None, _) => Err(Error::Config("t: missing (give t, or rate and delta)".into())),
        }
    }

    fn require<T: Copy>(v: Option<T>, field: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("{field}: missing")))
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let c = SimConfig {
            n: Self::require(self.n, "n")?,
            rate: Self::require(self.rate, "rate")?,
            t: self.threshold()?,
            decoder_mode: self.decoder,
            seed: self.seed,
            blocks: Self::require(self.blocks, "blocks")?,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn drift_schedule(&self, p0: &StochasticMatrix) -> Result<DriftSchedule> {
        let mut segments = vec![(0, p0.clone())];
        for (i, d) in self.drift.iter().enumerate() {
            let p = d
                .channel
                .build()
                .map_err(|e| Error::Config(format!("drift[{i}].channel: {e}")))?;
            segments.push((d.at_block, p));
        }
        DriftSchedule::new(segments).map_err(at("drift"))
    }

    /// Checks every field that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        let p = self.channel_matrix()?;
        self.initial_state(&p)?;
        if !self.drift.is_empty() {
            self.drift_schedule(&p)?;
        }
        if self.t.is_some() || self.delta.is_some() {
            self.threshold()?;
        }
        if let Some(r) = self.rate {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Config(format!("rate: {r} must be finite and nonnegative")));
            }
        }
        if let Some(g) = self.grid_points {
            if g < MIN_GRID_POINTS {
                return Err(Error::Config(format!("grid_points: {g} is below {MIN_GRID_POINTS}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Parses and validates a scenario; errors name the offending field path.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config(format!("{path}: {inner}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

fn q_columns(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("q_{i}")).collect()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Computes the capacity of the scenario channel; writes `capacity.json`.
pub fn cmd_capacity(cfg: &ScenarioConfig, out: &Path) -> Result<CapacityResult> {
    let p = cfg.channel_matrix()?;
    let r = blahut_arimoto_capacity(&p, DEFAULT_CAPACITY_TOL)?;
    write_json(out, "capacity.json", &r)?;
    Ok(r)
}

/// Everything `iterate` reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateReport {
    pub capacity: f64,
    pub outcome: RunOutcome,
    /// Present for stalled runs.
    pub stall_identity: Option<StallIdentity>,
    /// Present for stalled runs with a limit slope in `(0, 1)`.
    pub fixed_point: Option<ArimotoReport>,
}

fn run_options(cfg: &ScenarioConfig) -> RunOptions {
    let mut o = RunOptions::default();
    if let Some(m) = cfg.max_iters {
        o.max_iters = m;
    }
    o
}

/// Runs the deterministic iteration; writes `outcome.json` and `trace.csv`.
///
/// `trace.csv` columns: `l, e_hat, rho_star, decrement, q_decrement, min_q,
/// min_phi_on_support, mutual_information, carried_columns, q_0 .. q_{k-1}`.
/// Decrement cells are empty on the final row; carried columns are joined by `;`.
pub fn cmd_iterate(cfg: &ScenarioConfig, out: &Path) -> Result<IterateReport> {
    let p = cfg.channel_matrix()?;
    let state = cfg.initial_state(&p)?;
    let t = cfg.threshold()?;
    let outcome = nts_run(&state, t, &p, &run_options(cfg))?;
    let (stall_identity, fixed_point) = if outcome.status == RunStatus::Stalled {
        let rho_bar = tail_mean_rho(&outcome.trace, outcome.stall_window);
        let fp = if rho_bar > 0.0 && rho_bar < 1.0 {
            Some(check_arimoto_fixed_point(&outcome.final_state.q, rho_bar, &p)?)
        } else {
            None
        };
        (Some(stall_level_identity(&outcome, &p)?), fp)
    } else {
        (None, None)
    };
    let report = IterateReport {
        capacity: blahut_arimoto_capacity(&p, DEFAULT_CAPACITY_TOL)?.c,
        outcome,
        stall_identity,
        fixed_point,
    };
    let k = p.num_conditions();
    let mut header: Vec<String> = [
        "l",
        "e_hat",
        "rho_star",
        "decrement",
        "q_decrement",
        "min_q",
        "min_phi_on_support",
        "mutual_information",
        "carried_columns",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(q_columns(k));
    let rows: Vec<Vec<String>> = report
        .outcome
        .trace
        .iter()
        .map(|r| {
            let mut row = vec![
                r.l.to_string(),
                fmt_f64(r.e_hat),
                fmt_f64(r.rho_star),
                opt_f64(r.decrement),
                opt_f64(r.q_decrement),
                fmt_f64(r.min_q),
                fmt_f64(r.min_phi_on_support),
                fmt_f64(r.mutual_information),
                r.carried_columns
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ];
            row.extend(r.q.probs().iter().map(|v| fmt_f64(*v)));
            row
        })
        .collect();
    write_csv(out, "trace.csv", &header, &rows)?;
    write_json(out, "outcome.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub blocks: usize,
    pub updates: usize,
    pub decode_errors: usize,
    pub segments: Vec<SegmentSummary>,
    pub final_state: SystemState,
}

/// Runs a feedback session; writes `blocks.csv` and `summary.json`.
///
/// `blocks.csv` columns: `block, segment, epoch, sent_msg, decoded_msg,
/// decode_correct, statistic, feedback, state_updated, q_0 .. q_{k-1}` with
/// `q` the input distribution after the block. Booleans are `0`/`1`.
pub fn cmd_simulate(cfg: &ScenarioConfig, out: &Path) -> Result<SimulateSummary> {
    let p = cfg.channel_matrix()?;
    let state = cfg.initial_state(&p)?;
    let sim = cfg.sim_config()?;
    let drift = cfg.drift_schedule(&p)?;
    let trace = run_session(&state, &sim, &drift)?;
    let mut header: Vec<String> = [
        "block",
        "segment",
        "epoch",
        "sent_msg",
        "decoded_msg",
        "decode_correct",
        "statistic",
        "feedback",
        "state_updated",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(q_columns(p.num_conditions()));
    let bit = |b: bool| if b { "1".to_string() } else { "0".to_string() };
    let rows: Vec<Vec<String>> = trace
        .blocks
        .iter()
        .map(|b| {
            let r = &b.result;
            let mut row = vec![
                r.block_index.to_string(),
                b.segment.to_string(),
                b.epoch.to_string(),
                r.sent_msg.to_string(),
                r.decoded_msg.map(|m| m.to_string()).unwrap_or_default(),
                bit(r.decode_correct),
                fmt_f64(r.statistic),
                bit(r.feedback),
                bit(r.state_updated),
            ];
            row.extend(b.q.probs().iter().map(|v| fmt_f64(*v)));
            row
        })
        .collect();
    write_csv(out, "blocks.csv", &header, &rows)?;
    let summary = SimulateSummary {
        blocks: trace.blocks.len(),
        updates: trace.segments.iter().map(|s| s.updates).sum(),
        decode_errors: trace.segments.iter().map(|s| s.decode_errors).sum(),
        segments: trace.segments,
        final_state: trace.final_state,
    };
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure2Report {
    pub status: RunStatus,
    pub t: f64,
    pub rate: f64,
    pub capacity: f64,
    /// `I(Q_l∘P)` per iteration, where `E_r(·, Q_l)` reaches zero.
    pub zero_crossings: Vec<f64>,
    pub e_hat: Vec<f64>,
    pub grid: Vec<f64>,
}

/// Error-exponent curves along an iteration run.
///
/// Writes `figure2_curves.csv` with columns `l, r_prime, e_r` (one row per
/// iteration and grid rate) and `figure2_exponents.csv` with columns
/// `l, e_hat, rho_star, mutual_information`. The grid spans `[0, 1.1·max(C, T)]`.
pub fn cmd_figure2(cfg: &ScenarioConfig, out: &Path) -> Result<Figure2Report> {
    let p = cfg.channel_matrix()?;
    let state = cfg.initial_state(&p)?;
    let rate = ScenarioConfig::require(cfg.rate, "rate")?;
    let t = cfg.threshold()?;
    let capacity = blahut_arimoto_capacity(&p, DEFAULT_CAPACITY_TOL)?.c;
    let points = cfg.grid_points.unwrap_or(MIN_GRID_POINTS + 1).max(MIN_GRID_POINTS);
    let top = 1.1 * capacity.max(t);
    let grid: Vec<f64> = (0..points).map(|i| top * i as f64 / (points - 1) as f64).collect();
    let outcome = nts_run(&state, t, &p, &run_options(cfg))?;
    let mut curves = Vec::with_capacity(outcome.trace.len() * points);
    for rec in &outcome.trace {
        for &r in &grid {
            let e = error_exponent(r, &rec.q, &p)?.value;
            curves.push(vec![rec.l.to_string(), fmt_f64(r), fmt_f64(e)]);
        }
    }
    let header = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    write_csv(out, "figure2_curves.csv", &header(&["l", "r_prime", "e_r"]), &curves)?;
    let rows: Vec<Vec<String>> = outcome
        .trace
        .iter()
        .map(|r| {
            vec![
                r.l.to_string(),
                fmt_f64(r.e_hat),
                fmt_f64(r.rho_star),
                fmt_f64(r.mutual_information),
            ]
        })
        .collect();
    write_csv(
        out,
        "figure2_exponents.csv",
        &header(&["l", "e_hat", "rho_star", "mutual_information"]),
        &rows,
    )?;
    let report = Figure2Report {
        status: outcome.status,
        t,
        rate,
        capacity,
        zero_crossings: outcome.trace.iter().map(|r| r.mutual_information).collect(),
        e_hat: outcome.trace.iter().map(|r| r.e_hat).collect(),
        grid,
    };
    write_json(out, "figure2.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSummary {
    pub t: f64,
    pub e_hat: f64,
    pub reports: Vec<ConcentrationReport>,
    /// Least-squares slope of `-log(rate)` over the blocklengths.
    pub fitted_exponent: Option<f64>,
    /// `fitted_exponent / e_hat`.
    pub exponent_ratio: Option<f64>,
}

/// Type-concentration experiment; writes `concentration.json`.
///
/// Without `t` the threshold is tuned so that `n·Ê` equals
/// `target_n_exponent` (default 3) at the largest blocklength.
pub fn cmd_concentration(cfg: &ScenarioConfig, out: &Path) -> Result<ConcentrationSummary> {
    let p = cfg.channel_matrix()?;
    let state = cfg.initial_state(&p)?;
    let lengths = match (&cfg.blocklengths, cfg.n) {
        (Some(l), _) if !l.is_empty() => l.clone(),
        (_, Some(n)) => vec![n],
        _ => return Err(Error::Config("blocklengths: missing (or give n)".into())),
    };
    let n_max = *lengths.iter().max().expect("nonempty");
    let t = match cfg.t.is_some() || cfg.delta.is_some() {
        true => cfg.threshold()?,
        false => tune_threshold(&state, &p, n_max, cfg.target_n_exponent.unwrap_or(3.0))?,
    };
    let target = cfg.accepted_target.unwrap_or(10_000);
    let mut reports = Vec::new();
    for &n in &lengths {
        let sim = SimConfig {
            n,
            rate: cfg.rate.unwrap_or(0.0),
            t,
            decoder_mode: DecoderMode::Genie,
            seed: cfg.seed,
            blocks: 0,
        };
        reports.push(verify_type_concentration(&state, &sim, &p, target)?);
    }
    let e_hat = reports[0].e_hat;
    let fitted = if lengths.len() >= 2 {
        let pts: Vec<(usize, f64)> = reports.iter().map(|r| (r.n, r.acceptance_rate)).collect();
        Some(fit_acceptance_exponent(&pts)?)
    } else {
        None
    };
    let summary = ConcentrationSummary {
        t,
        e_hat,
        exponent_ratio: fitted.map(|f| f / e_hat),
        fitted_exponent: fitted,
        reports,
    };
    write_json(out, "concentration.json", &summary)?;
    Ok(summary)
}
