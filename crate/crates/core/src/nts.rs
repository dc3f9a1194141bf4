//! Deterministic natural-type-selection iteration.
//!
//! Each step replaces `Q` by the input marginal of the exponent minimizer
//! `U*` and every column of `Φ` by `U*(x|y)`, except columns where `U*(y)`
//! vanishes, which are carried over unchanged. The exponent sequence is
//! non-increasing; a run ends when it reaches zero, when it stops moving,
//! or at the iteration cap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{gallager_e0, update_exponent, ExponentOptions, ExponentSolution};
use crate::prob::{conditional_x_given_y, kl_divergence, Distribution, Orientation, StochasticMatrix, ZERO_THRESHOLD};

/// The adaptive pair `(Q_l, Φ_l)` shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemState {
    pub q: Distribution,
    /// `x_given_y`: one distribution over inputs per output symbol.
    pub phi: StochasticMatrix,
    pub l: usize,
}

impl SystemState {
    pub fn new(q: Distribution, phi: StochasticMatrix) -> Result<Self> {
        phi.expect(Orientation::XGivenY, "auxiliary conditional")?;
        if phi.num_outcomes() != q.len() {
            return Err(Error::Dimension(format!(
                "Φ ranges over {} inputs, Q over {}",
                phi.num_outcomes(),
                q.len()
            )));
        }
        Ok(Self { q, phi, l: 0 })
    }

    /// Starts from `Q` with `Φ = (Q∘P)(x|y)`.
    pub fn from_channel(q: Distribution, p: &StochasticMatrix) -> Result<Self> {
        let phi = init_phi_from_channel(&q, p)?;
        Self::new(q, phi)
    }
}

/// One row of the iteration trace, describing state `l` and the step out of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub l: usize,
    pub e_hat: f64,
    pub rho_star: f64,
    /// `Ê_l - Ê_{l+1}`; absent on the final record.
    pub decrement: Option<f64>,
    /// `D(Q_{l+1} || Q_l)`; absent on the final record.
    pub q_decrement: Option<f64>,
    pub min_q: f64,
    /// Smallest `Φ_l(x|y)` over cells with `P(y|x) > 0`.
    pub min_phi_on_support: f64,
    /// Outputs whose `Φ` column is carried over because `U*(y) = 0`.
    pub carried_columns: Vec<usize>,
    /// `I(Q_l∘P)`, where the error exponent of `Q_l` crosses zero.
    pub mutual_information: f64,
    pub q: Distribution,
}

/// How an iteration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    ConvergedToZero,
    Stalled,
    Infeasible,
    MaxIters,
}

/// Stopping rule of [`nts_run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    pub eps_zero: f64,
    pub eps_stall: f64,
    pub stall_window: usize,
    pub max_iters: usize,
    /// Tail share of the trace used for the condition monitor.
    pub tail_fraction: f64,
    pub exponent: ExponentOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eps_zero: 1e-9,
            eps_stall: 1e-12,
            stall_window: 25,
            max_iters: 100_000,
            tail_fraction: 0.5,
            exponent: ExponentOptions::default(),
        }
    }
}

/// Monitor of the three boundedness conditions under which the iteration converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub tail_len: usize,
    pub max_rho: f64,
    pub min_q: f64,
    pub min_phi_on_support: f64,
    /// `limsup ρ_l < 1`, checked as `max ρ < 1 - 1e-6`.
    pub rho_below_one: bool,
    /// `liminf Q_l(x) > 0`, checked against the mass floor.
    pub q_bounded: bool,
    /// `liminf Φ_l(x|y) > 0` on the channel support.
    pub phi_bounded: bool,
}

/// Masses at or below this value count as vanishing in the condition monitor.
pub const MASS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t: f64,
    pub final_e_hat: f64,
    pub final_state: SystemState,
    pub trace: Vec<IterationRecord>,
    pub conditions_report: ConditionsReport,
    pub stall_window: usize,
}

/// `Φ(x|y) = Q(x) P(y|x) / Σ_a Q(a) P(y|a)`; unreachable outputs get a uniform column.
pub fn init_phi_from_channel(q: &Distribution, p: &StochasticMatrix) -> Result<StochasticMatrix> {
    let joint = crate::prob::compose(q, p)?;
    let cond = conditional_x_given_y(&joint);
    Ok(cond.matrix)
}

fn min_phi_on_support(phi: &StochasticMatrix, p: &StochasticMatrix) -> f64 {
    let mut m = f64::INFINITY;
    for x in 0..p.num_conditions() {
        for y in 0..p.num_outcomes() {
            if p.entry(x, y) > 0.0 {
                m = m.min(phi.entry(y, x));
            }
        }
    }
    m
}

/// Applies the update rules to `state` given the exponent solution there.
fn advance(state: &SystemState, sol: &ExponentSolution) -> Result<(SystemState, Vec<usize>)> {
    let u = &sol.minimizer;
    let q = u.x_marginal();
    let cond = conditional_x_given_y(u);
    let mut phi = state.phi.clone();
    let mut carried = Vec::new();
    for (y, defined) in cond.defined.iter().enumerate() {
        if *defined {
            phi.replace_row(y, cond.matrix.row(y).clone());
        } else {
            carried.push(y);
        }
    }
    let q = Distribution::from_weights(q.probs())?;
    Ok((SystemState { q, phi, l: state.l + 1 }, carried))
}

fn carried_at(sol: &ExponentSolution) -> Vec<usize> {
    let py = sol.minimizer.y_marginal();
    (0..py.len()).filter(|&y| py.get(y) < ZERO_THRESHOLD).collect()
}

fn record_for(
    state: &SystemState,
    sol: &ExponentSolution,
    p: &StochasticMatrix,
    next: Option<(&SystemState, f64)>,
) -> Result<IterationRecord> {
    let (decrement, q_decrement) = match next {
        Some((next_state, next_e_hat)) => (
            Some(sol.value - next_e_hat),
            Some(kl_divergence(&next_state.q, &state.q)?),
        ),
        None => (None, None),
    };
    Ok(IterationRecord {
        l: state.l,
        e_hat: sol.value,
        rho_star: sol.rho_star,
        decrement,
        q_decrement,
        min_q: state.q.min(),
        min_phi_on_support: min_phi_on_support(&state.phi, p),
        carried_columns: carried_at(sol),
        mutual_information: crate::prob::mutual_information(&state.q, p)?,
        q: state.q.clone(),
    })
}

fn solve(state: &SystemState, t: f64, p: &StochasticMatrix, opts: &ExponentOptions) -> Result<ExponentSolution> {
    update_exponent(t, &state.q, &state.phi, p, opts)
}

/// One update of `(Q, Φ)` by the exponent minimizer.
///
/// Fails with [`Error::Infeasible`] when the exponent at `state` is infinite.
pub fn nts_step(
    state: &SystemState,
    t: f64,
    p: &StochasticMatrix,
    opts: &ExponentOptions,
) -> Result<(SystemState, IterationRecord)> {
    let sol = solve(state, t, p, opts)?;
    if !sol.feasible {
        return Err(Error::Infeasible(format!(
            "update exponent is infinite at l = {}",
            state.l
        )));
    }
    let (next, _) = advance(state, &sol)?;
    let next_sol = solve(&next, t, p, opts)?;
    let record = record_for(state, &sol, p, Some((&next, next_sol.value)))?;
    Ok((next, record))
}

/// Iterates [`nts_step`] until the exponent vanishes, stalls, or the cap is hit.
pub fn nts_run(initial: &SystemState, t: f64, p: &StochasticMatrix, opts: &RunOptions) -> Result<RunOutcome> {
    let mut state = initial.clone();
    let mut sol = solve(&state, t, p, &opts.exponent)?;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let status = loop {
        let stalled = trace.len() >= opts.stall_window
            && opts.stall_window > 0
            && trace[trace.len() - opts.stall_window..]
                .iter()
                .all(|r| r.decrement.is_some_and(|d| d < opts.eps_stall));
        let status = if !sol.feasible {
            Some(RunStatus::Infeasible)
        } else if sol.value <= opts.eps_zero {
            Some(RunStatus::ConvergedToZero)
        } else if stalled {
            Some(RunStatus::Stalled)
        } else if state.l >= initial.l + opts.max_iters {
            Some(RunStatus::MaxIters)
        } else {
            None
        };
        if let Some(status) = status {
            trace.push(record_for(&state, &sol, p, None)?);
            break status;
        }
        let (next, _) = advance(&state, &sol)?;
        let next_sol = solve(&next, t, p, &opts.exponent)?;
        trace.push(record_for(&state, &sol, p, Some((&next, next_sol.value)))?);
        state = next;
        sol = next_sol;
    };
    let conditions_report = check_convergence_conditions(&trace, opts.tail_fraction)?;
    Ok(RunOutcome {
        status,
        t,
        final_e_hat: sol.value,
        final_state: state,
        trace,
        conditions_report,
        stall_window: opts.stall_window,
    })
}

/// Reports the slope and mass bounds over the trailing `tail_fraction` of a trace.
pub fn check_convergence_conditions(trace: &[IterationRecord], tail_fraction: f64) -> Result<ConditionsReport> {
    if trace.is_empty() {
        return Err(Error::Dimension("empty iteration trace".into()));
    }
    let frac = tail_fraction.clamp(0.0, 1.0);
    let tail_len = ((trace.len() as f64 * frac).ceil() as usize).clamp(1, trace.len());
    let tail = &trace[trace.len() - tail_len..];
    let max_rho = tail.iter().map(|r| r.rho_star).fold(f64::NEG_INFINITY, f64::max);
    let min_q = tail.iter().map(|r| r.min_q).fold(f64::INFINITY, f64::min);
    let min_phi = tail.iter().map(|r| r.min_phi_on_support).fold(f64::INFINITY, f64::min);
    Ok(ConditionsReport {
        tail_len,
        max_rho,
        min_q,
        min_phi_on_support: min_phi,
        rho_below_one: max_rho < 1.0 - 1e-6,
        q_bounded: min_q > MASS_FLOOR,
        phi_bounded: min_phi > MASS_FLOOR,
    })
}

/// Per-input values of the Arimoto stationarity condition at `(Q, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArimotoReport {
    /// `Σ_y P^{1/(1-ρ)}(y|x) [Σ_a Q(a) P^{1/(1-ρ)}(y|a)]^{-ρ}` for inputs with `Q(x) > 0`.
    pub values: Vec<(usize, f64)>,
    /// Spread `max - min` of the values.
    pub max_deviation: f64,
    /// Mean of the values.
    pub constant: f64,
    pub is_fixed_point: bool,
}

/// Evaluates the fixed-point condition that makes `Q` minimize `E₀(-ρ, Q)`.
pub fn check_arimoto_fixed_point(q: &Distribution, rho: f64, p: &StochasticMatrix) -> Result<ArimotoReport> {
    p.expect(Orientation::YGivenX, "channel")?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Numeric(format!("slope {rho} outside (0, 1)")));
    }
    if q.len() != p.num_conditions() {
        return Err(Error::Dimension("input distribution does not match channel".into()));
    }
    let s = 1.0 / (1.0 - rho);
    let ny = p.num_outcomes();
    let mix: Vec<f64> = (0..ny)
        .map(|y| (0..q.len()).map(|a| q.get(a) * p.entry(a, y).powf(s)).sum())
        .collect();
    let values: Vec<(usize, f64)> = (0..q.len())
        .filter(|&x| q.get(x) > 0.0)
        .map(|x| {
            let v = (0..ny)
                .filter(|&y| p.entry(x, y) > 0.0)
                .map(|y| p.entry(x, y).powf(s) * mix[y].powf(-rho))
                .sum();
            (x, v)
        })
        .collect();
    let max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let constant = values.iter().map(|v| v.1).sum::<f64>() / values.len() as f64;
    let max_deviation = max - min;
    Ok(ArimotoReport {
        values,
        max_deviation,
        constant,
        is_fixed_point: max_deviation <= 1e-6 * constant,
    })
}

/// Comparison of a stalled exponent with the line `E₀(-ρ̄, Q̄) + ρ̄T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StallIdentity {
    NotApplicable {
        reason: String,
    },
    Report {
        rho_bar: f64,
        e0_at_minus_rho: f64,
        predicted: f64,
        final_e_hat: f64,
        gap: f64,
    },
}

/// Checks `Ê_∞ = E₀(-ρ̄, Q̄) + ρ̄T` at given limit values.
pub fn stall_level_identity_at(
    rho_bar: f64,
    q_bar: &Distribution,
    t: f64,
    final_e_hat: f64,
    p: &StochasticMatrix,
) -> Result<StallIdentity> {
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Ok(StallIdentity::NotApplicable {
            reason: format!("limit slope {rho_bar} outside (0, 1)"),
        });
    }
    let e0 = gallager_e0(-rho_bar, q_bar, p)?;
    let predicted = e0 + rho_bar * t;
    Ok(StallIdentity::Report {
        rho_bar,
        e0_at_minus_rho: e0,
        predicted,
        final_e_hat,
        gap: (final_e_hat - predicted).abs(),
    })
}

/// Mean slope over the last `window` records of a trace.
pub fn tail_mean_rho(trace: &[IterationRecord], window: usize) -> f64 {
    let w = window.clamp(1, trace.len().max(1));
    let tail = &trace[trace.len().saturating_sub(w)..];
    tail.iter().map(|r| r.rho_star).sum::<f64>() / tail.len() as f64
}

/// Checks the stall level of a stalled run against `E₀(-ρ̄, Q̄) + ρ̄T`, with
/// `ρ̄` the mean slope over the final stall window and `Q̄` the final input.
pub fn stall_level_identity(outcome: &RunOutcome, p: &StochasticMatrix) -> Result<StallIdentity> {
    if outcome.status != RunStatus::Stalled {
        return Ok(StallIdentity::NotApplicable {
            reason: format!("run ended {:?}, not Stalled", outcome.status),
        });
    }
    let rho_bar = tail_mean_rho(&outcome.trace, outcome.stall_window);
    stall_level_identity_at(rho_bar, &outcome.final_state.q, outcome.t, outcome.final_e_hat, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{blahut_arimoto_capacity, bsc, identity};
    use crate::exponents::u_rho;
    use crate::prob::{compose, conditional_x_given_y};

    fn rows(m: &StochasticMatrix) -> Vec<Vec<f64>> {
        m.rows().iter().map(|r| r.probs().to_vec()).collect()
    }

    #[test]
    fn phi_from_channel_cases() {
        let q = Distribution::uniform(3).unwrap();
        let phi = init_phi_from_channel(&q, &identity(3).unwrap()).unwrap();
        assert_eq!(rows(&phi), rows(&identity(3).unwrap()));
        let q = Distribution::new(vec![0.2, 0.8]).unwrap();
        let constant = StochasticMatrix::new(vec![vec![0.3, 0.7]; 2], Orientation::YGivenX).unwrap();
        let phi = init_phi_from_channel(&q, &constant).unwrap();
        for y in 0..2 {
            assert!((phi.entry(y, 0) - 0.2).abs() < 1e-15);
        }
        // Bayes rule by hand
        let p = StochasticMatrix::new(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.6]], Orientation::YGivenX).unwrap();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let post0 = 0.2 * 0.6 / (0.2 * 0.6 + 0.8 * 0.2);
        assert!((phi.entry(0, 0) - post0).abs() < 1e-15);
        let post2 = 0.2 * 0.1 / (0.2 * 0.1 + 0.8 * 0.6);
        assert!((phi.entry(2, 0) - post2).abs() < 1e-15);
    }

    #[test]
    fn step_matches_hand_composed_pipeline() {
        let p = bsc(0.1).unwrap();
        let state = SystemState::from_channel(Distribution::uniform(2).unwrap(), &p).unwrap();
        let opts = ExponentOptions::default();
        let (next, rec) = nts_step(&state, 0.45, &p, &opts).unwrap();
        let u = u_rho(rec.rho_star, &state.q, &state.phi, &p).unwrap();
        let (qx, _) = crate::prob::marginals(&u);
        let cond = conditional_x_given_y(&u);
        for x in 0..2 {
            assert!((next.q.get(x) - qx.get(x)).abs() < 1e-15);
            for y in 0..2 {
                assert!((next.phi.entry(y, x) - cond.matrix.entry(y, x)).abs() < 1e-15);
            }
        }
        assert_eq!(next.l, 1);
        assert!(rec.decrement.unwrap() >= rec.q_decrement.unwrap() - 1e-9);
    }

    #[test]
    fn zero_exponent_is_a_fixed_point() {
        let p = bsc(0.1).unwrap();
        let state = SystemState::from_channel(Distribution::new(vec![0.4, 0.6]).unwrap(), &p).unwrap();
        let opts = ExponentOptions::default();
        let (once, rec) = nts_step(&state, 0.1, &p, &opts).unwrap();
        assert_eq!(rec.e_hat, 0.0);
        let (twice, _) = nts_step(&once, 0.1, &p, &opts).unwrap();
        for x in 0..2 {
            assert!((once.q.get(x) - state.q.get(x)).abs() < 1e-15);
            assert!((twice.q.get(x) - once.q.get(x)).abs() < 1e-15);
            for y in 0..2 {
                assert!((twice.phi.entry(y, x) - once.phi.entry(y, x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unreachable_output_column_is_carried() {
        // output 2 is never produced
        let p = StochasticMatrix::new(vec![vec![0.8, 0.2, 0.0], vec![0.3, 0.7, 0.0]], Orientation::YGivenX).unwrap();
        let q = Distribution::uniform(2).unwrap();
        let mut phi_rows = rows(&init_phi_from_channel(&q, &p).unwrap());
        phi_rows[2] = vec![0.9, 0.1];
        let phi = StochasticMatrix::new(phi_rows, Orientation::XGivenY).unwrap();
        let state = SystemState::new(q, phi).unwrap();
        let (next, rec) = nts_step(&state, 0.2, &p, &ExponentOptions::default()).unwrap();
        assert_eq!(rec.carried_columns, vec![2]);
        assert_eq!(next.phi.row(2), state.phi.row(2));
    }

    #[test]
    fn run_dichotomy_on_bsc() {
        let p = bsc(0.1).unwrap();
        let c = blahut_arimoto_capacity(&p, 1e-12).unwrap().c;
        // start away from the optimal input so the run has work to do
        let start = SystemState::from_channel(Distribution::new(vec![0.2, 0.8]).unwrap(), &p).unwrap();
        let below = nts_run(&start, c - 0.05, &p, &RunOptions::default()).unwrap();
        assert_eq!(below.status, RunStatus::ConvergedToZero);
        assert!(below.final_e_hat <= 1e-6);
        let above = nts_run(&start, 0.45, &p, &RunOptions::default()).unwrap();
        assert_eq!(above.status, RunStatus::Stalled);
        assert!(above.final_e_hat > 0.0);
        for w in above.trace.windows(2) {
            assert!(w[1].e_hat <= w[0].e_hat + 1e-9);
        }
    }

    #[test]
    fn zero_start_has_single_record() {
        let p = bsc(0.1).unwrap();
        let start = SystemState::from_channel(Distribution::uniform(2).unwrap(), &p).unwrap();
        let out = nts_run(&start, 0.3, &p, &RunOptions::default()).unwrap();
        assert_eq!(out.status, RunStatus::ConvergedToZero);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].l, 0);
        assert!(out.conditions_report.rho_below_one);
        assert!(out.conditions_report.q_bounded);
        assert!(out.conditions_report.phi_bounded);
    }

    #[test]
    fn infeasible_start_reports_status() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::new(vec![0.3, 0.7]).unwrap();
        let phi = StochasticMatrix::new(vec![q.probs().to_vec(); 2], Orientation::XGivenY).unwrap();
        let state = SystemState::new(q, phi).unwrap();
        let out = nts_run(&state, 0.2, &p, &RunOptions::default()).unwrap();
        assert_eq!(out.status, RunStatus::Infeasible);
        assert!(matches!(
            nts_step(&state, 0.2, &p, &ExponentOptions::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn condition_monitor() {
        let p = bsc(0.1).unwrap();
        let start = SystemState::from_channel(Distribution::uniform(2).unwrap(), &p).unwrap();
        let sol = update_exponent(0.3, &start.q, &start.phi, &p, &ExponentOptions::default()).unwrap();
        let rec = record_for(&start, &sol, &p, None).unwrap();
        let single = check_convergence_conditions(std::slice::from_ref(&rec), 0.5).unwrap();
        assert_eq!(single.max_rho, rec.rho_star);
        assert_eq!(single.min_q, rec.min_q);
        assert_eq!(single.min_phi_on_support, rec.min_phi_on_support);
        let mut injected = rec.clone();
        injected.min_q = 0.0;
        let report = check_convergence_conditions(&[rec, injected], 1.0).unwrap();
        assert!(!report.q_bounded);
        assert!(check_convergence_conditions(&[], 0.5).is_err());
    }

    #[test]
    fn arimoto_condition() {
        let sym = check_arimoto_fixed_point(&Distribution::uniform(2).unwrap(), 0.4, &bsc(0.2).unwrap()).unwrap();
        assert!(sym.max_deviation.abs() < 1e-15);
        assert!(sym.is_fixed_point);
        let asym = StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.4, 0.6]], Orientation::YGivenX).unwrap();
        let r = check_arimoto_fixed_point(&Distribution::new(vec![0.8, 0.2]).unwrap(), 0.5, &asym).unwrap();
        assert!(r.max_deviation > 1e-3 * r.constant);
        assert!(check_arimoto_fixed_point(&Distribution::uniform(2).unwrap(), 1.0, &asym).is_err());
    }

    #[test]
    fn stall_identity_not_applicable() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::uniform(2).unwrap();
        let r = stall_level_identity_at(0.0, &q, 0.45, 0.01, &p).unwrap();
        assert!(matches!(r, StallIdentity::NotApplicable { .. }));
        let joint = compose(&q, &p).unwrap();
        assert_eq!(joint.nx(), 2);
    }
}
