//! Update exponent, threshold and random-coding error exponent.
//!
//! The update exponent is the minimum of `D(U || Q∘P)` over joint
//! distributions `U` that pass the feedback test
//! `Σ U(x,y) log(Φ(x|y) / U(x)) ≥ T`. It is computed here through its
//! Lagrangian dual: `f(ρ) = Ê₀(ρ, Q, Φ) + ρT` is concave in `ρ ≥ 0`, its
//! supremum is the exponent and the tilted distribution `U_ρ` at the
//! maximizing slope is the minimizer. [`brute_force`] solves the primal
//! problem directly and serves as an independent check.
//!
//! Sums are evaluated in the log domain so that slopes up to `2^20` stay
//! finite.

pub mod brute_force;

use serde::Serialize;

pub use brute_force::{brute_force_update_exponent, BruteForceResult};

use crate::error::{Error, Result};
use crate::prob::{
    compose, kl_slices, mutual_information, Distribution, JointDistribution, Orientation, StochasticMatrix,
};
use crate::search::{bisect_threshold, golden_section_max};

/// Options for the one-dimensional dual maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentOptions {
    /// Largest slope tried while bracketing.
    pub rho_max: f64,
    /// Width at which golden-section search stops.
    pub rho_tol: f64,
    /// Secant slope at `rho_max` above which the constraint is unattainable.
    pub slope_tol: f64,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        Self {
            rho_max: (1u64 << 20) as f64,
            rho_tol: 1e-10,
            slope_tol: 1e-9,
        }
    }
}

/// Solution of the constrained divergence minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSolution {
    /// The exponent in nats; `f64::INFINITY` when infeasible.
    pub value: f64,
    /// Maximizing slope of the dual.
    pub rho_star: f64,
    /// The minimizing joint `U*`. When infeasible this is `U_ρ` at the slope
    /// cap, which approaches the largest attainable constraint value.
    pub minimizer: JointDistribution,
    pub feasible: bool,
    /// `Σ U* log(Φ / U*_x)` at the returned minimizer.
    pub constraint_value: f64,
}

/// Random-coding error exponent at a given rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorExponentResult {
    pub value: f64,
    pub rho_star: f64,
}

fn safe_ln(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_inputs(q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> Result<()> {
    p.expect(Orientation::YGivenX, "channel")?;
    phi.expect(Orientation::XGivenY, "auxiliary conditional")?;
    let (nx, ny) = (p.num_conditions(), p.num_outcomes());
    if q.len() != nx || phi.num_outcomes() != nx || phi.num_conditions() != ny {
        return Err(Error::Dimension(format!(
            "Q over {} symbols, Φ is {}x{} (y by x), channel is {nx}x{ny}",
            q.len(),
            phi.num_conditions(),
            phi.num_outcomes()
        )));
    }
    Ok(())
}

/// Log-domain tables for one `(Q, Φ, P)` instance.
struct Tilt {
    nx: usize,
    ny: usize,
    log_q: Vec<f64>,
    /// `log P(y|x)`, row-major by `x`.
    log_p: Vec<f64>,
    /// `log Φ(x|y)`, row-major by `x`.
    log_phi: Vec<f64>,
}

impl Tilt {
    fn new(q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> Result<Self> {
        check_inputs(q, phi, p)?;
        let (nx, ny) = (p.num_conditions(), p.num_outcomes());
        let mut log_p = Vec::with_capacity(nx * ny);
        let mut log_phi = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                log_p.push(safe_ln(p.entry(x, y)));
                log_phi.push(safe_ln(phi.entry(y, x)));
            }
        }
        Ok(Self {
            nx,
            ny,
            log_q: q.probs().iter().map(|&v| safe_ln(v)).collect(),
            log_p,
            log_phi,
        })
    }

    /// `log P(y|x) + ρ log Φ(x|y)` with `0^0 = 1`.
    fn tilted_cell(&self, x: usize, y: usize, rho: f64) -> f64 {
        let i = x * self.ny + y;
        let lp = self.log_p[i];
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        if rho == 0.0 {
            lp
        } else {
            lp + rho * self.log_phi[i]
        }
    }

    /// `log [Q(x) Σ_y P(y|x) Φ^ρ(x|y)]` for every `x`.
    fn log_brackets(&self, rho: f64) -> Vec<f64> {
        (0..self.nx)
            .map(|x| {
                if self.log_q[x] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                self.log_q[x] + log_sum_exp((0..self.ny).map(move |y| self.tilted_cell(x, y, rho)))
            })
            .collect()
    }

    fn e0_hat(&self, rho: f64) -> Result<f64> {
        let s = log_sum_exp(self.log_brackets(rho).into_iter().map(|b| b / (1.0 + rho)));
        if s == f64::NEG_INFINITY {
            return Err(Error::DegenerateSupport(format!(
                "every bracket of Ê₀ vanishes at ρ = {rho}"
            )));
        }
        let v = -(1.0 + rho) * s;
        if v.is_nan() {
            return Err(Error::Numeric(format!("Ê₀ is NaN at ρ = {rho}")));
        }
        Ok(v)
    }

    fn u_rho(&self, rho: f64) -> Result<JointDistribution> {
        let scaled: Vec<f64> = self.log_brackets(rho).into_iter().map(|b| b / (1.0 + rho)).collect();
        let s = log_sum_exp(scaled.iter().copied());
        if s == f64::NEG_INFINITY {
            return Err(Error::DegenerateSupport(format!(
                "every bracket of U_ρ vanishes at ρ = {rho}"
            )));
        }
        let mut probs = vec![0.0; self.nx * self.ny];
        for x in 0..self.nx {
            if scaled[x] == f64::NEG_INFINITY {
                continue;
            }
            let ux = (scaled[x] - s).exp();
            let norm = log_sum_exp((0..self.ny).map(|y| self.tilted_cell(x, y, rho)));
            for y in 0..self.ny {
                probs[x * self.ny + y] = ux * (self.tilted_cell(x, y, rho) - norm).exp();
            }
        }
        JointDistribution::from_weights(self.nx, self.ny, &probs)
    }

    /// `Σ U log(Φ(x|y) / U(x))`, skipping cells where `U = 0`.
    fn constraint_value(&self, u: &JointDistribution) -> f64 {
        let ux = u.x_marginal();
        let mut total = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                let m = u.get(x, y);
                if m > 0.0 {
                    total += m * (self.log_phi[x * self.ny + y] - ux.get(x).ln());
                }
            }
        }
        total
    }
}

/// `Ê₀(ρ, Q, Φ) = -(1+ρ) log Σ_x [Q(x) Σ_y P(y|x) Φ^ρ(x|y)]^{1/(1+ρ)}`.
///
/// `0^ρ` is taken as 0 for `ρ > 0` and 1 for `ρ = 0`.
pub fn e0_hat(rho: f64, q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> Result<f64> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::Numeric(format!(
            "slope ρ = {rho} must be finite and nonnegative"
        )));
    }
    Tilt::new(q, phi, p)?.e0_hat(rho)
}

/// The tilted joint distribution `U_ρ(x) U_ρ(y|x)` attaining `Ê₀(ρ)`.
pub fn u_rho(rho: f64, q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> Result<JointDistribution> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::Numeric(format!(
            "slope ρ = {rho} must be finite and nonnegative"
        )));
    }
    Tilt::new(q, phi, p)?.u_rho(rho)
}

/// The feedback statistic `Σ U(x,y) log(Φ(x|y) / U(x))` of a joint distribution.
pub fn constraint_value(u: &JointDistribution, phi: &StochasticMatrix) -> Result<f64> {
    phi.expect(Orientation::XGivenY, "auxiliary conditional")?;
    if phi.num_conditions() != u.ny() || phi.num_outcomes() != u.nx() {
        return Err(Error::Dimension("Φ does not match the joint distribution".into()));
    }
    let ux = u.x_marginal();
    let mut total = 0.0;
    for x in 0..u.nx() {
        for y in 0..u.ny() {
            let m = u.get(x, y);
            if m > 0.0 {
                let f = phi.entry(y, x);
                if f <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                total += m * (f / ux.get(x)).ln();
            }
        }
    }
    Ok(total)
}

/// `T₀ = Σ Q(x) P(y|x) log(Φ(x|y) / Q(x))`, the largest threshold with a zero
/// update exponent. `-inf` when `Φ` vanishes on the support of `Q∘P`.
pub fn threshold_t0(q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> Result<f64> {
    check_inputs(q, phi, p)?;
    let mut total = 0.0;
    for x in 0..q.len() {
        for y in 0..p.num_outcomes() {
            let m = q.get(x) * p.entry(x, y);
            if m > 0.0 {
                let f = phi.entry(y, x);
                if f <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                total += m * (f / q.get(x)).ln();
            }
        }
    }
    Ok(total)
}

/// The update exponent `Ê(T, Q, Φ)` with its minimizer.
///
/// The boundary `ρ* = 0` is settled exactly by comparing `T` with `T₀`.
/// Otherwise the dual is bracketed by doubling from `ρ = 1`, maximized by
/// golden-section search, and the slope is then pinned to the point where
/// the constraint value of `U_ρ` (which is non-decreasing in `ρ`) first
/// reaches `T`.
pub fn update_exponent(
    t: f64,
    q: &Distribution,
    phi: &StochasticMatrix,
    p: &StochasticMatrix,
    opts: &ExponentOptions,
) -> Result<ExponentSolution> {
    if t.is_nan() {
        return Err(Error::Numeric("threshold is NaN".into()));
    }
    let tilt = Tilt::new(q, phi, p)?;
    let t0 = threshold_t0(q, phi, p)?;
    if t <= t0 {
        return Ok(ExponentSolution {
            value: 0.0,
            rho_star: 0.0,
            minimizer: compose(q, p)?,
            feasible: true,
            constraint_value: t0,
        });
    }
    let infeasible = |rho: f64| -> Result<ExponentSolution> {
        let minimizer = tilt.u_rho(rho)?;
        let constraint_value = tilt.constraint_value(&minimizer);
        Ok(ExponentSolution {
            value: f64::INFINITY,
            rho_star: rho,
            minimizer,
            feasible: false,
            constraint_value,
        })
    };
    if t == f64::INFINITY {
        return infeasible(opts.rho_max);
    }
    let f = |rho: f64| -> Result<f64> {
        let v = tilt.e0_hat(rho)? + rho * t;
        if !v.is_finite() {
            return Err(Error::Numeric(format!("dual objective is {v} at ρ = {rho}")));
        }
        Ok(v)
    };

    // (ρ, f(ρ)) for the last three bracketing points
    let mut before = (0.0, 0.0);
    let mut prev = (0.0, 0.0);
    let mut cur = (1.0f64.min(opts.rho_max), f(1.0f64.min(opts.rho_max))?);
    while cur.1 > prev.1 && cur.0 < opts.rho_max {
        before = prev;
        prev = cur;
        let next = (cur.0 * 2.0).min(opts.rho_max);
        cur = (next, f(next)?);
    }
    if cur.1 > prev.1 {
        // still climbing at the cap
        let half = 0.5 * opts.rho_max;
        let slope = (cur.1 - f(half)?) / (opts.rho_max - half);
        if slope > opts.slope_tol {
            return infeasible(opts.rho_max);
        }
    }
    let (lo, hi) = (before.0, cur.0);
    let (rho_golden, _) = golden_section_max(f, lo, hi, opts.rho_tol)?;

    let rho_star = pin_slope(&tilt, t, rho_golden, opts.rho_max)?.unwrap_or(rho_golden);
    let minimizer = tilt.u_rho(rho_star)?;
    let constraint_value = tilt.constraint_value(&minimizer);
    let value = f(rho_star)?.max(0.0);
    Ok(ExponentSolution {
        value,
        rho_star,
        minimizer,
        feasible: true,
        constraint_value,
    })
}

/// Smallest slope near `guess` whose tilted distribution meets the threshold.
/// `None` when no sign change of `c(U_ρ) - T` is found within `[0, rho_max]`.
fn pin_slope(tilt: &Tilt, t: f64, guess: f64, rho_max: f64) -> Result<Option<f64>> {
    let meets = |rho: f64| -> Result<bool> { Ok(tilt.constraint_value(&tilt.u_rho(rho)?) >= t) };
    let mut width = 1e-8 * guess.max(1.0);
    let mut hi = (guess + width).min(rho_max);
    while !meets(hi)? {
        if hi >= rho_max {
            return Ok(None);
        }
        width *= 4.0;
        hi = (guess + width).min(rho_max);
    }
    let mut width = 1e-8 * guess.max(1.0);
    let mut lo = (guess - width).max(0.0);
    while lo > 0.0 && meets(lo)? {
        width *= 4.0;
        lo = (guess - width).max(0.0);
    }
    if lo == 0.0 && meets(0.0)? {
        return Ok(Some(0.0));
    }
    Ok(Some(bisect_threshold(meets, lo, hi)?))
}

/// Gallager's function `E₀(ρ, Q) = -log Σ_y [Σ_x Q(x) P(y|x)^{1/(1+ρ)}]^{1+ρ}`,
/// defined for `ρ > -1`. Negative arguments give the correct-decoding form.
pub fn gallager_e0(rho: f64, q: &Distribution, p: &StochasticMatrix) -> Result<f64> {
    p.expect(Orientation::YGivenX, "channel")?;
    if q.len() != p.num_conditions() {
        return Err(Error::Dimension("input distribution does not match channel".into()));
    }
    if !rho.is_finite() || rho <= -1.0 {
        return Err(Error::Numeric(format!("E₀ argument {rho} outside (-1, inf)")));
    }
    let s = 1.0 + rho;
    let outer = log_sum_exp((0..p.num_outcomes()).map(|y| {
        let inner = log_sum_exp((0..q.len()).map(|x| {
            let (qx, pyx) = (q.get(x), p.entry(x, y));
            if qx > 0.0 && pyx > 0.0 {
                qx.ln() + pyx.ln() / s
            } else {
                f64::NEG_INFINITY
            }
        }));
        s * inner
    }));
    Ok(-outer)
}

/// Random-coding error exponent `E_r(R, Q) = max_{0≤ρ≤1} E₀(ρ, Q) - ρR`.
pub fn error_exponent(r: f64, q: &Distribution, p: &StochasticMatrix) -> Result<ErrorExponentResult> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Numeric(format!("rate {r} must be nonnegative")));
    }
    // the slope at ρ = 0 is I(Q∘P) - R
    if r >= mutual_information(q, p)? {
        return Ok(ErrorExponentResult {
            value: 0.0,
            rho_star: 0.0,
        });
    }
    let g = |rho: f64| -> Result<f64> { Ok(gallager_e0(rho, q, p)? - rho * r) };
    let (rho_star, value) = golden_section_max(g, 0.0, 1.0, 1e-12)?;
    Ok(ErrorExponentResult {
        value: value.max(0.0),
        rho_star,
    })
}

/// `D(U || Q∘P)` for a candidate minimizer.
pub fn divergence_from_channel(u: &JointDistribution, q: &Distribution, p: &StochasticMatrix) -> Result<f64> {
    let qp = compose(q, p)?;
    if qp.nx() != u.nx() || qp.ny() != u.ny() {
        return Err(Error::Dimension("joint distribution does not match Q∘P".into()));
    }
    Ok(kl_slices(u.probs(), qp.probs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{bsc, identity, z_channel};
    use crate::nts::init_phi_from_channel;

    fn uniform2() -> Distribution {
        Distribution::uniform(2).unwrap()
    }

    #[test]
    fn e0_hat_cases() {
        let p = bsc(0.1).unwrap();
        let q = uniform2();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        assert!(e0_hat(0.0, &q, &phi, &p).unwrap().abs() < 1e-15);
        let v = e0_hat(0.5, &q, &phi, &p).unwrap();
        assert!((v - (-0.224900460964108)).abs() < 1e-13, "{v}");
        let id = identity(3).unwrap();
        let q3 = Distribution::uniform(3).unwrap();
        let phi_id = init_phi_from_channel(&q3, &id).unwrap();
        for rho in [0.3, 1.0, 7.0] {
            assert!((e0_hat(rho, &q3, &phi_id, &id).unwrap() + rho * 3f64.ln()).abs() < 1e-13);
        }
        assert!(e0_hat(-1.0, &q, &phi, &p).is_err());
    }

    #[test]
    fn e0_hat_degenerate_support() {
        let p = identity(2).unwrap();
        let q = Distribution::point_mass(2, 0).unwrap();
        // Φ puts no mass on x = 0 anywhere
        let phi = StochasticMatrix::new(vec![vec![0.0, 1.0]; 2], Orientation::XGivenY).unwrap();
        assert!(matches!(e0_hat(0.5, &q, &phi, &p), Err(Error::DegenerateSupport(_))));
        assert!(e0_hat(0.0, &q, &phi, &p).is_ok());
    }

    #[test]
    fn u_rho_reductions() {
        let p = z_channel(0.3).unwrap();
        let q = Distribution::new(vec![0.4, 0.6]).unwrap();
        let phi = StochasticMatrix::new(vec![vec![0.7, 0.3], vec![0.2, 0.8]], Orientation::XGivenY).unwrap();
        let u0 = u_rho(0.0, &q, &phi, &p).unwrap();
        let qp = compose(&q, &p).unwrap();
        assert!(u0.l1_distance(&qp).unwrap() < 1e-15);
        let pm = Distribution::point_mass(2, 1).unwrap();
        for rho in [0.5, 3.0, 100.0] {
            let u = u_rho(rho, &pm, &phi, &p).unwrap();
            assert!((u.x_marginal().get(1) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_cases() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::new(vec![0.3, 0.7]).unwrap();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let t0 = threshold_t0(&q, &phi, &p).unwrap();
        assert!((t0 - 0.3159525044897075).abs() < 1e-14);
        assert!((t0 - mutual_information(&q, &p).unwrap()).abs() < 1e-14);
        let ignorant = StochasticMatrix::new(vec![q.probs().to_vec(); 2], Orientation::XGivenY).unwrap();
        assert!(threshold_t0(&q, &ignorant, &p).unwrap().abs() < 1e-15);
        let zero_phi = StochasticMatrix::new(vec![vec![1.0, 0.0]; 2], Orientation::XGivenY).unwrap();
        assert_eq!(threshold_t0(&q, &zero_phi, &p).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn update_exponent_below_threshold_is_zero() {
        let p = bsc(0.1).unwrap();
        let q = uniform2();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let sol = update_exponent(0.3, &q, &phi, &p, &ExponentOptions::default()).unwrap();
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.rho_star, 0.0);
        assert!(sol.minimizer.l1_distance(&compose(&q, &p).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn update_exponent_golden_value() {
        let p = bsc(0.1).unwrap();
        let q = uniform2();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let sol = update_exponent(0.45, &q, &phi, &p, &ExponentOptions::default()).unwrap();
        assert!(sol.feasible);
        // constrained minimum computed independently by SLSQP
        assert!((sol.value - 0.008788793008502787).abs() < 1e-9, "{}", sol.value);
        assert!((sol.rho_star - 0.23086269659184394).abs() < 1e-6);
        let d = divergence_from_channel(&sol.minimizer, &q, &p).unwrap();
        assert!((d - sol.value).abs() < 1e-9);
        assert!(sol.constraint_value >= 0.45 - 1e-9);
    }

    #[test]
    fn ignorant_auxiliary_is_infeasible() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::new(vec![0.3, 0.7]).unwrap();
        let phi = StochasticMatrix::new(vec![q.probs().to_vec(); 2], Orientation::XGivenY).unwrap();
        let sol = update_exponent(0.1, &q, &phi, &p, &ExponentOptions::default()).unwrap();
        assert!(!sol.feasible);
        assert_eq!(sol.value, f64::INFINITY);
        let sol = update_exponent(f64::INFINITY, &q, &phi, &p, &ExponentOptions::default()).unwrap();
        assert!(!sol.feasible);
    }

    #[test]
    fn error_exponent_cases() {
        let p = bsc(0.1).unwrap();
        let q = uniform2();
        let i = mutual_information(&q, &p).unwrap();
        assert_eq!(error_exponent(i, &q, &p).unwrap().value, 0.0);
        assert_eq!(error_exponent(i + 0.1, &q, &p).unwrap().value, 0.0);
        let r0 = error_exponent(0.0, &q, &p).unwrap();
        assert!((r0.value - 0.2231435513142097).abs() < 1e-12);
        assert!((r0.rho_star - 1.0).abs() < 1e-9);
        assert!((gallager_e0(1.0, &q, &p).unwrap() - 0.2231435513142097).abs() < 1e-14);
        assert!(gallager_e0(0.0, &q, &p).unwrap().abs() < 1e-15);
        assert!(error_exponent(-0.1, &q, &p).is_err());
    }
}
