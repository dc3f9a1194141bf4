//! Reference channels and channel capacity by alternating maximization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{compose, Distribution, Orientation, StochasticMatrix};

/// Default stopping gap for [`blahut_arimoto_capacity`], in nats.
pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;

/// Alternation cap for [`blahut_arimoto_capacity`].
pub const MAX_ALTERNATIONS: usize = 100_000;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("{name} parameter {v} outside [0, 1]")));
    }
    Ok(())
}

fn channel(rows: Vec<Vec<f64>>) -> Result<StochasticMatrix> {
    StochasticMatrix::new(rows, Orientation::YGivenX)
}

/// Binary symmetric channel with crossover probability `q`.
pub fn bsc(q: f64) -> Result<StochasticMatrix> {
    check_unit("bsc", q)?;
    channel(vec![vec![1.0 - q, q], vec![q, 1.0 - q]])
}

/// Binary erasure channel; outputs are ordered `0, erasure, 1`.
pub fn bec(eps: f64) -> Result<StochasticMatrix> {
    check_unit("bec", eps)?;
    channel(vec![vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps]])
}

/// Noiseless `k`-ary channel.
pub fn identity(k: usize) -> Result<StochasticMatrix> {
    let rows = (0..k).map(|i| Distribution::point_mass(k, i)).collect::<Result<_>>()?;
    StochasticMatrix::from_rows(rows, Orientation::YGivenX)
}

/// Z-channel: input 0 is received intact, input 1 flips to 0 with probability `q`.
pub fn z_channel(q: f64) -> Result<StochasticMatrix> {
    check_unit("z_channel", q)?;
    channel(vec![vec![1.0, 0.0], vec![q, 1.0 - q]])
}

/// Named closed-form channel constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedChannel {
    Bsc { p: f64 },
    Bec { eps: f64 },
    Identity { k: usize },
    ZChannel { p: f64 },
}

impl NamedChannel {
    pub fn build(&self) -> Result<StochasticMatrix> {
        match *self {
            NamedChannel::Bsc { p } => bsc(p),
            NamedChannel::Bec { eps } => bec(eps),
            NamedChannel::Identity { k } => identity(k),
            NamedChannel::ZChannel { p } => z_channel(p),
        }
    }
}

/// Builds a channel from its single parameter.
pub type ChannelConstructor = fn(f64) -> Result<StochasticMatrix>;

/// Catalog of the closed-form channels by name.
pub fn closed_form_channels() -> Vec<(&'static str, ChannelConstructor)> {
    fn identity_param(k: f64) -> Result<StochasticMatrix> {
        if k.fract() != 0.0 || k < 1.0 {
            return Err(Error::Config(format!("identity size {k} is not a positive integer")));
        }
        identity(k as usize)
    }
    vec![
        ("bsc", bsc as ChannelConstructor),
        ("bec", bec),
        ("identity", identity_param),
        ("z_channel", z_channel),
    ]
}

/// Capacity of a channel with the maximizing input distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Capacity in nats (the lower bound at the final iterate).
    pub c: f64,
    pub q_star: Distribution,
    pub iterations: usize,
    /// Upper minus lower capacity bound when iteration stopped.
    pub gap_bound: f64,
}

/// `D(P(·|x) || (Q∘P)_y)` for every input `x`.
fn input_divergences(q: &Distribution, p: &StochasticMatrix) -> Result<Vec<f64>> {
    let py = compose(q, p)?.y_marginal();
    Ok(p.rows()
        .iter()
        .map(|row| {
            row.probs()
                .iter()
                .zip(py.probs())
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, m)| w * (w / m).ln())
                .sum::<f64>()
        })
        .collect())
}

/// Channel capacity by Blahut–Arimoto alternating maximization.
///
/// Stops once `max_x D_x - log Σ_x Q(x) e^{D_x}` is at most `tol`; both
/// sides bound the capacity.
pub fn blahut_arimoto_capacity(p: &StochasticMatrix, tol: f64) -> Result<CapacityResult> {
    p.expect(Orientation::YGivenX, "channel")?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!("capacity tolerance {tol} must be positive")));
    }
    let nx = p.num_conditions();
    let mut q = Distribution::uniform(nx)?;
    let mut iterations = 0;
    loop {
        let d = input_divergences(&q, p)?;
        // exponents are shifted by their max before exponentiating
        let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = q
            .probs()
            .iter()
            .zip(&d)
            .map(|(qx, dx)| qx * (dx - d_max).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let lower = d_max + total.ln();
        let gap = d_max - lower;
        if gap <= tol || iterations >= MAX_ALTERNATIONS {
            return Ok(CapacityResult {
                c: lower.max(0.0),
                q_star: q,
                iterations,
                gap_bound: gap.max(0.0),
            });
        }
        q = Distribution::from_weights(&weights)?;
        iterations += 1;
    }
}
