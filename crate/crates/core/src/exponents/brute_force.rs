//! Primal solver for the update exponent, used as an independent oracle.
//!
//! Minimizes `D(U || Q∘P)` subject to `Σ U log(Φ(x|y)/U(x)) ≥ T` directly on
//! the joint simplex with an augmented Lagrangian whose inner problems are
//! solved by spectral projected gradient. Only cells where both `Q∘P` and
//! `Φ` are positive can carry mass at a finite feasible point, so the search
//! runs over those cells alone.
//!
//! Desk scale only: at most nine joint cells.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{compose, Distribution, JointDistribution, Orientation, RngStream, StochasticMatrix};

/// Outcome of the primal search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult {
    /// Minimum divergence found; `f64::INFINITY` when infeasible.
    pub value: f64,
    pub feasible: bool,
    /// The lattice scan at the requested resolution found no feasible point
    /// although the feasible set is nonempty.
    pub coarse_warning: bool,
    /// Best feasible point, when one exists.
    pub minimizer: Option<JointDistribution>,
}

const MAX_CELLS: usize = 9;
const RANDOM_STARTS: usize = 20;
const WARM_SLOPES: [f64; 6] = [0.125, 0.5, 1.0, 2.0, 8.0, 32.0];
const MAX_LATTICE_POINTS: u64 = 20_000_000;
const LOG_FLOOR: f64 = -700.0;

struct Instance {
    /// `(Q∘P)` on the active cells.
    qp: Vec<f64>,
    /// `log Φ(x|y)` on the active cells.
    log_phi: Vec<f64>,
    /// input symbol of each active cell
    row: Vec<usize>,
    nx: usize,
    ny: usize,
    /// flat `(x, y)` index of each active cell
    cell: Vec<usize>,
    t: f64,
}

fn ln_floor(v: f64) -> f64 {
    if v > 0.0 {
        v.ln().max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

impl Instance {
    fn dim(&self) -> usize {
        self.qp.len()
    }

    fn row_sums(&self, u: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.nx];
        for (k, &m) in u.iter().enumerate() {
            s[self.row[k]] += m;
        }
        s
    }

    fn divergence(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.qp)
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, r)| m * (m / r).ln())
            .sum()
    }

    fn constraint(&self, u: &[f64]) -> f64 {
        let rows = self.row_sums(u);
        u.iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(k, m)| m * (self.log_phi[k] - rows[self.row[k]].ln()))
            .sum()
    }

    fn divergence_grad(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.qp)
            .map(|(m, r)| ln_floor(*m) - r.ln() + 1.0)
            .collect()
    }

    fn constraint_grad(&self, u: &[f64]) -> Vec<f64> {
        let rows = self.row_sums(u);
        (0..self.dim())
            .map(|k| self.log_phi[k] - ln_floor(rows[self.row[k]]) - 1.0)
            .collect()
    }

    /// Largest attainable constraint value: each row puts its mass on its
    /// largest `Φ`, rows are weighted by those maxima.
    fn constraint_sup(&self) -> (f64, Vec<f64>) {
        let mut best = vec![None::<usize>; self.nx];
        for k in 0..self.dim() {
            let r = self.row[k];
            if best[r].is_none_or(|b| self.log_phi[k] > self.log_phi[b]) {
                best[r] = Some(k);
            }
        }
        let logs: Vec<(usize, f64)> = best.iter().flatten().map(|&k| (k, self.log_phi[k])).collect();
        let max = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logs.iter().map(|l| (l.1 - max).exp()).sum();
        let mut u = vec![0.0; self.dim()];
        for (k, l) in &logs {
            u[*k] = (l - max).exp() / total;
        }
        (max + total.ln(), u)
    }

    fn to_joint(&self, u: &[f64]) -> Result<JointDistribution> {
        let mut probs = vec![0.0; self.nx * self.ny];
        for (k, &m) in u.iter().enumerate() {
            probs[self.cell[k]] = m;
        }
        JointDistribution::from_weights(self.nx, self.ny, &probs)
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let candidate = (cum - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Augmented Lagrangian of `min D s.t. c ≥ T` at multiplier `lambda`, penalty `mu`.
fn lagrangian(inst: &Instance, u: &[f64], lambda: f64, mu: f64) -> f64 {
    let shifted = (lambda + mu * (inst.t - inst.constraint(u))).max(0.0);
    inst.divergence(u) + (shifted * shifted - lambda * lambda) / (2.0 * mu)
}

fn lagrangian_grad(inst: &Instance, u: &[f64], lambda: f64, mu: f64) -> Vec<f64> {
    let shifted = (lambda + mu * (inst.t - inst.constraint(u))).max(0.0);
    let gd = inst.divergence_grad(u);
    if shifted == 0.0 {
        return gd;
    }
    let gc = inst.constraint_grad(u);
    gd.iter().zip(&gc).map(|(d, c)| d - shifted * c).collect()
}

/// Spectral projected gradient with a nonmonotone Armijo search.
fn spg(inst: &Instance, start: &[f64], lambda: f64, mu: f64, max_iter: usize) -> Vec<f64> {
    const MEMORY: usize = 10;
    let objective = |u: &[f64]| lagrangian(inst, u, lambda, mu);
    let mut u = project_simplex(start);
    let mut fu = objective(&u);
    let mut g = lagrangian_grad(inst, &u, lambda, mu);
    let mut history = vec![fu];
    let mut alpha = 1.0;
    for _ in 0..max_iter {
        let full: Vec<f64> = u.iter().zip(&g).map(|(x, gx)| x - gx).collect();
        let pg = project_simplex(&full);
        if pg.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= 1e-13 {
            break;
        }
        let trial: Vec<f64> = u.iter().zip(&g).map(|(x, gx)| x - alpha * gx).collect();
        let d: Vec<f64> = project_simplex(&trial).iter().zip(&u).map(|(a, b)| a - b).collect();
        let gd = dot(&g, &d);
        let reference = history
            .iter()
            .rev()
            .take(MEMORY)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut step = 1.0;
        let mut next;
        let mut f_next;
        loop {
            next = u
                .iter()
                .zip(&d)
                .map(|(x, dx)| (x + step * dx).max(0.0))
                .collect::<Vec<_>>();
            f_next = objective(&next);
            if f_next <= reference + 1e-4 * step * gd || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        let g_next = lagrangian_grad(inst, &next, lambda, mu);
        let s: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-12, 1e6)
        } else {
            1e6
        };
        u = next;
        fu = f_next;
        g = g_next;
        history.push(fu);
        if step < 1e-20 {
            break;
        }
    }
    u
}

/// Method of multipliers from one start; returns the final iterate.
fn solve_from(inst: &Instance, start: &[f64]) -> Vec<f64> {
    let mut lambda = 0.0;
    let mut mu = 10.0;
    let mut u = start.to_vec();
    let mut last_violation = f64::INFINITY;
    for _ in 0..60 {
        u = spg(inst, &u, lambda, mu, 300);
        let violation = (inst.t - inst.constraint(&u)).max(0.0);
        let new_lambda = (lambda + mu * (inst.t - inst.constraint(&u))).max(0.0);
        let settled = (new_lambda - lambda).abs() <= 1e-11 * (1.0 + lambda);
        lambda = new_lambda;
        if violation <= 1e-12 && settled {
            break;
        }
        if violation > 0.25 * last_violation {
            mu = (mu * 10.0).min(1e10);
        }
        last_violation = violation;
    }
    u
}

/// Visits every point of the simplex lattice with denominator `resolution`.
fn scan_lattice(dim: usize, resolution: u32, mut visit: impl FnMut(&[f64])) {
    let mut parts = vec![0u32; dim];
    let mut point = vec![0.0; dim];
    fn rec(idx: usize, remaining: u32, res: u32, parts: &mut [u32], point: &mut [f64], visit: &mut dyn FnMut(&[f64])) {
        if idx + 1 == parts.len() {
            parts[idx] = remaining;
            for (p, &c) in point.iter_mut().zip(parts.iter()) {
                *p = c as f64 / res as f64;
            }
            visit(point);
            return;
        }
        for c in 0..=remaining {
            parts[idx] = c;
            rec(idx + 1, remaining - c, res, parts, point, visit);
        }
    }
    rec(0, resolution, resolution, &mut parts, &mut point, &mut visit);
}

fn lattice_size(dim: usize, resolution: u32) -> u64 {
    // C(resolution + dim - 1, dim - 1)
    let (n, k) = (resolution as u64 + dim as u64 - 1, dim as u64 - 1);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Minimizes `D(U || Q∘P)` subject to `Σ U log(Φ(x|y)/U(x)) ≥ T` by direct
/// search on the joint simplex.
///
/// Starts: 20 random feasible points (seeded), tilted distributions on a
/// fixed slope grid, and the best point of a lattice scan with denominator
/// `resolution`.
pub fn brute_force_update_exponent(
    t: f64,
    q: &Distribution,
    phi: &StochasticMatrix,
    p: &StochasticMatrix,
    resolution: u32,
) -> Result<BruteForceResult> {
    p.expect(Orientation::YGivenX, "channel")?;
    phi.expect(Orientation::XGivenY, "auxiliary conditional")?;
    let (nx, ny) = (p.num_conditions(), p.num_outcomes());
    if nx * ny > MAX_CELLS {
        return Err(Error::Dimension(format!("{nx}x{ny} joint exceeds {MAX_CELLS} cells")));
    }
    if resolution == 0 {
        return Err(Error::Config("lattice resolution must be positive".into()));
    }
    if t.is_nan() {
        return Err(Error::Numeric("threshold is NaN".into()));
    }
    let qp = compose(q, p)?;
    if phi.num_conditions() != ny || phi.num_outcomes() != nx {
        return Err(Error::Dimension("Φ does not match the channel".into()));
    }
    let mut inst = Instance {
        qp: vec![],
        log_phi: vec![],
        row: vec![],
        nx,
        ny,
        cell: vec![],
        t,
    };
    for x in 0..nx {
        for y in 0..ny {
            let (m, f) = (qp.get(x, y), phi.entry(y, x));
            if m > 0.0 && f > 0.0 {
                inst.qp.push(m);
                inst.log_phi.push(f.ln());
                inst.row.push(x);
                inst.cell.push(x * ny + y);
            }
        }
    }
    let infeasible = |coarse_warning| BruteForceResult {
        value: f64::INFINITY,
        feasible: false,
        coarse_warning,
        minimizer: None,
    };
    if inst.dim() == 0 {
        return Ok(infeasible(false));
    }
    let (sup, sup_point) = inst.constraint_sup();
    if lattice_size(inst.dim(), resolution) > MAX_LATTICE_POINTS {
        return Err(Error::Config(format!(
            "lattice resolution {resolution} needs more than {MAX_LATTICE_POINTS} points"
        )));
    }
    let mut lattice_best: Option<(f64, Vec<f64>)> = None;
    scan_lattice(inst.dim(), resolution, |u| {
        if inst.constraint(u) >= t {
            let d = inst.divergence(u);
            if lattice_best.as_ref().is_none_or(|(b, _)| d < *b) {
                lattice_best = Some((d, u.to_vec()));
            }
        }
    });
    if sup < t {
        return Ok(infeasible(false));
    }
    let coarse_warning = lattice_best.is_none();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut stream = RngStream::derive(0x5eed, crate::prob::stream_tag::ORACLE, inst.dim() as u64);
    let sup_value = sup;
    for _ in 0..RANDOM_STARTS {
        let raw: Vec<f64> = (0..inst.dim()).map(|_| -stream.unit().max(1e-300).ln()).collect();
        let total: f64 = raw.iter().sum();
        let random: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let c = inst.constraint(&random);
        // concavity of the constraint: mixing toward the sup point by θ
        // lifts it to at least (1-θ) c + θ sup
        let theta = if c >= t {
            0.0
        } else {
            ((t - c) / (sup_value - c)).min(1.0)
        };
        starts.push(
            random
                .iter()
                .zip(&sup_point)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect(),
        );
    }
    for &rho in &WARM_SLOPES {
        let w: Vec<f64> = (0..inst.dim())
            .map(|k| inst.qp[k] * (rho * inst.log_phi[k]).exp())
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 && total.is_finite() {
            starts.push(w.iter().map(|v| v / total).collect());
        }
    }
    if let Some((_, u)) = &lattice_best {
        starts.push(u.clone());
    }
    starts.push(inst.qp.clone());

    let mut best: Option<(f64, Vec<f64>)> = lattice_best.clone();
    for start in &starts {
        let u = solve_from(&inst, start);
        if inst.constraint(&u) >= t - 1e-9 {
            let d = inst.divergence(&u);
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, u));
            }
        }
    }
    // polish the winner
    if let Some((_, u)) = best.clone() {
        let u = solve_from(&inst, &u);
        if inst.constraint(&u) >= t - 1e-9 {
            let d = inst.divergence(&u);
            if d < best.as_ref().unwrap().0 {
                best = Some((d, u));
            }
        }
    }
    match best {
        Some((value, u)) => Ok(BruteForceResult {
            value: value.max(0.0),
            feasible: true,
            coarse_warning,
            minimizer: Some(inst.to_joint(&u)?),
        }),
        None => Ok(infeasible(coarse_warning)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::bsc;
    use crate::nts::init_phi_from_channel;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.9, 0.8, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12 && p[2] == 0.0);
        assert_eq!(lattice_size(4, 3), 20);
        let mut count = 0;
        scan_lattice(4, 3, |_| count += 1);
        assert_eq!(count, 20);
    }

    #[test]
    fn very_negative_threshold_gives_zero() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::new(vec![0.4, 0.6]).unwrap();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let r = brute_force_update_exponent(-10.0, &q, &phi, &p, 10).unwrap();
        assert!(r.feasible);
        assert!(r.value < 1e-9, "{}", r.value);
    }

    #[test]
    fn ignorant_auxiliary_is_infeasible() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::new(vec![0.3, 0.7]).unwrap();
        let phi = StochasticMatrix::new(vec![q.probs().to_vec(); 2], Orientation::XGivenY).unwrap();
        let r = brute_force_update_exponent(0.1, &q, &phi, &p, 10).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn golden_instance_and_coarse_flag() {
        let p = bsc(0.1).unwrap();
        let q = Distribution::uniform(2).unwrap();
        let phi = init_phi_from_channel(&q, &p).unwrap();
        let r = brute_force_update_exponent(0.45, &q, &phi, &p, 20).unwrap();
        assert!((r.value - 0.008788793008502787).abs() < 1e-6, "{}", r.value);
        assert!(!r.coarse_warning);
        // feasible set is a thin sliver near the corner at this threshold
        let r = brute_force_update_exponent(0.55, &q, &phi, &p, 3).unwrap();
        assert!(r.feasible);
        assert!((r.value - 0.05622531343473158).abs() < 1e-6, "{}", r.value);
        assert!(r.coarse_warning);
    }
}
