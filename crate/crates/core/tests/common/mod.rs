//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use channel_nts::prob::{Distribution, Orientation, RngStream, StochasticMatrix};

/// Random probability vector with entries bounded below by `floor`.
pub fn random_dist(s: &mut RngStream, k: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -s.unit().max(1e-300).ln() + floor).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

pub fn random_matrix(s: &mut RngStream, rows: usize, cols: usize, orient: Orientation) -> StochasticMatrix {
    StochasticMatrix::new((0..rows).map(|_| random_dist(s, cols, 0.02)).collect(), orient).unwrap()
}

/// A random `(Q, Φ, P)` triple.
pub fn random_instance(seed: u64, nx: usize, ny: usize) -> (Distribution, StochasticMatrix, StochasticMatrix) {
    let mut s = RngStream::derive(seed, 900, (nx * 16 + ny) as u64);
    let q = Distribution::new(random_dist(&mut s, nx, 0.05)).unwrap();
    let phi = random_matrix(&mut s, ny, nx, Orientation::XGivenY);
    let p = random_matrix(&mut s, nx, ny, Orientation::YGivenX);
    (q, phi, p)
}

/// Pattern search over `[0,1]^d` from `start` along the axes and the pairwise
/// diagonals, shrinking the step to `tol`. The diagonals let it follow ridges
/// such as the kink of `[·]^+`.
pub fn compass_min(f: impl Fn(&[f64]) -> f64, start: Vec<f64>, step: f64, tol: f64) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [-1.0, 1.0] {
            let mut v = vec![0.0; d];
            v[i] = s;
            dirs.push(v);
        }
        for j in i + 1..d {
            for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                let mut v = vec![0.0; d];
                v[i] = si;
                v[j] = sj;
                dirs.push(v);
            }
        }
    }
    let mut x = start;
    let mut fx = f(&x);
    let mut h = step;
    while h > tol {
        let mut improved = false;
        for dir in &dirs {
            let y: Vec<f64> = x.iter().zip(dir).map(|(a, b)| (a + b * h).clamp(0.0, 1.0)).collect();
            let fy = f(&y);
            if fy < fx {
                x = y;
                fx = fy;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// Nelder-Mead on an unconstrained objective, started from a simplex of
/// side `step` around `start`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=d)
        .map(|i| {
            let mut x = start.to_vec();
            if i > 0 {
                x[i - 1] += step;
            }
            let v = f(&x);
            (x, v)
        })
        .collect();
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[d].1 - simplex[0].1 < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|p| p.0[k]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = along(if fr < simplex[d].1 { 0.5 } else { -0.5 });
            let fc = f(&xc);
            if fc < fr.min(simplex[d].1) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = p.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Grid scan of `[0,1]^d` at `res` points per axis followed by compass refinement.
pub fn grid_then_compass(f: impl Fn(&[f64]) -> f64, d: usize, res: usize) -> (Vec<f64>, f64) {
    let total = res.pow(d as u32);
    let mut scored: Vec<(Vec<f64>, f64)> = (0..total)
        .map(|idx| {
            let mut k = idx;
            let point: Vec<f64> = (0..d)
                .map(|_| {
                    let v = (k % res) as f64 / (res - 1) as f64;
                    k /= res;
                    v
                })
                .collect();
            let v = f(&point);
            (point, v)
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    // Several starts: the objectives have kinks where pattern search can stall.
    scored
        .into_iter()
        .take(8)
        .map(|(start, _)| compass_min(&f, start, 1.0 / res as f64, 1e-12))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn xlogy_ratio(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        a * (a / b).ln()
    }
}

/// `E_r(R, Q)` on a 2x2 channel in its primal form
/// `min_U D(U || Q∘P) + [D(U || Q × U_y) - R]^+` over all joints `U`.
pub fn primal_error_exponent(r: f64, q: &Distribution, p: &StochasticMatrix) -> f64 {
    assert_eq!((q.len(), p.num_outcomes()), (2, 2));
    let objective = |u: [f64; 4]| {
        let uy = [u[0] + u[2], u[1] + u[3]];
        let mut div = 0.0;
        let mut mix = 0.0;
        for (k, &cell) in u.iter().enumerate() {
            let (x, y) = (k / 2, k % 2);
            div += xlogy_ratio(cell, q.get(x) * p.entry(x, y));
            mix += xlogy_ratio(cell, q.get(x) * uy[y]);
        }
        div + (mix - r).max(0.0)
    };
    // Softmax coordinates relative to the last cell; the kink of [·]^+ traps
    // pattern search, so each start is polished with Nelder-Mead.
    let softmax = |z: &[f64]| {
        let w = [z[0].exp(), z[1].exp(), z[2].exp(), 1.0];
        let s: f64 = w.iter().sum();
        [w[0] / s, w[1] / s, w[2] / s, w[3] / s]
    };
    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    let res = 21;
    for a in 0..res {
        for b in 0..res {
            for c in 0..res {
                let z: Vec<f64> = [a, b, c]
                    .iter()
                    .map(|&k| -8.0 + 16.0 * k as f64 / (res - 1) as f64)
                    .collect();
                let v = objective(softmax(&z));
                starts.push((z, v));
            }
        }
    }
    starts.sort_by(|a, b| a.1.total_cmp(&b.1));
    starts
        .iter()
        .take(10)
        .map(|(z, _)| nelder_mead(|z| objective(softmax(z)), z, 0.5, 20_000).1)
        .fold(f64::INFINITY, f64::min)
}

/// Joint `U` on a 2x2 alphabet from three coordinates in `[0,1]` (stick breaking).
pub fn joint_2x2(c: &[f64]) -> [f64; 4] {
    let a = c[0];
    let b = (1.0 - a) * c[1];
    let d = (1.0 - a - b) * c[2];
    [a, b, d, (1.0 - a - b - d).max(0.0)]
}

/// Minimizer of `D(U||Q∘P) - ρ Σ U log(Φ(x|y)/U(x))` over 2x2 joints by grid and compass search.
pub fn lagrangian_argmin_2x2(rho: f64, q: &Distribution, phi: &StochasticMatrix, p: &StochasticMatrix) -> [f64; 4] {
    let qp: Vec<f64> = (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .map(|(x, y)| q.get(x) * p.entry(x, y))
        .collect();
    let f = |c: &[f64]| {
        let u = joint_2x2(c);
        let ux = [u[0] + u[1], u[2] + u[3]];
        let mut v = 0.0;
        for k in 0..4 {
            let (x, y) = (k / 2, k % 2);
            if u[k] > 0.0 {
                v += u[k] * (u[k] / qp[k]).ln() - rho * u[k] * (phi.entry(y, x) / ux[x]).ln();
            }
        }
        v
    };
    joint_2x2(&grid_then_compass(f, 3, 41).0)
}
