//! The update exponent Ê(T, Q, Φ) from its one-dimensional dual, checked
//! against direct search on the joint simplex.

use channel_nts::baselines::bsc;
use channel_nts::exponents::{brute_force_update_exponent, threshold_t0, update_exponent, ExponentOptions};
use channel_nts::nts::init_phi_from_channel;
use channel_nts::prob::Distribution;

pub fn run_example() -> anyhow::Result<Vec<(f64, f64, f64)>> {
    let p = bsc(0.1)?;
    let q = Distribution::new(vec![0.3, 0.7])?;
    let phi = init_phi_from_channel(&q, &p)?;
    let t0 = threshold_t0(&q, &phi, &p)?;
    println!("T0 = I(Q∘P) = {t0:.6}");
    let mut rows = Vec::new();
    for lift in [0.0, 0.02, 0.05, 0.1] {
        let t = t0 + lift;
        let dual = update_exponent(t, &q, &phi, &p, &ExponentOptions::default())?;
        let brute = brute_force_update_exponent(t, &q, &phi, &p, 20)?;
        println!(
            "T = {t:.4}  dual {:.8}  (rho* {:.4})  direct {:.8}  U* = {:?}",
            dual.value,
            dual.rho_star,
            brute.value,
            dual.minimizer.probs()
        );
        rows.push((t, dual.value, brute.value));
    }
    Ok(rows)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
