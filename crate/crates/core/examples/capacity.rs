//! Capacity of the closed-form channels by alternating maximization.

use channel_nts::baselines::{bec, blahut_arimoto_capacity, bsc, identity, z_channel, DEFAULT_CAPACITY_TOL};
use channel_nts::prob::StochasticMatrix;

pub fn run_example() -> anyhow::Result<Vec<(String, f64)>> {
    let channels: Vec<(String, StochasticMatrix)> = vec![
        ("bsc(0.1)".into(), bsc(0.1)?),
        ("bec(0.25)".into(), bec(0.25)?),
        ("z_channel(0.3)".into(), z_channel(0.3)?),
        ("identity(4)".into(), identity(4)?),
    ];
    let mut out = Vec::new();
    for (name, p) in channels {
        let r = blahut_arimoto_capacity(&p, DEFAULT_CAPACITY_TOL)?;
        println!(
            "{name:<16} C = {:.6} nats  Q* = {:?}  ({} iterations)",
            r.c,
            r.q_star.probs(),
            r.iterations
        );
        out.push((name, r.c));
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
