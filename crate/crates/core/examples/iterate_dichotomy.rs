//! The deterministic iteration converges for T < C and stalls for T > C.
//! A stalled run satisfies the Arimoto fixed-point condition.

use channel_nts::baselines::{blahut_arimoto_capacity, bsc, DEFAULT_CAPACITY_TOL};
use channel_nts::nts::{
    check_arimoto_fixed_point, nts_run, stall_level_identity, tail_mean_rho, RunOptions, RunStatus, StallIdentity,
    SystemState,
};
use channel_nts::prob::Distribution;

pub fn run_example() -> anyhow::Result<Vec<(f64, RunStatus, f64)>> {
    let p = bsc(0.1)?;
    let c = blahut_arimoto_capacity(&p, DEFAULT_CAPACITY_TOL)?.c;
    // start away from the capacity-achieving input so the T < C runs move
    let state = SystemState::from_channel(Distribution::new(vec![0.2, 0.8])?, &p)?;
    let mut out = Vec::new();
    for margin in [-0.05, -0.02, 0.02, 0.05] {
        let t = c + margin;
        let run = nts_run(&state, t, &p, &RunOptions::default())?;
        println!(
            "T = C{margin:+.2}: {:?} after {} iterations, Ê = {:.3e}, Q = {:?}",
            run.status,
            run.trace.len() - 1,
            run.final_e_hat,
            run.final_state.q.probs()
        );
        if run.status == RunStatus::Stalled {
            let rho = tail_mean_rho(&run.trace, run.stall_window);
            let fp = check_arimoto_fixed_point(&run.final_state.q, rho, &p)?;
            if let StallIdentity::Report { predicted, gap, .. } = stall_level_identity(&run, &p)? {
                println!(
                    "    limit slope {rho:.4}, predicted level {predicted:.6e}, gap {gap:.1e}, fixed-point spread {:.1e}",
                    fp.max_deviation / fp.constant
                );
            }
        }
        out.push((t, run.status, run.final_e_hat));
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
