//! Accepted joint types concentrate on the minimizer U* of the update
//! exponent, and the acceptance rate decays like e^{-nÊ}.

use channel_nts::baselines::bsc;
use channel_nts::nts::SystemState;
use channel_nts::prob::Distribution;
use channel_nts::sim::{tune_threshold, verify_type_concentration, ConcentrationReport, DecoderMode, SimConfig};

pub fn run_example() -> anyhow::Result<ConcentrationReport> {
    let p = bsc(0.1)?;
    let state = SystemState::from_channel(Distribution::uniform(2)?, &p)?;
    let n = 400;
    let t = tune_threshold(&state, &p, n, 2.0)?;
    let config = SimConfig {
        n,
        rate: 0.0,
        t,
        decoder_mode: DecoderMode::Genie,
        seed: 5,
        blocks: 0,
    };
    let r = verify_type_concentration(&state, &config, &p, 2000)?;
    println!("t = {t:.6}, Ê = {:.5}", r.e_hat);
    println!(
        "accepted {} of {} blocks (rate {:.4})",
        r.accepted, r.blocks_run, r.acceptance_rate
    );
    println!("mean accepted type {:?}", r.mean_accepted_type.probs());
    println!("U*                 {:?}", r.u_star.probs());
    println!("L1 distance {:.4}", r.l1_to_u_star);
    Ok(r)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
