//! A feedback session on a binary symmetric channel whose crossover drifts
//! from 0.05 to 0.12. The input adapts and the random-coding exponent at the
//! working rate stays positive.

use channel_nts::baselines::bsc;
use channel_nts::nts::SystemState;
use channel_nts::prob::Distribution;
use channel_nts::sim::{run_session, DecoderMode, DriftSchedule, SegmentSummary, SimConfig};

pub fn run_example() -> anyhow::Result<Vec<SegmentSummary>> {
    let crossovers = [0.05, 0.0675, 0.085, 0.1025, 0.12];
    let segments = crossovers
        .iter()
        .enumerate()
        .map(|(i, &q)| Ok((200 * i, bsc(q)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let drift = DriftSchedule::new(segments)?;
    let initial = SystemState::from_channel(Distribution::uniform(2)?, &bsc(0.05)?)?;
    let config = SimConfig {
        n: 1000,
        rate: 0.25,
        t: 0.30,
        decoder_mode: DecoderMode::Genie,
        seed: 7,
        blocks: 1000,
    };
    let trace = run_session(&initial, &config, &drift)?;
    for (s, q) in trace.segments.iter().zip(crossovers) {
        println!(
            "p = {q:<6} updates {:>3}  I = {:.4}  E_r(R) = {:.4}  settled min {:.4}  Q = [{:.4}, {:.4}]",
            s.updates,
            s.mutual_information,
            s.e_r,
            s.min_e_r_settled,
            s.q.get(0),
            s.q.get(1)
        );
    }
    Ok(trace.segments)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
