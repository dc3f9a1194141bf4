//! Block-level Monte-Carlo simulation of the one-bit feedback protocol.
//!
//! Every random draw comes from an [`RngStream`] addressed by the session
//! seed, a purpose tag and block or codebook indices, so any block can be
//! replayed alone and a session is a pure function of its inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{error_exponent, threshold_t0, update_exponent, ExponentOptions};
use crate::nts::SystemState;
use crate::prob::{
    conditional_x_given_y, joint_type, mutual_information, stream_tag, Distribution, EmpiricalType, JointDistribution,
    Orientation, RngStream, Sampler, StochasticMatrix, Symbol,
};

/// Largest codebook the ML decoder will enumerate.
pub const MAX_ML_CODEBOOK: u64 = 1 << 20;

/// Acceptance rates below this are too rare to sample.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    /// Maximum-likelihood search over the full codebook.
    Ml,
    /// The decoder is told the transmitted codeword.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// Code rate in nats per symbol.
    pub rate: f64,
    /// Feedback threshold in nats.
    pub t: f64,
    pub decoder_mode: DecoderMode,
    pub seed: u64,
    pub blocks: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("blocklength n must be at least 1".into()));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::Config(format!(
                "rate {} must be finite and nonnegative",
                self.rate
            )));
        }
        if self.t.is_nan() {
            return Err(Error::Config("threshold t is NaN".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::Config(format!("blocklength {} too large", self.n)));
        }
        if self.decoder_mode == DecoderMode::Ml {
            let m = codebook_size_f64(self.n, self.rate);
            if m > MAX_ML_CODEBOOK as f64 {
                return Err(Error::Config(format!(
                    "ML codebook needs ceil(e^(nR)) = ceil(e^{}) codewords, above the limit 2^20",
                    self.n as f64 * self.rate
                )));
            }
        }
        Ok(())
    }

    /// `⌈e^{nR}⌉`, saturating at `u64::MAX`.
    pub fn codebook_size(&self) -> u64 {
        let m = codebook_size_f64(self.n, self.rate);
        if m >= u64::MAX as f64 {
            u64::MAX
        } else {
            m as u64
        }
    }
}

fn codebook_size_f64(n: usize, rate: f64) -> f64 {
    (n as f64 * rate).exp().ceil().max(1.0)
}

/// Codeword `m` of codebook `epoch`: `n` symbols i.i.d. from `q`.
pub fn codeword(q: &Distribution, n: usize, seed: u64, epoch: u64, m: u64) -> Vec<Symbol> {
    let mut stream = RngStream::derive_sub(seed, stream_tag::CODEBOOK, epoch, m);
    let mut out = vec![0; n];
    Sampler::new(q).fill(&mut out, &mut stream);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    words: Vec<Vec<Symbol>>,
}

impl Codebook {
    pub fn from_words(words: Vec<Vec<Symbol>>) -> Result<Self> {
        let Some(n) = words.first().map(Vec::len) else {
            return Err(Error::Config("empty codebook".into()));
        };
        if words.iter().any(|w| w.len() != n) {
            return Err(Error::Dimension("codewords differ in length".into()));
        }
        Ok(Self { words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, m: usize) -> &[Symbol] {
        &self.words[m]
    }

    pub fn words(&self) -> &[Vec<Symbol>] {
        &self.words
    }
}

/// Draws the `⌈e^{nR}⌉` codewords of codebook `epoch`.
pub fn generate_codebook(q: &Distribution, n: usize, rate: f64, seed: u64, epoch: u64) -> Result<Codebook> {
    let m = codebook_size_f64(n, rate);
    if m > MAX_ML_CODEBOOK as f64 {
        return Err(Error::Config(format!(
            "codebook of ceil(e^{}) words exceeds the limit 2^20",
            n as f64 * rate
        )));
    }
    Codebook::from_words((0..m as u64).map(|i| codeword(q, n, seed, epoch, i)).collect())
}

/// Passes a codeword through the channel, one row draw per symbol.
pub fn transmit(x: &[Symbol], p: &StochasticMatrix, stream: &mut RngStream) -> Result<Vec<Symbol>> {
    p.expect(Orientation::YGivenX, "channel")?;
    let rows: Vec<Sampler> = p.rows().iter().map(Sampler::new).collect();
    x.iter()
        .map(|&s| {
            rows.get(s as usize)
                .map(|r| r.draw(stream))
                .ok_or_else(|| Error::Dimension(format!("input symbol {s} outside the channel alphabet")))
        })
        .collect()
}

/// Maximum-likelihood decision; `None` when every codeword has zero likelihood.
///
/// Ties go to the smallest message index.
pub fn ml_decode(codebook: &Codebook, y: &[Symbol], p: &StochasticMatrix) -> Result<Option<(usize, f64)>> {
    p.expect(Orientation::YGivenX, "channel")?;
    if codebook.is_empty() {
        return Err(Error::Config("empty codebook".into()));
    }
    let ny = p.num_outcomes();
    let log_p: Vec<f64> = p
        .rows()
        .iter()
        .flat_map(|r| {
            r.probs()
                .iter()
                .map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (m, word) in codebook.words().iter().enumerate() {
        if word.len() != y.len() {
            return Err(Error::Dimension("codeword and output block differ in length".into()));
        }
        let mut ll = 0.0;
        for (&xs, &ys) in word.iter().zip(y) {
            ll += log_p[xs as usize * ny + ys as usize];
            if ll == f64::NEG_INFINITY {
                break;
            }
        }
        if ll > f64::NEG_INFINITY && best.is_none_or(|(_, b)| ll > b) {
            best = Some((m, ll));
        }
    }
    Ok(best)
}

/// `Σ r̂(x,y) log(Φ(x|y)/r̂(x))`, or `-∞` if `r̂` charges a cell where `Φ` is zero.
pub fn feedback_statistic(r_hat: &EmpiricalType, phi: &StochasticMatrix) -> Result<f64> {
    phi.expect(Orientation::XGivenY, "auxiliary conditional")?;
    let (nx, ny) = (r_hat.nx(), r_hat.ny());
    if phi.num_conditions() != ny || phi.num_outcomes() != nx {
        return Err(Error::Dimension("Φ does not match the type".into()));
    }
    Ok(statistic_from_counts(r_hat.counts(), r_hat.n(), nx, ny, phi))
}

fn statistic_from_counts(counts: &[u64], n: u64, nx: usize, ny: usize, phi: &StochasticMatrix) -> f64 {
    let n = n as f64;
    let mut total = 0.0;
    for x in 0..nx {
        let row = &counts[x * ny..(x + 1) * ny];
        let cx: u64 = row.iter().sum();
        if cx == 0 {
            continue;
        }
        let log_rx = (cx as f64 / n).ln();
        for (y, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let f = phi.entry(y, x);
            if f <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += c as f64 / n * (f.ln() - log_rx);
        }
    }
    total
}

/// The feedback bit: true iff the statistic reaches `t`.
pub fn feedback_bit(r_hat: &EmpiricalType, phi: &StochasticMatrix, t: f64) -> Result<bool> {
    Ok(feedback_statistic(r_hat, phi)? >= t)
}

/// State after an accepted block: `Q = r̂(x)`, `Φ` columns from `r̂(x|y)` where `r̂(y) > 0`.
pub fn apply_type_update(state: &SystemState, r_hat: &EmpiricalType) -> Result<SystemState> {
    let joint = r_hat.to_joint();
    let cond = conditional_x_given_y(&joint);
    let mut phi = state.phi.clone();
    for (y, defined) in cond.defined.iter().enumerate() {
        if *defined {
            phi.replace_row(y, cond.matrix.row(y).clone());
        }
    }
    Ok(SystemState {
        q: joint.x_marginal(),
        phi,
        l: state.l + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResult {
    pub block_index: usize,
    pub sent_msg: u64,
    /// Decoder output; `None` on a decoding failure.
    pub decoded_msg: Option<u64>,
    /// The decoded codeword equals the transmitted one.
    pub decode_correct: bool,
    pub r_hat: Option<EmpiricalType>,
    pub statistic: f64,
    pub feedback: bool,
    pub state_updated: bool,
}

/// Shared randomness of one block, resolved from the session seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockStreams {
    pub seed: u64,
    pub block: u64,
    /// Number of codebook changes so far.
    pub epoch: u64,
}

/// Sends one message and applies the feedback rule.
///
/// `codebook` must be the epoch's codebook in ML mode; genie mode draws only
/// the transmitted codeword.
pub fn simulate_block(
    state: &SystemState,
    config: &SimConfig,
    p: &StochasticMatrix,
    streams: BlockStreams,
    codebook: Option<&Codebook>,
) -> Result<(SystemState, BlockResult)> {
    let (nx, ny) = (p.num_conditions(), p.num_outcomes());
    let m_total = config.codebook_size();
    let sent = RngStream::derive(streams.seed, stream_tag::MESSAGE, streams.block).below(m_total);
    let x = match (config.decoder_mode, codebook) {
        (DecoderMode::Ml, Some(cb)) => cb.word(sent as usize).to_vec(),
        (DecoderMode::Ml, None) => return Err(Error::Config("ML mode needs a codebook".into())),
        (DecoderMode::Genie, _) => codeword(&state.q, config.n, streams.seed, streams.epoch, sent),
    };
    let mut ch = RngStream::derive(streams.seed, stream_tag::CHANNEL, streams.block);
    let y = transmit(&x, p, &mut ch)?;
    let (decoded, x_hat) = match (config.decoder_mode, codebook) {
        (DecoderMode::Ml, Some(cb)) => match ml_decode(cb, &y, p)? {
            Some((m, _)) => (Some(m as u64), Some(cb.word(m))),
            None => (None, None),
        },
        _ => (Some(sent), Some(x.as_slice())),
    };
    let Some(x_hat) = x_hat else {
        let result = BlockResult {
            block_index: streams.block as usize,
            sent_msg: sent,
            decoded_msg: None,
            decode_correct: false,
            r_hat: None,
            statistic: f64::NEG_INFINITY,
            feedback: false,
            state_updated: false,
        };
        return Ok((state.clone(), result));
    };
    let r_hat = joint_type(x_hat, &y, nx, ny)?;
    let statistic = feedback_statistic(&r_hat, &state.phi)?;
    let feedback = statistic >= config.t;
    let next = if feedback {
        apply_type_update(state, &r_hat)?
    } else {
        state.clone()
    };
    let result = BlockResult {
        block_index: streams.block as usize,
        sent_msg: sent,
        decoded_msg: decoded,
        decode_correct: x_hat == x.as_slice(),
        r_hat: Some(r_hat),
        statistic,
        feedback,
        state_updated: feedback,
    };
    Ok((next, result))
}

/// Piecewise-constant channel over block indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSchedule {
    segments: Vec<(usize, StochasticMatrix)>,
}

impl DriftSchedule {
    pub fn new(segments: Vec<(usize, StochasticMatrix)>) -> Result<Self> {
        let Some((first, p0)) = segments.first() else {
            return Err(Error::Config("drift schedule has no segments".into()));
        };
        if *first != 0 {
            return Err(Error::Config(format!("first segment starts at block {first}, not 0")));
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config(format!(
                    "segment {}: start block {} is not after {}",
                    i + 1,
                    w[1].0,
                    w[0].0
                )));
            }
        }
        for (i, (_, p)) in segments.iter().enumerate() {
            p.expect(Orientation::YGivenX, "channel")?;
            if p.num_conditions() != p0.num_conditions() || p.num_outcomes() != p0.num_outcomes() {
                return Err(Error::Dimension(format!("segment {i}: channel alphabets change")));
            }
        }
        Ok(Self { segments })
    }

    pub fn constant(p: StochasticMatrix) -> Result<Self> {
        Self::new(vec![(0, p)])
    }

    pub fn segments(&self) -> &[(usize, StochasticMatrix)] {
        &self.segments
    }

    /// Index of the segment active at `block`.
    pub fn segment_at(&self, block: usize) -> usize {
        self.segments.partition_point(|(start, _)| *start <= block) - 1
    }

    pub fn channel_at(&self, block: usize) -> &StochasticMatrix {
        &self.segments[self.segment_at(block)].1
    }
}

/// Per-block trace row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionBlock {
    pub segment: usize,
    /// Codebook epoch the block was sent with.
    pub epoch: u64,
    #[serde(flatten)]
    pub result: BlockResult,
    /// Input distribution after the block.
    pub q: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSummary {
    pub segment: usize,
    pub start_block: usize,
    pub end_block: usize,
    pub updates: usize,
    pub update_frequency: f64,
    pub decode_errors: usize,
    /// Average of `r̂` over blocks with feedback 1.
    pub mean_accepted_type: Option<JointDistribution>,
    /// `Ê(T, Q, Φ)` at the segment end; `None` when infinite.
    pub e_hat: Option<f64>,
    /// `E_r(R, Q)` at the segment end.
    pub e_r: f64,
    /// Smallest `E_r(R, Q)` over the second half of the segment.
    pub min_e_r_settled: f64,
    pub mutual_information: f64,
    pub q: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionTrace {
    pub blocks: Vec<SessionBlock>,
    pub segments: Vec<SegmentSummary>,
    pub final_state: SystemState,
}

struct SegmentAccumulator {
    start: usize,
    updates: usize,
    decode_errors: usize,
    type_sum: Vec<f64>,
    min_e_r_settled: f64,
}

/// Runs `config.blocks` blocks, switching channels per `drift`.
pub fn run_session(initial: &SystemState, config: &SimConfig, drift: &DriftSchedule) -> Result<SessionTrace> {
    config.validate()?;
    let p0 = &drift.segments()[0].1;
    if p0.num_conditions() != initial.q.len() || p0.num_outcomes() != initial.phi.num_conditions() {
        return Err(Error::Dimension("initial state does not match the channel".into()));
    }
    let (nx, ny) = (p0.num_conditions(), p0.num_outcomes());
    let mut state = initial.clone();
    let mut epoch = 0u64;
    let mut codebook: Option<Codebook> = None;
    let mut blocks = Vec::with_capacity(config.blocks);
    let mut segments = Vec::new();
    let mut acc: Option<SegmentAccumulator> = None;
    let segment_count = drift.segments().len();
    let segment_end = |s: usize| -> usize {
        if s + 1 < segment_count {
            drift.segments()[s + 1].0.min(config.blocks)
        } else {
            config.blocks
        }
    };
    let e_r_of = |q: &Distribution, p: &StochasticMatrix| error_exponent(config.rate, q, p).map(|r| r.value);

    for b in 0..config.blocks {
        let seg = drift.segment_at(b);
        let p = drift.channel_at(b);
        let a = acc.get_or_insert_with(|| SegmentAccumulator {
            start: b,
            updates: 0,
            decode_errors: 0,
            type_sum: vec![0.0; nx * ny],
            min_e_r_settled: f64::INFINITY,
        });
        if config.decoder_mode == DecoderMode::Ml && codebook.is_none() {
            codebook = Some(generate_codebook(&state.q, config.n, config.rate, config.seed, epoch)?);
        }
        let streams = BlockStreams {
            seed: config.seed,
            block: b as u64,
            epoch,
        };
        let (next, result) = simulate_block(&state, config, p, streams, codebook.as_ref())?;
        let end = segment_end(seg);
        if !result.decode_correct {
            a.decode_errors += 1;
        }
        if result.state_updated {
            a.updates += 1;
            if let Some(r) = &result.r_hat {
                for (s, v) in a.type_sum.iter_mut().zip(r.to_joint().probs()) {
                    *s += v;
                }
            }
            epoch += 1;
            codebook = None;
        }
        state = next;
        let settled_from = a.start + (end - a.start) / 2;
        if b >= settled_from && (result.state_updated || b == settled_from) {
            a.min_e_r_settled = a.min_e_r_settled.min(e_r_of(&state.q, p)?);
        }
        blocks.push(SessionBlock {
            segment: seg,
            epoch: streams.epoch,
            q: state.q.clone(),
            result,
        });
        if b + 1 == end {
            let a = acc.take().expect("accumulator present within a segment");
            let sol = update_exponent(config.t, &state.q, &state.phi, p, &ExponentOptions::default())?;
            let len = end - a.start;
            segments.push(SegmentSummary {
                segment: seg,
                start_block: a.start,
                end_block: end,
                updates: a.updates,
                update_frequency: a.updates as f64 / len as f64,
                decode_errors: a.decode_errors,
                mean_accepted_type: if a.updates > 0 {
                    Some(JointDistribution::from_weights(nx, ny, &a.type_sum)?)
                } else {
                    None
                },
                e_hat: sol.feasible.then_some(sol.value),
                e_r: e_r_of(&state.q, p)?,
                min_e_r_settled: a.min_e_r_settled,
                mutual_information: mutual_information(&state.q, p)?,
                q: state.q.clone(),
            });
        }
    }
    Ok(SessionTrace {
        blocks,
        segments,
        final_state: state,
    })
}

/// Outcome of a type-concentration experiment at one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub t: f64,
    pub blocks_run: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub mean_accepted_type: JointDistribution,
    pub u_star: JointDistribution,
    pub l1_to_u_star: f64,
    pub e_hat: f64,
    /// `-log(acceptance rate) / n`.
    pub empirical_exponent: f64,
}

const CONCENTRATION_CHUNK: u64 = 4096;

/// Draws genie-mode blocks from a frozen state and averages the accepted types.
///
/// Blocks are processed in fixed chunks and every block has its own streams,
/// so the result does not depend on the thread count. All blocks of the
/// chunk that reaches `num_accepted_target` are kept.
pub fn verify_type_concentration(
    state: &SystemState,
    config: &SimConfig,
    p: &StochasticMatrix,
    num_accepted_target: u64,
) -> Result<ConcentrationReport> {
    let n = config.n;
    if n == 0 || num_accepted_target == 0 {
        return Err(Error::Config("blocklength and accepted target must be positive".into()));
    }
    let sol = update_exponent(config.t, &state.q, &state.phi, p, &ExponentOptions::default())?;
    if !sol.feasible {
        return Err(Error::ExperimentInfeasible(format!(
            "threshold {} is unreachable: the update exponent is infinite",
            config.t
        )));
    }
    let predicted = (-(n as f64) * sol.value).exp();
    if predicted < MIN_ACCEPTANCE_RATE {
        return Err(Error::ExperimentInfeasible(format!(
            "predicted acceptance rate e^(-nÊ) = {predicted:.3e} is below {MIN_ACCEPTANCE_RATE:e}; lower n or t"
        )));
    }
    let (nx, ny) = (p.num_conditions(), p.num_outcomes());
    let input = Sampler::new(&state.q);
    let rows: Vec<Sampler> = p.rows().iter().map(Sampler::new).collect();
    let max_blocks = (num_accepted_target as f64 / MIN_ACCEPTANCE_RATE).ceil() as u64;
    let mut accepted = 0u64;
    let mut sums = vec![0u64; nx * ny];
    let mut blocks_run = 0u64;
    while accepted < num_accepted_target {
        if blocks_run >= max_blocks {
            return Err(Error::ExperimentInfeasible(format!(
                "{accepted} of {num_accepted_target} blocks accepted after {blocks_run}; lower n or t"
            )));
        }
        let range = blocks_run..blocks_run + CONCENTRATION_CHUNK;
        let (acc, chunk_sums) = range
            .into_par_iter()
            .map(|b| {
                let mut xs = RngStream::derive(config.seed, stream_tag::CONCENTRATION_INPUT, b);
                let mut ys = RngStream::derive(config.seed, stream_tag::CONCENTRATION_CHANNEL, b);
                let mut counts = vec![0u64; nx * ny];
                for _ in 0..n {
                    let x = input.draw(&mut xs) as usize;
                    let y = rows[x].draw(&mut ys) as usize;
                    counts[x * ny + y] += 1;
                }
                if statistic_from_counts(&counts, n as u64, nx, ny, &state.phi) >= config.t {
                    (1u64, counts)
                } else {
                    (0u64, vec![0u64; nx * ny])
                }
            })
            .reduce(
                || (0u64, vec![0u64; nx * ny]),
                |(a1, mut s1), (a2, s2)| {
                    for (u, v) in s1.iter_mut().zip(&s2) {
                        *u += v;
                    }
                    (a1 + a2, s1)
                },
            );
        accepted += acc;
        for (u, v) in sums.iter_mut().zip(&chunk_sums) {
            *u += v;
        }
        blocks_run += CONCENTRATION_CHUNK;
    }
    let weights: Vec<f64> = sums.iter().map(|&c| c as f64).collect();
    let mean = JointDistribution::from_weights(nx, ny, &weights)?;
    let rate = accepted as f64 / blocks_run as f64;
    Ok(ConcentrationReport {
        n,
        t: config.t,
        blocks_run,
        accepted,
        acceptance_rate: rate,
        l1_to_u_star: mean.l1_distance(&sol.minimizer)?,
        mean_accepted_type: mean,
        u_star: sol.minimizer,
        e_hat: sol.value,
        empirical_exponent: -rate.ln() / n as f64,
    })
}

/// Threshold in `(T₀, T₀ + 0.2]` at which `n·Ê` equals `target` (clamped to the top).
pub fn tune_threshold(state: &SystemState, p: &StochasticMatrix, n: usize, target: f64) -> Result<f64> {
    let t0 = threshold_t0(&state.q, &state.phi, p)?;
    if !t0.is_finite() {
        return Err(Error::ExperimentInfeasible("T₀ is -∞ for this state".into()));
    }
    let opts = ExponentOptions::default();
    let scaled = |t: f64| -> Result<f64> {
        let s = update_exponent(t, &state.q, &state.phi, p, &opts)?;
        Ok(if s.feasible { n as f64 * s.value } else { f64::INFINITY })
    };
    let (mut lo, mut hi) = (t0, t0 + 0.2);
    if scaled(hi)? <= target {
        return Ok(hi);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if scaled(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares slope of `-log(rate)` against `n`.
pub fn fit_acceptance_exponent(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Config("need at least two blocklengths".into()));
    }
    if points.iter().any(|(_, r)| r.is_nan() || *r <= 0.0) {
        return Err(Error::Numeric("acceptance rate must be positive".into()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|(n, _)| *n as f64).sum::<f64>() / k;
    let my = points.iter().map(|(_, r)| -r.ln()).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(n, r)| (*n as f64 - mx) * (-r.ln() - my)).sum();
    let sxx: f64 = points.iter().map(|(n, _)| (*n as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("blocklengths must differ".into()));
    }
    Ok(sxy / sxx)
}
