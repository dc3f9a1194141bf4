//! Finite-alphabet probability primitives.
//!
//! Distributions, stochastic matrices and joint distributions are validated
//! once at construction; every operation afterwards assumes validity. All
//! logarithms are natural, so divergences and informations are in nats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability below this value is treated as a structural zero.
pub const ZERO_THRESHOLD: f64 = 1e-15;

/// Allowed deviation of a distribution's total mass from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Largest alphabet supported by the symbol-level routines.
pub const MAX_ALPHABET: usize = 256;

/// A channel or codebook symbol, indexing into its alphabet.
pub type Symbol = u8;

/// A finite alphabet with optional symbol names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::Dimension(format!(
                "alphabet size {size} outside 1..={MAX_ALPHABET}"
            )));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut alphabet = Self::new(labels.len())?;
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Dimension(format!("duplicate symbol label {label:?}")));
            }
        }
        alphabet.labels = Some(labels);
        Ok(alphabet)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Name of symbol `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(labels) => labels[i].clone(),
            None => i.to_string(),
        }
    }
}

fn check_masses(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} is {p}, expected a finite nonnegative value"
            )));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_masses(&probs, "distribution")?;
        if probs.len() > MAX_ALPHABET {
            return Err(Error::Dimension(format!(
                "distribution over {} symbols exceeds {MAX_ALPHABET}",
                probs.len()
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights {weights:?} cannot be normalized"
            )));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Alphabet::new(size)?;
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        Alphabet::new(size)?;
        if at >= size {
            return Err(Error::Dimension(format!("symbol {at} outside alphabet of size {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        Distribution::new(probs).map_err(serde::de::Error::custom)
    }
}

/// Which variable a stochastic matrix conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows indexed by input `x`, entries over outputs `y` (channels).
    YGivenX,
    /// Rows indexed by output `y`, entries over inputs `x` (auxiliary reverse conditionals).
    XGivenY,
}

/// A row-stochastic matrix: one distribution per conditioning symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticMatrix {
    rows: Vec<Distribution>,
    orientation: Orientation,
}

impl StochasticMatrix {
    /// Builds a matrix from raw rows, reporting the first invalid row by index.
    pub fn new(rows: Vec<Vec<f64>>, orientation: Orientation) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("stochastic matrix has no rows".into()));
        }
        let width = rows[0].len();
        let mut checked = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            let row = Distribution::new(row).map_err(|e| match e {
                Error::InvalidDistribution(msg) => Error::InvalidDistribution(format!("row {i}: {msg}")),
                other => other,
            })?;
            checked.push(row);
        }
        Self::from_rows(checked, orientation)
    }

    pub fn from_rows(rows: Vec<Distribution>, orientation: Orientation) -> Result<Self> {
        if rows.is_empty() || rows.len() > MAX_ALPHABET {
            return Err(Error::Dimension(format!(
                "{} rows outside 1..={MAX_ALPHABET}",
                rows.len()
            )));
        }
        let width = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {width}",
                rows[i].len()
            )));
        }
        Ok(Self { rows, orientation })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, cond: usize) -> &Distribution {
        &self.rows[cond]
    }

    /// Number of conditioning symbols (rows).
    pub fn num_conditions(&self) -> usize {
        self.rows.len()
    }

    /// Number of outcome symbols (columns).
    pub fn num_outcomes(&self) -> usize {
        self.rows[0].len()
    }

    /// Probability of `outcome` given `cond`.
    pub fn entry(&self, cond: usize, outcome: usize) -> f64 {
        self.rows[cond].probs[outcome]
    }

    /// Number of channel inputs, whatever the orientation.
    pub fn x_size(&self) -> usize {
        match self.orientation {
            Orientation::YGivenX => self.num_conditions(),
            Orientation::XGivenY => self.num_outcomes(),
        }
    }

    /// Number of channel outputs, whatever the orientation.
    pub fn y_size(&self) -> usize {
        match self.orientation {
            Orientation::YGivenX => self.num_outcomes(),
            Orientation::XGivenY => self.num_conditions(),
        }
    }

    pub(crate) fn replace_row(&mut self, cond: usize, row: Distribution) {
        debug_assert_eq!(row.len(), self.num_outcomes());
        self.rows[cond] = row;
    }

    pub(crate) fn expect(&self, orientation: Orientation, what: &str) -> Result<()> {
        if self.orientation != orientation {
            return Err(Error::Dimension(format!(
                "{what} must be oriented {orientation:?}, got {:?}",
                self.orientation
            )));
        }
        Ok(())
    }
}

/// A probability matrix over `X × Y`, stored row-major by `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    nx: usize,
    ny: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(nx: usize, ny: usize, probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(nx)?;
        Alphabet::new(ny)?;
        if probs.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny} joint distribution",
                probs.len()
            )));
        }
        check_masses(&probs, "joint distribution")?;
        Ok(Self { nx, ny, probs })
    }

    /// Normalizes nonnegative weights into a joint distribution.
    pub fn from_weights(nx: usize, ny: usize, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::DegenerateSupport("joint weights sum to zero".into()));
        }
        Self::new(nx, ny, weights.iter().map(|w| w / total).collect())
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn x_marginal(&self) -> Distribution {
        let probs = self.probs.chunks(self.ny).map(|row| row.iter().sum()).collect();
        Distribution { probs }
    }

    pub fn y_marginal(&self) -> Distribution {
        let mut probs = vec![0.0; self.ny];
        for row in self.probs.chunks(self.ny) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Distribution { probs }
    }

    /// L1 distance between two joint distributions of the same shape.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(Error::Dimension("joint distributions differ in shape".into()));
        }
        Ok(self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum())
    }
}

/// Joint type of two equal-length blocks: integer counts per `(x, y)` cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalType {
    nx: usize,
    ny: usize,
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.ny + y]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The type as a joint distribution, `counts / n`.
    pub fn to_joint(&self) -> JointDistribution {
        let n = self.n as f64;
        JointDistribution {
            nx: self.nx,
            ny: self.ny,
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

/// Anything that is a flat vector of probability masses with a shape.
pub trait ProbabilityMass {
    fn masses(&self) -> &[f64];
    fn shape(&self) -> (usize, usize);
}

impl ProbabilityMass for Distribution {
    fn masses(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> (usize, usize) {
        (self.probs.len(), 1)
    }
}

impl ProbabilityMass for JointDistribution {
    fn masses(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

/// Divergence over raw mass slices; `+inf` when `p` charges a zero of `q`.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    total.max(0.0)
}

/// Information divergence `D(p || q)` in nats.
///
/// Terms with `p = 0` contribute zero; a positive `p` over a zero of `q`
/// makes the divergence `f64::INFINITY`.
pub fn kl_divergence<P: ProbabilityMass>(p: &P, q: &P) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::Dimension(format!(
            "divergence between shapes {:?} and {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(kl_slices(p.masses(), q.masses()))
}

/// The joint distribution `(Q∘P)(x, y) = Q(x) P(y|x)`.
pub fn compose(q: &Distribution, p: &StochasticMatrix) -> Result<JointDistribution> {
    p.expect(Orientation::YGivenX, "channel")?;
    if q.len() != p.num_conditions() {
        return Err(Error::Dimension(format!(
            "input distribution over {} symbols, channel has {} inputs",
            q.len(),
            p.num_conditions()
        )));
    }
    let ny = p.num_outcomes();
    let mut probs = Vec::with_capacity(q.len() * ny);
    for (qx, row) in q.probs.iter().zip(&p.rows) {
        probs.extend(row.probs.iter().map(|pyx| qx * pyx));
    }
    Ok(JointDistribution { nx: q.len(), ny, probs })
}

/// Mutual information `I(Q∘P)` in nats.
pub fn mutual_information(q: &Distribution, p: &StochasticMatrix) -> Result<f64> {
    let joint = compose(q, p)?;
    let py = joint.y_marginal();
    let mut product = Vec::with_capacity(joint.probs.len());
    for qx in &q.probs {
        product.extend(py.probs.iter().map(|pyv| qx * pyv));
    }
    Ok(kl_slices(&joint.probs, &product))
}

/// Row and column sums of a joint distribution.
pub fn marginals(u: &JointDistribution) -> (Distribution, Distribution) {
    (u.x_marginal(), u.y_marginal())
}

/// A reverse conditional `U(x|y)` together with the columns it defines.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    /// `x_given_y` matrix; undefined columns hold the uniform distribution.
    pub matrix: StochasticMatrix,
    /// `defined[y]` is false when `U(y)` is a structural zero.
    pub defined: Vec<bool>,
}

/// Normalizes each column of `u` into `U(x|y)`.
///
/// Columns whose `y`-marginal falls below [`ZERO_THRESHOLD`] are flagged
/// undefined; the caller decides what to put there.
pub fn conditional_x_given_y(u: &JointDistribution) -> Conditional {
    let py = u.y_marginal();
    let mut rows = Vec::with_capacity(u.ny);
    let mut defined = Vec::with_capacity(u.ny);
    for y in 0..u.ny {
        if py.probs[y] < ZERO_THRESHOLD {
            rows.push(Distribution {
                probs: vec![1.0 / u.nx as f64; u.nx],
            });
            defined.push(false);
        } else {
            let probs = (0..u.nx).map(|x| u.get(x, y) / py.probs[y]).collect();
            rows.push(Distribution { probs });
            defined.push(true);
        }
    }
    Conditional {
        matrix: StochasticMatrix {
            rows,
            orientation: Orientation::XGivenY,
        },
        defined,
    }
}

/// Counts the joint type of two blocks over alphabets of size `nx` and `ny`.
pub fn joint_type(x_block: &[Symbol], y_block: &[Symbol], nx: usize, ny: usize) -> Result<EmpiricalType> {
    if x_block.len() != y_block.len() {
        return Err(Error::Dimension(format!(
            "blocks of lengths {} and {}",
            x_block.len(),
            y_block.len()
        )));
    }
    if x_block.is_empty() {
        return Err(Error::Dimension("empty blocks".into()));
    }
    let mut counts = vec![0u64; nx * ny];
    for (i, (&a, &b)) in x_block.iter().zip(y_block).enumerate() {
        let (a, b) = (a as usize, b as usize);
        if a >= nx || b >= ny {
            return Err(Error::Dimension(format!(
                "symbol pair ({a}, {b}) at position {i} outside {nx}x{ny} alphabet"
            )));
        }
        counts[a * ny + b] += 1;
    }
    Ok(EmpiricalType {
        nx,
        ny,
        counts,
        n: x_block.len() as u64,
    })
}

/// Purpose tags separating the independent random streams of a session.
pub mod stream_tag {
    pub const CODEBOOK: u64 = 1;
    pub const MESSAGE: u64 = 2;
    pub const CHANNEL: u64 = 3;
    pub const CONCENTRATION_INPUT: u64 = 4;
    pub const CONCENTRATION_CHANNEL: u64 = 5;
    pub const ORACLE: u64 = 6;
}

/// A deterministic random stream addressed by `(seed, tag, index, sub)`.
///
/// The four words key a ChaCha8 generator directly, so distinct addresses
/// never share a key and any single block can be replayed in isolation.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0, 0)
    }

    pub fn derive(seed: u64, tag: u64, index: u64) -> Self {
        Self::derive_sub(seed, tag, index, 0)
    }

    /// Stream keyed by two indices, e.g. codebook epoch and message.
    pub fn derive_sub(seed: u64, tag: u64, index: u64, sub: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&tag.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        key[24..32].copy_from_slice(&sub.to_le_bytes());
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform draw from `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(d: &Distribution) -> Self {
        let mut acc = 0.0;
        let cumulative = d
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = d.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self {
            cumulative,
            last_positive,
        }
    }

    /// Smallest symbol whose cumulative probability exceeds `u`.
    pub fn symbol_for(&self, u: f64) -> Symbol {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.last_positive) as Symbol
    }

    pub fn draw(&self, stream: &mut RngStream) -> Symbol {
        self.symbol_for(stream.unit())
    }

    pub fn fill(&self, out: &mut [Symbol], stream: &mut RngStream) {
        for s in out {
            *s = self.draw(stream);
        }
    }
}

/// Draws `n` i.i.d. symbols from `d` by inverse-CDF sampling.
pub fn sample_iid(d: &Distribution, n: usize, stream: &mut RngStream) -> Vec<Symbol> {
    let sampler = Sampler::new(d);
    let mut out = vec![0; n];
    sampler.fill(&mut out, stream);
    out
}
