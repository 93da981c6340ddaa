//! The explicitly constructed two-hidden-layer threshold network.
//!
//! Layer 1 has one neuron per ordered pair `(k, j)`, `k != j`, firing when
//! the query lies on generator `k`'s side of the bisector between `k` and
//! `j`. Layer 2 has one AND-gate per generator. The output neuron weights
//! the layer-2 bits by the training values. Nothing here is fitted: every
//! weight and threshold is a closed-form function of the training data.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// Default second-layer margin, the midpoint of the admissible `[0, 1)`.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Largest first-layer table, in reals, that [`WeightStorage::Auto`] stores densely (128 MiB).
pub const DENSE_LIMIT_REALS: usize = 1 << 24;

/// Hard-limiter activation: `1` for `x >= 0`, `0` otherwise.
pub fn step(x: f64) -> Result<u8> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "activation input",
            index: 0,
        });
    }
    Ok(heaviside(x))
}

#[inline]
fn heaviside(x: f64) -> u8 {
    u8::from(x >= 0.0)
}

/// How the output neuron resolves queries where several layer-2 gates fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Literal weighted sum over all firing gates. Adds several training
    /// values on shared cell boundaries.
    PaperFaithful,
    /// Value of the lowest-index firing gate.
    #[default]
    LowestIndex,
}

impl TieMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TieMode::PaperFaithful => "paper",
            TieMode::LowestIndex => "lowest",
        }
    }
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TieMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper-faithful" => Ok(TieMode::PaperFaithful),
            "lowest" | "lowest-index" => Ok(TieMode::LowestIndex),
            other => Err(Error::InvalidArgument(format!(
                "tie mode must be `paper` or `lowest`, got `{other}`"
            ))),
        }
    }
}

/// Where first-layer weights live.
///
/// `Dense` materialises all `n(n-1)` neurons as `d + 1` reals each.
/// `OnTheFly` recomputes each neuron from the generators with the same
/// floating-point operations, so both give bit-identical activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightStorage {
    #[default]
    Auto,
    Dense,
    OnTheFly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub tie_mode: TieMode,
    pub epsilon: f64,
    pub storage: WeightStorage,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            tie_mode: TieMode::default(),
            epsilon: DEFAULT_EPSILON,
            storage: WeightStorage::default(),
        }
    }
}

impl BuildOptions {
    pub fn with_tie_mode(mut self, tie_mode: TieMode) -> Self {
        self.tie_mode = tie_mode;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_storage(mut self, storage: WeightStorage) -> Self {
        self.storage = storage;
        self
    }
}

/// One first-layer neuron `(k, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Neuron<'a> {
    pub weight: Cow<'a, [f64]>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct DenseLayer {
    weights: Vec<f64>,
    thresholds: Vec<f64>,
}

/// A constructed network. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    samples: SampleSet,
    tie_mode: TieMode,
    epsilon: f64,
    second_layer_threshold: f64,
    dense: Option<DenseLayer>,
    probe_order: Vec<u32>,
    // layer-1 zeros a group can absorb and still reach the layer-2 threshold
    allowed_misses: usize,
}

/// Builds the network for `samples`. Pure and deterministic.
pub fn build_network(samples: &SampleSet, options: &BuildOptions) -> Result<NetworkParams> {
    let eps = options.epsilon;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let n = samples.len();
    let d = samples.dim();
    let dense = match options.storage {
        WeightStorage::Dense => true,
        WeightStorage::OnTheFly => false,
        WeightStorage::Auto => n
            .checked_mul(n - 1)
            .and_then(|p| p.checked_mul(d + 1))
            .is_some_and(|reals| reals <= DENSE_LIMIT_REALS),
    };
    let dense = dense.then(|| {
        let mut weights = Vec::with_capacity(n * (n - 1) * d);
        let mut thresholds = Vec::with_capacity(n * (n - 1));
        let mut w = vec![0.0; d];
        for k in 0..n {
            for j in (0..n).filter(|&j| j != k) {
                thresholds.push(bisector_neuron(samples.point(k), samples.point(j), &mut w));
                weights.extend_from_slice(&w);
            }
        }
        DenseLayer {
            weights,
            thresholds,
        }
    });
    let second_layer_threshold = (n - 1) as f64 - eps;
    let allowed_misses = (0..n)
        .take_while(|&m| ((n - 1 - m) as f64) - second_layer_threshold >= 0.0)
        .count()
        .saturating_sub(1);
    Ok(NetworkParams {
        samples: samples.clone(),
        tie_mode: options.tie_mode,
        epsilon: eps,
        second_layer_threshold,
        dense,
        probe_order: probe_order(n),
        allowed_misses,
    })
}

/// Writes `w = a - c` and returns `b = ½ (a - c)·(a + c)`.
#[inline]
fn bisector_neuron(a: &[f64], c: &[f64], w: &mut [f64]) -> f64 {
    let mut dot = 0.0;
    for ((wi, &ai), &ci) in w.iter_mut().zip(a).zip(c) {
        *wi = ai - ci;
        dot += *wi * (ai + ci);
    }
    0.5 * dot
}

/// `w·x - b` for the neuron built from `a` and `c`, without storing `w`.
/// Same operation order as [`bisector_neuron`] followed by a dot product.
#[inline]
fn bisector_preactivation(a: &[f64], c: &[f64], x: &[f64]) -> f64 {
    let mut dot_b = 0.0;
    let mut dot_x = 0.0;
    for ((&ai, &ci), &xi) in a.iter().zip(c).zip(x) {
        let wi = ai - ci;
        dot_b += wi * (ai + ci);
        dot_x += wi * xi;
    }
    dot_x - 0.5 * dot_b
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

// Order in which the early-exit evaluator visits the neurons of a group.
// A golden-ratio stride spreads consecutive probes across the index range,
// so groups far from the query (which fail against many generators) are
// rejected after a few probes even when the samples are sorted.
fn probe_order(n: usize) -> Vec<u32> {
    let mut stride = ((n as f64) * 0.618_033_988_749_894_9).round().max(1.0) as usize;
    while gcd(stride, n) != 1 {
        stride += 1;
    }
    (0..n).map(|i| ((i * stride) % n) as u32).collect()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Both hidden layers' outputs for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    n: usize,
    z1: Vec<u8>,
    pub z2: Vec<u8>,
    pub output: f64,
}

impl ActivationTrace {
    /// Output of first-layer neuron `(k, j)`, `k != j`.
    pub fn z1(&self, k: usize, j: usize) -> u8 {
        assert!(
            k != j && k < self.n && j < self.n,
            "no first-layer neuron ({k}, {j})"
        );
        self.z1[k * (self.n - 1) + if j < k { j } else { j - 1 }]
    }

    /// The `n - 1` outputs of group `k`, in increasing `j`.
    pub fn group(&self, k: usize) -> &[u8] {
        &self.z1[k * (self.n - 1)..(k + 1) * (self.n - 1)]
    }

    pub fn z1_flat(&self) -> &[u8] {
        &self.z1
    }

    pub fn firing(&self) -> impl Iterator<Item = usize> + '_ {
        self.z2
            .iter()
            .enumerate()
            .filter(|(_, &z)| z == 1)
            .map(|(k, _)| k)
    }
}

impl NetworkParams {
    pub fn dim(&self) -> usize {
        self.samples.dim()
    }

    /// Number of training samples, i.e. second-layer neurons.
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn first_layer_len(&self) -> usize {
        self.n() * (self.n() - 1)
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn tie_mode(&self) -> TieMode {
        self.tie_mode
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn second_layer_threshold(&self) -> f64 {
        self.second_layer_threshold
    }

    pub fn output_weights(&self) -> &[f64] {
        self.samples.values()
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    /// The same network with a different output rule.
    pub fn with_tie_mode(&self, tie_mode: TieMode) -> NetworkParams {
        NetworkParams {
            tie_mode,
            ..self.clone()
        }
    }

    pub fn first_layer_entry(&self, k: usize, j: usize) -> Result<Neuron<'_>> {
        let n = self.n();
        for index in [k, j] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if k == j {
            return Err(Error::InvalidArgument(format!(
                "no first-layer neuron ({k}, {k})"
            )));
        }
        let d = self.dim();
        Ok(match &self.dense {
            Some(layer) => {
                let slot = self.slot(k, j);
                Neuron {
                    weight: Cow::Borrowed(&layer.weights[slot * d..(slot + 1) * d]),
                    threshold: layer.thresholds[slot],
                }
            }
            None => {
                let mut w = vec![0.0; d];
                let threshold =
                    bisector_neuron(self.samples.point(k), self.samples.point(j), &mut w);
                Neuron {
                    weight: Cow::Owned(w),
                    threshold,
                }
            }
        })
    }

    #[inline]
    fn slot(&self, k: usize, j: usize) -> usize {
        k * (self.n() - 1) + if j < k { j } else { j - 1 }
    }

    #[inline]
    fn preactivation(&self, k: usize, j: usize, x: &[f64]) -> f64 {
        match &self.dense {
            Some(layer) => {
                let d = self.dim();
                let slot = self.slot(k, j);
                dot(&layer.weights[slot * d..(slot + 1) * d], x) - layer.thresholds[slot]
            }
            None => bisector_preactivation(self.samples.point(k), self.samples.point(j), x),
        }
    }

    fn check_query(&self, x: &[f64], index: Option<usize>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
                index,
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "query coordinate",
                index: index.unwrap_or(0),
            });
        }
        Ok(())
    }

    /// Full forward pass materialising every neuron output.
    pub fn eval_trace(&self, x: &[f64]) -> Result<ActivationTrace> {
        self.check_query(x, None)?;
        let n = self.n();
        let mut z1 = Vec::with_capacity(self.first_layer_len());
        let mut z2 = Vec::with_capacity(n);
        for k in 0..n {
            let mut sum = 0.0;
            for j in (0..n).filter(|&j| j != k) {
                let z = heaviside(self.preactivation(k, j, x));
                sum += f64::from(z);
                z1.push(z);
            }
            z2.push(heaviside(sum - self.second_layer_threshold));
        }
        let output = self.combine(z2.iter().map(|&z| z == 1));
        Ok(ActivationTrace { n, z1, z2, output })
    }

    /// Output-layer rule applied to the layer-2 bits.
    fn combine(&self, firing: impl Iterator<Item = bool>) -> f64 {
        let values = self.output_weights();
        let mut firing = firing.zip(values).filter(|(z, _)| *z).map(|(_, &f)| f);
        match self.tie_mode {
            // empty sum when nothing fires
            TieMode::LowestIndex => firing.next().unwrap_or(0.0),
            TieMode::PaperFaithful => firing.fold(0.0, |acc, f| acc + f),
        }
    }

    /// Layer-2 output of group `k`. Stops as soon as enough layer-1 neurons
    /// are off that the group sum can no longer reach the threshold.
    ///
    /// `hint` is the `j` whose neuron last switched a group off; it is probed
    /// first, since the generator that beats one group usually beats the
    /// next. It only changes the probe order, never the result.
    ///
    /// Neurons are recomputed from the samples even when a dense table is
    /// stored: the values are bit-identical and the recomputation stays in
    /// cache.
    #[inline]
    fn gate(&self, k: usize, x: &[f64], hint: &mut Option<usize>) -> bool {
        let first = hint.filter(|&h| h != k);
        let mut allowed = self.allowed_misses;
        let mut probe = |j: usize| {
            if heaviside(bisector_preactivation(
                self.samples.point(k),
                self.samples.point(j),
                x,
            )) == 1
            {
                return true;
            }
            *hint = Some(j);
            match allowed.checked_sub(1) {
                Some(left) => {
                    allowed = left;
                    true
                }
                None => false,
            }
        };
        if let Some(h) = first {
            if !probe(h) {
                return false;
            }
        }
        for &j in &self.probe_order {
            let j = j as usize;
            if j != k && Some(j) != first && !probe(j) {
                return false;
            }
        }
        true
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut hint = None;
        match self.tie_mode {
            TieMode::LowestIndex => (0..self.n())
                .find(|&k| self.gate(k, x, &mut hint))
                .map_or(0.0, |k| self.output_weights()[k]),
            TieMode::PaperFaithful => {
                self.combine((0..self.n()).map(|k| self.gate(k, x, &mut hint)))
            }
        }
    }

    /// Network output `y(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_query(x, None)?;
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates many queries in parallel, preserving order.
    pub fn eval_batch<P>(&self, xs: &[P]) -> Result<Vec<f64>>
    where
        P: AsRef<[f64]> + Sync,
    {
        for (i, x) in xs.iter().enumerate() {
            self.check_query(x.as_ref(), Some(i))?;
        }
        Ok(xs
            .par_iter()
            .map(|x| self.eval_unchecked(x.as_ref()))
            .collect())
    }

    /// [`eval_batch`](Self::eval_batch) over a flat row-major buffer.
    pub fn eval_flat(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if !xs.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: xs.len() % d,
                index: Some(xs.len() / d),
            });
        }
        let rows: Vec<&[f64]> = xs.chunks_exact(d).collect();
        self.eval_batch(&rows)
    }
}
