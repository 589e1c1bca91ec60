//! Estimators of `p = P(S > a)` and their batch reporting.
//!
//! The MCMC estimator averages `I{max step > a} / P(max > a)` over the
//! states of a chain whose invariant law is the conditional law given
//! `S > a`, which is an unbiased estimate of `1 / p`. Standard Monte Carlo
//! and a defensive-mixture importance sampler serve as baselines.
//!
//! Budgets are counted in single-variable draws: a Monte Carlo walk of `n`
//! steps costs `n` draws (`N + 1` for a random count), a fixed-count sweep
//! costs `n`, a random-count sweep `N_{t+1} + 1`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain_fixed::{sample_max_exceeds, ChainStateFixed};
use crate::chain_random::ChainStateRandom;
use crate::distributions::{
    max_tail_fixed, max_tail_random, sample_count_given_max, uniform, CountDistribution, CountLaw,
    StepDistribution,
};
use crate::error::{Error, Result};

/// Hit counts for the reciprocal estimator `q̂ = (hits / total) / P(max > a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorAccumulator {
    hits: u64,
    total: u64,
    norm_const: f64,
}

impl EstimatorAccumulator {
    /// `norm_const` is `P(max > a)` and must lie in `(0, 1]`.
    pub fn new(norm_const: f64) -> Result<Self> {
        if norm_const == 0.0 {
            return Err(Error::DegenerateModel);
        }
        if !(norm_const > 0.0 && norm_const <= 1.0) {
            return Err(Error::Domain(format!("normalizing constant {norm_const} outside (0, 1]")));
        }
        Ok(Self {
            hits: 0,
            total: 0,
            norm_const,
        })
    }

    #[inline]
    pub fn observe(&mut self, max_exceeds: bool) {
        self.hits += max_exceeds as u64;
        self.total += 1;
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn hit_rate(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }

    /// Combines counts from another accumulator for the same model.
    pub fn merge(&mut self, other: &Self) {
        self.hits += other.hits;
        self.total += other.total;
    }
}

/// `q̂ = (1 / P(max > a)) · hits / total`, an estimate of `1 / p`.
pub fn mcmc_reciprocal_estimate(acc: &EstimatorAccumulator) -> Result<f64> {
    if acc.total == 0 {
        return Err(Error::Domain("no observed states".into()));
    }
    Ok(acc.hit_rate() / acc.norm_const)
}

/// `min(1 / q̂, 1)`, with `q̂ = 0` mapped to one.
pub fn clamp_probability_estimate(qhat: f64) -> f64 {
    if qhat <= 1.0 {
        1.0
    } else {
        1.0 / qhat
    }
}

/// Streaming mean and variance (Welford), mergeable across partitions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two points.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Mcmc,
    Is,
    Mc,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mcmc => "mcmc",
            EstimatorKind::Is => "is",
            EstimatorKind::Mc => "mc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mcmc" => Some(EstimatorKind::Mcmc),
            "is" => Some(EstimatorKind::Is),
            "mc" => Some(EstimatorKind::Mc),
            _ => None,
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            EstimatorKind::Mcmc => 1,
            EstimatorKind::Is => 2,
            EstimatorKind::Mc => 3,
        }
    }
}

/// RNG for one batch: ChaCha8 keyed by the master seed, with stream
/// `(estimator tag << 32) | batch index`. Streams never overlap.
pub fn batch_rng(seed: u64, kind: EstimatorKind, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.stream_tag() << 32) | (batch & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Fixed { n: usize },
    Random { count: CountLaw },
}

/// A tail probability `P(S > threshold)` to estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem<D> {
    pub step: D,
    pub model: Model,
    pub threshold: f64,
}

impl<D: StepDistribution> Problem<D> {
    /// `P(max step > threshold)`, the normalizing constant of the estimator.
    pub fn p_max(&self) -> Result<f64> {
        match self.model {
            Model::Fixed { n } => max_tail_fixed(&self.step, n as u64, self.threshold),
            Model::Random { count } => Ok(max_tail_random(&self.step, &count, self.threshold)),
        }
    }
}

/// Batch sizes and reproducibility settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchPlan {
    /// Simulations per batch (walks for MC and IS).
    pub t: u64,
    pub batches: u64,
    pub burnin: u64,
    pub seed: u64,
    pub is_weight: f64,
    /// Record the running estimate of batch 0 every this many draws (0 = off).
    pub trace_every: u64,
    /// When false, runtimes are reported as zero so outputs are reproducible.
    pub timing: bool,
}

impl BatchPlan {
    /// Draw budget of one MCMC batch: `T·n`, or `ceil(T·E[N])`.
    pub fn mcmc_draws(&self, model: &Model) -> u64 {
        match model {
            Model::Fixed { n } => self.t * *n as u64,
            Model::Random { count } => (self.t as f64 * count.mean()).ceil() as u64,
        }
    }
}

/// Outcome of a single batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEstimate {
    pub estimate: f64,
    /// MCMC: fraction of states whose maximum exceeds the threshold.
    /// MC and IS: fraction of samples whose sum exceeds it.
    pub hit_rate: f64,
    pub draws: u64,
    pub runtime_s: f64,
}

/// One point of a convergence trace: cumulative draws and running estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub estimate: f64,
}

struct Tracer {
    every: u64,
    next: u64,
    rows: Vec<TracePoint>,
}

impl Tracer {
    fn new(every: u64) -> Self {
        Self {
            every,
            next: every,
            rows: Vec::new(),
        }
    }

    #[inline]
    fn advance<F: Fn() -> f64>(&mut self, draws: u64, estimate: F) {
        if self.every == 0 || draws < self.next {
            return;
        }
        let e = estimate();
        while self.next <= draws {
            self.rows.push(TracePoint {
                step: self.next,
                estimate: e,
            });
            self.next += self.every;
        }
    }
}

/// Aggregate over batches, in batch order.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub batch_means: Vec<f64>,
    pub avg_est: f64,
    pub std_dev: f64,
    pub avg_runtime_s: f64,
    pub hit_rate: f64,
}

impl BatchReport {
    pub fn from_batches(batches: &[BatchEstimate]) -> Self {
        let mut est = RunningStats::default();
        let mut hits = RunningStats::default();
        let mut time = RunningStats::default();
        for b in batches {
            est.push(b.estimate);
            hits.push(b.hit_rate);
            time.push(b.runtime_s);
        }
        Self {
            batch_means: batches.iter().map(|b| b.estimate).collect(),
            avg_est: est.mean(),
            std_dev: est.std_dev(),
            avg_runtime_s: time.mean(),
            hit_rate: hits.mean(),
        }
    }
}

/// MCMC batch for the fixed-count model: `sweeps` recorded sweeps.
pub fn mcmc_fixed_batch<D: StepDistribution>(
    d: &D,
    n: usize,
    a: f64,
    sweeps: u64,
    burnin: u64,
    rng: &mut ChaCha8Rng,
    trace_every: u64,
) -> Result<(BatchEstimate, Vec<TracePoint>)> {
    if sweeps == 0 {
        return Err(Error::Domain("chain length must be >= 1".into()));
    }
    let mut acc = EstimatorAccumulator::new(max_tail_fixed(d, n as u64, a)?)?;
    let mut tracer = Tracer::new(trace_every);
    let mut state = ChainStateFixed::init(d, n, a, rng)?;
    for _ in 0..burnin {
        state.sweep(d, rng)?;
    }
    for i in 1..=sweeps {
        state.sweep(d, rng)?;
        acc.observe(state.max_exceeds());
        tracer.advance(i * n as u64, || {
            clamp_probability_estimate(acc.hit_rate() / acc.norm_const())
        });
    }
    let q = mcmc_reciprocal_estimate(&acc)?;
    Ok((
        BatchEstimate {
            estimate: clamp_probability_estimate(q),
            hit_rate: acc.hit_rate(),
            draws: sweeps * n as u64,
            runtime_s: 0.0,
        },
        tracer.rows,
    ))
}

/// MCMC batch for the random-count model, run until `draw_budget` draws.
pub fn mcmc_random_batch<D: StepDistribution, C: CountDistribution>(
    d: &D,
    c: &C,
    a: f64,
    draw_budget: u64,
    burnin: u64,
    rng: &mut ChaCha8Rng,
    trace_every: u64,
) -> Result<(BatchEstimate, Vec<TracePoint>)> {
    if draw_budget == 0 {
        return Err(Error::Domain("draw budget must be >= 1".into()));
    }
    let mut acc = EstimatorAccumulator::new(max_tail_random(d, c, a))?;
    let mut tracer = Tracer::new(trace_every);
    let mut state = ChainStateRandom::init(d, c, a, rng)?;
    for _ in 0..burnin {
        state.sweep(d, c, rng)?;
    }
    let mut spent = 0u64;
    while spent < draw_budget {
        spent += state.sweep(d, c, rng)?;
        acc.observe(state.max_exceeds());
        tracer.advance(spent, || {
            clamp_probability_estimate(acc.hit_rate() / acc.norm_const())
        });
    }
    let q = mcmc_reciprocal_estimate(&acc)?;
    Ok((
        BatchEstimate {
            estimate: clamp_probability_estimate(q),
            hit_rate: acc.hit_rate(),
            draws: spent,
            runtime_s: 0.0,
        },
        tracer.rows,
    ))
}

/// Mean of `t` i.i.d. indicators `I{S > a}`.
pub fn standard_mc_estimate<D: StepDistribution>(
    d: &D,
    model: &Model,
    a: f64,
    t: u64,
    rng: &mut ChaCha8Rng,
    trace_every: u64,
) -> Result<(BatchEstimate, Vec<TracePoint>)> {
    if t == 0 {
        return Err(Error::Domain("T must be >= 1".into()));
    }
    let mut tracer = Tracer::new(trace_every);
    let (mut hits, mut draws) = (0u64, 0u64);
    for i in 1..=t {
        let steps = match model {
            Model::Fixed { n } => *n as u64,
            Model::Random { count } => {
                draws += 1;
                count.sample(uniform(rng))?
            }
        };
        let mut sum = 0.0;
        for _ in 0..steps {
            sum += d.sample_rng(rng);
        }
        draws += steps;
        hits += (sum > a) as u64;
        tracer.advance(draws, || hits as f64 / i as f64);
    }
    let est = hits as f64 / t as f64;
    Ok((
        BatchEstimate {
            estimate: est,
            hit_rate: est,
            draws,
            runtime_s: 0.0,
        },
        tracer.rows,
    ))
}

/// Importance sampling from `w·F + (1 − w)·V`, where `V` is the law of the
/// steps given that the maximum exceeds `a`. The likelihood ratio is
/// `1 / (w + (1 − w)·I{max > a} / P(max > a))`.
pub fn mixture_is_estimate<D: StepDistribution>(
    d: &D,
    model: &Model,
    a: f64,
    w: f64,
    t: u64,
    rng: &mut ChaCha8Rng,
    trace_every: u64,
) -> Result<(BatchEstimate, Vec<TracePoint>)> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Domain(format!(
            "mixture weight must lie in (0, 1], got {w}; w = 0 ignores {{S > a, max <= a}}"
        )));
    }
    if t == 0 {
        return Err(Error::Domain("T must be >= 1".into()));
    }
    let step_tail = d.tail(a);
    let p_max = match model {
        Model::Fixed { n } => max_tail_fixed(d, *n as u64, a)?,
        Model::Random { count } => max_tail_random(d, count, a),
    };
    if p_max <= 0.0 {
        return Err(Error::ThresholdUnreachable(format!("P(max > {a}) is zero")));
    }
    let weight_big = 1.0 / (w + (1.0 - w) / p_max);
    let mut tracer = Tracer::new(trace_every);
    let mut buf = Vec::new();
    let (mut total, mut hits, mut draws) = (0.0f64, 0u64, 0u64);
    for i in 1..=t {
        let from_base = w >= 1.0 || uniform(rng) < w;
        let steps = match model {
            Model::Fixed { n } => *n,
            Model::Random { count } => {
                draws += 1;
                if from_base {
                    count.sample(uniform(rng))? as usize
                } else {
                    sample_count_given_max(count, step_tail, uniform(rng))? as usize
                }
            }
        };
        if from_base {
            buf.clear();
            buf.extend((0..steps).map(|_| d.sample_rng(rng)));
        } else {
            sample_max_exceeds(d, steps, a, rng, &mut buf)?;
        }
        draws += steps as u64;
        let sum: f64 = buf.iter().sum();
        if sum > a {
            hits += 1;
            let max = buf.iter().copied().fold(0.0, f64::max);
            total += if max > a { weight_big } else { 1.0 / w };
        }
        tracer.advance(draws, || total / i as f64);
    }
    Ok((
        BatchEstimate {
            estimate: total / t as f64,
            hit_rate: hits as f64 / t as f64,
            draws,
            runtime_s: 0.0,
        },
        tracer.rows,
    ))
}

/// Runs one batch of the given estimator with its own RNG stream.
pub fn run_batch<D: StepDistribution>(
    problem: &Problem<D>,
    plan: &BatchPlan,
    kind: EstimatorKind,
    batch: u64,
) -> Result<(BatchEstimate, Vec<TracePoint>)> {
    let mut rng = batch_rng(plan.seed, kind, batch);
    let trace_every = if batch == 0 { plan.trace_every } else { 0 };
    let a = problem.threshold;
    let start = Instant::now();
    let (mut est, trace) = match (kind, &problem.model) {
        (EstimatorKind::Mcmc, Model::Fixed { n }) => {
            mcmc_fixed_batch(&problem.step, *n, a, plan.t, plan.burnin, &mut rng, trace_every)?
        }
        (EstimatorKind::Mcmc, Model::Random { count }) => mcmc_random_batch(
            &problem.step,
            count,
            a,
            plan.mcmc_draws(&problem.model),
            plan.burnin,
            &mut rng,
            trace_every,
        )?,
        (EstimatorKind::Mc, model) => {
            standard_mc_estimate(&problem.step, model, a, plan.t, &mut rng, trace_every)?
        }
        (EstimatorKind::Is, model) => mixture_is_estimate(
            &problem.step,
            model,
            a,
            plan.is_weight,
            plan.t,
            &mut rng,
            trace_every,
        )?,
    };
    if plan.timing {
        est.runtime_s = start.elapsed().as_secs_f64();
    }
    Ok((est, trace))
}

/// Report and batch-0 trace of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun {
    pub kind: EstimatorKind,
    pub report: BatchReport,
    pub trace: Vec<TracePoint>,
}

/// Runs `plan.batches` independent batches in parallel on the current rayon
/// pool and aggregates them in batch order.
pub fn batch_run<D: StepDistribution + Sync>(
    problem: &Problem<D>,
    plan: &BatchPlan,
    kind: EstimatorKind,
) -> Result<EstimatorRun> {
    if plan.batches < 2 {
        return Err(Error::Config(vec!["batches must be >= 2".into()]));
    }
    let results: Vec<Result<(BatchEstimate, Vec<TracePoint>)>> = (0..plan.batches)
        .into_par_iter()
        .map(|b| run_batch(problem, plan, kind, b))
        .collect();
    let mut estimates = Vec::with_capacity(results.len());
    let mut trace = Vec::new();
    for (b, r) in results.into_iter().enumerate() {
        let (est, tr) = r?;
        if b == 0 {
            trace = tr;
        }
        estimates.push(est);
    }
    Ok(EstimatorRun {
        kind,
        report: BatchReport::from_batches(&estimates),
        trace,
    })
}

/// One grid point of the normalized-variance probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePoint {
    pub threshold: f64,
    pub hit_rate: f64,
    /// `1 / hit_rate − 1`, or `None` when no state hit.
    pub value: Option<f64>,
}

/// Estimates `P(S > a)/P(max > a) · (1 − P(max > a)/P(S > a))`, the
/// normalized per-state variance of the reciprocal estimator, as
/// `1 / hit_rate − 1` from one chain per threshold with a budget of
/// `draws` single-variable draws.
pub fn normalized_variance_probe<D: StepDistribution>(
    d: &D,
    model: &Model,
    thresholds: &[f64],
    draws: u64,
    burnin: u64,
    seed: u64,
) -> Result<Vec<ProbePoint>> {
    thresholds
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut rng = batch_rng(seed, EstimatorKind::Mcmc, i as u64);
            let (est, _) = match model {
                Model::Fixed { n } => {
                    let sweeps = (draws / *n as u64).max(1);
                    mcmc_fixed_batch(d, *n, a, sweeps, burnin, &mut rng, 0)?
                }
                Model::Random { count } => mcmc_random_batch(d, count, a, draws, burnin, &mut rng, 0)?,
            };
            let value = (est.hit_rate > 0.0).then(|| 1.0 / est.hit_rate - 1.0);
            Ok(ProbePoint {
                threshold: a,
                hit_rate: est.hit_rate,
                value,
            })
        })
        .collect()
}
