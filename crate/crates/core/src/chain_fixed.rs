//! Gibbs sampler on `A_n = {y : y_1 + ... + y_n > a}` for a fixed number of
//! i.i.d. nonnegative steps.
//!
//! One sweep draws a uniform update order, resamples every coordinate from
//! its full conditional `P(Y ∈ · | Y + Σ_{k≠j} y_k > a)`, and finally applies
//! a uniform random permutation of the coordinates. The invariant law is the
//! conditional law of the steps given `S_n > a`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::distributions::{complement_power, uniform, StepDistribution};
use crate::error::{Error, Result};

/// Sweeps between from-scratch recomputations of the cached sum.
pub const REFRESH_INTERVAL: u64 = 1024;

// Retries when rounding puts a resampled coordinate exactly on the boundary.
const MAX_BOUNDARY_RETRIES: usize = 64;

/// Draws the steps exactly from `P(Y ∈ · | max_j Y_j > a)` into `out`.
///
/// The index `J` of the first exceedance has `P(J = j) ∝ F(a)^(j-1) F̄(a)`;
/// steps before it are drawn below `a`, step `J` above `a`, the rest freely.
pub fn sample_max_exceeds<D, R>(d: &D, n: usize, a: f64, rng: &mut R, out: &mut Vec<f64>) -> Result<()>
where
    D: StepDistribution,
    R: Rng + ?Sized,
{
    if n == 0 {
        return Err(Error::Domain("number of steps must be >= 1".into()));
    }
    let t = d.tail(a);
    if t <= 0.0 {
        return Err(Error::ThresholdUnreachable(format!("P(Y > {a}) underflows to zero")));
    }
    let p_max = complement_power(t, n as u64);
    let v = uniform(rng) * p_max;
    let first = ((-v).ln_1p() / (-t).ln_1p()).ceil();
    let first = if first.is_finite() { (first as usize).clamp(1, n) } else { 1 };

    out.clear();
    for _ in 1..first {
        out.push(d.sample_below(a, uniform(rng))?);
    }
    out.push(d.sample_truncated(a, uniform(rng))?);
    for _ in first..n {
        out.push(d.sample_rng(rng));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ChainStateFixed {
    steps: Vec<f64>,
    sum: f64,
    max: f64,
    a: f64,
    sweeps: u64,
    order: Vec<usize>,
}

impl ChainStateFixed {
    /// Starts the chain from an exact draw of `P(Y ∈ · | M_n > a)`, which
    /// lies in `A_n` and is close to the invariant law for heavy tails.
    pub fn init<D, R>(d: &D, n: usize, a: f64, rng: &mut R) -> Result<Self>
    where
        D: StepDistribution,
        R: Rng + ?Sized,
    {
        let mut steps = Vec::with_capacity(n);
        sample_max_exceeds(d, n, a, rng, &mut steps)?;
        Self::from_steps(steps, a)
    }

    /// Builds a state from explicit steps; fails unless `Σ steps > a`.
    pub fn from_steps(steps: Vec<f64>, a: f64) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Domain("state needs at least one step".into()));
        }
        if steps.iter().any(|&y| !(y >= 0.0 && y.is_finite())) {
            return Err(Error::Domain("steps must be finite and nonnegative".into()));
        }
        let sum: f64 = steps.iter().sum();
        if !(sum > a) {
            return Err(Error::ContractViolation(format!("sum {sum} does not exceed {a}")));
        }
        let max = steps.iter().copied().fold(0.0, f64::max);
        let n = steps.len();
        Ok(Self {
            steps,
            sum,
            max,
            a,
            sweeps: 0,
            order: (0..n).collect(),
        })
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn threshold(&self) -> f64 {
        self.a
    }

    /// Whether the largest step alone exceeds the threshold.
    pub fn max_exceeds(&self) -> bool {
        self.max > self.a
    }

    /// Resamples coordinate `j` from its full conditional using the uniform `u`.
    pub fn update_coordinate_with<D: StepDistribution>(&mut self, j: usize, d: &D, u: f64) -> Result<()> {
        let rest = self.sum - self.steps[j];
        let y = d.sample_truncated(self.a - rest, u)?;
        if !(rest + y > self.a) {
            return Err(Error::ContractViolation(format!(
                "resampled step {y} leaves the sum at the threshold {}",
                self.a
            )));
        }
        self.steps[j] = y;
        self.sum = rest + y;
        Ok(())
    }

    pub fn update_coordinate<D, R>(&mut self, j: usize, d: &D, rng: &mut R) -> Result<()>
    where
        D: StepDistribution,
        R: Rng + ?Sized,
    {
        let rest = self.sum - self.steps[j];
        let c = self.a - rest;
        for _ in 0..MAX_BOUNDARY_RETRIES {
            let y = d.sample_truncated(c, uniform(rng))?;
            if rest + y > self.a {
                self.steps[j] = y;
                self.sum = rest + y;
                return Ok(());
            }
        }
        Err(Error::ThresholdUnreachable(format!(
            "cannot resample above {c} without rounding onto the threshold"
        )))
    }

    /// One full iteration: random update order, conditional resampling of
    /// every coordinate, then a uniform permutation.
    pub fn sweep<D, R>(&mut self, d: &D, rng: &mut R) -> Result<()>
    where
        D: StepDistribution,
        R: Rng + ?Sized,
    {
        self.order.shuffle(rng);
        for k in 0..self.order.len() {
            let j = self.order[k];
            self.update_coordinate(j, d, rng)?;
        }
        self.steps.shuffle(rng);
        self.max = self.steps.iter().copied().fold(0.0, f64::max);
        self.sweeps += 1;
        if self.sweeps % REFRESH_INTERVAL == 0 {
            self.refresh()?;
        }
        Ok(())
    }

    /// Recomputes the cached sum from scratch.
    pub fn refresh(&mut self) -> Result<()> {
        let sum: f64 = self.steps.iter().sum();
        if !(sum > self.a) {
            return Err(Error::ContractViolation(format!(
                "recomputed sum {sum} does not exceed {}",
                self.a
            )));
        }
        self.sum = sum;
        Ok(())
    }

    /// Checks membership in `A_n` and cache coherence against fresh values.
    pub fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.steps.iter().sum();
        let max = self.steps.iter().copied().fold(0.0, f64::max);
        if !(sum > self.a) {
            return Err(Error::ContractViolation(format!("sum {sum} <= {}", self.a)));
        }
        if (sum - self.sum).abs() > 1e-9 * sum || max != self.max {
            return Err(Error::ContractViolation(format!(
                "stale cache: sum {} vs {sum}, max {} vs {max}",
                self.sum, self.max
            )));
        }
        Ok(())
    }
}

/// Runs `burnin` discarded sweeps and then `sweeps` recorded ones, calling
/// `observer` after each recorded sweep.
pub fn run_chain_fixed<D, R, F>(
    d: &D,
    n: usize,
    a: f64,
    sweeps: u64,
    burnin: u64,
    rng: &mut R,
    mut observer: F,
) -> Result<()>
where
    D: StepDistribution,
    R: Rng + ?Sized,
    F: FnMut(&ChainStateFixed),
{
    if sweeps == 0 {
        return Err(Error::Domain("chain length must be >= 1".into()));
    }
    let mut state = ChainStateFixed::init(d, n, a, rng)?;
    for _ in 0..burnin {
        state.sweep(d, rng)?;
    }
    for _ in 0..sweeps {
        state.sweep(d, rng)?;
        observer(&state);
    }
    Ok(())
}
