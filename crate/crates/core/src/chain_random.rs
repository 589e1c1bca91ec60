//! Gibbs sampler for the random-sum event `{Y_1 + ... + Y_N > a}`.
//!
//! Each sweep first resamples the count from `P(N = k | N >= k*)`, where
//! `k*` is the first index at which the partial sums exceed `a`, appending
//! fresh steps or dropping trailing ones as needed. The steps are then
//! updated exactly as in the fixed-count sweep.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain_fixed::sample_max_exceeds;
use crate::distributions::{uniform, CountDistribution, StepDistribution};
use crate::error::{Error, Result};

const MAX_BOUNDARY_RETRIES: usize = 64;

/// Smallest 1-based `j` with `y_1 + ... + y_j > a`.
pub fn compute_kstar(steps: &[f64], a: f64) -> Result<usize> {
    let mut partial = 0.0;
    for (i, y) in steps.iter().enumerate() {
        partial += y;
        if partial > a {
            return Ok(i + 1);
        }
    }
    Err(Error::ContractViolation(format!(
        "steps sum to {partial}, which does not exceed {a}"
    )))
}

#[derive(Debug, Clone)]
pub struct ChainStateRandom {
    steps: Vec<f64>,
    sum: f64,
    max: f64,
    kstar: usize,
    a: f64,
    order: Vec<usize>,
}

impl ChainStateRandom {
    /// Draws `N_0` from the count law, then the steps exactly from
    /// `P(Y ∈ · | max_j Y_j > a)` given `N_0`.
    pub fn init<D, C, R>(d: &D, c: &C, a: f64, rng: &mut R) -> Result<Self>
    where
        D: StepDistribution,
        C: CountDistribution,
        R: Rng + ?Sized,
    {
        let n0 = c.sample(uniform(rng))? as usize;
        let mut steps = Vec::with_capacity(n0);
        sample_max_exceeds(d, n0, a, rng, &mut steps)?;
        Self::from_steps(steps, a)
    }

    pub fn from_steps(steps: Vec<f64>, a: f64) -> Result<Self> {
        if steps.iter().any(|&y| !(y >= 0.0 && y.is_finite())) {
            return Err(Error::Domain("steps must be finite and nonnegative".into()));
        }
        let kstar = compute_kstar(&steps, a)?;
        let mut s = Self {
            sum: 0.0,
            max: 0.0,
            kstar,
            a,
            order: Vec::with_capacity(steps.len()),
            steps,
        };
        s.recompute()?;
        Ok(s)
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn count(&self) -> usize {
        self.steps.len()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn kstar(&self) -> usize {
        self.kstar
    }

    pub fn threshold(&self) -> f64 {
        self.a
    }

    pub fn max_exceeds(&self) -> bool {
        self.max > self.a
    }

    /// Refreshes sum, max and `k*` from the steps.
    fn recompute(&mut self) -> Result<()> {
        self.kstar = compute_kstar(&self.steps, self.a)?;
        self.sum = self.steps.iter().sum();
        self.max = self.steps.iter().copied().fold(0.0, f64::max);
        Ok(())
    }

    /// Sets the count to `new_count >= k*`: keeps the first `new_count`
    /// steps, or appends fresh unconditional draws.
    pub fn set_count<D, R>(&mut self, new_count: usize, d: &D, rng: &mut R) -> Result<()>
    where
        D: StepDistribution,
        R: Rng + ?Sized,
    {
        if new_count < self.kstar {
            return Err(Error::ContractViolation(format!(
                "count {new_count} is below the first-passage index {}",
                self.kstar
            )));
        }
        let old = self.steps.len();
        if new_count > old {
            self.steps.extend((old..new_count).map(|_| d.sample_rng(rng)));
        } else {
            self.steps.truncate(new_count);
        }
        if new_count != old {
            self.sum = self.steps.iter().sum();
            self.max = self.steps.iter().copied().fold(0.0, f64::max);
        }
        Ok(())
    }

    /// Draws `N_{t+1}` from `P(N = k | N >= k*)` and resizes the steps.
    pub fn resample_count<D, C, R>(&mut self, c: &C, d: &D, rng: &mut R) -> Result<usize>
    where
        D: StepDistribution,
        C: CountDistribution,
        R: Rng + ?Sized,
    {
        let k = c.sample_truncated(self.kstar as u64, uniform(rng))? as usize;
        self.set_count(k, d, rng)?;
        Ok(k)
    }

    fn update_coordinate<D, R>(&mut self, j: usize, d: &D, rng: &mut R) -> Result<()>
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

    /// One iteration: count update, then a fixed-count sweep over the new
    /// coordinates. Returns the draws spent (one for the count plus one per
    /// coordinate update).
    pub fn sweep<D, C, R>(&mut self, d: &D, c: &C, rng: &mut R) -> Result<u64>
    where
        D: StepDistribution,
        C: CountDistribution,
        R: Rng + ?Sized,
    {
        let k = self.resample_count(c, d, rng)?;
        self.order.clear();
        self.order.extend(0..k);
        self.order.shuffle(rng);
        for i in 0..k {
            let j = self.order[i];
            self.update_coordinate(j, d, rng)?;
        }
        self.steps.shuffle(rng);
        self.recompute()?;
        Ok(1 + k as u64)
    }

    /// Checks `sum > a`, cache coherence and the first-passage index.
    pub fn check_invariants(&self) -> Result<()> {
        let kstar = compute_kstar(&self.steps, self.a)?;
        if kstar != self.kstar {
            return Err(Error::ContractViolation(format!(
                "cached k* {} differs from recomputed {kstar}",
                self.kstar
            )));
        }
        let prefix_before: f64 = self.steps[..kstar - 1].iter().sum();
        let prefix_at = prefix_before + self.steps[kstar - 1];
        if prefix_before > self.a || !(prefix_at > self.a) {
            return Err(Error::ContractViolation("k* prefix sums out of order".into()));
        }
        let sum: f64 = self.steps.iter().sum();
        if (sum - self.sum).abs() > 1e-9 * sum {
            return Err(Error::ContractViolation(format!("stale sum {} vs {sum}", self.sum)));
        }
        if self.steps.iter().copied().fold(0.0, f64::max) != self.max {
            return Err(Error::ContractViolation("stale max".into()));
        }
        Ok(())
    }
}

/// Runs `burnin` discarded sweeps and then `sweeps` recorded ones, calling
/// `observer` after each recorded sweep.
pub fn run_chain_random<D, C, R, F>(
    d: &D,
    c: &C,
    a: f64,
    sweeps: u64,
    burnin: u64,
    rng: &mut R,
    mut observer: F,
) -> Result<()>
where
    D: StepDistribution,
    C: CountDistribution,
    R: Rng + ?Sized,
    F: FnMut(&ChainStateRandom),
{
    if sweeps == 0 {
        return Err(Error::Domain("chain length must be >= 1".into()));
    }
    let mut state = ChainStateRandom::init(d, c, a, rng)?;
    for _ in 0..burnin {
        state.sweep(d, c, rng)?;
    }
    for _ in 0..sweeps {
        state.sweep(d, c, rng)?;
        observer(&state);
    }
    Ok(())
}

/// Like [`run_chain_random`], but records sweeps until at least
/// `draw_budget` draws have been spent after burn-in. The observer also
/// receives the cumulative draw count. Returns the number of recorded sweeps.
pub fn run_chain_random_budget<D, C, R, F>(
    d: &D,
    c: &C,
    a: f64,
    draw_budget: u64,
    burnin: u64,
    rng: &mut R,
    mut observer: F,
) -> Result<u64>
where
    D: StepDistribution,
    C: CountDistribution,
    R: Rng + ?Sized,
    F: FnMut(&ChainStateRandom, u64),
{
    if draw_budget == 0 {
        return Err(Error::Domain("draw budget must be >= 1".into()));
    }
    let mut state = ChainStateRandom::init(d, c, a, rng)?;
    for _ in 0..burnin {
        state.sweep(d, c, rng)?;
    }
    let (mut spent, mut sweeps) = (0u64, 0u64);
    while spent < draw_budget {
        spent += state.sweep(d, c, rng)?;
        sweeps += 1;
        observer(&state, spent);
    }
    Ok(sweeps)
}
