//! Step-size and step-count laws.
//!
//! Step laws are nonnegative and continuous with a strictly increasing cdf on
//! their support. Every sampler takes an explicit uniform variate `u` in
//! `[0, 1)`; the `*_rng` helpers draw that variate from a caller-owned RNG.
//!
//! Tail quantities are computed from the survival function directly so that
//! probabilities far below machine epsilon (around 1e-10 and smaller) stay
//! representable.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Uniform variate on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain(format!("uniform variate {u} outside [0, 1)")))
    }
}

/// `1 - (1 - t)^n` without cancellation when `t` is tiny.
pub fn complement_power(t: f64, n: u64) -> f64 {
    if n == 1 {
        return t;
    }
    -(n as f64 * (-t).ln_1p()).exp_m1()
}

/// A nonnegative continuous step law.
pub trait StepDistribution: Send + Sync {
    fn cdf(&self, x: f64) -> f64;

    /// Survival function `1 - F(x)`, evaluated without forming `1 - F`.
    fn tail(&self, x: f64) -> f64;

    fn density(&self, x: f64) -> f64;

    fn ln_density(&self, x: f64) -> f64;

    /// Inverse survival function: the `x` with `tail(x) = t`, for `t` in `(0, 1]`.
    fn tail_quantile(&self, t: f64) -> f64;

    /// Inverse cdf `F⁻¹(u)` for `u` in `[0, 1)`.
    fn quantile(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(self.tail_quantile(1.0 - u))
    }

    /// Draw from `Y | Y > c` by inversion; `c <= 0` means no conditioning.
    ///
    /// Computed as `F̄⁻¹((1 - u) F̄(c))`, which equals `F⁻¹(F(c) + u F̄(c))`
    /// but keeps full precision when `F(c)` rounds to one.
    fn sample_truncated(&self, c: f64, u: f64) -> Result<f64> {
        check_unit(u)?;
        if c <= 0.0 {
            return self.quantile(u);
        }
        let t = self.tail(c);
        if t <= 0.0 {
            return Err(Error::ThresholdUnreachable(format!(
                "P(Y > {c}) underflows to zero"
            )));
        }
        Ok(self.tail_quantile((1.0 - u) * t).max(c))
    }

    /// Draw from `Y | Y <= c` for `c > 0`.
    fn sample_below(&self, c: f64, u: f64) -> Result<f64> {
        check_unit(u)?;
        let p = self.cdf(c);
        if p <= 0.0 {
            return Err(Error::ThresholdUnreachable(format!(
                "P(Y <= {c}) is zero"
            )));
        }
        Ok(self.quantile(u * p)?.min(c))
    }

    fn sample_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> f64
    where
        Self: Sized,
    {
        self.tail_quantile(1.0 - uniform(rng))
    }

    fn sample_truncated_rng<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> Result<f64>
    where
        Self: Sized,
    {
        self.sample_truncated(c, uniform(rng))
    }
}

/// Shifted Pareto law with density `β (x + 1)^(-β - 1)` on `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pareto {
    beta: f64,
    inv_beta: f64,
}

impl Pareto {
    /// Requires a finite tail index `β > 0`; the experiments use `β >= 1`.
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("Pareto tail index must be > 0, got {beta}")));
        }
        Ok(Self {
            beta,
            inv_beta: 1.0 / beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl StepDistribution for Pareto {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.beta * x.ln_1p()).exp_m1()
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.beta * x.ln_1p()).exp()
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.beta * (-(self.beta + 1.0) * x.ln_1p()).exp()
        }
    }

    fn ln_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.beta.ln() - (self.beta + 1.0) * x.ln_1p()
        }
    }

    fn tail_quantile(&self, t: f64) -> f64 {
        // t^(-1/β) - 1
        (-self.inv_beta * t.ln()).exp_m1()
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok((-self.inv_beta * (-u).ln_1p()).exp_m1())
    }
}

/// `P(max(Y_1..Y_n) > a) = 1 - F(a)^n`.
pub fn max_tail_fixed<D: StepDistribution + ?Sized>(d: &D, n: u64, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("number of steps must be >= 1".into()));
    }
    Ok(complement_power(d.tail(a), n))
}

/// `P(max(Y_1..Y_N) > a) = 1 - g_N(F(a))` for a random count `N`.
pub fn max_tail_random<D, C>(d: &D, c: &C, a: f64) -> f64
where
    D: StepDistribution + ?Sized,
    C: CountDistribution + ?Sized,
{
    c.pgf_complement(d.tail(a))
}

/// An integer step-count law supported on `k >= 1`.
pub trait CountDistribution: Send + Sync {
    fn pmf(&self, k: u64) -> f64;

    /// `P(N >= k)`.
    fn tail_from(&self, k: u64) -> f64;

    fn mean(&self) -> f64;

    /// Probability generating function `E[t^N]` on `[0, 1]`.
    fn pgf(&self, t: f64) -> f64;

    /// `1 - g_N(1 - s)`, accurate for small `s`.
    fn pgf_complement(&self, s: f64) -> f64 {
        1.0 - self.pgf(1.0 - s)
    }

    /// Draw from `N | N >= kstar`.
    fn sample_truncated(&self, kstar: u64, u: f64) -> Result<u64>;

    fn sample(&self, u: f64) -> Result<u64> {
        self.sample_truncated(1, u)
    }
}

/// `P(N = k) = (1 - ρ)^(k - 1) ρ` for `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometric {
    rho: f64,
    ln_q: f64,
}

impl Geometric {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("geometric rho must lie in (0, 1), got {rho}")));
        }
        Ok(Self {
            rho,
            ln_q: (-rho).ln_1p(),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl CountDistribution for Geometric {
    fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            ((k - 1) as f64 * self.ln_q).exp() * self.rho
        }
    }

    fn tail_from(&self, k: u64) -> f64 {
        if k <= 1 {
            1.0
        } else {
            ((k - 1) as f64 * self.ln_q).exp()
        }
    }

    fn mean(&self) -> f64 {
        1.0 / self.rho
    }

    fn pgf(&self, t: f64) -> f64 {
        self.rho * t / (1.0 - (1.0 - self.rho) * t)
    }

    fn pgf_complement(&self, s: f64) -> f64 {
        s / (self.rho + (1.0 - self.rho) * s)
    }

    fn sample_truncated(&self, kstar: u64, u: f64) -> Result<u64> {
        check_unit(u)?;
        let kstar = kstar.max(1);
        if self.tail_from(kstar) <= 0.0 {
            return Err(Error::ThresholdUnreachable(format!(
                "P(N >= {kstar}) underflows to zero"
            )));
        }
        // Memorylessness: N | N >= k* is k* - 1 + Geometric(ρ).
        let draw = ((-u).ln_1p() / self.ln_q).ceil().max(1.0);
        Ok(kstar - 1 + draw as u64)
    }
}

/// Poisson law conditioned on `N >= 1` (zero-truncated), parameterized by
/// the untruncated mean `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poisson {
    lambda: f64,
    ln_lambda: f64,
    ln_norm: f64,
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!("Poisson lambda must be > 0, got {lambda}")));
        }
        Ok(Self {
            lambda,
            ln_lambda: lambda.ln(),
            ln_norm: (-(-lambda).exp_m1()).ln(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn ln_pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return f64::NEG_INFINITY;
        }
        -self.lambda + k as f64 * self.ln_lambda - ln_gamma(k as f64 + 1.0) - self.ln_norm
    }

    /// Terms `pmf(k) / pmf(kstar)` for `k >= kstar` until they stop mattering,
    /// plus their total.
    fn scaled_terms(&self, kstar: u64) -> (Vec<f64>, f64) {
        let mut terms = Vec::new();
        let mut r = 1.0;
        let mut total = 0.0;
        let mut k = kstar;
        loop {
            terms.push(r);
            total += r;
            k += 1;
            r *= self.lambda / k as f64;
            if (k as f64 > self.lambda && r < 1e-17 * total) || r == 0.0 {
                break;
            }
        }
        (terms, total)
    }
}

impl CountDistribution for Poisson {
    fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    fn tail_from(&self, k: u64) -> f64 {
        if k <= 1 {
            return 1.0;
        }
        let (_, total) = self.scaled_terms(k);
        (self.ln_pmf(k) + total.ln()).exp()
    }

    fn mean(&self) -> f64 {
        self.lambda / -(-self.lambda).exp_m1()
    }

    fn pgf(&self, t: f64) -> f64 {
        ((self.lambda * (t - 1.0)).exp() - (-self.lambda).exp()) / -(-self.lambda).exp_m1()
    }

    fn pgf_complement(&self, s: f64) -> f64 {
        (-self.lambda * s).exp_m1() / (-self.lambda).exp_m1()
    }

    fn sample_truncated(&self, kstar: u64, u: f64) -> Result<u64> {
        check_unit(u)?;
        let kstar = kstar.max(1);
        let (terms, total) = self.scaled_terms(kstar);
        if self.ln_pmf(kstar) + total.ln() < f64::MIN_POSITIVE.ln() {
            return Err(Error::ThresholdUnreachable(format!(
                "P(N >= {kstar}) underflows to zero"
            )));
        }
        let target = u * total;
        let mut cum = 0.0;
        for (i, r) in terms.iter().enumerate() {
            cum += r;
            if cum > target {
                return Ok(kstar + i as u64);
            }
        }
        Ok(kstar + terms.len() as u64 - 1)
    }
}

/// Degenerate count `P(N = n) = 1`; reduces the random-sum model to the
/// fixed-`n` model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    n: u64,
}

impl PointMass {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("point-mass count must be >= 1".into()));
        }
        Ok(Self { n })
    }
}

impl CountDistribution for PointMass {
    fn pmf(&self, k: u64) -> f64 {
        if k == self.n {
            1.0
        } else {
            0.0
        }
    }

    fn tail_from(&self, k: u64) -> f64 {
        if k <= self.n {
            1.0
        } else {
            0.0
        }
    }

    fn mean(&self) -> f64 {
        self.n as f64
    }

    fn pgf(&self, t: f64) -> f64 {
        t.powi(self.n as i32)
    }

    fn pgf_complement(&self, s: f64) -> f64 {
        complement_power(s, self.n)
    }

    fn sample_truncated(&self, kstar: u64, u: f64) -> Result<u64> {
        check_unit(u)?;
        if kstar > self.n {
            return Err(Error::ThresholdUnreachable(format!(
                "P(N >= {kstar}) is zero for N = {}",
                self.n
            )));
        }
        Ok(self.n)
    }
}

/// The count laws selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountLaw {
    Geometric(Geometric),
    Poisson(Poisson),
    PointMass(PointMass),
}

macro_rules! delegate {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            CountLaw::Geometric($c) => $e,
            CountLaw::Poisson($c) => $e,
            CountLaw::PointMass($c) => $e,
        }
    };
}

impl CountDistribution for CountLaw {
    fn pmf(&self, k: u64) -> f64 {
        delegate!(self, c => c.pmf(k))
    }

    fn tail_from(&self, k: u64) -> f64 {
        delegate!(self, c => c.tail_from(k))
    }

    fn mean(&self) -> f64 {
        delegate!(self, c => c.mean())
    }

    fn pgf(&self, t: f64) -> f64 {
        delegate!(self, c => c.pgf(t))
    }

    fn pgf_complement(&self, s: f64) -> f64 {
        delegate!(self, c => c.pgf_complement(s))
    }

    fn sample_truncated(&self, kstar: u64, u: f64) -> Result<u64> {
        delegate!(self, c => c.sample_truncated(kstar, u))
    }
}

/// Draw the count from `P(N = k | max(Y_1..Y_N) > a)`, where `step_tail`
/// is `P(Y > a)`. The weights are `P(N = k) (1 - F(a)^k)`.
pub fn sample_count_given_max<C: CountDistribution + ?Sized>(
    c: &C,
    step_tail: f64,
    u: f64,
) -> Result<u64> {
    check_unit(u)?;
    let norm = c.pgf_complement(step_tail);
    if !(norm > 0.0) {
        return Err(Error::ThresholdUnreachable(
            "P(max step > a) is zero for this count law".into(),
        ));
    }
    let target = u * norm;
    let mut cum = 0.0;
    let mut k = 1u64;
    loop {
        let p = c.pmf(k);
        cum += p * complement_power(step_tail, k);
        if cum > target {
            return Ok(k);
        }
        // Rounding can leave `cum` just short of `target`; stop once the
        // remaining mass is negligible.
        if k as f64 > c.mean() && c.tail_from(k + 1) < 1e-300 {
            return Ok(k);
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{chi_square_test, ks_critical_one_sample, ks_one_sample};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn pareto_quantile_closed_forms() {
        let p2 = Pareto::new(2.0).unwrap();
        assert_eq!(p2.quantile(0.0).unwrap(), 0.0);
        assert!(close(p2.quantile(0.75).unwrap(), 1.0, 1e-14));
        let p1 = Pareto::new(1.0).unwrap();
        assert!(close(p1.quantile(0.9).unwrap(), 9.0, 1e-14));
        assert!(p2.quantile(1.0).is_err());
        assert!(p2.quantile(-0.1).is_err());
    }

    #[test]
    fn pareto_formulas() {
        let d = Pareto::new(2.0).unwrap();
        assert!(close(d.density(1.0), 2.0 * 2f64.powi(-3), 1e-14));
        assert!(close(d.cdf(3.0), 15.0 / 16.0, 1e-14));
        assert!(close(d.tail(3.0), 1.0 / 16.0, 1e-14));
        assert!(close(d.ln_density(1.0), (0.25f64).ln(), 1e-14));
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.tail(-2.0), 1.0);
    }

    #[test]
    fn truncated_sampling_examples() {
        let d = Pareto::new(2.0).unwrap();
        assert!(close(d.sample_truncated(1.0, 0.0).unwrap(), 1.0, 1e-14));
        assert!(close(d.sample_truncated(-5.0, 0.75).unwrap(), 1.0, 1e-14));
        // F(3) = 15/16, F⁻¹(63/64) = 8 - 1
        assert!(close(d.sample_truncated(3.0, 0.75).unwrap(), 7.0, 1e-13));
    }

    #[test]
    fn truncated_sampling_unreachable_threshold() {
        let d = Pareto::new(2.0).unwrap();
        let err = d.sample_truncated(1e300, 0.5).unwrap_err();
        assert!(matches!(err, Error::ThresholdUnreachable(_)));
    }

    #[test]
    fn max_tail_examples() {
        let d = Pareto::new(2.0).unwrap();
        let p = max_tail_fixed(&d, 5, 25.0).unwrap();
        assert_eq!(format!("{p:.2e}"), "7.37e-3");
        let p = max_tail_fixed(&d, 5, 100.0).unwrap();
        assert_eq!(format!("{p:.3e}"), "4.901e-4");
        // n = 1 and F(a) = 1/2: (a+1)^-2 = 1/2
        let a = 2f64.sqrt() - 1.0;
        assert!(close(max_tail_fixed(&d, 1, a).unwrap(), 0.5, 1e-14));
        assert!(max_tail_fixed(&d, 0, 1.0).is_err());

        let d1 = Pareto::new(1.0).unwrap();
        let g = Geometric::new(0.2).unwrap();
        assert_eq!(format!("{:.2e}", max_tail_random(&d1, &g, 500.0)), "9.90e-3");
        assert_eq!(format!("{:.2e}", max_tail_random(&d1, &g, 5000.0)), "9.99e-4");
        let one = PointMass::new(1).unwrap();
        assert!(close(max_tail_random(&d1, &one, 40.0), d1.tail(40.0), 1e-15));
    }

    #[test]
    fn max_tail_is_accurate_deep_in_the_tail() {
        let d = Pareto::new(2.0).unwrap();
        let p = max_tail_fixed(&d, 5, 5e4).unwrap();
        assert_eq!(format!("{p:.5e}"), "1.99992e-9");
    }

    #[test]
    fn geometric_truncated_examples() {
        let g = Geometric::new(0.2).unwrap();
        assert_eq!(g.sample_truncated(4, 0.0).unwrap(), 4);
        assert_eq!(g.sample_truncated(4, 0.1).unwrap(), 4);
        let g = Geometric::new(0.5).unwrap();
        // P(k = 3 | k >= 3) = 1/2 and P(k = 4 | k >= 3) = 1/4 by pmf ratio.
        let tail = g.tail_from(3);
        let direct: f64 = (3..200).map(|k| g.pmf(k)).sum();
        assert!(close(tail, direct, 1e-12));
        assert!(close(g.pmf(3) / tail, 0.5, 1e-12));
        assert!(close(g.pmf(4) / tail, 0.25, 1e-12));
        assert_eq!(g.sample_truncated(3, 0.49).unwrap(), 3);
        assert_eq!(g.sample_truncated(3, 0.51).unwrap(), 4);
        assert_eq!(g.sample_truncated(3, 0.74).unwrap(), 4);
        assert_eq!(g.sample_truncated(3, 0.76).unwrap(), 5);
    }

    #[test]
    fn geometric_invariants() {
        let g = Geometric::new(0.2).unwrap();
        let total: f64 = (1..400).map(|k| g.pmf(k)).sum();
        // tail bound beyond the cutoff
        assert!((total + g.tail_from(400) - 1.0).abs() < 1e-9);
        assert!((g.pgf(1.0) - 1.0).abs() < 1e-15);
        assert!(close(g.mean(), 5.0, 1e-15));
        let t = 0.3;
        assert!(close(g.pgf(t), 0.2 * t / (1.0 - 0.8 * t), 1e-15));
        let s = 1e-12;
        assert!(close(g.pgf_complement(s), 1.0 - g.pgf(1.0 - s), 1e-3));
    }

    #[test]
    fn poisson_invariants() {
        for lambda in [0.5, 3.0, 40.0] {
            let p = Poisson::new(lambda).unwrap();
            let cutoff = (lambda * 4.0 + 60.0) as u64;
            let total: f64 = (1..cutoff).map(|k| p.pmf(k)).sum();
            assert!((total + p.tail_from(cutoff) - 1.0).abs() < 1e-9, "lambda {lambda}");
            assert!((p.pgf(1.0) - 1.0).abs() < 1e-12);
            let mean: f64 = (1..cutoff).map(|k| k as f64 * p.pmf(k)).sum();
            assert!(close(p.mean(), mean, 1e-9));
            let direct: f64 = (5..cutoff).map(|k| p.pmf(k)).sum();
            assert!(close(p.tail_from(5), direct, 1e-9));
            let s = 0.01;
            assert!(close(p.pgf_complement(s), 1.0 - p.pgf(1.0 - s), 1e-9));
        }
    }

    #[test]
    fn pgf_monotone() {
        let laws: Vec<Box<dyn CountDistribution>> = vec![
            Box::new(Geometric::new(0.3).unwrap()),
            Box::new(Poisson::new(4.0).unwrap()),
            Box::new(PointMass::new(3).unwrap()),
        ];
        for c in &laws {
            let mut prev = c.pgf(0.0);
            for i in 1..=100 {
                let g = c.pgf(i as f64 / 100.0);
                assert!(g >= prev - 1e-15);
                prev = g;
            }
            assert!((prev - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_truncated_far_tail_is_unreachable() {
        let p = Poisson::new(1.0).unwrap();
        assert!(matches!(
            p.sample_truncated(1000, 0.5),
            Err(Error::ThresholdUnreachable(_))
        ));
        assert_eq!(p.sample_truncated(7, 0.0).unwrap(), 7);
    }

    #[test]
    fn point_mass_truncation() {
        let c = PointMass::new(3).unwrap();
        assert_eq!(c.sample_truncated(2, 0.4).unwrap(), 3);
        assert!(c.sample_truncated(4, 0.4).is_err());
    }

    #[test]
    fn pareto_truncated_matches_conditional_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (beta, c) in [(2.0, 3.0), (1.0, 50.0), (1.5, 0.2)] {
            let d = Pareto::new(beta).unwrap();
            let mut xs: Vec<f64> = (0..100_000)
                .map(|_| d.sample_truncated_rng(c, &mut rng).unwrap())
                .collect();
            assert!(xs.iter().all(|&x| x >= c));
            let tc = d.tail(c);
            let stat = ks_one_sample(&mut xs, |x| (1.0 - d.tail(x) / tc).max(0.0));
            assert!(stat < ks_critical_one_sample(100_000, 0.01), "beta {beta}: D = {stat}");
        }
    }

    #[test]
    fn truncated_counts_match_pmf_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let laws: Vec<(Box<dyn CountDistribution>, u64)> = vec![
            (Box::new(Geometric::new(0.2).unwrap()), 4),
            (Box::new(Geometric::new(0.5).unwrap()), 1),
            (Box::new(Poisson::new(3.0).unwrap()), 5),
        ];
        for (c, kstar) in &laws {
            let mut counts = vec![0u64; 80];
            for _ in 0..100_000 {
                let k = c.sample_truncated(*kstar, uniform(&mut rng)).unwrap();
                assert!(k >= *kstar);
                counts[((k - kstar) as usize).min(79)] += 1;
            }
            let tail = c.tail_from(*kstar);
            let mut probs: Vec<f64> = (0..79).map(|i| c.pmf(kstar + i) / tail).collect();
            probs.push(c.tail_from(kstar + 79) / tail);
            assert!(chi_square_test(&counts, &probs, 0.01), "kstar {kstar}");
        }
    }

    #[test]
    fn count_given_max_weights() {
        let g = Geometric::new(0.2).unwrap();
        let t = 0.01;
        let norm = g.pgf_complement(t);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = vec![0u64; 60];
        for _ in 0..100_000 {
            let k = sample_count_given_max(&g, t, uniform(&mut rng)).unwrap();
            counts[(k as usize - 1).min(59)] += 1;
        }
        let mut probs: Vec<f64> = (1..60)
            .map(|k| g.pmf(k) * complement_power(t, k) / norm)
            .collect();
        probs.push(1.0 - probs.iter().sum::<f64>());
        assert!(chi_square_test(&counts, &probs, 0.01));
    }

    proptest! {
        #[test]
        fn quantile_round_trip(beta in 1.0f64..4.0, u in 0.0f64..0.999_999) {
            let d = Pareto::new(beta).unwrap();
            let x = d.quantile(u).unwrap();
            prop_assert!((d.cdf(x) - u).abs() <= 1e-12 * u.max(1e-300) + 1e-15);
        }

        #[test]
        fn max_tail_between_single_and_union_bounds(
            beta in 1.0f64..3.0, n in 1u64..50, a in 0.0f64..1e6,
        ) {
            let d = Pareto::new(beta).unwrap();
            let t = d.tail(a);
            let p = max_tail_fixed(&d, n, a).unwrap();
            prop_assert!(p >= t * (1.0 - 1e-12));
            prop_assert!(p <= n as f64 * t * (1.0 + 1e-12));
        }

        #[test]
        fn cdf_monotone(beta in 0.5f64..4.0, x in 0.0f64..1e3, dx in 0.0f64..10.0) {
            let d = Pareto::new(beta).unwrap();
            prop_assert!(d.cdf(x + dx) >= d.cdf(x));
            prop_assert!((d.cdf(x) + d.tail(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_round_trip_bulk() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for beta in [1.0, 2.0, 3.5] {
            let d = Pareto::new(beta).unwrap();
            for _ in 0..10_000 {
                let u = uniform(&mut rng);
                let x = d.quantile(u).unwrap();
                assert!((d.cdf(x) - u).abs() <= 1e-10);
            }
        }
    }
}
