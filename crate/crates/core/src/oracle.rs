//! Ground truth at desk scale: convolution quadrature for `P(S_n > a)` with
//! `n <= 4`, and exact rejection samplers for the conditional laws.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::distributions::{
    max_tail_fixed, max_tail_random, uniform, CountDistribution, StepDistribution,
};
use crate::error::{Error, Result};

/// Upper limit on expected rejection trials per accepted sample.
pub const MAX_EXPECTED_TRIALS: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Quadrature,
    Rejection,
    ClosedForm,
}

impl OracleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleMethod::Quadrature => "quadrature",
            OracleMethod::Rejection => "rejection",
            OracleMethod::ClosedForm => "closed_form",
        }
    }
}

impl FromStr for OracleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(OracleMethod::Quadrature),
            "rejection" => Ok(OracleMethod::Rejection),
            "closed_form" => Ok(OracleMethod::ClosedForm),
            other => Err(Error::Domain(format!("unknown oracle method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub abs_error_bound: f64,
    pub method: OracleMethod,
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (nonnegative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Kronrod estimate and |Kronrod − Gauss| on `[lo, hi]`; integrand errors
/// reported by `f` are integrated with the Kronrod weights.
fn gk15<F: FnMut(f64) -> (f64, f64)>(f: &mut F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let (fc, ec) = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut inner_err = ec * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        kronrod += WGK[i] * (f1 + f2);
        inner_err += WGK[i] * (e1 + e2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs() + inner_err * half;
    (value, err)
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive GK15 over the given breakpoints until the summed error
/// estimate falls below `tol`. Returns (integral, error estimate).
fn integrate<F: FnMut(f64) -> (f64, f64)>(mut f: F, breakpoints: &[f64], tol: f64) -> (f64, f64) {
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&mut f, w[0], w[1]);
            heap.push(Segment { lo: w[0], hi: w[1], value, err });
        }
    }
    loop {
        let total_err: f64 = heap.iter().map(|s| s.err).sum();
        if total_err <= tol || heap.len() >= MAX_INTERVALS {
            let value = heap.iter().map(|s| s.value).sum();
            return (value, total_err);
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // cannot subdivide further at double precision
            heap.push(worst);
            let value = heap.iter().map(|s| s.value).sum();
            let err = heap.iter().map(|s| s.err).sum();
            return (value, err);
        }
        let (v1, e1) = gk15(&mut f, worst.lo, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.hi);
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, err: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, err: e2 });
    }
}

/// `P(S_k > x)` by the recursion `p_k(x) = F̄(x) + ∫_0^x p_{k−1}(x − y) f(y) dy`.
fn convolution_tail<D: StepDistribution>(d: &D, k: usize, x: f64, tol: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (1.0, 0.0);
    }
    if k == 1 {
        return (d.tail(x), 0.0);
    }
    let inner_tol = tol * 0.1;
    let integrand = |y: f64| {
        let (p, e) = convolution_tail(d, k - 1, x - y, inner_tol);
        let fy = d.density(y);
        (p * fy, e * fy)
    };
    // Split where the density is concentrated and at the midpoint, where the
    // two factors trade dominance.
    let mut cuts = vec![0.0];
    for c in [1.0, 0.5 * x, x - 1.0] {
        if c > 0.0 && c < x && c > *cuts.last().unwrap() {
            cuts.push(c);
        }
    }
    cuts.push(x);
    let (integral, err) = integrate(integrand, &cuts, tol * 0.9);
    (d.tail(x) + integral, err)
}

/// `P(S_n > a)` for `n <= 4` i.i.d. steps, with absolute error target
/// `1e-10 · max(p, 1e-12)`.
pub fn tail_prob_quadrature<D: StepDistribution>(d: &D, n: usize, a: f64) -> Result<OracleResult> {
    if n == 0 {
        return Err(Error::Domain("number of steps must be >= 1".into()));
    }
    if n > 4 {
        return Err(Error::UnsupportedDepth(n));
    }
    if n == 1 || a <= 0.0 {
        return Ok(OracleResult {
            value: if a <= 0.0 { 1.0 } else { d.tail(a) },
            abs_error_bound: 0.0,
            method: OracleMethod::ClosedForm,
        });
    }
    // p >= F̄(a), so this tolerance meets the target relative to p.
    let tol = 1e-10 * d.tail(a).max(1e-12);
    let (value, err) = convolution_tail(d, n, a, tol);
    Ok(OracleResult {
        value,
        abs_error_bound: err,
        method: OracleMethod::Quadrature,
    })
}

fn guard(p_lower: f64) -> Result<()> {
    let expected_trials = 1.0 / p_lower;
    if !(expected_trials <= MAX_EXPECTED_TRIALS) {
        return Err(Error::OracleInfeasible {
            expected_trials,
            limit: MAX_EXPECTED_TRIALS,
        });
    }
    Ok(())
}

/// Exact draw from the steps given `S_n > a`, by resampling until accepted.
/// Refuses when `1 / P(max > a)`, an upper bound on the expected number of
/// trials, exceeds [`MAX_EXPECTED_TRIALS`]. Returns the steps and the
/// number of trials used.
pub fn rejection_sample_fixed<D, R>(d: &D, n: usize, a: f64, rng: &mut R) -> Result<(Vec<f64>, u64)>
where
    D: StepDistribution,
    R: Rng + ?Sized,
{
    guard(max_tail_fixed(d, n as u64, a)?)?;
    let mut trials = 0u64;
    loop {
        trials += 1;
        let steps: Vec<f64> = (0..n).map(|_| d.sample_rng(rng)).collect();
        if steps.iter().sum::<f64>() > a {
            return Ok((steps, trials));
        }
    }
}

/// Exact draw of `(N, Y_1..Y_N)` given `Y_1 + ... + Y_N > a`; the count is
/// the length of the returned vector.
pub fn rejection_sample_random<D, C, R>(d: &D, c: &C, a: f64, rng: &mut R) -> Result<(Vec<f64>, u64)>
where
    D: StepDistribution,
    C: CountDistribution,
    R: Rng + ?Sized,
{
    guard(max_tail_random(d, c, a))?;
    let mut trials = 0u64;
    loop {
        trials += 1;
        let k = c.sample(uniform(rng))? as usize;
        let steps: Vec<f64> = (0..k).map(|_| d.sample_rng(rng)).collect();
        if steps.iter().sum::<f64>() > a {
            return Ok((steps, trials));
        }
    }
}

/// One line of the oracle fixture: `model,params,a,value,error_bound,method`.
/// `params` uses `;`-separated `key=value` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRecord {
    pub model: String,
    pub params: String,
    pub a: f64,
    pub value: f64,
    pub error_bound: f64,
    pub method: OracleMethod,
}

pub const FIXTURE_HEADER: &str = "model,params,a,value,error_bound,method";

impl OracleRecord {
    /// Value of `key` in the params field.
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }
}

impl fmt::Display for OracleRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:.16e},{:.3e},{}",
            self.model,
            self.params,
            self.a,
            self.value,
            self.error_bound,
            self.method.as_str()
        )
    }
}

impl FromStr for OracleRecord {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Domain(format!("expected 6 fields in `{line}`")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad number `{s}` in `{line}`")))
        };
        Ok(OracleRecord {
            model: fields[0].to_string(),
            params: fields[1].to_string(),
            a: num(fields[2])?,
            value: num(fields[3])?,
            error_bound: num(fields[4])?,
            method: fields[5].parse()?,
        })
    }
}

/// Parses fixture text, skipping the header, blank lines and `#` comments.
pub fn parse_fixture(text: &str) -> Result<Vec<OracleRecord>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && *l != FIXTURE_HEADER)
        .map(str::parse)
        .collect()
}

pub fn render_fixture(records: &[OracleRecord]) -> String {
    let mut out = String::from(FIXTURE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}
