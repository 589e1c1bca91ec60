//! Rare-event estimation for heavy-tailed random walks.
//!
//! The tail probability `p = P(S > a)` of a sum of i.i.d. heavy-tailed steps
//! (a fixed number `n` of them, or a random number `N`) is estimated through
//! its reciprocal. A Gibbs sampler produces a Markov chain whose invariant
//! law is the conditional law of the steps given `S > a`; averaging the
//! indicator that the largest step alone exceeds `a`, divided by the
//! closed-form `P(max > a)`, gives an unbiased estimate of `1 / p`.
//!
//! Modules:
//! - [`distributions`]: step laws (Pareto) and count laws (geometric, Poisson).
//! - [`chain_fixed`], [`chain_random`]: the Gibbs samplers.
//! - [`estimators`]: the reciprocal estimator, standard Monte Carlo and a
//!   defensive-mixture importance sampler, with batch reporting.
//! - [`oracle`]: quadrature and rejection-sampling ground truth.
//! - [`harness`]: experiment configuration, execution and CSV output.

pub mod chain_fixed;
pub mod chain_random;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod oracle;

pub use error::{Error, Result};
