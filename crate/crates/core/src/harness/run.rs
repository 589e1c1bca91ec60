use rayon::ThreadPoolBuilder;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimators::{batch_run, EstimatorKind, EstimatorRun};

/// One requested estimator and how it went.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub kind: EstimatorKind,
    pub run: Result<EstimatorRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub p_max: f64,
    pub outcomes: Vec<EstimatorOutcome>,
}

impl ExperimentResult {
    pub fn run_for(&self, kind: EstimatorKind) -> Option<&EstimatorRun> {
        self.outcomes
            .iter()
            .find(|o| o.kind == kind)
            .and_then(|o| o.run.as_ref().ok())
    }

    /// Errors of the estimators that failed.
    pub fn failures(&self) -> Vec<(EstimatorKind, &Error)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.run.as_ref().err().map(|e| (o.kind, e)))
            .collect()
    }
}

/// Runs every requested estimator on a pool of `config.threads` workers.
/// A failing estimator is recorded in its outcome and does not stop the
/// others.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let problem = config.problem()?;
    let p_max = problem.p_max()?;
    let plan = config.plan();
    let pool = ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(vec![format!("cannot start worker pool: {e}")]))?;
    let outcomes = pool.install(|| {
        config
            .estimators
            .iter()
            .map(|&kind| EstimatorOutcome {
                kind,
                run: batch_run(&problem, &plan, kind),
            })
            .collect()
    });
    Ok(ExperimentResult {
        config: config.clone(),
        p_max,
        outcomes,
    })
}
