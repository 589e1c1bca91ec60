use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rare_mcmc::distributions::{CountLaw, Geometric, Pareto};
use rare_mcmc::harness::{self, emit_csv, run_experiment, ExperimentConfig, RawConfig};
use rare_mcmc::oracle::{
    rejection_sample_fixed, rejection_sample_random, render_fixture, tail_prob_quadrature,
    OracleMethod, OracleRecord,
};
use rare_mcmc::{Error, Result};

#[derive(Parser)]
#[command(name = "rare-mcmc", version, about = "Tail probabilities of heavy-tailed random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run batched estimator comparisons and write CSV.
    Run {
        /// TOML file with experiment settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for summary.csv and trace.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        flags: RawConfig,
    },
    /// Compute reference values of P(S > threshold).
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Quadrature,
    Rejection,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "quadrature")]
    method: OracleKind,
    #[arg(long)]
    beta: f64,
    /// Number of steps (fixed model).
    #[arg(long, conflicts_with = "rho")]
    n: Option<usize>,
    /// Geometric count parameter (random model, rejection only).
    #[arg(long)]
    rho: Option<f64>,
    /// Raw thresholds, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    threshold: Vec<f64>,
    /// Accepted draws per threshold for the rejection method.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the records as a fixture file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn oracle(args: &OracleArgs) -> Result<Vec<OracleRecord>> {
    let d = Pareto::new(args.beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut records = Vec::new();
    for &a in &args.threshold {
        let (model, params) = match (args.n, args.rho) {
            (Some(n), None) => ("fixed", format!("beta={};n={n}", args.beta)),
            (None, Some(rho)) => ("geometric", format!("beta={};rho={rho}", args.beta)),
            _ => return Err(Error::Config(vec!["give exactly one of --n or --rho".into()])),
        };
        let (value, error_bound, method) = match args.method {
            OracleKind::Quadrature => {
                let n = args
                    .n
                    .ok_or_else(|| Error::Config(vec!["quadrature needs --n".into()]))?;
                let r = tail_prob_quadrature(&d, n, a)?;
                (r.value, r.abs_error_bound, r.method)
            }
            OracleKind::Rejection => {
                let mut trials = 0u64;
                for _ in 0..args.samples {
                    trials += match (args.n, args.rho) {
                        (Some(n), _) => rejection_sample_fixed(&d, n, a, &mut rng)?.1,
                        (_, Some(rho)) => {
                            let c = CountLaw::Geometric(Geometric::new(rho)?);
                            rejection_sample_random(&d, &c, a, &mut rng)?.1
                        }
                        _ => unreachable!(),
                    };
                }
                let p = args.samples as f64 / trials as f64;
                let se = p * ((1.0 - p) / args.samples as f64).sqrt();
                (p, 3.0 * se, OracleMethod::Rejection)
            }
        };
        records.push(OracleRecord {
            model: model.into(),
            params,
            a,
            value,
            error_bound,
            method,
        });
    }
    Ok(records)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, flags } => {
            let cfg = ExperimentConfig::load(config.as_ref(), &flags)?;
            let result = run_experiment(&cfg)?;
            for (kind, err) in result.failures() {
                eprintln!("estimator {} failed: {err}", kind.name());
            }
            for path in emit_csv(&result, &out)? {
                println!("{}", path.display());
            }
            if result.failures().len() == result.outcomes.len() {
                let (_, err) = result.failures()[0];
                return Err(err.clone());
            }
            Ok(())
        }
        Command::Oracle(args) => {
            let records = oracle(&args)?;
            let text = render_fixture(&records);
            match &args.out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(harness::exit_code(&err) as u8)
        }
    }
}
