use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rare-mcmc");

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).arg("run").args(args).arg("--out").arg(out).output().unwrap()
}

const SMALL: [&str; 14] = [
    "--model", "fixed", "--beta", "2", "--n", "5", "--a", "5", "--T", "3000", "--batches", "3",
    "--seed", "42",
];

#[test]
fn summary_schema_and_number_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&SMALL, dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("estimator,avg_est,std_dev,avg_time_s,p_max,hit_rate,b,T,"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["mcmc", "is", "mc"]);
    for r in &rows {
        assert_eq!(r.len(), header.split(',').count());
        assert_eq!(r[4], "7.37460e-3");
        assert_eq!((r[6], r[7]), ("3", "3000"));
        for field in &r[1..6] {
            let (mantissa, _) = field.split_once('e').unwrap();
            assert_eq!(mantissa.trim_start_matches('-').len(), 7, "{field}");
        }
    }
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn trace_rows_follow_draw_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--trace-every", "4000"]);
    assert!(run(&args, dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,estimate,estimator"));
    let rows: Vec<&str> = lines.collect();
    // Each estimator spends T·n = 15000 draws, so floor(15000 / 4000) = 3 rows.
    for est in ["mcmc", "is", "mc"] {
        let steps: Vec<&str> = rows
            .iter()
            .filter(|l| l.ends_with(&format!(",{est}")))
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(steps, ["4000", "8000", "12000"], "{est}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--no-timing", "--trace-every", "1000"]);
    let read = |sub: &str| {
        let p = dir.path().join(sub);
        assert!(run(&args, &p).status.success());
        (
            std::fs::read(p.join("summary.csv")).unwrap(),
            std::fs::read(p.join("trace.csv")).unwrap(),
        )
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.push("--no-timing");
    let with_env = |threads: &str, sub: &str| {
        let p = dir.path().join(sub);
        let out = Command::new(BIN)
            .env("RARE_MCMC_THREADS", threads)
            .arg("run")
            .args(&args)
            .arg("--out")
            .arg(&p)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(p.join("summary.csv")).unwrap()
    };
    assert_eq!(with_env("1", "one"), with_env("3", "three"));
    let bad = Command::new(BIN)
        .env("RARE_MCMC_THREADS", "lots")
        .arg("run")
        .args(&args)
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["--model", "random", "--count", "geometric", "--beta", "1", "--a", "1000", "--batches", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rho"), "{err}");
    assert!(err.contains("batches must be ≥ 2"), "{err}");
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn unparseable_flags_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--model", "sideways"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toml_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "model = \"random\"\ncount = \"geometric\"\nrho = 0.2\nbeta = 1.0\na = 100.0\n\
         T = 2000\nbatches = 2\nestimators = [\"mc\"]\n",
    )
    .unwrap();
    let out = Command::new(BIN)
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o/summary.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("mc,"));
    assert!(row.contains(",random,pareto,1,,geometric,0.2,100,500,"), "{row}");
    assert!(row.contains(",3,"));

    std::fs::write(&cfg, "model = \"fixed\"\nmystery = 1\n").unwrap();
    let bad = Command::new(BIN).args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_subcommand() {
    let out = Command::new(BIN)
        .args(["oracle", "--beta", "2", "--n", "2", "--threshold", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let recs = rare_mcmc::oracle::parse_fixture(&text).unwrap();
    assert!((recs[0].value - 0.10379109178179721).abs() < 1e-12);

    let infeasible = Command::new(BIN)
        .args(["oracle", "--method", "rejection", "--beta", "2", "--n", "2", "--threshold", "1e5"])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(3));

    let too_deep = Command::new(BIN)
        .args(["oracle", "--beta", "2", "--n", "6", "--threshold", "4"])
        .output()
        .unwrap();
    assert_eq!(too_deep.status.code(), Some(1));
}
