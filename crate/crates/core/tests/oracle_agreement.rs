use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rare_mcmc::distributions::{Pareto, StepDistribution};
use rare_mcmc::oracle::{
    parse_fixture, rejection_sample_fixed, tail_prob_quadrature, OracleMethod, OracleRecord,
};

fn fixture() -> Vec<OracleRecord> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.csv");
    parse_fixture(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture_value(beta: &str, n: &str, a: f64) -> f64 {
    fixture()
        .into_iter()
        .find(|r| r.param("beta") == Some(beta) && r.param("n") == Some(n) && r.a == a)
        .unwrap()
        .value
}

#[test]
fn fixture_reproduces_under_quadrature() {
    let records = fixture();
    assert!(records.len() >= 5);
    for r in records {
        let beta: f64 = r.param("beta").unwrap().parse().unwrap();
        let n: usize = r.param("n").unwrap().parse().unwrap();
        let got = tail_prob_quadrature(&Pareto::new(beta).unwrap(), n, r.a).unwrap();
        assert_eq!(got.method, OracleMethod::Quadrature);
        assert!((got.value - r.value).abs() <= 1e-10 * r.value, "{r:?} vs {got:?}");
    }
}

// Values from an independent scipy.integrate.quad evaluation of the same
// convolution recursion.
#[test]
fn fixture_matches_independent_quadrature() {
    let frozen = [
        ("2", 2.0, 0.2806641176979843),
        ("2", 4.0, 0.10379109178179721),
        ("2", 25.0, 0.0032156783392745603),
        ("3", 3.0, 0.2969243237422921),
        ("3", 10.0, 0.0352725925258617),
    ];
    for (n, a, want) in frozen {
        let got = fixture_value("2", n, a);
        assert!((got - want).abs() <= 1e-12 * want, "n={n} a={a}: {got} vs {want}");
    }
}

#[test]
fn two_steps_deep_threshold_against_plain_monte_carlo() {
    let d = Pareto::new(2.0).unwrap();
    let p = tail_prob_quadrature(&d, 2, 25.0).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(2525);
    let trials = 20_000_000u64;
    let hits = (0..trials)
        .filter(|_| d.sample_rng(&mut rng) + d.sample_rng(&mut rng) > 25.0)
        .count() as f64;
    let phat = hits / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((phat - p).abs() < 4.0 * se, "{phat} vs {p} (se {se})");
}

#[test]
fn rejection_acceptance_rate_matches_fixture() {
    let d = Pareto::new(2.0).unwrap();
    let p = fixture_value("2", "2", 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let samples = 50_000u64;
    let trials: u64 = (0..samples)
        .map(|_| rejection_sample_fixed(&d, 2, 4.0, &mut rng).unwrap().1)
        .sum();
    // The trial count is a sum of geometric variables with mean 1/p.
    let mean = trials as f64 / samples as f64;
    let se = ((1.0 - p) / (p * p) / samples as f64).sqrt();
    assert!((mean - 1.0 / p).abs() < 3.0 * se, "{mean} vs {}", 1.0 / p);
}

#[test]
fn three_steps_dominate_two_and_one() {
    let d = Pareto::new(2.0).unwrap();
    for a in [3.0, 10.0] {
        let p3 = fixture_value("2", "3", a);
        let p2 = tail_prob_quadrature(&d, 2, a).unwrap().value;
        assert!(p3 > p2 && p2 > d.tail(a));
    }
}
