use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use ssamt_core::simulation::{replication_seed, GaussianSource, StudyConfig};
use ssamt_core::*;
use std::f64::consts::PI;

/// `count` distinct positions out of `n`, chosen by a seeded shuffle.
fn gap_positions(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
    }
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

fn with_gaps(values: &[f64], gaps: &[usize]) -> TimeSeries {
    let opts: Vec<Option<f64>> = (0..values.len()).map(|i| if gaps.contains(&i) { None } else { Some(values[i]) }).collect();
    TimeSeries::from_options("x", &opts).unwrap()
}

#[test]
fn sinusoid_gaps_are_recovered() {
    let truth: Vec<f64> = (1..=120).map(|t| (2.0 * PI * t as f64 / 12.0).sin()).collect();
    for seed in [1, 2, 3] {
        let gaps = gap_positions(120, 12, seed);
        let input = with_gaps(&truth, &gaps);
        let out = impute(&input, &ImputeOptions::new(60).with_rank(RankRule::Fixed(2))).unwrap();
        assert!(out.converged && out.iterations <= 100);
        assert!(!out.series.has_missing());
        for i in 0..120 {
            if gaps.contains(&i) {
                assert!((out.series.values()[i] - truth[i]).abs() <= 0.05, "seed {seed} at {i}");
            } else {
                assert_eq!(out.series.values()[i].to_bits(), truth[i].to_bits());
            }
        }
    }
}

#[test]
fn default_rank_rule_fills_sinusoid_gaps() {
    let truth: Vec<f64> = (1..=120).map(|t| (2.0 * PI * t as f64 / 12.0).sin()).collect();
    for seed in [4, 5, 6] {
        let gaps = gap_positions(120, 12, seed);
        let out = impute(&with_gaps(&truth, &gaps), &ImputeOptions::new(60)).unwrap();
        assert!(out.converged);
        for &i in &gaps {
            assert!((out.series.values()[i] - truth[i]).abs() <= 0.05, "seed {seed} at {i}");
        }
    }
}

#[test]
fn constant_gap_takes_the_constant() {
    let c = 2.75;
    let input = with_gaps(&[c; 30], &[13]);
    let out = impute(&input, &ImputeOptions::new(10).with_rank(RankRule::Fixed(1))).unwrap();
    assert!((out.series.values()[13] - c).abs() <= 1e-6);
}

#[test]
fn imputation_errors_and_determinism() {
    let full = TimeSeries::new("x", vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    assert_eq!(impute(&full, &ImputeOptions::new(2)), Err(Error::NothingToImpute));
    let empty = TimeSeries::from_options("x", &[None, None, None, None]).unwrap();
    assert_eq!(impute(&empty, &ImputeOptions::new(2)), Err(Error::AllMissing));

    let mut g = GaussianSource::new(4);
    let noisy: Vec<f64> = (0..60).map(|t| (t as f64 / 4.0).cos() + 0.2 * g.next_standard()).collect();
    let input = with_gaps(&noisy, &gap_positions(60, 6, 9));
    let opts = ImputeOptions::new(20).with_max_iter(3);
    let a = impute(&input, &opts).unwrap();
    assert_eq!(a, impute(&input, &opts).unwrap());
    assert!(a.iterations <= 3);
    if !a.converged {
        assert_eq!(a.iterations, 3);
    }
}

#[test]
fn noise_moments() {
    let n = 1_000_000;
    let mut g = GaussianSource::new(123);
    let sigma = 2.5;
    let draws: Vec<f64> = (0..n).map(|_| sigma * g.next_standard()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() <= 4.0 * sigma / 1000.0, "{mean}");
    assert!((var / (sigma * sigma) - 1.0).abs() <= 0.01, "{var}");

    let zero = TimeSeries::new("f", vec![0.0; 1000]).unwrap();
    let noise = add_noise(&zero, sigma, 5).unwrap();
    let mut again = GaussianSource::new(5);
    for v in noise.values() {
        assert_eq!(*v, sigma * again.next_standard());
    }
}

#[test]
fn near_noiseless_study_recovers_every_model() {
    for kind in SignalKind::ALL {
        let cfg = StudyConfig {
            model: SignalModel::new(kind, 100).unwrap(),
            replications: 10,
            windows: vec![50],
            sigma: 1e-8,
            seed: 17,
            rank: RankRule::default(),
        };
        let rep = run_study(&cfg).unwrap();
        assert!(rep.mean_rmse[0] < 1e-4, "{kind}: {}", rep.mean_rmse[0]);
    }
}

#[test]
fn first_replication_is_independent_of_study_size() {
    let cfg = StudyConfig {
        model: SignalModel::new(SignalKind::CosinePlusLinear, 100).unwrap(),
        replications: 1,
        windows: vec![10, 30, 50],
        sigma: 1.0,
        seed: 99,
        rank: RankRule::default(),
    };
    let first = run_replication(&cfg, 0).unwrap();
    assert_eq!(run_study(&cfg).unwrap().mean_rmse, first.rmse);
    let two = StudyConfig { replications: 2, ..cfg.clone() };
    assert_eq!(run_replication(&two, 0).unwrap(), first);
    assert_ne!(replication_seed(99, 0), replication_seed(99, 1));
    assert_eq!(run_study(&two).unwrap(), run_study(&two).unwrap());
}
