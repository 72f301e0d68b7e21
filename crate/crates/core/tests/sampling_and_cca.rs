use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use spiked_cca::cca::{brute_force_ccs, sample_covariances, squared_canonical_correlations};
use spiked_cca::model::{coupling_constants, ModelConfig, SpikeSpectrum};
use spiked_cca::sampler::{replicate_rng, sample_coupled, sample_general, DataPair};

fn config(p: usize, q: usize, n: usize, r: Vec<f64>, seed: u64) -> ModelConfig {
    ModelConfig::new(p, q, n, SpikeSpectrum::new(r).unwrap(), seed).unwrap()
}

#[test]
fn coupled_and_general_samplers_agree_in_law() {
    let c = config(4, 4, 20_000, vec![0.5], 31);
    let reps = 200;
    let mean = |general: bool| {
        (0..reps)
            .map(|i| {
                let mut rng = replicate_rng(c.seed, i);
                let pair = if general {
                    sample_general(&c, &mut rng).unwrap()
                } else {
                    sample_coupled(&c, &mut rng).unwrap()
                };
                squared_canonical_correlations(&pair).unwrap().lambdas[0]
            })
            .sum::<f64>()
            / reps as f64
    };
    let (a, b) = (mean(false), mean(true));
    assert!((a - b).abs() < 0.02, "coupled {a} general {b}");
}

#[test]
fn general_sampler_covariance_approaches_sigma() {
    let c = config(4, 4, 100_000, vec![0.64, 0.25], 5);
    let pair = sample_general(&c, &mut replicate_rng(5, 0)).unwrap();
    let cov = sample_covariances(&pair).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((cov.sxx[(i, j)] - id).abs() < 0.05);
            assert!((cov.syy[(i, j)] - id).abs() < 0.05);
            // cross block is diag(sqrt r)
            let cross = match (i, j) {
                (0, 0) => 0.8,
                (1, 1) => 0.5,
                _ => 0.0,
            };
            assert!(
                (cov.sxy[(i, j)] - cross).abs() < 0.05,
                "({i},{j}) {}",
                cov.sxy[(i, j)]
            );
        }
    }
    // the block square root reproduces the population cross covariance 2 alpha beta = sqrt r
    let cc = coupling_constants(0.64).unwrap();
    assert!((2.0 * cc.alpha * cc.beta - 0.8).abs() < 1e-12);
}

#[test]
fn null_covariance_near_identity() {
    let c = config(4, 4, 100_000, vec![], 6);
    let pair = sample_coupled(&c, &mut replicate_rng(6, 0)).unwrap();
    let cov = sample_covariances(&pair).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((cov.sxx[(i, j)] - id).abs() < 0.05);
            assert!(cov.sxy[(i, j)].abs() < 0.05);
        }
    }
}

#[test]
fn null_largest_eigenvalue_near_right_edge() {
    let c = config(100, 200, 1000, vec![], 7);
    let pair = sample_coupled(&c, &mut replicate_rng(7, 0)).unwrap();
    let l1 = squared_canonical_correlations(&pair).unwrap().lambdas[0];
    assert!((l1 - 0.5).abs() < 0.05, "{l1}");
}

fn random_instance(rng: &mut ChaCha20Rng) -> DataPair {
    let p = rng.random_range(1..=8);
    let q = rng.random_range(1..=8);
    let n = rng.random_range((p + q + 2).max(10)..=64);
    let k = rng.random_range(0..=2usize.min(p.min(q)));
    let mut r: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    r.sort_by(|a, b| b.total_cmp(a));
    let c = config(p, q, n, r, 0);
    sample_coupled(&c, rng).unwrap()
}

fn random_nonsingular(d: usize, rng: &mut ChaCha20Rng) -> Mat<f64> {
    // identity plus a small random perturbation keeps the condition number moderate
    Mat::from_fn(d, d, |i, j| {
        let g: f64 = rng.sample(StandardNormal);
        (if i == j { 2.0 } else { 0.0 }) + 0.3 * g
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn stable_path_matches_oracle_and_is_invariant() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let pair = random_instance(&mut rng);
        let stable = squared_canonical_correlations(&pair).unwrap();
        let brute = brute_force_ccs(&pair).unwrap();
        assert_eq!(stable.len(), brute.len());
        assert!(max_diff(&stable.lambdas, &brute.lambdas) < 1e-8);

        let a = random_nonsingular(pair.p(), &mut rng);
        let b = random_nonsingular(pair.q(), &mut rng);
        let moved = DataPair::new(&a * &pair.x, &b * &pair.y).unwrap();
        let again = squared_canonical_correlations(&moved).unwrap();
        assert!(max_diff(&stable.lambdas, &again.lambdas) < 1e-8);

        let scaled = DataPair::new(
            Mat::from_fn(pair.p(), pair.n(), |i, j| -3.5 * pair.x[(i, j)]),
            pair.y.clone(),
        )
        .unwrap();
        let s = squared_canonical_correlations(&scaled).unwrap();
        assert!(max_diff(&stable.lambdas, &s.lambdas) < 1e-12);
    }
}
