//! Paired Gaussian data under the spiked model.
//!
//! Two constructions are provided. [`sample_coupled`] builds `X = W + T Y` with
//! `T = diag(t_1, .., t_k)` embedded in a `p x q` zero matrix and keeps `W` and `T`
//! around for the determinant machinery in [`crate::detverify`].
//! [`sample_general`] applies the block square root of `[[I, R], [R', I]]` to two
//! independent standard normal blocks and also supports unit spikes.
//!
//! # Random streams
//!
//! Every draw comes from ChaCha20 (`rand_chacha::ChaCha20Rng`). The 256-bit key
//! is expanded from the 64-bit seed by `SeedableRng::seed_from_u64`, and replicate
//! `i` reads from ChaCha stream `i`, so replicates are independent of each other
//! and of the order in which they are generated. Standard normals use the
//! ziggurat sampler of `rand_distr::StandardNormal`. Matrices are filled sample
//! by sample (column-major in the `variables x samples` layout), the `x`-side
//! block before the `y`-side block.

use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{alpha_beta, spike_to_t, ModelConfig};

/// Data matrices `X` (`p x n`) and `Y` (`q x n`), one column per sample.
#[derive(Debug, Clone)]
pub struct DataPair {
    pub x: Mat<f64>,
    pub y: Mat<f64>,
    pub latent: Option<Latent>,
}

/// The noise block `W` and the coupling diagonal of `T` from `X = W + T Y`.
#[derive(Debug, Clone)]
pub struct Latent {
    pub w: Mat<f64>,
    /// `t_1, .., t_k`; every other entry of `T` is zero.
    pub t: Vec<f64>,
}

impl Latent {
    /// `T` as a dense `p x q` matrix.
    pub fn t_matrix(&self, p: usize, q: usize) -> Mat<f64> {
        let mut t = Mat::zeros(p, q);
        for (i, &ti) in self.t.iter().enumerate() {
            t[(i, i)] = ti;
        }
        t
    }
}

impl DataPair {
    pub fn new(x: Mat<f64>, y: Mat<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::Config(format!(
                "X has {} samples but Y has {}",
                x.ncols(),
                y.ncols()
            )));
        }
        Ok(DataPair { x, y, latent: None })
    }

    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    pub fn q(&self) -> usize {
        self.y.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }
}

/// Generator for replicate `replicate` of an experiment seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn gaussian_block<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<f64> {
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// `X = W + T Y` with i.i.d. standard normal `W` and `Y`.
///
/// The population canonical correlation matrix of this construction is
/// `(I + T T')^{-1} T T'`, whose nonzero eigenvalues are `t_i^2 / (1 + t_i^2) = r_i`.
pub fn sample_coupled<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<DataPair> {
    config.validate()?;
    if config.spikes.unit_count() > 0 {
        return Err(Error::Unsupported(
            "the coupled sampler cannot represent r = 1 (infinite t); use sample_general, \
             where such directions give lambda = 1 exactly"
                .into(),
        ));
    }
    let t = config
        .spikes
        .iter()
        .map(spike_to_t)
        .collect::<Result<Vec<_>>>()?;
    let (p, q, n) = (config.p, config.q, config.n);
    let w = gaussian_block(p, n, rng);
    let y = gaussian_block(q, n, rng);
    let mut x = w.clone();
    for (i, &ti) in t.iter().enumerate() {
        for j in 0..n {
            x[(i, j)] = w[(i, j)] + ti * y[(i, j)];
        }
    }
    Ok(DataPair {
        x,
        y,
        latent: Some(Latent { w, t }),
    })
}

/// `(X; Y) = Sigma^{1/2} (W1; W2)` with `Sigma = [[I_p, R], [R', I_q]]`,
/// `R = diag(sqrt r_i)`.
///
/// The square root has blocks `P1 = diag(alpha_i) + I`, `P2 = diag(alpha_i) + I`,
/// `P3 = diag(beta_i) + 0`. Unit spikes are allowed: there `alpha = beta` and the
/// corresponding rows of `X` and `Y` coincide.
pub fn sample_general<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<DataPair> {
    config.validate()?;
    let (p, q, n) = (config.p, config.q, config.n);
    let w1 = gaussian_block(p, n, rng);
    let w2 = gaussian_block(q, n, rng);
    let mut x = w1.clone();
    let mut y = w2.clone();
    for (i, r) in config.spikes.iter().enumerate() {
        let (alpha, beta) = alpha_beta(r);
        for j in 0..n {
            x[(i, j)] = alpha * w1[(i, j)] + beta * w2[(i, j)];
            y[(i, j)] = beta * w1[(i, j)] + alpha * w2[(i, j)];
        }
    }
    Ok(DataPair { x, y, latent: None })
}

/// Both samplers driven by `config.seed`, stream 0.
pub fn sample_coupled_seeded(config: &ModelConfig) -> Result<DataPair> {
    sample_coupled(config, &mut replicate_rng(config.seed, 0))
}

pub fn sample_general_seeded(config: &ModelConfig) -> Result<DataPair> {
    sample_general(config, &mut replicate_rng(config.seed, 0))
}

fn center_rows(m: &Mat<f64>) -> Mat<f64> {
    let n = m.ncols();
    let mut out = m.clone();
    for i in 0..m.nrows() {
        let mean = (0..n).map(|j| m[(i, j)]).sum::<f64>() / n as f64;
        for j in 0..n {
            out[(i, j)] = m[(i, j)] - mean;
        }
    }
    out
}

/// Subtracts each row's sample mean. The latent block is dropped since
/// `X = W + T Y` no longer holds for the centred data.
pub fn subtract_means(pair: &DataPair) -> Result<DataPair> {
    if pair.n() < 2 {
        return Err(Error::Config("centering needs n >= 2".into()));
    }
    Ok(DataPair {
        x: center_rows(&pair.x),
        y: center_rows(&pair.y),
        latent: None,
    })
}
