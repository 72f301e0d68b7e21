//! Model configuration: dimension ratios, spike spectra and the reparametrisation
//! of a squared canonical correlation `r` into the coupling strength `t` of the
//! construction `X = W + T Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Asymptotic ratios `c1 = p/n` and `c2 = q/n`.
///
/// Every limit formula in [`crate::rmt`] is symmetric in the two ratios, so the
/// orientation `p > q` is not required. Equal ratios are accepted but flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRatios", into = "RawRatios")]
pub struct DimensionRatios {
    c1: f64,
    c2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRatios {
    c1: f64,
    c2: f64,
}

impl TryFrom<RawRatios> for DimensionRatios {
    type Error = Error;
    fn try_from(raw: RawRatios) -> Result<Self> {
        DimensionRatios::new(raw.c1, raw.c2)
    }
}

impl From<DimensionRatios> for RawRatios {
    fn from(r: DimensionRatios) -> Self {
        RawRatios { c1: r.c1, c2: r.c2 }
    }
}

impl DimensionRatios {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1 < 1.0) {
            return Err(Error::Config(format!("c1 = {c1} must lie in (0, 1)")));
        }
        if !(c2 > 0.0 && c2 < 1.0) {
            return Err(Error::Config(format!("c2 = {c2} must lie in (0, 1)")));
        }
        if !(c1 + c2 < 1.0) {
            return Err(Error::Config(format!("c1 + c2 = {} must be < 1", c1 + c2)));
        }
        let ratios = DimensionRatios { c1, c2 };
        if ratios.equal_ratios() {
            log::warn!("c1 == c2 = {c1}: limit formulas remain finite, but the asymptotic theory assumes q/p does not tend to 1");
        }
        Ok(ratios)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// True when `c1 == c2`.
    pub fn equal_ratios(&self) -> bool {
        self.c1 == self.c2
    }

    pub fn c_min(&self) -> f64 {
        self.c1.min(self.c2)
    }

    pub fn swapped(&self) -> Self {
        DimensionRatios {
            c1: self.c2,
            c2: self.c1,
        }
    }

    /// `c1 c2 (1 - c1)(1 - c2)`, the radicand shared by the edges and the threshold.
    pub(crate) fn cross_term(&self) -> f64 {
        self.c1 * self.c2 * (1.0 - self.c1) * (1.0 - self.c2)
    }
}

/// `c1 = p/n`, `c2 = q/n` from integer dimensions.
pub fn ratios_from_dims(p: usize, q: usize, n: usize) -> Result<DimensionRatios> {
    check_dims(p, q, n)?;
    DimensionRatios::new(p as f64 / n as f64, q as f64 / n as f64)
}

pub(crate) fn check_dims(p: usize, q: usize, n: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::Config(format!(
            "dimensions must be positive (p = {p}, q = {q})"
        )));
    }
    if p >= n {
        return Err(Error::Config(format!("p < n violated (p = {p}, n = {n})")));
    }
    if q >= n {
        return Err(Error::Config(format!("q < n violated (q = {q}, n = {n})")));
    }
    if p + q >= n {
        return Err(Error::Config(format!(
            "p + q < n violated (p + q = {}, n = {n})",
            p + q
        )));
    }
    Ok(())
}

/// Population squared canonical correlations `1 >= r[0] >= ... >= r[k-1] > 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpikeSpectrum(Vec<f64>);

impl TryFrom<Vec<f64>> for SpikeSpectrum {
    type Error = Error;
    fn try_from(r: Vec<f64>) -> Result<Self> {
        SpikeSpectrum::new(r)
    }
}

impl From<SpikeSpectrum> for Vec<f64> {
    fn from(s: SpikeSpectrum) -> Self {
        s.0
    }
}

impl SpikeSpectrum {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        for (i, &ri) in r.iter().enumerate() {
            if !(ri > 0.0 && ri <= 1.0) {
                return Err(Error::Config(format!(
                    "spike r[{i}] = {ri} must lie in (0, 1]"
                )));
            }
        }
        if let Some(i) = r.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::Config(format!(
                "spikes must be nonincreasing: r[{i}] = {} < r[{}] = {}",
                r[i],
                i + 1,
                r[i + 1]
            )));
        }
        Ok(SpikeSpectrum(r))
    }

    pub fn empty() -> Self {
        SpikeSpectrum(Vec::new())
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    /// Number of spikes equal to one (perfectly correlated directions).
    pub fn unit_count(&self) -> usize {
        self.0.iter().filter(|&&r| r == 1.0).count()
    }
}

/// Per-spike constants of the square-root construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub t: f64,
}

/// `t = sqrt(r / (1 - r))`, the coupling strength that produces spike `r`.
pub fn spike_to_t(r: f64) -> Result<f64> {
    if r == 1.0 {
        return Err(Error::Domain(
            "r = 1 has infinite coupling strength; use the deterministic lambda = 1 case".into(),
        ));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("spike r = {r} must lie in (0, 1)")));
    }
    Ok((r / (1.0 - r)).sqrt())
}

/// Inverse of [`spike_to_t`]: `r = t^2 / (1 + t^2)`.
pub fn t_to_spike(t: f64) -> f64 {
    let t2 = t * t;
    t2 / (1.0 + t2)
}

/// `alpha`, `beta` of the block square root of `[[I, R], [R', I]]`, their ratio
/// `tau`, and `t = 2 tau / (1 - tau^2)`.
///
/// `alpha` and `beta` are also defined at `r = 1` (both `1/sqrt 2`); see
/// [`unit_alpha_beta`]. Here `r = 1` is rejected because `tau = 1` makes `t` singular.
pub fn coupling_constants(r: f64) -> Result<CouplingConstants> {
    if r == 1.0 {
        return Err(Error::Domain("r = 1 gives tau = 1 and a singular t".into()));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("spike r = {r} must lie in (0, 1)")));
    }
    let (alpha, beta) = alpha_beta(r);
    let tau = beta / alpha;
    let t = 2.0 * tau / (1.0 - tau * tau);
    Ok(CouplingConstants {
        alpha,
        beta,
        tau,
        t,
    })
}

pub(crate) fn alpha_beta(r: f64) -> (f64, f64) {
    let s = r.sqrt();
    let plus = (1.0 + s).sqrt();
    let minus = (1.0 - s).sqrt();
    ((plus + minus) / 2.0, (plus - minus) / 2.0)
}

/// `alpha = beta = 1/sqrt(2)` for a unit spike.
pub fn unit_alpha_beta() -> (f64, f64) {
    alpha_beta(1.0)
}

/// Dimensions, spikes and seed of one simulated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub spikes: SpikeSpectrum,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(p: usize, q: usize, n: usize, spikes: SpikeSpectrum, seed: u64) -> Result<Self> {
        let config = ModelConfig {
            p,
            q,
            n,
            spikes,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.p, self.q, self.n)?;
        let k = self.spikes.k();
        if k > self.p.min(self.q) {
            return Err(Error::Config(format!(
                "k <= min(p, q) violated (k = {k}, min(p, q) = {})",
                self.p.min(self.q)
            )));
        }
        Ok(())
    }

    pub fn ratios(&self) -> Result<DimensionRatios> {
        ratios_from_dims(self.p, self.q, self.n)
    }

    pub fn min_dim(&self) -> usize {
        self.p.min(self.q)
    }
}
