//! Sample covariance blocks and squared sample canonical correlations.
//!
//! [`squared_canonical_correlations`] never forms an inverse: it takes
//! orthonormal bases `Q_x`, `Q_y` of the row spaces of `X` and `Y` and returns the
//! squared singular values of `Q_x' Q_y`. These are the eigenvalues of
//! `S_xx^{-1} S_xy S_yy^{-1} S_yx` since that matrix is similar to the product of
//! the two projections onto the row spaces. [`brute_force_ccs`] evaluates the
//! matrix product literally and serves as the oracle.

use faer::prelude::*;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::DataPair;

/// Relative threshold on `lambda_min / lambda_max` of a covariance block.
pub const SINGULARITY_RCOND: f64 = 1e-10;
/// Allowed excursion outside `[0, 1]` before an eigenvalue is reported as an error.
pub const RANGE_SLACK: f64 = 1e-10;
/// Largest block dimension accepted by the brute-force oracle.
pub const ORACLE_MAX_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct SampleCov {
    pub sxx: Mat<f64>,
    pub syy: Mat<f64>,
    pub sxy: Mat<f64>,
    pub divisor: usize,
}

impl SampleCov {
    pub fn syx(&self) -> Mat<f64> {
        self.sxy.transpose().to_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Stable,
    BruteForce,
}

/// Squared sample canonical correlations in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub lambdas: Vec<f64>,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub method: Method,
}

impl EigenReport {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn top(&self, m: usize) -> &[f64] {
        &self.lambdas[..m.min(self.lambdas.len())]
    }
}

pub(crate) fn scale(m: &Mat<f64>, s: f64) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

/// `Sxx = X X'/n`, `Syy = Y Y'/n`, `Sxy = X Y'/n` (divisor `n`, data used as given).
pub fn sample_covariances(pair: &DataPair) -> Result<SampleCov> {
    let n = pair.n();
    if n < 2 {
        return Err(Error::Config("sample covariances need n >= 2".into()));
    }
    let inv = 1.0 / n as f64;
    let sxx = scale(&(&pair.x * pair.x.transpose()), inv);
    let syy = scale(&(&pair.y * pair.y.transpose()), inv);
    let sxy = scale(&(&pair.x * pair.y.transpose()), inv);
    Ok(SampleCov {
        sxx,
        syy,
        sxy,
        divisor: n,
    })
}

fn check_shape(pair: &DataPair) -> Result<()> {
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    if p == 0 || q == 0 {
        return Err(Error::Config("empty data block".into()));
    }
    if p >= n || q >= n {
        return Err(Error::Config(format!(
            "need p < n and q < n (p = {p}, q = {q}, n = {n})"
        )));
    }
    Ok(())
}

/// Orthonormal basis of the row space of `data` (`dim x n`), as an `n x dim` matrix.
pub(crate) fn row_space_basis(data: &Mat<f64>, block: &'static str) -> Result<Mat<f64>> {
    let qr = data.transpose().to_owned().qr();
    let r = qr.thin_R();
    let sv = r
        .singular_values()
        .map_err(|e| Error::LinAlg(format!("{e:?}")))?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let rcond = if smax > 0.0 {
        (smin / smax).powi(2)
    } else {
        0.0
    };
    if !(rcond > SINGULARITY_RCOND) {
        return Err(Error::Singular { block, rcond });
    }
    Ok(qr.compute_thin_Q())
}

fn finalize(mut lambdas: Vec<f64>, pair: &DataPair, method: Method) -> Result<EigenReport> {
    for v in lambdas.iter_mut() {
        if !(*v >= -RANGE_SLACK && *v <= 1.0 + RANGE_SLACK) {
            return Err(Error::OutOfRange { value: *v });
        }
        *v = v.clamp(0.0, 1.0);
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenReport {
        lambdas,
        p: pair.p(),
        q: pair.q(),
        n: pair.n(),
        method,
    })
}

/// Squared sample canonical correlations via orthonormal bases of the row spaces.
pub fn squared_canonical_correlations(pair: &DataPair) -> Result<EigenReport> {
    check_shape(pair)?;
    let qx = row_space_basis(&pair.x, "S_xx")?;
    let qy = row_space_basis(&pair.y, "S_yy")?;
    let cross = qx.transpose() * &qy;
    let sv = cross
        .singular_values()
        .map_err(|e| Error::LinAlg(format!("{e:?}")))?;
    finalize(
        sv.into_iter().map(|s| s * s).collect(),
        pair,
        Method::Stable,
    )
}

fn block_rcond(m: &Mat<f64>, block: &'static str) -> Result<()> {
    let ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinAlg(format!("{e:?}")))?;
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond > SINGULARITY_RCOND) {
        return Err(Error::Singular { block, rcond });
    }
    Ok(())
}

/// Eigenvalues of `S_yy^{-1} S_yx S_xx^{-1} S_xy` (or the `p x p` analogue when
/// `p < q`), formed explicitly. Oracle scale only.
pub fn brute_force_ccs(pair: &DataPair) -> Result<EigenReport> {
    check_shape(pair)?;
    if pair.p() > ORACLE_MAX_DIM || pair.q() > ORACLE_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "brute-force oracle limited to p, q <= {ORACLE_MAX_DIM}"
        )));
    }
    let cov = sample_covariances(pair)?;
    block_rcond(&cov.sxx, "S_xx")?;
    block_rcond(&cov.syy, "S_yy")?;
    let syx = cov.syx();
    // smaller side: q x q when q <= p
    let product = if pair.q() <= pair.p() {
        let a = cov.sxx.partial_piv_lu().solve(&cov.sxy);
        let b = &syx * &a;
        cov.syy.partial_piv_lu().solve(&b)
    } else {
        let a = cov.syy.partial_piv_lu().solve(&syx);
        let b = &cov.sxy * &a;
        cov.sxx.partial_piv_lu().solve(&b)
    };
    let ev = product
        .eigenvalues()
        .map_err(|e| Error::LinAlg(format!("{e:?}")))?;
    finalize(
        ev.into_iter().map(|z| z.re).collect(),
        pair,
        Method::BruteForce,
    )
}

/// Fraction of the reported eigenvalues that are `<= x`.
pub fn empirical_cdf(report: &EigenReport, x: f64) -> f64 {
    if report.lambdas.is_empty() {
        return 0.0;
    }
    let below = report.lambdas.iter().filter(|&&l| l <= x).count();
    below as f64 / report.lambdas.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, SpikeSpectrum};
    use crate::sampler::{replicate_rng, sample_coupled};

    fn mat(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn covariances_by_hand() {
        // X = [[1,2,0],[0,1,3]], Y = [[1,0,1],[2,2,2]]
        let x = mat(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 3.0]]);
        let y = mat(&[&[1.0, 0.0, 1.0], &[2.0, 2.0, 2.0]]);
        let cov = sample_covariances(&DataPair::new(x, y).unwrap()).unwrap();
        let expect_xx = [[5.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 10.0 / 3.0]];
        let expect_yy = [[2.0 / 3.0, 4.0 / 3.0], [4.0 / 3.0, 4.0]];
        let expect_xy = [[1.0 / 3.0, 2.0], [1.0, 8.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((cov.sxx[(i, j)] - expect_xx[i][j]).abs() < 1e-15);
                assert!((cov.syy[(i, j)] - expect_yy[i][j]).abs() < 1e-15);
                assert!((cov.sxy[(i, j)] - expect_xy[i][j]).abs() < 1e-15);
            }
        }
        assert_eq!(cov.divisor, 3);
    }

    #[test]
    fn identical_blocks_give_identical_covariances() {
        let x = mat(&[&[1.0, -2.0, 0.5, 3.0], &[0.0, 1.0, 3.0, -1.0]]);
        let cov = sample_covariances(&DataPair::new(x.clone(), x).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(cov.sxx[(i, j)], cov.sxy[(i, j)]);
                assert_eq!(cov.syy[(i, j)], cov.sxy[(i, j)]);
            }
        }
    }

    #[test]
    fn scalar_cca_is_squared_cosine() {
        let x = mat(&[&[1.0, 2.0, 3.0]]);
        let y = mat(&[&[3.0, 2.0, 1.0]]);
        let pair = DataPair::new(x, y).unwrap();
        let stable = squared_canonical_correlations(&pair).unwrap();
        let brute = brute_force_ccs(&pair).unwrap();
        assert!((stable.lambdas[0] - 25.0 / 49.0).abs() < 1e-14);
        assert!((brute.lambdas[0] - 25.0 / 49.0).abs() < 1e-14);
    }

    #[test]
    fn identical_subspaces_give_ones() {
        let x = mat(&[&[1.0, -2.0, 0.5, 3.0, 1.0], &[0.0, 1.0, 3.0, -1.0, 2.0]]);
        let pair = DataPair::new(x.clone(), x).unwrap();
        for report in [
            squared_canonical_correlations(&pair).unwrap(),
            brute_force_ccs(&pair).unwrap(),
        ] {
            assert_eq!(report.len(), 2);
            for l in report.lambdas {
                assert!((l - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_rows_give_zeros() {
        // rows of X and Y are mutually orthogonal n-vectors
        let x = mat(&[&[1.0, 1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0, 0.0]]);
        let y = mat(&[&[1.0, -1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0, 1.0]]);
        let pair = DataPair::new(x, y).unwrap();
        for report in [
            squared_canonical_correlations(&pair).unwrap(),
            brute_force_ccs(&pair).unwrap(),
        ] {
            for l in report.lambdas {
                assert!(l.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let x = mat(&[&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0]]);
        let y = mat(&[&[1.0, 0.0, 1.0, 0.0, 2.0]]);
        let pair = DataPair::new(x, y).unwrap();
        match squared_canonical_correlations(&pair) {
            Err(Error::Singular { block, .. }) => assert_eq!(block, "S_xx"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            brute_force_ccs(&pair),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn shape_checks() {
        let x = Mat::<f64>::zeros(3, 3);
        let y = Mat::<f64>::zeros(1, 3);
        assert!(matches!(
            squared_canonical_correlations(&DataPair::new(x, y).unwrap()),
            Err(Error::Config(_))
        ));
        assert!(DataPair::new(Mat::<f64>::zeros(1, 3), Mat::<f64>::zeros(1, 4)).is_err());
    }

    #[test]
    fn stable_matches_oracle_on_small_instance() {
        let cfg = ModelConfig::new(4, 6, 50, SpikeSpectrum::new(vec![0.7]).unwrap(), 4).unwrap();
        for rep in 0..5 {
            let pair = sample_coupled(&cfg, &mut replicate_rng(4, rep)).unwrap();
            let a = squared_canonical_correlations(&pair).unwrap();
            let b = brute_force_ccs(&pair).unwrap();
            assert_eq!(a.len(), 4);
            for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn empirical_cdf_steps() {
        let report = EigenReport {
            lambdas: vec![0.9, 0.5, 0.4, 0.2, 0.1],
            p: 5,
            q: 6,
            n: 20,
            method: Method::Stable,
        };
        assert_eq!(empirical_cdf(&report, 1.0), 1.0);
        assert_eq!(empirical_cdf(&report, 3.0), 1.0);
        assert_eq!(empirical_cdf(&report, -0.1), 0.0);
        assert_eq!(empirical_cdf(&report, 0.4), 3.0 / 5.0);
        assert_eq!(empirical_cdf(&report, 0.39), 2.0 / 5.0);
        assert_eq!(report.top(2), &[0.9, 0.5]);
    }
}
