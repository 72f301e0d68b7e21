//! Finite-`n` determinant equation for the coupled model `X = W + T Y`.
//!
//! The spiked matrix `S_xy S_yy^{-1} S_yx - lambda S_xx` splits as
//! `Phi(lambda)^{-1} + (1 - lambda) Delta` with
//! `Phi(lambda) = (S_wy S_yy^{-1} S_yw - lambda S_ww)^{-1}` and
//! `Delta = T S_yw + S_wy T' + T S_yy T'`. Writing `Delta = U V` with thin factors,
//! a sample eigenvalue that is not an eigenvalue of the null matrix solves
//! `det(I + (1 - lambda) V Phi(lambda) U) = 0`.
//!
//! Everything here needs the latent `W` and `T`, so only data from
//! [`crate::sampler::sample_coupled`] qualifies.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::cca::{row_space_basis, scale};
use crate::error::{Error, Result};
use crate::model::ratios_from_dims;
use crate::rmt::{wachter_edges, LimitFunctions};
use crate::sampler::{DataPair, Latent};

/// Smallest admissible singular value of the resolvent argument.
pub const RESOLVENT_SIGMA_MIN: f64 = 1e-10;

/// `Delta = U V` with `U` of size `p x (k^2 + 2k)` and `V` of size `(k^2 + 2k) x p`.
#[derive(Debug, Clone)]
pub struct PerturbationFactors {
    pub u: Mat<f64>,
    pub v: Mat<f64>,
    pub delta: Mat<f64>,
    /// Coupling strengths used; `[0.0]` when the data carry no spike.
    pub t: Vec<f64>,
    /// `chi_ij = t_i t_j S_yy(i, j)`, row-major `k x k`.
    pub chi: Vec<f64>,
}

impl PerturbationFactors {
    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn chi(&self, i: usize, j: usize) -> f64 {
        self.chi[i * self.k() + j]
    }
}

fn latent(pair: &DataPair) -> Result<&Latent> {
    pair.latent.as_ref().ok_or_else(|| {
        Error::Unsupported(
            "determinant checks need the latent W and T of the coupled sampler".into(),
        )
    })
}

fn effective_t(latent: &Latent) -> Vec<f64> {
    if latent.t.is_empty() {
        vec![0.0]
    } else {
        latent.t.clone()
    }
}

pub fn build_factors(pair: &DataPair) -> Result<PerturbationFactors> {
    let lat = latent(pair)?;
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    let t = effective_t(lat);
    let k = t.len();
    if k > p.min(q) {
        return Err(Error::Config(format!("k = {k} exceeds min(p, q)")));
    }
    let inv = 1.0 / n as f64;
    let y_top = pair.y.as_ref().subrows(0, k);
    // columns u_i of S_wy for i < k
    let s_wy = scale(&(&lat.w * y_top.transpose()), inv);
    let s_yy = scale(&(y_top * y_top.transpose()), inv);
    let mut chi = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            chi[i * k + j] = t[i] * t[j] * s_yy[(i, j)];
        }
    }

    let m = k * k + 2 * k;
    let mut u = Mat::<f64>::zeros(p, m);
    let mut v = Mat::<f64>::zeros(m, p);
    for i in 0..k {
        let c = 3 * i;
        u[(i, c)] = chi[i * k + i];
        u[(i, c + 1)] = t[i];
        v[(c, i)] = 1.0;
        v[(c + 2, i)] = 1.0;
        for r in 0..p {
            u[(r, c + 2)] = t[i] * s_wy[(r, i)];
            v[(c + 1, r)] = s_wy[(r, i)];
        }
    }
    let mut col = 3 * k;
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            u[(j, col)] = chi[i * k + j];
            v[(col, i)] = 1.0;
            col += 1;
        }
    }
    let delta = &u * &v;

    // direct formula T S_yw + S_wy T' + T S_yy T'
    let mut worst = 0.0_f64;
    let mut size = 1.0_f64;
    for c in 0..p {
        for r in 0..p {
            let mut d = 0.0;
            if r < k {
                d += t[r] * s_wy[(c, r)];
            }
            if c < k {
                d += t[c] * s_wy[(r, c)];
            }
            if r < k && c < k {
                d += chi[r * k + c];
            }
            worst = worst.max((d - delta[(r, c)]).abs());
            size = size.max(d.abs());
        }
    }
    if worst > 1e-10 * size {
        return Err(Error::LinAlg(format!(
            "U V differs from Delta by {worst:.3e}"
        )));
    }
    Ok(PerturbationFactors {
        u,
        v,
        delta,
        t,
        chi,
    })
}

/// `E = W P_y W'/n` and `H = W (I - P_y) W'/n`, so that `S_ww = E + H`.
#[derive(Debug, Clone)]
pub struct Cochran {
    pub e: Mat<f64>,
    pub h: Mat<f64>,
}

pub fn cochran(pair: &DataPair) -> Result<Cochran> {
    let lat = latent(pair)?;
    let inv = 1.0 / pair.n() as f64;
    let qy = row_space_basis(&pair.y, "S_yy")?;
    let wq = &lat.w * &qy;
    let e = scale(&(&wq * wq.transpose()), inv);
    let resid = &lat.w - &wq * qy.transpose();
    let h = scale(&(&resid * resid.transpose()), inv);
    Ok(Cochran { e, h })
}

/// Normalised value of a determinant, `det / prod_i ||row_i||_2`, which lies in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetEvaluation {
    pub lambda: f64,
    pub det: f64,
    pub normalized: f64,
}

fn evaluate_det(m: &Mat<f64>, lambda: f64) -> DetEvaluation {
    let det = m.determinant();
    let norms: f64 = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| m[(i, j)] * m[(i, j)])
                .sum::<f64>()
                .sqrt()
        })
        .product();
    let normalized = if norms > 0.0 { det / norms } else { 0.0 };
    DetEvaluation {
        lambda,
        det,
        normalized,
    }
}

/// Reusable state for evaluating the determinant equation at many points.
#[derive(Debug, Clone)]
pub struct DetVerifier {
    pub factors: PerturbationFactors,
    pub cochran: Cochran,
    p: usize,
    q: usize,
    n: usize,
}

impl DetVerifier {
    pub fn new(pair: &DataPair) -> Result<Self> {
        Ok(DetVerifier {
            factors: build_factors(pair)?,
            cochran: cochran(pair)?,
            p: pair.p(),
            q: pair.q(),
            n: pair.n(),
        })
    }

    /// `((1 - lambda) E - lambda H)^{-1}` through a symmetric eigendecomposition.
    pub fn phi(&self, lambda: f64) -> Result<Mat<f64>> {
        let p = self.p;
        let a = Mat::from_fn(p, p, |i, j| {
            (1.0 - lambda) * self.cochran.e[(i, j)] - lambda * self.cochran.h[(i, j)]
        });
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinAlg(format!("{e:?}")))?;
        let vecs = evd.U();
        let vals = evd.S().column_vector();
        let sigma_min = (0..p).map(|i| vals[i].abs()).fold(f64::INFINITY, f64::min);
        if !(sigma_min > RESOLVENT_SIGMA_MIN) {
            return Err(Error::ResolventSingular { lambda, sigma_min });
        }
        let scaled = Mat::from_fn(p, p, |i, j| vecs[(i, j)] / vals[j]);
        Ok(&scaled * vecs.transpose())
    }

    /// `M_n(lambda) = I + (1 - lambda) V Phi(lambda) U`.
    pub fn m_n(&self, lambda: f64) -> Result<Mat<f64>> {
        let phi = self.phi(lambda)?;
        let core = &self.factors.v * (&phi * &self.factors.u);
        let m = core.nrows();
        Ok(Mat::from_fn(m, m, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + (1.0 - lambda) * core[(i, j)]
        }))
    }

    pub fn finite_n_det(&self, lambda: f64) -> Result<DetEvaluation> {
        Ok(evaluate_det(&self.m_n(lambda)?, lambda))
    }

    /// `det(I_p + (1 - lambda) Phi(lambda) Delta)`, the unreduced form.
    pub fn full_det(&self, lambda: f64) -> Result<DetEvaluation> {
        let phi = self.phi(lambda)?;
        let prod = &phi * &self.factors.delta;
        let p = self.p;
        let m = Mat::from_fn(p, p, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + (1.0 - lambda) * prod[(i, j)]
        });
        Ok(evaluate_det(&m, lambda))
    }

    /// Entrywise limit of `M_n(z)` at the sample ratios: `I + G_1(z) (+) ... (+) G_k(z)`
    /// with `G_i = [[t^2 f, t f, 0], [0, 0, t h], [t^2 f, t f, 0]]`, padded by the
    /// identity on the `k^2 - k` cross rows.
    ///
    /// A cross row of block `i` is `e_i' Phi U`, the same as the third row of
    /// block `i`, so for `k > 1` it converges to `(t_i^2 f, t_i f, 0)` under that
    /// block rather than to zero. The block above it vanishes, so the determinant
    /// is still `prod_i det(I + G_i)`.
    pub fn m_limit(&self, z: f64) -> Result<Mat<f64>> {
        let rat = ratios_from_dims(self.p, self.q, self.n)?;
        let law = wachter_edges(rat);
        if !(z > law.d_right) {
            return Err(Error::Domain(format!(
                "z = {z} must exceed the right edge {}",
                law.d_right
            )));
        }
        let lf = LimitFunctions::new(rat);
        let (f, h) = (lf.f(z)?, lf.h(z)?);
        let k = self.factors.k();
        let m = k * k + 2 * k;
        let mut out = Mat::<f64>::identity(m, m);
        for (i, &t) in self.factors.t.iter().enumerate() {
            let c = 3 * i;
            for r in [c, c + 2] {
                out[(r, c)] += t * t * f;
                out[(r, c + 1)] += t * f;
            }
            out[(c + 1, c + 2)] += t * h;
        }
        let mut row = 3 * k;
        for (i, &t) in self.factors.t.iter().enumerate() {
            for _ in 1..k {
                out[(row, 3 * i)] += t * t * f;
                out[(row, 3 * i + 1)] += t * f;
                row += 1;
            }
        }
        Ok(out)
    }
}

pub fn phi_matrix(pair: &DataPair, lambda: f64) -> Result<Mat<f64>> {
    DetVerifier::new(pair)?.phi(lambda)
}

pub fn finite_n_det(pair: &DataPair, lambda: f64) -> Result<DetEvaluation> {
    DetVerifier::new(pair)?.finite_n_det(lambda)
}

/// Measured `M_n(z)` next to its limit, both row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnComparison {
    pub z: f64,
    pub measured: Vec<Vec<f64>>,
    pub limit: Vec<Vec<f64>>,
}

impl MnComparison {
    pub fn max_abs_diff(&self) -> f64 {
        self.measured
            .iter()
            .flatten()
            .zip(self.limit.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn mn_entry_convergence(pair: &DataPair, z: f64) -> Result<MnComparison> {
    let dv = DetVerifier::new(pair)?;
    let limit = dv.m_limit(z)?;
    let measured = dv.m_n(z)?;
    Ok(MnComparison {
        z,
        measured: rows(&measured),
        limit: rows(&limit),
    })
}

/// Evaluates the determinant equation at every `lambda` above `threshold`.
pub fn certify(pair: &DataPair, lambdas: &[f64], threshold: f64) -> Result<Vec<DetEvaluation>> {
    let candidates: Vec<f64> = lambdas.iter().copied().filter(|&l| l > threshold).collect();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let dv = DetVerifier::new(pair)?;
    candidates.into_iter().map(|l| dv.finite_n_det(l)).collect()
}
