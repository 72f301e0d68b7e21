//! Deterministic limit theory: the Wachter bulk law, the phase transition, the
//! outlier map and its inverse, the limit functions entering the determinant
//! equation, and the Stieltjes/R-transform stack.

mod limits;
mod transforms;

pub use limits::{limiting_det_factor, m1, m2, LimitFunctions};
pub use transforms::{
    blue_function, component_r_transform, component_stieltjes, mp_stieltjes, Component,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::DimensionRatios;
use crate::quad;

/// Absolute tolerance for the cdf quadrature.
pub const CDF_TOL: f64 = 1e-9;

/// Limiting spectral law of the squared sample canonical correlations under the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WachterLaw {
    pub ratios: DimensionRatios,
    pub d_left: f64,
    pub d_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransition {
    pub r_c: f64,
    pub t_c: f64,
}

pub fn wachter_edges(ratios: DimensionRatios) -> WachterLaw {
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let centre = c1 + c2 - 2.0 * c1 * c2;
    let half = 2.0 * ratios.cross_term().sqrt();
    WachterLaw {
        ratios,
        d_left: (centre - half).clamp(0.0, 1.0),
        d_right: (centre + half).clamp(0.0, 1.0),
    }
}

impl WachterLaw {
    pub fn new(ratios: DimensionRatios) -> Self {
        wachter_edges(ratios)
    }

    pub fn width(&self) -> f64 {
        self.d_right - self.d_left
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.d_left && x <= self.d_right
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > self.d_left && x < self.d_right) {
            return Ok(0.0);
        }
        if x <= 0.0 || x >= 1.0 {
            return Err(Error::Domain(format!(
                "density pole at x = {x} inside the support"
            )));
        }
        let c = self.ratios.c_min();
        Ok(((self.d_right - x) * (x - self.d_left)).sqrt() / (2.0 * PI * c * x * (1.0 - x)))
    }

    /// Density times the Jacobian of `x = d_left + w sin^2(theta)`; bounded on `[0, pi/2]`.
    fn angular_density(&self, theta: f64) -> f64 {
        let w = self.width();
        let (s, co) = theta.sin_cos();
        let x = self.d_left + w * s * s;
        let c = self.ratios.c_min();
        if x <= 0.0 {
            // d_left = 0: the factor sin^2 cancels against x
            return w * co * co / (PI * c * (1.0 - x));
        }
        w * w * s * s * co * co / (PI * c * x * (1.0 - x))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.d_left {
            return 0.0;
        }
        if x >= self.d_right {
            return 1.0;
        }
        let theta = ((x - self.d_left) / self.width())
            .sqrt()
            .clamp(0.0, 1.0)
            .asin();
        quad::integrate(
            |th| self.angular_density(th),
            0.0,
            theta,
            CDF_TOL,
            0.0,
            4000,
        )
        .map(|r| r.value.clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
    }

    /// Total mass over the support.
    pub fn mass(&self) -> Result<f64> {
        quad::integrate(
            |th| self.angular_density(th),
            0.0,
            PI / 2.0,
            CDF_TOL,
            0.0,
            4000,
        )
        .map(|r| r.value)
    }

    /// Smallest `x` with `cdf(x) >= prob`, by bisection to within `tol`.
    pub fn quantile(&self, prob: f64, tol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Domain(format!("probability {prob} outside [0, 1]")));
        }
        let (mut lo, mut hi) = (self.d_left, self.d_right);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < prob {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub fn wachter_density(x: f64, ratios: DimensionRatios) -> Result<f64> {
    wachter_edges(ratios).density(x)
}

pub fn wachter_cdf(x: f64, ratios: DimensionRatios) -> f64 {
    wachter_edges(ratios).cdf(x)
}

pub fn critical_threshold(ratios: DimensionRatios) -> PhaseTransition {
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let s = ratios.cross_term().sqrt();
    let r_c = (c1 * c2 + s) / ((1.0 - c1) * (1.0 - c2) + s);
    let t_c = ((c1 * c2 + s) / (1.0 - c1 - c2)).sqrt();
    PhaseTransition { r_c, t_c }
}

/// Almost-sure limit of the sample eigenvalue attached to a supercritical spike `r`.
pub fn gamma_map(r: f64, ratios: DimensionRatios) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("spike r = {r} outside (0, 1]")));
    }
    let (c1, c2) = (ratios.c1(), ratios.c2());
    Ok((r * (1.0 - c1) + c1) * (r * (1.0 - c2) + c2) / r)
}

/// Inverts [`gamma_map`] on `(r_c, 1]`.
///
/// With `u = t^{-2}` the outlier equation reads
/// `c1 c2 u^2 + (c1 + c2 - lambda) u + (1 - lambda) = 0`; of its two nonnegative
/// roots the one below `t_c^{-2}` is kept.
pub fn gamma_inverse(lambda: f64, ratios: DimensionRatios) -> Result<f64> {
    let law = wachter_edges(ratios);
    if lambda.is_nan() || lambda > 1.0 {
        return Err(Error::Domain(format!("lambda = {lambda} exceeds 1")));
    }
    if lambda <= law.d_right {
        return Err(Error::BelowThreshold {
            lambda,
            d_right: law.d_right,
        });
    }
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let a = c1 * c2;
    let b = c1 + c2 - lambda;
    let c = 1.0 - lambda;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // b < 0 here since lambda > d_right > c1 + c2, so -b + sqrt(disc) has no cancellation
    let big = (-b + disc.sqrt()) / (2.0 * a);
    let small = if big > 0.0 { c / (a * big) } else { 0.0 };
    let u_c = critical_threshold(ratios).t_c.powi(-2);
    let u = [small, big]
        .into_iter()
        .find(|&u| (0.0..u_c).contains(&u))
        .ok_or_else(|| Error::Domain(format!("no root below t_c^-2 for lambda = {lambda}")))?;
    Ok(1.0 / (1.0 + u))
}
