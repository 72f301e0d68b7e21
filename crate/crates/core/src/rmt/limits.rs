use num_complex::Complex64;

use super::wachter_edges;
use crate::error::{Error, Result};
use crate::model::DimensionRatios;

/// `ell`, `h`, `f` and `varrho` for fixed ratios.
///
/// `ell(z) = sqrt(z - d_left) sqrt(z - d_right)` with principal roots, which is
/// analytic off `[d_left, d_right]`, behaves like `z` at infinity, is positive
/// right of the support and negative left of it.
#[derive(Debug, Clone, Copy)]
pub struct LimitFunctions {
    c1: f64,
    c2: f64,
    d_left: f64,
    d_right: f64,
}

impl LimitFunctions {
    pub fn new(ratios: DimensionRatios) -> Self {
        let law = wachter_edges(ratios);
        LimitFunctions {
            c1: ratios.c1(),
            c2: ratios.c2(),
            d_left: law.d_left,
            d_right: law.d_right,
        }
    }

    fn on_cut(&self, z: f64) -> bool {
        z > self.d_left && z < self.d_right
    }

    pub fn ell(&self, z: f64) -> Result<f64> {
        if self.on_cut(z) {
            return Err(Error::Branch(format!(
                "z = {z} lies inside the support [{}, {}]",
                self.d_left, self.d_right
            )));
        }
        let v = ((z - self.d_left) * (z - self.d_right)).max(0.0).sqrt();
        Ok(if z >= self.d_right { v } else { -v })
    }

    pub fn h(&self, z: f64) -> Result<f64> {
        Ok((self.c1 + self.c2 - z + self.ell(z)?) / (2.0 * self.c2))
    }

    pub fn f(&self, z: f64) -> Result<f64> {
        let l = self.ell(z)?;
        if z == 0.0 {
            return Err(Error::Domain("f has a pole at z = 0".into()));
        }
        let c1 = self.c1;
        Ok(((2.0 * c1 - 1.0) * z + (self.c2 - c1) + l) / (2.0 * c1 * (1.0 - c1) * z))
    }

    pub fn varrho(&self, z: f64) -> Result<f64> {
        Ok(self.h(z)? - self.c1)
    }

    pub fn ell_c(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && self.on_cut(z.re) {
            return Err(Error::Branch(format!("z = {z} lies on the cut")));
        }
        Ok((z - self.d_left).sqrt() * (z - self.d_right).sqrt())
    }

    pub fn h_c(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.c1 + self.c2 - z + self.ell_c(z)?) / (2.0 * self.c2))
    }

    pub fn f_c(&self, z: Complex64) -> Result<Complex64> {
        let l = self.ell_c(z)?;
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("f has a pole at z = 0".into()));
        }
        let c1 = self.c1;
        Ok(((2.0 * c1 - 1.0) * z + (self.c2 - c1) + l) / (2.0 * c1 * (1.0 - c1) * z))
    }

    pub fn varrho_c(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.h_c(z)? - self.c1)
    }

    fn require_right_of_support(&self, z: f64) -> Result<()> {
        if z > self.d_right {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "z = {z} must exceed the right edge {}",
                self.d_right
            )))
        }
    }
}

/// `1 + t^2 f(z) - t^2 f(z) h(z)`, the limit of the normalised 3x3 block determinant.
pub fn limiting_det_factor(z: f64, t: f64, ratios: DimensionRatios) -> Result<f64> {
    let lf = LimitFunctions::new(ratios);
    lf.require_right_of_support(z)?;
    let f = lf.f(z)?;
    let h = lf.h(z)?;
    Ok(1.0 + t * t * f * (1.0 - h))
}

/// Root of `z(1-z)(c1^2-c1) m^2 + (c2-c1+2z c1-z) m - 1 = 0` taken with the
/// minus sign in front of the square root, written as `2 / (b - ell(z))` so the
/// removable singularity at `z = 1` disappears.
pub fn m1(z: f64, ratios: DimensionRatios) -> Result<f64> {
    let lf = LimitFunctions::new(ratios);
    lf.require_right_of_support(z)?;
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let b = c2 - c1 + 2.0 * z * c1 - z;
    Ok(2.0 / (b - lf.ell(z)?))
}

pub fn m2(z: f64, ratios: DimensionRatios) -> Result<f64> {
    let lf = LimitFunctions::new(ratios);
    lf.require_right_of_support(z)?;
    let (c1, c2) = (ratios.c1(), ratios.c2());
    Ok((c1 + c2 - 2.0 * c1 * c2 - z + lf.ell(z)?) / (2.0 * c2))
}
