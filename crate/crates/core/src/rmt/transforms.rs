//! Stieltjes and R-transforms.
//!
//! Conventions: `s(omega) = integral dF(x) / (x - omega)`, so `s(omega) ~ -1/omega`
//! at infinity, and `K(omega) = R(omega) + 1/omega` satisfies `-s(K(omega)) = omega`.
//!
//! Every square root of the form `sqrt((a x + b)^2 - g)` is evaluated as
//! `a sqrt(x - x1) sqrt(x - x2)` with principal roots, where `x1, x2` are the
//! zeros of the radicand. That product is analytic off the segment `[x1, x2]`
//! and carries the sign fixed by the behaviour at infinity. Quotients are
//! rationalised so that no difference of nearly equal terms is formed; the
//! displayed forms are checked against these in the tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DimensionRatios;

type C = Complex64;

/// The four random matrices whose free sum gives the resolvent blocks:
/// `(1-z) E` and `-z H` on the `p` side, `-z E2^{-1}` and `(1-z) H2^{-1}` on the `q` side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    E1,
    H1,
    E2,
    H2,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::E1, Component::H1, Component::E2, Component::H2];
}

fn pair_sqrt(x: C, x1: f64, x2: f64) -> C {
    (x - x1).sqrt() * (x - x2).sqrt()
}

fn check_cut(omega: C, a: f64, b: f64, what: &str) -> Result<()> {
    let (lo, hi) = (a.min(b), a.max(b));
    if omega.im == 0.0 && omega.re >= lo && omega.re <= hi {
        return Err(Error::Branch(format!(
            "{what}: omega = {omega} lies on the support [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn finite(v: C, what: &str) -> Result<C> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "{what}: pole at the evaluation point"
        )))
    }
}

/// Marchenko-Pastur law with ratio `c < 1`.
///
/// Displayed form `((1-c) - omega + sqrt((omega-1-c)^2 - 4c)) / (2 c omega)`,
/// evaluated as `2 / ((1-c) - omega - S)`.
pub fn mp_stieltjes(omega: C, c: f64) -> Result<C> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("ratio c = {c} outside (0, 1)")));
    }
    let (a, b) = ((1.0 - c.sqrt()).powi(2), (1.0 + c.sqrt()).powi(2));
    check_cut(omega, a, b, "mp")?;
    let s = pair_sqrt(omega, a, b);
    finite(2.0 / ((1.0 - c) - omega - s), "mp")
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("z = {z} must exceed 1")))
    }
}

fn check_e2(ratios: DimensionRatios) -> Result<()> {
    if ratios.c1() > ratios.c2() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "the e2 transforms need c1 > c2 (got {} <= {}); the matrix is singular otherwise",
            ratios.c1(),
            ratios.c2()
        )))
    }
}

/// Stieltjes transform of the named component at `omega`, for `z > 1`.
pub fn component_stieltjes(
    which: Component,
    omega: C,
    z: f64,
    ratios: DimensionRatios,
) -> Result<C> {
    check_z(z)?;
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let (r1, r2) = (c1.sqrt(), c2.sqrt());
    match which {
        Component::E1 => {
            let u = 1.0 - z;
            let (x1, x2) = (u * (r1 + r2).powi(2), u * (r1 - r2).powi(2));
            check_cut(omega, x1, x2, "e1")?;
            let s = pair_sqrt(omega, x1, x2);
            finite(2.0 / (u * (c2 - c1) - omega - s), "e1")
        }
        Component::H1 => {
            let (x1, x2) = (
                -z * ((1.0 - c2).sqrt() + r1).powi(2),
                -z * ((1.0 - c2).sqrt() - r1).powi(2),
            );
            check_cut(omega, x1, x2, "h1")?;
            let s = pair_sqrt(omega, x1, x2);
            finite(-2.0 / (z * (1.0 - c1 - c2) + omega + s), "h1")
        }
        Component::E2 => {
            check_e2(ratios)?;
            if omega == C::new(0.0, 0.0) {
                return Err(Error::Domain(
                    "e2 is evaluated in 1/omega; omega = 0 excluded".into(),
                ));
            }
            let (v1, v2) = (-(r1 + r2).powi(2) / z, -(r1 - r2).powi(2) / z);
            check_cut(omega, 1.0 / v1, 1.0 / v2, "e2")?;
            let v = 1.0 / omega;
            let s = z * pair_sqrt(v, v1, v2);
            finite(-v + 2.0 * z * v * v / (c1 - c2 + z * v + s), "e2")
        }
        Component::H2 => {
            if omega == C::new(0.0, 0.0) {
                return Err(Error::Domain(
                    "h2 is evaluated in 1/omega; omega = 0 excluded".into(),
                ));
            }
            let u = 1.0 - z;
            let a = (1.0 - c1).sqrt();
            let (v1, v2) = ((a + r2).powi(2) / u, (a - r2).powi(2) / u);
            check_cut(omega, 1.0 / v1, 1.0 / v2, "h2")?;
            let v = 1.0 / omega;
            let s = u * pair_sqrt(v, v1, v2);
            finite(-v - 2.0 * u * v * v / (1.0 - c1 - c2 - u * v - s), "h2")
        }
    }
}

/// R-transform of the named component at `omega`, for `z > 1`.
///
/// The square roots in the `e2` and `h2` cases are principal, the branch on
/// which `R` is analytic at the origin; they are evaluated in the form
/// `-2 b / (a + sqrt(a^2 + 4 b c2 omega))`, finite at `omega = 0`.
pub fn component_r_transform(
    which: Component,
    omega: C,
    z: f64,
    ratios: DimensionRatios,
) -> Result<C> {
    check_z(z)?;
    let (c1, c2) = (ratios.c1(), ratios.c2());
    let one = C::new(1.0, 0.0);
    match which {
        Component::E1 => {
            let u = 1.0 - z;
            finite(u * c2 / (one - u * c1 * omega), "R_e1")
        }
        Component::H1 => finite(-z * (1.0 - c2) / (one + z * c1 * omega), "R_h1"),
        Component::E2 => {
            check_e2(ratios)?;
            root_form(c1 - c2, z, c2, omega, "R_e2")
        }
        Component::H2 => root_form(1.0 - c1 - c2, z - 1.0, c2, omega, "R_h2"),
    }
}

// (a - sqrt(a^2 + 4 b c omega)) / (2 c omega) with a > 0, rationalised
fn root_form(a: f64, b: f64, c: f64, omega: C, what: &str) -> Result<C> {
    let arg = a * a + 4.0 * b * c * omega;
    if arg.im == 0.0 && arg.re <= 0.0 {
        return Err(Error::Branch(format!(
            "{what}: omega = {omega} lies on the branch cut"
        )));
    }
    finite(-2.0 * b / (a + arg.sqrt()), what)
}

/// `K(omega) = R(omega) + 1/omega`, the functional inverse of `-s`.
pub fn blue_function(which: Component, omega: C, z: f64, ratios: DimensionRatios) -> Result<C> {
    if omega == C::new(0.0, 0.0) {
        return Err(Error::Domain("the Blue function has a pole at 0".into()));
    }
    Ok(component_r_transform(which, omega, z, ratios)? + 1.0 / omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::{m1, m2};
    use faer::{Mat, Side};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    fn ratios(c1: f64, c2: f64) -> DimensionRatios {
        DimensionRatios::new(c1, c2).unwrap()
    }

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    // displayed (unrationalised) forms with the same branch products
    fn literal(which: Component, w: C, z: f64, c1: f64, c2: f64) -> C {
        let (r1, r2) = (c1.sqrt(), c2.sqrt());
        match which {
            Component::E1 => {
                let u = 1.0 - z;
                let s = pair_sqrt(w, u * (r1 + r2).powi(2), u * (r1 - r2).powi(2));
                (u * (c2 - c1) - w + s) / (2.0 * u * c1 * w)
            }
            Component::H1 => {
                let a = (1.0 - c2).sqrt();
                let s = pair_sqrt(w, -z * (a + r1).powi(2), -z * (a - r1).powi(2));
                (z * (1.0 - c1 - c2) + w - s) / (2.0 * z * c1 * w)
            }
            Component::E2 => {
                let v = 1.0 / w;
                let s = z * pair_sqrt(v, -(r1 + r2).powi(2) / z, -(r1 - r2).powi(2) / z);
                -v - (c1 - c2 + z * v - s) / (2.0 * c2 * w)
            }
            Component::H2 => {
                let v = 1.0 / w;
                let u = 1.0 - z;
                let a = (1.0 - c1).sqrt();
                let s = u * pair_sqrt(v, (a + r2).powi(2) / u, (a - r2).powi(2) / u);
                -v - (1.0 - c1 - c2 - u * v + s) / (2.0 * c2 * w)
            }
        }
    }

    fn literal_r(which: Component, w: C, z: f64, c1: f64, c2: f64) -> C {
        match which {
            Component::E2 => {
                (c1 - c2 - ((c1 - c2).powi(2) + 4.0 * z * c2 * w).sqrt()) / (2.0 * c2 * w)
            }
            Component::H2 => {
                (1.0 - c1 - c2 - ((1.0 - c1 - c2).powi(2) + 4.0 * (z - 1.0) * c2 * w).sqrt())
                    / (2.0 * c2 * w)
            }
            _ => unreachable!(),
        }
    }

    const POINTS: [(f64, f64); 6] = [
        (0.7, 0.4),
        (-0.3, 1.1),
        (2.5, -0.2),
        (-4.0, 0.0),
        (3.0, 0.0),
        (0.1, -2.0),
    ];

    #[test]
    fn rationalised_forms_match_displayed_forms() {
        let (c1, c2) = (0.3, 0.2);
        let rat = ratios(c1, c2);
        for z in [1.1, 1.5, 2.0] {
            for which in Component::ALL {
                for &(re, im) in &POINTS {
                    let w = c(re, im);
                    let Ok(s) = component_stieltjes(which, w, z, rat) else {
                        continue;
                    };
                    let l = literal(which, w, z, c1, c2);
                    assert!(
                        (s - l).norm() < 1e-12 * (1.0 + s.norm()),
                        "{which:?} z={z} w={w} {s} {l}"
                    );
                }
            }
            for which in [Component::E2, Component::H2] {
                for &(re, im) in &[(0.2, 0.1), (-0.05, 0.3), (0.4, 0.0)] {
                    let w = c(re, im);
                    let r = component_r_transform(which, w, z, rat).unwrap();
                    assert!((r - literal_r(which, w, z, c1, c2)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tails_behave_like_minus_one_over_omega() {
        let rat = ratios(0.3, 0.2);
        for which in Component::ALL {
            for w in [c(1e6, 0.0), c(-1e6, 0.0), c(0.0, 1e6)] {
                let s = component_stieltjes(which, w, 1.5, rat).unwrap();
                assert!((s * w + 1.0).norm() < 1e-4, "{which:?} {w} {s}");
            }
        }
        // far left on the real axis s is positive and ~ -1/omega
        let s = mp_stieltjes(c(-1e6, 0.0), 0.1).unwrap();
        assert!(s.re > 0.0 && (s.re * 1e6 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn support_points_are_rejected() {
        let rat = ratios(0.3, 0.2);
        assert!(matches!(
            mp_stieltjes(c(1.0, 0.0), 0.1),
            Err(Error::Branch(_))
        ));
        // e1 support for z = 1.5 is -0.5 * [(r1 - r2)^2, (r1 + r2)^2]
        assert!(matches!(
            component_stieltjes(Component::E1, c(-0.3, 0.0), 1.5, rat),
            Err(Error::Branch(_))
        ));
        assert!(matches!(
            component_stieltjes(Component::H1, c(-1.0, 0.0), 1.5, rat),
            Err(Error::Branch(_))
        ));
        assert!(component_stieltjes(Component::E2, c(-3.0, 0.0), 1.5, rat).is_err());
        assert!(component_stieltjes(Component::E2, c(0.5, 0.0), 1.5, ratios(0.2, 0.3)).is_err());
        assert!(component_r_transform(Component::E2, c(0.1, 0.0), 1.5, ratios(0.2, 0.3)).is_err());
        assert!(component_stieltjes(Component::H1, c(1.0, 0.0), 0.9, rat).is_err());
        assert!(component_r_transform(Component::H2, c(-100.0, 0.0), 1.5, rat).is_err());
    }

    #[test]
    fn mp_self_consistency() {
        for cc in [0.05, 0.1, 0.5, 0.9] {
            for &(re, im) in &POINTS {
                let w = c(re, im);
                let Ok(s) = mp_stieltjes(w, cc) else { continue };
                let resid = cc * w * s * s + (w - (1.0 - cc)) * s + 1.0;
                assert!(resid.norm() < 1e-12, "c={cc} w={w}");
            }
        }
        // finite at the origin: mean of 1/x under MP is 1/(1-c)
        assert!((mp_stieltjes(c(0.0, 0.0), 0.25).unwrap().re - 1.0 / 0.75).abs() < 1e-14);
    }

    fn wishart_eigs(rows: usize, dof: usize, scale: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let z = Mat::<f64>::from_fn(rows, dof, |_, _| rng.sample(StandardNormal));
        let w = &z * z.transpose() * faer::Scale(1.0 / scale);
        w.self_adjoint_eigenvalues(Side::Lower).unwrap()
    }

    #[test]
    fn mp_matches_simulated_wishart() {
        let eigs = wishart_eigs(200, 2000, 2000.0, 17);
        let w = -1.0;
        let empirical = eigs.iter().map(|l| 1.0 / (l - w)).sum::<f64>() / 200.0;
        let s = mp_stieltjes(c(w, 0.0), 0.1).unwrap();
        assert!((s.re - empirical).abs() < 0.01, "{} vs {empirical}", s.re);
        assert!(s.im == 0.0);
    }

    #[test]
    fn r_transform_at_zero_is_the_mean() {
        let rat = ratios(0.1, 0.1);
        let z = 1.5;
        let e1 = component_r_transform(Component::E1, c(0.0, 0.0), z, rat).unwrap();
        assert!((e1.re - (1.0 - z) * 0.1).abs() < 1e-15);
        let h1 = component_r_transform(Component::H1, c(0.0, 0.0), z, rat).unwrap();
        assert!((h1.re + z * 0.9).abs() < 1e-15);
        let e2 = component_r_transform(Component::E2, c(0.0, 0.0), z, ratios(0.3, 0.1)).unwrap();
        assert!((e2.re + z / 0.2).abs() < 1e-12);

        // H2 = Wishart_q(I, n - p) / n with q = 200, n - p = 1800, n = 2000
        let h2 = component_r_transform(Component::H2, c(0.0, 0.0), z, rat).unwrap();
        let eigs = wishart_eigs(200, 1800, 2000.0, 5);
        let mean = (1.0 - z) * eigs.iter().map(|l| 1.0 / l).sum::<f64>() / 200.0;
        assert!((h2.re - mean).abs() < 0.02, "{} vs {mean}", h2.re);
    }

    #[test]
    fn blue_function_round_trip() {
        // R_e2 is analytic for |omega| < (c1 - c2)^2 / (4 z c2) = 0.2 at z = 2
        let rat = ratios(0.5, 0.1);
        for z in [1.05, 1.5, 2.0] {
            for which in Component::ALL {
                for &(re, im) in &[
                    (0.05, 0.0),
                    (-0.08, 0.0),
                    (0.1, 0.05),
                    (-0.02, -0.1),
                    (0.15, 0.15),
                ] {
                    let w = c(re, im);
                    let k = blue_function(which, w, z, rat).unwrap();
                    let s = component_stieltjes(which, k, z, rat).unwrap();
                    assert!((-s - w).norm() < 1e-10, "{which:?} z={z} w={w} got {}", -s);
                }
            }
        }
    }

    #[test]
    fn free_sums_reproduce_m1_m2() {
        // m1 = s_{e1 + h1}(0): K_e1(-m) + K_h1(-m) - 1/(-m) = 0 at m = m1
        let rat = ratios(0.3, 0.2);
        for z in [1.1, 1.5, 2.0] {
            let m = m1(z, rat).unwrap();
            let w = c(-m, 0.0);
            let sum = component_r_transform(Component::E1, w, z, rat).unwrap()
                + component_r_transform(Component::H1, w, z, rat).unwrap()
                + 1.0 / w;
            assert!(sum.norm() < 1e-12, "m1 z={z}");
            let m = m2(z, rat).unwrap();
            let w = c(-m, 0.0);
            let sum = component_r_transform(Component::E2, w, z, rat).unwrap()
                + component_r_transform(Component::H2, w, z, rat).unwrap()
                + 1.0 / w;
            assert!(sum.norm() < 1e-12, "m2 z={z}");
        }
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in -3.0f64..3.0, im in 0.01f64..3.0, z in 1.01f64..2.0) {
            let rat = ratios(0.3, 0.2);
            let w = c(re, im);
            for which in Component::ALL {
                let a = component_stieltjes(which, w, z, rat).unwrap();
                let b = component_stieltjes(which, w.conj(), z, rat).unwrap();
                prop_assert!((a.conj() - b).norm() < 1e-12 * (1.0 + a.norm()));
                let a = component_r_transform(which, w, z, rat).unwrap();
                let b = component_r_transform(which, w.conj(), z, rat).unwrap();
                prop_assert!((a.conj() - b).norm() < 1e-12 * (1.0 + a.norm()));
            }
            let a = mp_stieltjes(w, 0.3).unwrap();
            prop_assert!((a.conj() - mp_stieltjes(w.conj(), 0.3).unwrap()).norm() < 1e-12);
        }

        #[test]
        fn stieltjes_maps_upper_half_plane_up(re in -3.0f64..3.0, im in 0.01f64..3.0, z in 1.01f64..2.0) {
            let rat = ratios(0.3, 0.2);
            for which in Component::ALL {
                let s = component_stieltjes(which, c(re, im), z, rat).unwrap();
                prop_assert!(s.im > 0.0, "{which:?} {s}");
            }
        }
    }
}
