//! Stieltjes and R-transforms of the four component laws, and the free sums
//! that reproduce the limits m1 and m2.
use num_complex::Complex64 as C;
use spiked_cca::model::DimensionRatios;
use spiked_cca::rmt::{
    blue_function, component_r_transform, component_stieltjes, m1, m2, Component,
};

fn main() -> spiked_cca::Result<()> {
    let ratios = DimensionRatios::new(0.5, 0.1)?;
    let z = 1.5;
    let omega = C::new(-0.3, 0.2);
    for which in Component::ALL {
        let s = component_stieltjes(which, omega, z, ratios)?;
        let k = blue_function(which, -s, z, ratios)?;
        println!("{which:?}: s = {s:.6}, K(-s) = {k:.6}");
    }

    let free_sum = |a: Component, b: Component, m: f64| -> spiked_cca::Result<f64> {
        let w = C::new(-m, 0.0);
        Ok(
            (component_r_transform(a, w, z, ratios)? + component_r_transform(b, w, z, ratios)?).re
                - 1.0 / m,
        )
    };
    let (a, b) = (m1(z, ratios)?, m2(z, ratios)?);
    println!(
        "m1 = {a:.10}, free-sum residual {:.1e}",
        free_sum(Component::E1, Component::H1, a)?
    );
    println!(
        "m2 = {b:.10}, free-sum residual {:.1e}",
        free_sum(Component::E2, Component::H2, b)?
    );
    Ok(())
}
