//! Bulk edges, phase transition and outlier locations for the `figure1` preset ratios.
use spiked_cca::model::DimensionRatios;
use spiked_cca::rmt::{critical_threshold, gamma_inverse, gamma_map, wachter_edges};

fn main() -> spiked_cca::Result<()> {
    let ratios = DimensionRatios::new(0.1, 0.2)?;
    let law = wachter_edges(ratios);
    let pt = critical_threshold(ratios);
    println!(
        "support [{:.4}, {:.4}], r_c = {:.4}, t_c = {:.4}",
        law.d_left, law.d_right, pt.r_c, pt.t_c
    );

    for r in [0.8, 0.7, 0.6, 0.16, 0.15] {
        if r > pt.r_c {
            let g = gamma_map(r, ratios)?;
            println!(
                "r = {r:.2}: outlier at {g:.4}, recovered r = {:.4}",
                gamma_inverse(g, ratios)?
            );
        } else {
            println!(
                "r = {r:.2}: subcritical, eigenvalue sticks to {:.4}",
                law.d_right
            );
        }
    }
    Ok(())
}
