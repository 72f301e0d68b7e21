//! Checks that sample outliers solve the finite-n determinant equation and
//! compares the 3k x 3k perturbation block with its deterministic limit.
use spiked_cca::cca::squared_canonical_correlations;
use spiked_cca::detverify::DetVerifier;
use spiked_cca::model::{ModelConfig, SpikeSpectrum};
use spiked_cca::rmt::wachter_edges;
use spiked_cca::sampler::sample_coupled_seeded;

fn main() -> spiked_cca::Result<()> {
    let model = ModelConfig::new(100, 200, 1000, SpikeSpectrum::new(vec![0.8, 0.6])?, 3)?;
    let pair = sample_coupled_seeded(&model)?;
    let d_r = wachter_edges(model.ratios()?).d_right;
    let dv = DetVerifier::new(&pair)?;

    for l in squared_canonical_correlations(&pair)?
        .lambdas
        .into_iter()
        .take(4)
    {
        let e = dv.finite_n_det(l)?;
        println!("lambda = {l:.4}  normalized det = {:.2e}", e.normalized);
    }
    let z = d_r + 0.2;
    let (a, b) = (dv.finite_n_det(z)?.det, dv.full_det(z)?.det);
    println!("at {z:.3}: reduced {a:.6e}, full {b:.6e}");

    let (m, lim) = (dv.m_n(z)?, dv.m_limit(z)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:7.3}/{:7.3}", m[(i, j)], lim[(i, j)]))
            .collect();
        println!("{}", row.join("  "));
    }
    Ok(())
}
