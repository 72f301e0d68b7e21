//! Null-case spectrum against the Wachter law: density, cdf and a KS distance.
use spiked_cca::cca::squared_canonical_correlations;
use spiked_cca::model::{ModelConfig, SpikeSpectrum};
use spiked_cca::rmt::WachterLaw;
use spiked_cca::sampler::sample_coupled_seeded;

fn main() -> spiked_cca::Result<()> {
    let model = ModelConfig::new(100, 200, 1000, SpikeSpectrum::empty(), 1)?;
    let law = WachterLaw::new(model.ratios()?);
    println!(
        "mass = {:.12}, median = {:.6}",
        law.mass()?,
        law.quantile(0.5, 1e-12)?
    );
    for i in 1..10 {
        let x = law.d_left + law.width() * i as f64 / 10.0;
        println!(
            "x = {x:.3}  density = {:.4}  cdf = {:.4}",
            law.density(x)?,
            law.cdf(x)
        );
    }

    let pair = sample_coupled_seeded(&model)?;
    let mut lambdas = squared_canonical_correlations(&pair)?.lambdas;
    lambdas.reverse();
    let m = lambdas.len() as f64;
    let ks = lambdas
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max);
    println!("KS distance of one replicate: {ks:.4}");
    Ok(())
}
