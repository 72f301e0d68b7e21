//! Detects outliers in one simulated data set and inverts the outlier map.
use spiked_cca::cli::estimate_pair;
use spiked_cca::model::{ModelConfig, SpikeSpectrum};
use spiked_cca::sampler::sample_coupled_seeded;

fn main() -> spiked_cca::Result<()> {
    let spikes = SpikeSpectrum::new(vec![0.8, 0.7, 0.6, 0.16, 0.15])?;
    let pair = sample_coupled_seeded(&ModelConfig::new(100, 200, 1000, spikes, 20240601)?)?;
    let res = estimate_pair(&pair, None)?;
    println!("edge {:.4}, margin {:.4}", res.d_right, res.detect_margin);
    for e in &res.estimates {
        println!(
            "lambda_{} = {:.4}  ->  r_hat = {:.4}",
            e.index + 1,
            e.lambda,
            e.r_hat
        );
    }
    println!("{} eigenvalues left in the bulk", res.bulk.len());
    Ok(())
}
