//! Monte Carlo replicates of the `figure1` preset, written as JSON.
//!
//! `cargo run --release --example simulate_figure1 -- out.json`
use spiked_cca::cli::{emit, run_simulation, ExperimentConfig, OutputFormat};

fn main() -> spiked_cca::Result<()> {
    let mut cfg = ExperimentConfig::figure1();
    cfg.replicates = 20;
    let run = run_simulation(&cfg, true)?;
    for (i, s) in run.theory.spikes.iter().enumerate() {
        println!(
            "r = {:.2}  limit {:.4}  mean {:.4}  sd {:.4}",
            s.r, s.limit, run.aggregate.mean[i], run.aggregate.sd[i]
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        emit(&run, &[OutputFormat::Json], Some(path.as_ref()))?;
    }
    Ok(())
}
