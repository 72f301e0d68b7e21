use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SamplerChoice};
use crate::cca::squared_canonical_correlations;
use crate::detverify::{DetEvaluation, DetVerifier, MnComparison};
use crate::error::{Error, Result};
use crate::model::{ratios_from_dims, spike_to_t, DimensionRatios, SpikeSpectrum};
use crate::rmt::{critical_threshold, gamma_inverse, gamma_map, wachter_edges};
use crate::sampler::{replicate_rng, sample_coupled, sample_general, subtract_means, DataPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `r > r_c`: the sample eigenvalue separates from the bulk.
    Outlier,
    /// `r <= r_c`: the sample eigenvalue sticks to the right edge.
    Sticks,
    /// `r = 1`: the sample eigenvalue equals 1.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTheory {
    pub index: usize,
    pub r: f64,
    pub t: Option<f64>,
    pub regime: Regime,
    /// Almost-sure limit of the matching sample eigenvalue.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    pub c1: f64,
    pub c2: f64,
    pub d_left: f64,
    pub d_right: f64,
    pub r_c: f64,
    pub t_c: f64,
    pub spikes: Vec<SpikeTheory>,
}

pub fn cmd_limits(ratios: DimensionRatios, spikes: &SpikeSpectrum) -> Result<Theory> {
    let law = wachter_edges(ratios);
    let pt = critical_threshold(ratios);
    let spikes = spikes
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let (regime, limit, t) = if r >= 1.0 {
                (Regime::Deterministic, 1.0, None)
            } else if r > pt.r_c {
                (Regime::Outlier, gamma_map(r, ratios)?, Some(spike_to_t(r)?))
            } else {
                (Regime::Sticks, law.d_right, Some(spike_to_t(r)?))
            };
            Ok(SpikeTheory {
                index,
                r,
                t,
                regime,
                limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Theory {
        c1: ratios.c1(),
        c2: ratios.c2(),
        d_left: law.d_left,
        d_right: law.d_right,
        r_c: pt.r_c,
        t_c: pt.t_c,
        spikes,
    })
}

/// One outlier and its spike estimate `gamma_inverse(lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub index: usize,
    pub lambda: f64,
    pub r_hat: f64,
}

fn estimates(lambdas: &[f64], ratios: DimensionRatios, threshold: f64) -> Result<Vec<Estimate>> {
    lambdas
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l > threshold)
        .map(|(index, &lambda)| {
            Ok(Estimate {
                index,
                lambda,
                r_hat: gamma_inverse(lambda, ratios)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub index: usize,
    pub lambdas: Vec<f64>,
    pub estimates: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Mean of `r_hat` per outlier index over the replicates that detected it.
    pub mean_r_hat: Vec<Option<f64>>,
    pub detections: Vec<usize>,
}

/// Numeric series for a figure: spectrum of the first replicate, the limiting
/// density on a grid and the theoretical reference lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub rug: Vec<f64>,
    pub density_x: Vec<f64>,
    pub density_y: Vec<f64>,
    pub lines: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
    pub center: bool,
    pub detect_margin: f64,
    pub theory: Theory,
    pub replicates: Vec<ReplicateResult>,
    pub aggregate: Aggregate,
    pub plot: PlotData,
}

/// Data for replicate `index` of `config`, centred if requested.
pub fn replicate_data(config: &ExperimentConfig, index: usize) -> Result<DataPair> {
    let mut rng = replicate_rng(config.model.seed, index as u64);
    let pair = match config.resolved_sampler() {
        SamplerChoice::General => sample_general(&config.model, &mut rng)?,
        _ => sample_coupled(&config.model, &mut rng)?,
    };
    if config.center {
        subtract_means(&pair)
    } else {
        Ok(pair)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs every replicate. Replicates use independent streams and are collected
/// by index, so the result is the same with or without `parallel`.
pub fn run_simulation(config: &ExperimentConfig, parallel: bool) -> Result<RunResult> {
    config.validate()?;
    let m = &config.model;
    let ratios = m.ratios()?;
    let theory = cmd_limits(ratios, &m.spikes)?;
    let threshold = theory.d_right + config.detect_margin;
    log::info!(
        "simulating {} replicates at p={}, q={}, n={}, seed {}",
        config.replicates,
        m.p,
        m.q,
        m.n,
        m.seed
    );

    let one = |i: usize| -> Result<(ReplicateResult, Vec<f64>)> {
        let pair = replicate_data(config, i)?;
        let report = squared_canonical_correlations(&pair)?;
        let est = estimates(&report.lambdas, ratios, threshold)?;
        let top = report.top(config.top_m).to_vec();
        let full = if i == 0 { report.lambdas } else { Vec::new() };
        Ok((
            ReplicateResult {
                index: i,
                lambdas: top,
                estimates: est,
            },
            full,
        ))
    };
    let outcomes: Vec<Result<(ReplicateResult, Vec<f64>)>> = if parallel {
        (0..config.replicates).into_par_iter().map(one).collect()
    } else {
        (0..config.replicates).map(one).collect()
    };
    let mut replicates = Vec::with_capacity(config.replicates);
    let mut rug = Vec::new();
    for outcome in outcomes {
        let (rep, full) = outcome?;
        if rep.index == 0 {
            rug = full;
        }
        replicates.push(rep);
    }

    let (mut mean, mut sd) = (Vec::new(), Vec::new());
    for j in 0..config.top_m {
        let column: Vec<f64> = replicates.iter().map(|r| r.lambdas[j]).collect();
        let (a, b) = mean_sd(&column);
        mean.push(a);
        sd.push(b);
    }
    let max_out = replicates
        .iter()
        .map(|r| r.estimates.len())
        .max()
        .unwrap_or(0);
    let mut mean_r_hat = Vec::new();
    let mut detections = Vec::new();
    for j in 0..max_out {
        let hits: Vec<f64> = replicates
            .iter()
            .filter_map(|r| r.estimates.get(j).map(|e| e.r_hat))
            .collect();
        detections.push(hits.len());
        mean_r_hat.push((!hits.is_empty()).then(|| mean_sd(&hits).0));
    }

    let plot = plot_data(&theory, rug)?;
    Ok(RunResult {
        p: m.p,
        q: m.q,
        n: m.n,
        seed: m.seed,
        sampler: config.resolved_sampler(),
        center: config.center,
        detect_margin: config.detect_margin,
        theory,
        replicates,
        aggregate: Aggregate {
            mean,
            sd,
            mean_r_hat,
            detections,
        },
        plot,
    })
}

pub fn cmd_simulate(config: &ExperimentConfig) -> Result<RunResult> {
    run_simulation(config, true)
}

fn plot_data(theory: &Theory, rug: Vec<f64>) -> Result<PlotData> {
    let ratios = DimensionRatios::new(theory.c1, theory.c2)?;
    let law = wachter_edges(ratios);
    let points = 201;
    let density_x: Vec<f64> = (0..points)
        .map(|i| law.d_left + law.width() * i as f64 / (points - 1) as f64)
        .collect();
    let density_y = density_x
        .iter()
        .map(|&x| law.density(x))
        .collect::<Result<Vec<_>>>()?;
    let mut lines = vec![law.d_left, law.d_right];
    lines.extend(
        theory
            .spikes
            .iter()
            .filter(|s| s.regime != Regime::Sticks)
            .map(|s| s.limit),
    );
    Ok(PlotData {
        rug,
        density_x,
        density_y,
        lines,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub d_right: f64,
    pub detect_margin: f64,
    pub estimates: Vec<Estimate>,
    pub bulk: Vec<f64>,
}

/// Reads a matrix stored one variable per row, one sample per column. A first
/// record that does not parse as numbers is taken as a header.
pub fn read_matrix_csv(path: &Path) -> Result<faer::Mat<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!(
                    "{}: record {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Parse(format!("{}: no numeric data", path.display())));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("{}: ragged rows", path.display())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!(
            "{}: non-finite entry",
            path.display()
        )));
    }
    Ok(faer::Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Outliers above `d_right(p/n, q/n) + margin` and their spike estimates.
pub fn estimate_pair(pair: &DataPair, detect_margin: Option<f64>) -> Result<EstimateResult> {
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    let ratios = ratios_from_dims(p, q, n)?;
    let margin = detect_margin.unwrap_or_else(|| super::config::default_detect_margin(n));
    if !(margin > 0.0) {
        return Err(Error::Config("detect_margin must be positive".into()));
    }
    let law = wachter_edges(ratios);
    let report = squared_canonical_correlations(pair)?;
    let est = estimates(&report.lambdas, ratios, law.d_right + margin)?;
    let bulk = report.lambdas[est.len()..].to_vec();
    Ok(EstimateResult {
        p,
        q,
        n,
        c1: ratios.c1(),
        c2: ratios.c2(),
        d_right: law.d_right,
        detect_margin: margin,
        estimates: est,
        bulk,
    })
}

pub fn cmd_estimate(
    x: &Path,
    y: &Path,
    detect_margin: Option<f64>,
    center: bool,
) -> Result<EstimateResult> {
    let pair = DataPair::new(read_matrix_csv(x)?, read_matrix_csv(y)?)?;
    let pair = if center { subtract_means(&pair)? } else { pair };
    estimate_pair(&pair, detect_margin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetComparison {
    pub lambda: f64,
    pub reduced: f64,
    pub full: f64,
    pub relative_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReplicate {
    pub index: usize,
    /// The determinant equation at each detected outlier.
    pub outliers: Vec<DetEvaluation>,
    /// Reduced against full determinant at points away from the outliers.
    pub comparisons: Vec<DetComparison>,
    pub mn: MnComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub seed: u64,
    pub theory: Theory,
    pub replicates: Vec<VerifyReplicate>,
    pub certified: usize,
    pub max_outlier_residual: f64,
    pub max_relative_diff: f64,
}

/// Residual bound for certifying an outlier.
pub const CERTIFY_TOL: f64 = 1e-6;

pub fn verify_pair(
    pair: &DataPair,
    index: usize,
    d_right: f64,
    margin: f64,
) -> Result<VerifyReplicate> {
    let report = squared_canonical_correlations(pair)?;
    let dv = DetVerifier::new(pair)?;
    let outliers = report
        .lambdas
        .iter()
        .copied()
        .filter(|&l| l > d_right + margin)
        .map(|l| dv.finite_n_det(l))
        .collect::<Result<Vec<_>>>()?;
    let probes = [0.25, 0.5, 0.75].map(|s| d_right + s * (1.0 - d_right));
    let comparisons = probes
        .iter()
        .map(|&l| {
            let reduced = dv.finite_n_det(l)?.det;
            let full = dv.full_det(l)?.det;
            let scale = reduced.abs().max(full.abs());
            let relative_diff = if scale > 0.0 {
                (reduced - full).abs() / scale
            } else {
                0.0
            };
            Ok(DetComparison {
                lambda: l,
                reduced,
                full,
                relative_diff,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let z = probes[1];
    let mn = MnComparison {
        z,
        measured: to_rows(&dv.m_n(z)?),
        limit: to_rows(&dv.m_limit(z)?),
    };
    Ok(VerifyReplicate {
        index,
        outliers,
        comparisons,
        mn,
    })
}

fn to_rows(m: &faer::Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn cmd_verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    config.validate()?;
    if config.resolved_sampler() != SamplerChoice::Coupled {
        return Err(Error::Unsupported(
            "verification needs the coupled sampler (no spike equal to 1)".into(),
        ));
    }
    if config.center {
        return Err(Error::Unsupported(
            "verification runs on uncentred data".into(),
        ));
    }
    let m = &config.model;
    let theory = cmd_limits(m.ratios()?, &m.spikes)?;
    log::info!(
        "verifying {} replicates at p={}, q={}, n={}",
        config.replicates,
        m.p,
        m.q,
        m.n
    );
    let results: Vec<Result<VerifyReplicate>> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let pair = replicate_data(config, i)?;
            verify_pair(&pair, i, theory.d_right, config.detect_margin)
        })
        .collect();
    let replicates = results.into_iter().collect::<Result<Vec<_>>>()?;
    let residuals = replicates
        .iter()
        .flat_map(|r| r.outliers.iter().map(|e| e.normalized.abs()));
    let certified = residuals.clone().filter(|&v| v < CERTIFY_TOL).count();
    let max_outlier_residual = residuals.fold(0.0, f64::max);
    let max_relative_diff = replicates
        .iter()
        .flat_map(|r| r.comparisons.iter().map(|c| c.relative_diff))
        .fold(0.0, f64::max);
    Ok(VerifyReport {
        p: m.p,
        q: m.q,
        n: m.n,
        seed: m.seed,
        theory,
        replicates,
        certified,
        max_outlier_residual,
        max_relative_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn rat(c1: f64, c2: f64) -> DimensionRatios {
        DimensionRatios::new(c1, c2).unwrap()
    }

    #[test]
    fn limits_for_figure_spikes() {
        let s = SpikeSpectrum::new(vec![0.8, 0.7, 0.6, 0.16, 0.15]).unwrap();
        let t = cmd_limits(rat(0.1, 0.2), &s).unwrap();
        let expected = [0.861, 0.793, 0.725];
        for (sp, e) in t.spikes.iter().zip(expected) {
            assert_eq!(sp.regime, Regime::Outlier);
            assert!((sp.limit - e).abs() < 5e-4);
        }
        assert_eq!(t.spikes[3].regime, Regime::Sticks);
        assert_eq!(t.spikes[4].regime, Regime::Sticks);
        assert_eq!(t.spikes[4].limit, t.d_right);
    }

    #[test]
    fn limits_edge_cases() {
        let t = cmd_limits(rat(0.1, 0.2), &SpikeSpectrum::empty()).unwrap();
        assert!(t.spikes.is_empty());
        assert!((t.d_right - 0.5).abs() < 1e-12);
        let t = cmd_limits(rat(0.1, 0.2), &SpikeSpectrum::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(t.spikes[0].regime, Regime::Deterministic);
        assert_eq!(t.spikes[0].limit, 1.0);
        assert_eq!(t.spikes[0].t, None);
    }

    fn small(spikes: Vec<f64>, replicates: usize) -> ExperimentConfig {
        let model = ModelConfig::new(20, 40, 200, SpikeSpectrum::new(spikes).unwrap(), 3).unwrap();
        let mut c = ExperimentConfig::new(model, replicates).unwrap();
        c.top_m = 5;
        c
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = small(vec![0.9], 6);
        let a = run_simulation(&c, false).unwrap();
        let b = run_simulation(&c, true).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.replicates.len(), 6);
        assert_eq!(a.plot.rug.len(), 20);
        assert_eq!(a.aggregate.mean.len(), 5);
    }

    #[test]
    fn theory_block_ignores_the_seed() {
        let mut c = small(vec![0.9, 0.1], 2);
        let a = run_simulation(&c, true).unwrap();
        c.model.seed = 99;
        let b = run_simulation(&c, true).unwrap();
        assert_eq!(a.theory, b.theory);
        assert_ne!(a.replicates, b.replicates);
    }

    #[test]
    fn unit_spike_is_estimated_as_one() {
        let c = small(vec![1.0], 1);
        let r = run_simulation(&c, false).unwrap();
        assert_eq!(r.sampler, SamplerChoice::General);
        let e = &r.replicates[0].estimates[0];
        assert!((e.lambda - 1.0).abs() < 1e-12);
        assert!((e.r_hat - 1.0).abs() < 1e-6);
    }

    #[test]
    fn null_estimate_is_empty() {
        let c = small(vec![], 1);
        let pair = replicate_data(&c, 0).unwrap();
        let e = estimate_pair(&pair, Some(0.05)).unwrap();
        assert!(e.estimates.is_empty());
        assert_eq!(e.bulk.len(), 20);
    }

    #[test]
    fn verify_small() {
        let c = small(vec![0.95], 2);
        let v = cmd_verify(&c).unwrap();
        assert_eq!(v.certified, 2);
        assert!(v.max_outlier_residual < CERTIFY_TOL);
        assert!(v.max_relative_diff < 1e-6);
        let c = small(vec![], 1);
        let v = cmd_verify(&c).unwrap();
        assert_eq!(v.certified, 0);
        for cmp in &v.replicates[0].comparisons {
            assert!((cmp.reduced - 1.0).abs() < 1e-15);
        }
        assert!(cmd_verify(&small(vec![1.0], 1)).is_err());
    }
}
