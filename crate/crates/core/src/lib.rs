//! Finite-rank canonical correlation analysis in high dimensions.
//!
//! Two Gaussian vectors of dimensions `p` and `q` observed `n` times are
//! correlated through `k` population squared canonical correlations
//! `r_1 >= .. >= r_k`. With `p/n -> c1` and `q/n -> c2`, a spike above the
//! threshold `r_c` produces a sample eigenvalue that converges to `gamma(r) >
//! d_right`; smaller spikes are absorbed into the Wachter bulk `[d_left, d_right]`.
//!
//! * [`model`]: ratios, spikes and the coupling constants
//! * [`sampler`]: reproducible paired Gaussian data
//! * [`cca`]: sample covariances and squared canonical correlations
//! * [`rmt`]: bulk law, threshold, outlier map, limit functions and transforms
//! * [`detverify`]: the finite-`n` determinant equation
//! * [`cli`]: experiments, estimation and output formats

// `!(a > b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cca;
pub mod cli;
pub mod detverify;
pub mod error;
pub mod model;
pub mod quad;
pub mod rmt;
pub mod sampler;

pub use error::{Error, Result};
