//! Brier score decomposition into reliability, resolution and uncertainty,
//! with traditional, bias-corrected and range-consistent estimators and
//! first-order variance estimates for each of them.
//!
//! ```
//! use brier_core::{summarize, decompose_traditional, variance_estimates, BinningScheme, ForecastSeries};
//!
//! let series = ForecastSeries::from_numeric(&[0.2, 0.8, 0.8, 0.4], &[0.0, 1.0, 0.0, 1.0]).unwrap();
//! let counts = summarize(&series, &BinningScheme::equal_width(2).unwrap());
//! let d = decompose_traditional(&counts);
//! let v = variance_estimates(&counts);
//! assert!(d.rel >= 0.0 && v.traditional.rel >= 0.0);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar1;
pub mod decomp;
pub mod error;
pub mod normal;
pub mod report;
pub mod rng;
pub mod simlab;
pub mod variance;
pub mod verif;

pub use decomp::{
    consistency_correct, decompose_all, decompose_bias_corrected, decompose_traditional,
    Decomposition, DecompositionSet, Family,
};
pub use error::{Error, Result};
pub use variance::{
    covariance_of_sums, jacobians, variance_estimates, CovarianceMatrix, Estimator, Jacobians,
    PerEstimator, VarianceSet,
};
pub use verif::{
    bin_index, empirical_brier, summarize, BinningScheme, BrierScore, CountSummary, ForecastSeries,
};
