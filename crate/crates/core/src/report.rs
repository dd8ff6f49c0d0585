//! Serializable result document for a decomposed forecast archive.

use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_all, Decomposition};
use crate::variance::{variance_estimates, Estimator, PerEstimator};
use crate::verif::{empirical_brier, summarize, BinningScheme, BrierScore, ForecastSeries};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub n: u64,
    pub bins: usize,
    pub edges: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinCounts {
    pub count: Vec<u64>,
    pub events: Vec<u64>,
    pub sum_p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub clamped_variances: Vec<Estimator>,
    pub skipped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub input: InputDigest,
    pub counts: BinCounts,
    pub brier: BrierScore,
    pub traditional: Decomposition,
    pub bias_corrected: Option<Decomposition>,
    pub consistency_corrected: Option<Decomposition>,
    pub gamma: Option<f64>,
    /// `null` entries are the corrected estimators when `n < 2`.
    pub variances: PerEstimator<Option<f64>>,
    pub diagnostics: Diagnostics,
}

impl ResultDocument {
    pub fn build(series: &ForecastSeries, scheme: &BinningScheme) -> Self {
        let counts = summarize(series, scheme);
        let decomps = decompose_all(&counts);
        let vars = variance_estimates(&counts);
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            input: InputDigest {
                n: counts.n(),
                bins: scheme.bins(),
                edges: scheme.edges().to_vec(),
            },
            counts: BinCounts {
                count: counts.count().to_vec(),
                events: counts.events().to_vec(),
                sum_p: counts.sum_p().to_vec(),
            },
            brier: empirical_brier(series),
            traditional: decomps.traditional,
            bias_corrected: decomps.bias_corrected,
            gamma: decomps.consistency_corrected.and_then(|d| d.gamma),
            consistency_corrected: decomps.consistency_corrected,
            variances: vars.to_per_estimator(),
            diagnostics: Diagnostics {
                clamped_variances: vars.clamped,
                skipped_rows: 0,
            },
        }
    }
}
