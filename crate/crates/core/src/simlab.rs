//! Monte Carlo laboratory with analytically known decomposition components.
//!
//! Each instance draws one of six event probabilities `q_d` uniformly; the
//! forecast equals `q_d` except that `q_6 = 0.55` is forecast as `1`. The
//! true components are REL* = 27/800, RES* = 7/240 and UNC* = 21/100.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_bias_corrected, decompose_traditional};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::variance::{variance_estimates, Component, Estimator, PerEstimator};
use crate::verif::{summarize, BinningScheme, ForecastSeries};

/// Event probabilities of the six forecast categories.
pub const EVENT_PROBABILITIES: [f64; 6] = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55];
/// Forecast issued for each category.
pub const FORECASTS: [f64; 6] = [0.05, 0.15, 0.25, 0.35, 0.45, 1.0];
/// Bin edges isolating each of the six forecast values.
pub const SCHEME_EDGES: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0];

/// The six-category forecasting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArtificialScheme;

impl ArtificialScheme {
    pub fn climatology(&self) -> f64 {
        EVENT_PROBABILITIES.iter().sum::<f64>() / 6.0
    }

    pub fn binning(&self) -> BinningScheme {
        BinningScheme::from_edges(SCHEME_EDGES.to_vec()).expect("static edges are valid")
    }

    /// One forecast/outcome pair.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let d = rng.random_range(0..6);
        let y = rng.random::<f64>() < EVENT_PROBABILITIES[d];
        (FORECASTS[d], y)
    }
}

/// True values of the three components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truths {
    pub rel: f64,
    pub res: f64,
    pub unc: f64,
}

impl Truths {
    pub fn for_estimator(&self, e: Estimator) -> f64 {
        match e.component() {
            Component::Reliability => self.rel,
            Component::Resolution => self.res,
            Component::Uncertainty => self.unc,
        }
    }
}

pub fn true_components() -> Truths {
    Truths {
        rel: 27.0 / 800.0,
        res: 7.0 / 240.0,
        unc: 21.0 / 100.0,
    }
}

/// Draws `n` independent pairs from the scheme.
pub fn sample_trial<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ForecastSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "trial size must be at least 1".into(),
        ));
    }
    let scheme = ArtificialScheme;
    let (p, y): (Vec<f64>, Vec<bool>) = (0..n).map(|_| scheme.draw(rng)).unzip();
    ForecastSeries::new(p, y)
}

/// Estimates and variance estimates of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Trial index; also the id of the random substream it was drawn from.
    pub trial: u64,
    pub estimates: PerEstimator<f64>,
    pub variances: PerEstimator<f64>,
}

fn evaluate_trial(trial: u64, series: &ForecastSeries, binning: &BinningScheme) -> TrialRecord {
    let counts = summarize(series, binning);
    let trad = decompose_traditional(&counts);
    let bc = decompose_bias_corrected(&counts).expect("trial size is at least 2");
    let vars = variance_estimates(&counts);
    TrialRecord {
        trial,
        estimates: PerEstimator {
            rel: trad.rel,
            res: trad.res,
            unc: trad.unc,
            rel_bc: bc.rel,
            res_bc: bc.res,
            unc_bc: bc.unc,
        },
        variances: PerEstimator::from_fn(|e| vars.get(e).expect("trial size is at least 2")),
    }
}

fn run_streams(trials: usize, n: usize, seed: u64, stream_offset: u64) -> Vec<TrialRecord> {
    let binning = ArtificialScheme.binning();
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_offset + i);
            let series = sample_trial(n, &mut rng).expect("n >= 2 checked by caller");
            evaluate_trial(i, &series, &binning)
        })
        .collect()
}

/// Runs `trials` independent experiments of size `n`; trial `i` uses
/// substream `i` of `seed`.
pub fn run_experiment(trials: usize, n: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "trial size must be at least 2 for the corrected estimators".into(),
        ));
    }
    Ok(run_streams(trials, n, seed, 0))
}

/// Summary statistics of one estimator over a set of trials; all averages
/// divide by the number of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub sample_variance: f64,
    pub mean_estimated_variance: f64,
    pub mean_squared_error: f64,
    pub mean_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub truths: Truths,
    pub estimators: PerEstimator<EstimatorSummary>,
}

fn sorted_by_trial(records: &[TrialRecord]) -> Vec<&TrialRecord> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial);
    sorted
}

/// Aggregates trial records. Records are processed in trial order, so the
/// result does not depend on the order of `records`.
pub fn summarize_trials(records: &[TrialRecord], truths: &Truths) -> Result<TrialSummary> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 trial records, got {}",
            records.len()
        )));
    }
    let sorted = sorted_by_trial(records);
    let m = sorted.len() as f64;
    let estimators = PerEstimator::from_fn(|e| {
        let truth = truths.for_estimator(e);
        let mean = sorted.iter().map(|r| r.estimates[e]).sum::<f64>() / m;
        let sample_variance = sorted
            .iter()
            .map(|r| (r.estimates[e] - mean).powi(2))
            .sum::<f64>()
            / m;
        EstimatorSummary {
            sample_variance,
            mean_estimated_variance: sorted.iter().map(|r| r.variances[e]).sum::<f64>() / m,
            mean_squared_error: sorted
                .iter()
                .map(|r| (r.estimates[e] - truth).powi(2))
                .sum::<f64>()
                / m,
            mean_bias: sorted.iter().map(|r| r.estimates[e] - truth).sum::<f64>() / m,
        }
    });
    Ok(TrialSummary {
        trials: sorted.len(),
        truths: *truths,
        estimators,
    })
}

/// Number of trials whose interval `estimate ± k·sd` covers the truth.
pub fn coverage(records: &[TrialRecord], truths: &Truths, k: f64) -> Result<PerEstimator<usize>> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "interval half-width must be positive, got {k}"
        )));
    }
    Ok(PerEstimator::from_fn(|e| {
        let truth = truths.for_estimator(e);
        records
            .iter()
            .filter(|r| (r.estimates[e] - truth).abs() <= k * r.variances[e].sqrt())
            .count()
    }))
}

/// Least-squares slope of `ln(values)` against `ln(sizes)`.
///
/// Needs at least three distinct sizes spanning a factor of ten, and
/// positive values.
pub fn log_log_slope(sizes: &[usize], values: &[f64]) -> Result<f64> {
    if sizes.len() != values.len() {
        return Err(Error::InvalidArgument(
            "sizes and values differ in length".into(),
        ));
    }
    validate_grid(sizes)?;
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "log-log fit needs positive finite values".into(),
        ));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn validate_grid(sizes: &[usize]) -> Result<()> {
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(
            "size grid needs at least 3 distinct values".into(),
        ));
    }
    if distinct[0] < 2 {
        return Err(Error::InvalidArgument(
            "every grid size must be at least 2".into(),
        ));
    }
    if (*distinct.last().unwrap() as f64) < 10.0 * distinct[0] as f64 {
        return Err(Error::InvalidArgument(
            "size grid must span at least one decade".into(),
        ));
    }
    Ok(())
}

/// Per grid point: mean over trials of `|sample variance - estimated variance|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mean_abs_difference: PerEstimator<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub trials: usize,
    pub points: Vec<ConvergencePoint>,
    pub slopes: PerEstimator<f64>,
}

/// Fits how fast the variance estimates approach the Monte Carlo variance.
///
/// Grid point `g` draws its trials from substreams `(g << 32) + i`.
pub fn convergence_study(n_grid: &[usize], trials: usize, seed: u64) -> Result<ConvergenceStudy> {
    validate_grid(n_grid)?;
    if trials < 2 {
        return Err(Error::InvalidArgument(
            "convergence study needs at least 2 trials per size".into(),
        ));
    }
    let truths = true_components();
    let points = n_grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let records = run_streams(trials, n, seed, (g as u64) << 32);
            let summary = summarize_trials(&records, &truths)?;
            let m = records.len() as f64;
            let mean_abs_difference = PerEstimator::from_fn(|e| {
                let sv = summary.estimators[e].sample_variance;
                records
                    .iter()
                    .map(|r| (sv - r.variances[e]).abs())
                    .sum::<f64>()
                    / m
            });
            Ok(ConvergencePoint {
                n,
                mean_abs_difference,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
    let mut slopes = PerEstimator::default();
    for e in Estimator::ALL {
        let values: Vec<f64> = points.iter().map(|p| p.mean_abs_difference[e]).collect();
        slopes[e] = log_log_slope(&sizes, &values)?;
    }
    Ok(ConvergenceStudy {
        trials,
        points,
        slopes,
    })
}
