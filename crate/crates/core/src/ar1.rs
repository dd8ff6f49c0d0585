//! Seasonal-cycle regression, AR(1) anomalies and exceedance forecasts for
//! daily temperature series, plus the threshold sweep that verifies those
//! forecasts.

use std::f64::consts::PI;

use nalgebra::{Matrix5, Vector5};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_all, DecompositionSet};
use crate::error::{Error, Result};
use crate::normal::std_normal_cdf;
use crate::rng::substream;
use crate::variance::{variance_estimates, VarianceSet};
use crate::verif::{empirical_brier, summarize, BinningScheme, BrierScore, ForecastSeries};

/// Angular frequency of the annual cycle, radians per day.
pub const OMEGA: f64 = 2.0 * PI / 365.2425;

/// Daily observations keyed by day number (days since 1970-01-01).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    days: Vec<i64>,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(days: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        if days.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} day indices for {} values",
                days.len(),
                values.len()
            )));
        }
        if let Some(i) = days.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "day index {} at position {} does not increase on {}",
                days[i + 1],
                i + 1,
                days[i]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at position {i}"
            )));
        }
        Ok(Self { days, values })
    }

    pub fn days(&self) -> &[i64] {
        &self.days
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Number of places where consecutive day indices differ by more than one.
    pub fn gaps(&self) -> usize {
        self.days.windows(2).filter(|w| w[1] - w[0] > 1).count()
    }

    /// Splits into observations before `day` and from `day` on.
    pub fn split_at_day(&self, day: i64) -> (DailySeries, DailySeries) {
        let k = self.days.partition_point(|&d| d < day);
        (
            DailySeries {
                days: self.days[..k].to_vec(),
                values: self.values[..k].to_vec(),
            },
            DailySeries {
                days: self.days[k..].to_vec(),
                values: self.values[k..].to_vec(),
            },
        )
    }
}

/// Second-order trigonometric polynomial
/// `b0 + b1 cos(wn) + b2 sin(wn) + b3 cos(2wn) + b4 sin(2wn)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub coefficients: [f64; 5],
}

impl SeasonalModel {
    pub fn new(coefficients: [f64; 5]) -> Self {
        Self { coefficients }
    }

    pub fn design_row(day: i64) -> [f64; 5] {
        let t = OMEGA * day as f64;
        [1.0, t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()]
    }

    pub fn evaluate(&self, day: i64) -> f64 {
        Self::design_row(day)
            .iter()
            .zip(&self.coefficients)
            .map(|(x, b)| x * b)
            .sum()
    }
}

/// Ordinary least squares fit of the seasonal cycle via the normal equations.
pub fn fit_seasonal(series: &DailySeries) -> Result<SeasonalModel> {
    if series.len() < 5 {
        return Err(Error::RankDeficient);
    }
    let mut xtx = Matrix5::<f64>::zeros();
    let mut xty = Vector5::<f64>::zeros();
    for (&day, &value) in series.days.iter().zip(&series.values) {
        let row = Vector5::from(SeasonalModel::design_row(day));
        xtx += row * row.transpose();
        xty += row * value;
    }
    let lu = xtx.lu();
    // Reject numerically singular systems, not just exactly singular ones.
    let diag = lu.u().diagonal();
    let scale = xtx.diagonal().max();
    if diag.iter().any(|u| u.abs() <= 1e-10 * scale) {
        return Err(Error::RankDeficient);
    }
    let beta = lu.solve(&xty).ok_or(Error::RankDeficient)?;
    Ok(SeasonalModel::new(beta.into()))
}

/// Departures from the seasonal cycle, keeping day indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySeries {
    pub days: Vec<i64>,
    pub values: Vec<f64>,
}

impl AnomalySeries {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub fn anomalies(series: &DailySeries, model: &SeasonalModel) -> AnomalySeries {
    AnomalySeries {
        days: series.days.clone(),
        values: series
            .days
            .iter()
            .zip(&series.values)
            .map(|(&d, &v)| v - model.evaluate(d))
            .collect(),
    }
}

/// `T[n+1] = alpha T[n] + sigma eps[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub alpha: f64,
    pub sigma: f64,
}

impl Ar1Model {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "AR(1) coefficient must satisfy |alpha| < 1, got {alpha}"
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise standard deviation must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { alpha, sigma })
    }

    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (1.0 - self.alpha * self.alpha)
    }
}

/// Yule-Walker fit.
///
/// The series is demeaned; `c0` is the lag-0 autocovariance (divisor `n`).
/// The lag-1 sum runs over pairs of consecutive day indices only and, when
/// gaps remove pairs, is rescaled by `(n - 1) / pairs` so that a gap-free
/// series reduces to the textbook `r1`. Then `alpha = r1` and
/// `sigma^2 = c0 (1 - alpha^2)`.
pub fn fit_ar1(anomalies: &AnomalySeries) -> Result<Ar1Model> {
    let n = anomalies.values.len();
    let pairs: Vec<(usize, usize)> = anomalies
        .days
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] == 1)
        .map(|(i, _)| (i, i + 1))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "AR(1) fit needs at least 2 consecutive-day pairs, got {}",
            pairs.len()
        )));
    }
    let mean = anomalies.mean();
    let dev: Vec<f64> = anomalies.values.iter().map(|v| v - mean).collect();
    let ss: f64 = dev.iter().map(|d| d * d).sum();
    let spread = (ss / n as f64).sqrt();
    let magnitude = anomalies.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if spread <= 1e-9 * magnitude {
        return Err(Error::ConstantSeries);
    }
    let lag1: f64 = pairs.iter().map(|&(i, j)| dev[i] * dev[j]).sum();
    let lag1 = lag1 * (n - 1) as f64 / pairs.len() as f64;
    let alpha = lag1 / ss;
    let c0 = ss / n as f64;
    let sigma = (c0 * (1.0 - alpha * alpha)).max(0.0).sqrt();
    Ok(Ar1Model { alpha, sigma })
}

/// `P(T > threshold | previous anomaly)` under the AR(1) model.
pub fn exceedance_forecast(model: &Ar1Model, previous_anomaly: f64, threshold: f64) -> Result<f64> {
    if !(model.sigma > 0.0) {
        return Err(Error::DegenerateForecast(format!(
            "noise standard deviation is {}",
            model.sigma
        )));
    }
    if !(model.alpha.abs() < 1.0) {
        return Err(Error::DegenerateForecast(format!(
            "non-stationary AR(1) coefficient {}",
            model.alpha
        )));
    }
    Ok(std_normal_cdf(
        (model.alpha * previous_anomaly - threshold) / model.sigma,
    ))
}

/// Simulates `days` consecutive days starting at day 0 from a seeded stream.
pub fn generate_synthetic(
    seasonal: &SeasonalModel,
    ar1: &Ar1Model,
    days: usize,
    seed: u64,
) -> Result<DailySeries> {
    let model = Ar1Model::new(ar1.alpha, ar1.sigma)?;
    let mut rng = substream(seed, 0);
    let mut anomaly = model.stationary_variance().sqrt() * rng.sample::<f64, _>(StandardNormal);
    let mut day_index = Vec::with_capacity(days);
    let mut values = Vec::with_capacity(days);
    for day in 0..days as i64 {
        if day > 0 {
            let eps: f64 = rng.sample(StandardNormal);
            anomaly = model.alpha * anomaly + model.sigma * eps;
        }
        day_index.push(day);
        values.push(seasonal.evaluate(day) + anomaly);
    }
    DailySeries::new(day_index, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub n: usize,
    pub brier: BrierScore,
    pub decompositions: DecompositionSet,
    pub variances: VarianceSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub seasonal: SeasonalModel,
    pub ar1: Ar1Model,
    pub bins: usize,
    /// Test days without an observation on the previous day.
    pub skipped: usize,
    pub rows: Vec<SweepRow>,
}

/// Fits on `train`, forecasts exceedances one day ahead on `test`, and
/// decomposes the Brier score of those forecasts for each threshold.
pub fn threshold_sweep(
    train: &DailySeries,
    test: &DailySeries,
    thresholds: &[f64],
    bins: usize,
) -> Result<Sweep> {
    let scheme = BinningScheme::equal_width(bins)?;
    let seasonal = fit_seasonal(train)?;
    let ar1 = fit_ar1(&anomalies(train, &seasonal)).map_err(|e| match e {
        Error::ConstantSeries => Error::DegenerateForecast(
            "training anomalies are constant, so the fitted noise standard deviation is zero"
                .into(),
        ),
        other => other,
    })?;
    if !(ar1.sigma > 0.0) {
        return Err(Error::DegenerateForecast(
            "fitted noise standard deviation is zero".into(),
        ));
    }
    let test_anom = anomalies(test, &seasonal);
    let pairs: Vec<(f64, f64)> = test_anom
        .days
        .windows(2)
        .zip(test_anom.values.windows(2))
        .filter(|(d, _)| d[1] - d[0] == 1)
        .map(|(_, v)| (v[0], v[1]))
        .collect();
    let skipped = test.len() - pairs.len();
    if pairs.is_empty() {
        return Err(Error::InsufficientData(
            "test series has no consecutive-day pairs".into(),
        ));
    }
    let rows = thresholds
        .par_iter()
        .map(|&tau| {
            let mut p = Vec::with_capacity(pairs.len());
            let mut y = Vec::with_capacity(pairs.len());
            for &(prev, cur) in &pairs {
                p.push(exceedance_forecast(&ar1, prev, tau)?);
                y.push(cur > tau);
            }
            let series = ForecastSeries::new(p, y)?;
            let counts = summarize(&series, &scheme);
            Ok(SweepRow {
                threshold: tau,
                n: series.len(),
                brier: empirical_brier(&series),
                decompositions: decompose_all(&counts),
                variances: variance_estimates(&counts),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        seasonal,
        ar1,
        bins,
        skipped,
        rows,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    const BETA: [f64; 5] = [13.2, -10.7, -3.1, -0.6, 0.03];

    #[test]
    fn rejects_non_increasing_days() {
        assert!(DailySeries::new(vec![1, 2, 2], vec![0.0; 3]).is_err());
        assert!(DailySeries::new(vec![3, 2], vec![0.0; 2]).is_err());
        assert!(DailySeries::new(vec![1, 2], vec![0.0]).is_err());
        let s = DailySeries::new(vec![1, 2, 5, 6, 9], vec![0.0; 5]).unwrap();
        assert_eq!(s.gaps(), 2);
    }

    #[test]
    fn noiseless_seasonal_recovery() {
        let model = SeasonalModel::new(BETA);
        let days: Vec<i64> = (3653..3653 + 1000).collect();
        let values = days.iter().map(|&d| model.evaluate(d)).collect();
        let s = DailySeries::new(days, values).unwrap();
        let fit = fit_seasonal(&s).unwrap();
        for (a, b) in fit.coefficients.iter().zip(BETA) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let anom = anomalies(&s, &fit);
        assert!(anom.values.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn rank_deficient_design() {
        let s = DailySeries::new(vec![0, 1, 2, 3], vec![1.0; 4]).unwrap();
        assert_eq!(fit_seasonal(&s), Err(Error::RankDeficient));
    }

    #[test]
    fn ar1_length_three() {
        // mean 0, sum of squares 2, lag-1 products 1*0 + 0*(-1) = 0
        let a = AnomalySeries {
            days: vec![0, 1, 2, 3],
            values: vec![1.0, 0.0, -1.0, 0.0],
        };
        let m = fit_ar1(&a).unwrap();
        assert!(m.alpha.abs() < 1e-15);
        assert!((m.sigma - 0.5f64.sqrt()).abs() < 1e-15);

        // three consecutive days: sum of squares 2, lag-1 products 0
        let three = AnomalySeries {
            days: vec![0, 1, 2],
            values: vec![1.0, 0.0, -1.0],
        };
        let m = fit_ar1(&three).unwrap();
        assert_eq!(m.alpha, 0.0);
        assert!((m.sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);

        let gappy = AnomalySeries {
            days: vec![0, 1, 5],
            values: vec![1.0, 0.0, -1.0],
        };
        assert!(matches!(fit_ar1(&gappy), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ar1_handwritten_lag_one() {
        // x = (2, 1, -1, -2): mean 0, ss = 10, lag-1 = 2 + (-1) + 2 = 3
        let a = AnomalySeries {
            days: vec![10, 11, 12, 13],
            values: vec![2.0, 1.0, -1.0, -2.0],
        };
        let m = fit_ar1(&a).unwrap();
        assert!((m.alpha - 0.3).abs() < 1e-15);
        assert!((m.sigma - (2.5f64 * 0.91).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ar1_noiseless_geometric_sequence() {
        // Reference values from an independent numpy evaluation of the
        // same Yule-Walker formulas.
        let values: Vec<f64> = (0..100).map(|i| 0.5f64.powi(i)).collect();
        let a = AnomalySeries {
            days: (0..100).collect(),
            values,
        };
        let m = fit_ar1(&a).unwrap();
        assert!((m.alpha - 0.49969072164948464).abs() < 1e-12);
        assert!((m.sigma - 0.09850887656900059).abs() < 1e-12);
    }

    #[test]
    fn ar1_constant_series_is_rejected() {
        let a = AnomalySeries {
            days: (0..10).collect(),
            values: vec![1.5; 10],
        };
        assert_eq!(fit_ar1(&a), Err(Error::ConstantSeries));
    }

    #[test]
    fn ar1_skips_gaps() {
        // Pairs (0,1) and (3,4),(4,5); the (1,3) step is not a pair.
        let a = AnomalySeries {
            days: vec![0, 1, 3, 4, 5],
            values: vec![1.0, 1.0, -1.0, -1.0, 0.0],
        };
        let m = fit_ar1(&a).unwrap();
        // mean 0, ss 4, lag-1 over pairs: 1 + 1 + 0 = 2, rescaled by 4/3
        assert!((m.alpha - (2.0 * 4.0 / 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn forecast_limits() {
        let m = Ar1Model::new(0.77, 2.97).unwrap();
        assert_eq!(exceedance_forecast(&m, 0.0, 0.0).unwrap(), 0.5);
        let t = 3.0;
        let p = exceedance_forecast(&m, t, m.alpha * t - 10.0 * m.sigma).unwrap();
        assert!((1.0 - p) < 1e-9);
        let p = exceedance_forecast(&m, 5.0, 5.0).unwrap();
        assert!((p - 0.34930208110589128669).abs() < 1e-12);
        let flat = Ar1Model {
            alpha: 0.5,
            sigma: 0.0,
        };
        assert!(matches!(
            exceedance_forecast(&flat, 0.0, 1.0),
            Err(Error::DegenerateForecast(_))
        ));
    }

    #[test]
    fn forecast_monotonicity() {
        let m = Ar1Model::new(0.6, 1.5).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25).collect();
        for w in grid.windows(2) {
            assert!(
                exceedance_forecast(&m, 1.0, w[1]).unwrap()
                    <= exceedance_forecast(&m, 1.0, w[0]).unwrap()
            );
            assert!(
                exceedance_forecast(&m, w[1], 1.0).unwrap()
                    >= exceedance_forecast(&m, w[0], 1.0).unwrap()
            );
        }
    }

    #[test]
    fn zero_noise_generates_the_cycle() {
        let seasonal = SeasonalModel::new(BETA);
        let ar = Ar1Model::new(0.77, 0.0).unwrap();
        let s = generate_synthetic(&seasonal, &ar, 400, 1).unwrap();
        for (&d, &v) in s.days().iter().zip(s.values()) {
            assert_eq!(v, seasonal.evaluate(d));
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let seasonal = SeasonalModel::new(BETA);
        let ar = Ar1Model::new(0.77, 2.97).unwrap();
        let a = generate_synthetic(&seasonal, &ar, 1000, 5).unwrap();
        let b = generate_synthetic(&seasonal, &ar, 1000, 5).unwrap();
        let c = generate_synthetic(&seasonal, &ar, 1000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(generate_synthetic(
            &seasonal,
            &Ar1Model {
                alpha: 1.0,
                sigma: 1.0
            },
            10,
            1
        )
        .is_err());
    }

    #[test]
    fn split_at_day() {
        let s = DailySeries::new((0..10).collect(), (0..10).map(|v| v as f64).collect()).unwrap();
        let (a, b) = s.split_at_day(4);
        assert_eq!(a.days(), &[0, 1, 2, 3]);
        assert_eq!(b.days()[0], 4);
    }

    #[test]
    fn sweep_shapes() {
        let seasonal = SeasonalModel::new(BETA);
        let ar = Ar1Model::new(0.77, 2.97).unwrap();
        let s = generate_synthetic(&seasonal, &ar, 2000, 11).unwrap();
        let (train, test) = s.split_at_day(1000);
        let sweep = threshold_sweep(&train, &test, &[0.0, 2.5, 5.0], 10).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        assert_eq!(sweep.skipped, 1);
        for row in &sweep.rows {
            assert_eq!(row.n, 999);
            assert!(row.brier.score >= 0.0 && row.brier.score <= 1.0);
        }
    }

    #[test]
    fn noiseless_training_is_a_degenerate_forecast() {
        let seasonal = SeasonalModel::new(BETA);
        let ar = Ar1Model::new(0.77, 0.0).unwrap();
        let s = generate_synthetic(&seasonal, &ar, 400, 1).unwrap();
        assert!(s
            .days()
            .iter()
            .all(|&d| s.values()[d as usize] == seasonal.evaluate(d)));
        let (train, test) = s.split_at_day(200);
        assert!(matches!(
            threshold_sweep(&train, &test, &[5.0], 10),
            Err(Error::DegenerateForecast(_))
        ));
    }
}
