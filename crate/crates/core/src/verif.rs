//! Forecast data model, probability binning and per-bin sufficient statistics.
//!
//! Binning follows the closed-first / half-open-left convention: with edges
//! `0 = e0 < e1 < ... < eD = 1` the first bin is `[e0, e1]` and bin `d > 0` is
//! `(e_d, e_{d+1}]`. A probability sitting exactly on an interior edge belongs
//! to the lower bin.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired forecast probabilities and binary outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries {
    probabilities: Vec<f64>,
    outcomes: Vec<bool>,
}

impl ForecastSeries {
    pub fn new(probabilities: Vec<f64>, outcomes: Vec<bool>) -> Result<Self> {
        if probabilities.len() != outcomes.len() {
            return Err(Error::LengthMismatch {
                probabilities: probabilities.len(),
                outcomes: outcomes.len(),
            });
        }
        if probabilities.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (index, &value) in probabilities.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(Self {
            probabilities,
            outcomes,
        })
    }

    /// Builds a series from numeric outcomes, which must be exactly 0 or 1.
    pub fn from_numeric(probabilities: &[f64], outcomes: &[f64]) -> Result<Self> {
        let outcomes = outcomes
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value == 0.0 {
                    Ok(false)
                } else if value == 1.0 {
                    Ok(true)
                } else {
                    Err(Error::InvalidOutcome { index, value })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probabilities.to_vec(), outcomes)
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    /// Always false; construction rejects empty series.
    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.probabilities
            .iter()
            .copied()
            .zip(self.outcomes.iter().copied())
    }

    /// Concatenates two series.
    pub fn concat(&self, other: &ForecastSeries) -> ForecastSeries {
        let mut probabilities = self.probabilities.clone();
        probabilities.extend_from_slice(&other.probabilities);
        let mut outcomes = self.outcomes.clone();
        outcomes.extend_from_slice(&other.outcomes);
        ForecastSeries {
            probabilities,
            outcomes,
        }
    }
}

/// Bin edges over the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BinningScheme {
    edges: Vec<f64>,
}

impl BinningScheme {
    /// `bins` bins of equal width; edge `i` is `i / bins`.
    pub fn equal_width(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidBinning("need at least one bin".into()));
        }
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        Self::from_edges(edges)
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidBinning(
                "need at least two edges (one bin)".into(),
            ));
        }
        if edges[0] != 0.0 || edges[edges.len() - 1] != 1.0 {
            return Err(Error::InvalidBinning(
                "first edge must be 0 and last edge must be 1".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidBinning(
                "edges must be strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Zero-based index of the bin containing `p`.
    pub fn bin_index(&self, p: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange { index: 0, value: p });
        }
        Ok(self.locate(p))
    }

    // Number of upper edges strictly below p. Valid for p in [0, 1].
    fn locate(&self, p: f64) -> usize {
        self.edges[1..].partition_point(|&e| e < p)
    }
}

impl TryFrom<Vec<f64>> for BinningScheme {
    type Error = Error;

    fn try_from(edges: Vec<f64>) -> Result<Self> {
        Self::from_edges(edges)
    }
}

impl From<BinningScheme> for Vec<f64> {
    fn from(scheme: BinningScheme) -> Self {
        scheme.edges
    }
}

/// Zero-based bin index of `p` under `scheme`.
pub fn bin_index(p: f64, scheme: &BinningScheme) -> Result<usize> {
    scheme.bin_index(p)
}

/// Per-bin sufficient statistics of a forecast series.
///
/// `count[d]` is the number of forecasts in bin `d`, `events[d]` the number of
/// those with `y = 1`, `sum_p[d]` the sum of their probabilities. `sum_p2` and
/// `sum_py` hold the sums of `p^2` and `p*y`, which together with the others
/// determine the full Gram matrix needed for covariance estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    scheme: BinningScheme,
    count: Vec<u64>,
    events: Vec<u64>,
    sum_p: Vec<f64>,
    sum_p2: Vec<f64>,
    sum_py: Vec<f64>,
    total_events: u64,
    n: u64,
}

impl CountSummary {
    /// Assembles a summary from per-bin statistics, checking every invariant.
    ///
    /// Real-valued invariants are checked with a small relative slack so that
    /// summaries produced by floating-point accumulation are accepted.
    pub fn from_parts(
        scheme: BinningScheme,
        count: Vec<u64>,
        events: Vec<u64>,
        sum_p: Vec<f64>,
        sum_p2: Vec<f64>,
        sum_py: Vec<f64>,
    ) -> Result<Self> {
        let bins = scheme.bins();
        for (name, len) in [
            ("count", count.len()),
            ("events", events.len()),
            ("sum_p", sum_p.len()),
            ("sum_p2", sum_p2.len()),
            ("sum_py", sum_py.len()),
        ] {
            if len != bins {
                return Err(Error::InvalidCounts(format!(
                    "{name} has {len} entries for {bins} bins"
                )));
            }
        }
        let slack = |x: f64| 1e-9 * x.abs().max(1.0);
        for d in 0..bins {
            let a = count[d] as f64;
            let b = events[d] as f64;
            let ok = events[d] <= count[d]
                && sum_p[d] >= -slack(a)
                && sum_p[d] <= a + slack(a)
                && sum_p2[d] >= -slack(a)
                && sum_p2[d] <= sum_p[d] + slack(a)
                && sum_py[d] >= -slack(a)
                && sum_py[d] <= sum_p[d].min(b) + slack(a);
            if !ok {
                return Err(Error::InvalidCounts(format!(
                    "bin {d} violates 0 <= b <= a, 0 <= sum p^2 <= sum p <= a or 0 <= sum py <= min(sum p, b)"
                )));
            }
        }
        let n = count.iter().sum();
        if n == 0 {
            return Err(Error::EmptySeries);
        }
        let total_events = events.iter().sum();
        Ok(Self {
            scheme,
            count,
            events,
            sum_p,
            sum_p2,
            sum_py,
            total_events,
            n,
        })
    }

    pub fn scheme(&self) -> &BinningScheme {
        &self.scheme
    }

    pub fn bins(&self) -> usize {
        self.count.len()
    }

    pub fn count(&self) -> &[u64] {
        &self.count
    }

    pub fn events(&self) -> &[u64] {
        &self.events
    }

    pub fn sum_p(&self) -> &[f64] {
        &self.sum_p
    }

    pub fn sum_p2(&self) -> &[f64] {
        &self.sum_p2
    }

    pub fn sum_py(&self) -> &[f64] {
        &self.sum_py
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Elementwise sum of two summaries built on the same scheme.
    pub fn merge(&self, other: &CountSummary) -> Result<CountSummary> {
        if self.scheme != other.scheme {
            return Err(Error::InvalidCounts(
                "cannot merge summaries built on different binning schemes".into(),
            ));
        }
        let add_u = |x: &[u64], y: &[u64]| x.iter().zip(y).map(|(a, b)| a + b).collect();
        let add_f = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + b).collect();
        Ok(CountSummary {
            scheme: self.scheme.clone(),
            count: add_u(&self.count, &other.count),
            events: add_u(&self.events, &other.events),
            sum_p: add_f(&self.sum_p, &other.sum_p),
            sum_p2: add_f(&self.sum_p2, &other.sum_p2),
            sum_py: add_f(&self.sum_py, &other.sum_py),
            total_events: self.total_events + other.total_events,
            n: self.n + other.n,
        })
    }
}

impl Add for &CountSummary {
    type Output = Result<CountSummary>;

    fn add(self, rhs: &CountSummary) -> Self::Output {
        self.merge(rhs)
    }
}

/// Accumulates the per-bin statistics of `series` in one pass.
///
/// Within each bin the probabilities are summed in ascending order, so the
/// result does not depend on the order of the input pairs.
pub fn summarize(series: &ForecastSeries, scheme: &BinningScheme) -> CountSummary {
    let bins = scheme.bins();
    let mut count = vec![0u64; bins];
    let mut events = vec![0u64; bins];
    let mut members: Vec<Vec<(f64, bool)>> = vec![Vec::new(); bins];
    for (p, y) in series.iter() {
        let d = scheme.locate(p);
        count[d] += 1;
        events[d] += y as u64;
        members[d].push((p, y));
    }
    let mut sum_p = vec![0.0; bins];
    let mut sum_p2 = vec![0.0; bins];
    let mut sum_py = vec![0.0; bins];
    for (d, bin) in members.iter_mut().enumerate() {
        bin.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(p, y) in bin.iter() {
            sum_p[d] += p;
            sum_p2[d] += p * p;
            if y {
                sum_py[d] += p;
            }
        }
    }
    let total_events = events.iter().sum();
    CountSummary {
        scheme: scheme.clone(),
        count,
        events,
        sum_p,
        sum_p2,
        sum_py,
        total_events,
        n: series.len() as u64,
    }
}

/// Mean Brier score with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrierScore {
    pub score: f64,
    /// Sample standard deviation of the squared residuals over `sqrt(n)`;
    /// absent for a single pair.
    pub standard_error: Option<f64>,
}

pub fn empirical_brier(series: &ForecastSeries) -> BrierScore {
    let n = series.len() as f64;
    let squared: Vec<f64> = series
        .iter()
        .map(|(p, y)| {
            let r = p - if y { 1.0 } else { 0.0 };
            r * r
        })
        .collect();
    let score = squared.iter().sum::<f64>() / n;
    let standard_error = (squared.len() >= 2).then(|| {
        let ss: f64 = squared.iter().map(|s| (s - score).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    });
    BrierScore {
        score,
        standard_error,
    }
}
