//! Reliability / resolution / uncertainty estimators.
//!
//! Three families are produced from one [`CountSummary`]:
//!
//! * traditional: the classic binned estimators, always inside their
//!   analytic ranges;
//! * bias-corrected: the traditional values shifted by the small-sample
//!   correction terms `S` (reliability) and `T` (uncertainty), which may
//!   leave those ranges;
//! * consistency-corrected: the traditional triple moved by a fraction
//!   `gamma` of the same shift, as far as possible without leaving
//!   `[0,1] x [0,1] x [0,1/4]`.
//!
//! All three share the same `rel - res + unc`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verif::CountSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Traditional,
    BiasCorrected,
    ConsistencyCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub rel: f64,
    pub res: f64,
    pub unc: f64,
    pub family: Family,
    /// Shrink factor, set only for the consistency-corrected family.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
}

impl Decomposition {
    /// `rel - res + unc`.
    pub fn brier_sum(&self) -> f64 {
        self.rel - self.res + self.unc
    }
}

pub fn decompose_traditional(counts: &CountSummary) -> Decomposition {
    let n = counts.n() as f64;
    let ybar = counts.total_events() as f64 / n;
    let mut rel = 0.0;
    let mut res = 0.0;
    for d in 0..counts.bins() {
        let a = counts.count()[d];
        if a == 0 {
            continue;
        }
        let a = a as f64;
        let b = counts.events()[d] as f64;
        let c = counts.sum_p()[d];
        rel += (b - c).powi(2) / a;
        res += a * (b / a - ybar).powi(2);
    }
    let y = counts.total_events() as f64;
    Decomposition {
        rel: rel / n,
        res: res / n,
        unc: y * (n - y) / (n * n),
        family: Family::Traditional,
        gamma: None,
    }
}

/// Traditional decomposition together with the correction terms `S` and `T`.
fn corrections(counts: &CountSummary) -> Result<(Decomposition, f64, f64)> {
    if counts.n() < 2 {
        return Err(Error::UndefinedCorrection { n: counts.n() });
    }
    let base = decompose_traditional(counts);
    let n = counts.n() as f64;
    let mut s = 0.0;
    for d in 0..counts.bins() {
        let a = counts.count()[d];
        if a <= 1 {
            continue;
        }
        let a = a as f64;
        let b = counts.events()[d] as f64;
        s += b * (a - b) / (a * (a - 1.0));
    }
    let s = s / n;
    let t = unc_bias_corrected(base.unc, counts.n()) - base.unc;
    Ok((base, s, t))
}

fn unc_bias_corrected(unc: f64, n: u64) -> f64 {
    let n = n as f64;
    unc * n / (n - 1.0)
}

pub fn decompose_bias_corrected(counts: &CountSummary) -> Result<Decomposition> {
    let (base, s, t) = corrections(counts)?;
    Ok(Decomposition {
        rel: base.rel - s,
        res: base.res - s + t,
        unc: unc_bias_corrected(base.unc, counts.n()),
        family: Family::BiasCorrected,
        gamma: None,
    })
}

/// Shrink factor for the shift `(-s, -s + t, t)` applied to `base`.
///
/// A constraint whose denominator vanishes cannot be violated by any shift
/// and is left out of the minimum.
pub fn shrink_factor(base: &Decomposition, s: f64, t: f64) -> f64 {
    let mut gamma: f64 = 1.0;
    if s != 0.0 {
        gamma = gamma.min(base.rel / s);
    }
    let q = s - t;
    if q != 0.0 {
        gamma = gamma.min((base.res / q).max((base.res - 1.0) / q));
    }
    if t != 0.0 {
        gamma = gamma.min((1.0 - 4.0 * base.unc) / (4.0 * t));
    }
    gamma.max(0.0)
}

pub fn consistency_correct(counts: &CountSummary) -> Result<Decomposition> {
    let (base, s, t) = corrections(counts)?;
    let gamma = shrink_factor(&base, s, t);
    // Clamp only removes round-off at an active bound.
    Ok(Decomposition {
        rel: (base.rel - gamma * s).max(0.0),
        res: (base.res - gamma * (s - t)).clamp(0.0, 1.0),
        unc: (base.unc + gamma * t).clamp(0.0, 0.25),
        family: Family::ConsistencyCorrected,
        gamma: Some(gamma),
    })
}

/// All three families from one summary; the corrected ones are absent for `n < 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSet {
    pub traditional: Decomposition,
    pub bias_corrected: Option<Decomposition>,
    pub consistency_corrected: Option<Decomposition>,
}

pub fn decompose_all(counts: &CountSummary) -> DecompositionSet {
    DecompositionSet {
        traditional: decompose_traditional(counts),
        bias_corrected: decompose_bias_corrected(counts).ok(),
        consistency_corrected: consistency_correct(counts).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verif::{summarize, BinningScheme, ForecastSeries};

    fn counts(p: &[f64], y: &[f64], bins: usize) -> CountSummary {
        let s = ForecastSeries::from_numeric(p, y).unwrap();
        summarize(&s, &BinningScheme::equal_width(bins).unwrap())
    }

    #[test]
    fn single_bin_has_zero_resolution() {
        let c = counts(&[0.1, 0.7, 0.3, 0.9], &[0.0, 1.0, 1.0, 0.0], 1);
        assert_eq!(decompose_traditional(&c).res, 0.0);
    }

    #[test]
    fn perfect_two_bin_forecast() {
        let c = counts(&[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 1.0], 2);
        let d = decompose_traditional(&c);
        assert_eq!(d.rel, 0.0);
        assert_eq!(d.res, 0.25);
        assert_eq!(d.unc, 0.25);
        assert_eq!(d.brier_sum(), 0.0);
    }

    #[test]
    fn maximal_uncertainty() {
        let c = counts(&[0.3, 0.6, 0.2, 0.9], &[1.0, 0.0, 1.0, 0.0], 4);
        assert_eq!(decompose_traditional(&c).unc, 0.25);
    }

    #[test]
    fn bias_corrected_can_leave_range() {
        let c = counts(&[0.5, 0.5], &[1.0, 0.0], 1);
        let d = decompose_bias_corrected(&c).unwrap();
        assert!((d.rel + 0.25).abs() < 1e-15);

        let c = counts(&[0.3, 0.6, 0.2, 0.9], &[1.0, 0.0, 1.0, 0.0], 1);
        let d = decompose_bias_corrected(&c).unwrap();
        assert!((d.unc - 1.0 / 3.0).abs() < 1e-15);
        assert!(d.unc > 0.25);
    }

    #[test]
    fn singleton_bins_are_not_corrected() {
        let c = counts(&[0.0, 1.0], &[0.0, 1.0], 2);
        let t = decompose_traditional(&c);
        let b = decompose_bias_corrected(&c).unwrap();
        assert_eq!(b.rel, t.rel);
        assert_eq!(b.rel, 0.0);
    }

    #[test]
    fn correction_needs_two_pairs() {
        let c = counts(&[0.4], &[1.0], 2);
        assert_eq!(
            decompose_bias_corrected(&c),
            Err(Error::UndefinedCorrection { n: 1 })
        );
        assert!(consistency_correct(&c).is_err());
        let all = decompose_all(&c);
        assert!(all.bias_corrected.is_none() && all.consistency_corrected.is_none());
    }

    #[test]
    fn gamma_zero_when_reliability_would_go_negative() {
        let c = counts(&[0.5, 0.5], &[1.0, 0.0], 1);
        let t = decompose_traditional(&c);
        let g = consistency_correct(&c).unwrap();
        assert_eq!(g.gamma, Some(0.0));
        assert_eq!((g.rel, g.res, g.unc), (t.rel, t.res, t.unc));
    }

    #[test]
    fn gamma_one_when_correction_stays_in_range() {
        // Miscalibrated enough that REL' stays positive, UNC' <= 1/4.
        let p = [0.4, 0.4, 0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.6, 0.6];
        let y = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let c = counts(&p, &y, 2);
        let b = decompose_bias_corrected(&c).unwrap();
        assert!(b.rel >= 0.0 && b.res >= 0.0 && b.unc <= 0.25);
        let g = consistency_correct(&c).unwrap();
        assert_eq!(g.gamma, Some(1.0));
        assert!((g.rel - b.rel).abs() < 1e-15);
        assert!((g.res - b.res).abs() < 1e-15);
        assert!((g.unc - b.unc).abs() < 1e-15);
    }

    #[test]
    fn zero_shift_gives_gamma_one() {
        let base = Decomposition {
            rel: 0.1,
            res: 0.05,
            unc: 0.2,
            family: Family::Traditional,
            gamma: None,
        };
        assert_eq!(shrink_factor(&base, 0.0, 0.0), 1.0);
    }

    #[test]
    fn uncertainty_bound_limits_gamma() {
        // y balanced: UNC = 1/4 so any T > 0 forces gamma = 0.
        let c = counts(&[0.2, 0.2, 0.8, 0.8], &[0.0, 1.0, 1.0, 0.0], 2);
        let g = consistency_correct(&c).unwrap();
        assert_eq!(g.gamma, Some(0.0));
        assert!(g.unc <= 0.25);
    }

    #[test]
    fn unc_identity() {
        let c = counts(&[0.2, 0.4, 0.7, 0.9, 0.5], &[0.0, 1.0, 1.0, 1.0, 0.0], 3);
        let t = decompose_traditional(&c);
        let b = decompose_bias_corrected(&c).unwrap();
        assert_eq!(b.unc, t.unc * 5.0 / 4.0);
        // 3 events out of 5: Y(N-Y)/(N(N-1)) = 6/20
        assert!((b.unc - 0.3).abs() < 1e-15);
    }
}
