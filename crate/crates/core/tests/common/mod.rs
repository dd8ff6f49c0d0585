//! Test-only reference computations, kept independent of the library's
//! estimation paths.
#![allow(
    dead_code,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

use brier_core::{BinningScheme, CountSummary, ForecastSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

/// Dense `N x (3D+1)` matrix with rows `[onehot(bin) | onehot(bin)*y | onehot(bin)*p | y]`.
pub fn indicator_matrix(series: &ForecastSeries, scheme: &BinningScheme) -> Vec<Vec<f64>> {
    let d = scheme.bins();
    series
        .iter()
        .map(|(p, y)| {
            let y = if y { 1.0 } else { 0.0 };
            // bin by direct scan of edges, independent of the library's search
            let edges = scheme.edges();
            let mut bin = 0;
            while !(p <= edges[bin + 1]) {
                bin += 1;
            }
            let mut row = vec![0.0; 3 * d + 1];
            row[bin] = 1.0;
            row[d + bin] = y;
            row[2 * d + bin] = p;
            row[3 * d] = y;
            row
        })
        .collect()
}

/// `X' (I - 11'/N) X` by explicit centering.
pub fn brute_force_covariance(series: &ForecastSeries, scheme: &BinningScheme) -> Vec<Vec<f64>> {
    let x = indicator_matrix(series, scheme);
    let n = x.len();
    let k = x[0].len();
    let means: Vec<f64> = (0..k)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            cov[i][j] = x.iter().map(|r| (r[i] - means[i]) * r[j]).sum();
        }
    }
    cov
}

pub fn column_sums(series: &ForecastSeries, scheme: &BinningScheme) -> Vec<f64> {
    let x = indicator_matrix(series, scheme);
    (0..x[0].len())
        .map(|j| x.iter().map(|r| r[j]).sum())
        .collect()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

pub fn quadratic_form(m: &[Vec<f64>], v: &[f64]) -> f64 {
    m.iter()
        .enumerate()
        .map(|(i, row)| v[i] * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Traditional and bias-corrected estimators written directly from the
/// per-bin counts of the stacked vector (same smooth extension as the
/// library: bin membership from the coordinate values, `n` fixed).
pub fn estimator_oracle(which: usize, x: &[f64], n: f64) -> f64 {
    let d = (x.len() - 1) / 3;
    let y = x[3 * d];
    let mut rel = 0.0;
    let mut res = 0.0;
    let mut s = 0.0;
    for k in 0..d {
        let (a, b, c) = (x[k], x[d + k], x[2 * d + k]);
        if a > 0.0 {
            rel += (b - c) * (b - c) / a / n;
            let f = b / a - y / n;
            res += a * f * f / n;
        }
        if a > 1.0 {
            s += b * (a - b) / (a * (a - 1.0)) / n;
        }
    }
    let unc = y * (n - y) / (n * n);
    let extra = y * (n - y) / (n * n * (n - 1.0));
    match which {
        0 => rel,
        1 => res,
        2 => unc,
        3 => rel - s,
        4 => res - s + extra,
        5 => unc + extra,
        _ => unreachable!(),
    }
}

/// Standard normal CDF by the everywhere-convergent positive-term series
/// `1/2 + phi(x) * sum x^(2k+1) / (1*3*...*(2k+1))`, evaluated for `|x|`
/// and reflected for negative arguments.
pub fn normal_cdf_oracle(x: f64) -> f64 {
    let ax = x.abs();
    let phi = (-0.5 * ax * ax).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut term = ax;
    let mut sum = ax;
    let mut k = 1.0;
    while term > 1e-300 && term > sum * 1e-18 {
        term *= ax * ax / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    let upper = 0.5 + phi * sum;
    if x >= 0.0 {
        upper
    } else {
        1.0 - upper
    }
}

fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Solves `A x = b` exactly over the rationals by Gauss-Jordan elimination.
pub fn solve_exact(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r: Vec<BigRational> = row.iter().map(|&v| to_rational(v)).collect();
            r.push(to_rational(bi));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("singular");
        m.swap(col, piv);
        let p = m[col][col].clone();
        for j in col..=n {
            m[col][j] = &m[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..=n {
                    let t = &f * &m[col][j];
                    m[r][j] = &m[r][j] - t;
                }
            }
        }
    }
    m.iter()
        .map(|r| {
            let v = &r[n];
            let (num, den) = (v.numer().clone(), v.denom().clone());
            let sign = if v.is_negative() { -1.0 } else { 1.0 };
            sign * ratio_to_f64(num.abs(), den)
        })
        .collect()
}

fn ratio_to_f64(num: BigInt, den: BigInt) -> f64 {
    // scale to keep 60 significant bits before converting
    let shift = (num.bits() as i64 - den.bits() as i64) - 60;
    let (n, d) = if shift > 0 {
        (num, den << shift as usize)
    } else {
        (num << (-shift) as usize, den)
    };
    let q = n / d;
    let qf: f64 = q.to_string().parse().unwrap();
    qf * 2f64.powi(shift as i32)
}

/// Random series whose probabilities are constant inside every bin of an
/// equal-width scheme with `bins` bins.
pub fn within_bin_constant_series<R: Rng>(rng: &mut R, n: usize, bins: usize) -> ForecastSeries {
    let values: Vec<f64> = (0..bins)
        .map(|d| {
            let lo = d as f64 / bins as f64;
            let hi = (d + 1) as f64 / bins as f64;
            if d == 0 {
                rng.random_range(lo..=hi)
            } else {
                // strictly inside (lo, hi]
                hi - rng.random::<f64>() * (hi - lo) * 0.999
            }
        })
        .collect();
    let mut p = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let v = values[rng.random_range(0..bins)];
        p.push(v);
        y.push(rng.random::<f64>() < v);
    }
    ForecastSeries::new(p, y).unwrap()
}

/// Random series with unconstrained probabilities.
pub fn random_series<R: Rng>(rng: &mut R, n: usize) -> ForecastSeries {
    let p: Vec<f64> = (0..n)
        .map(|_| {
            // occasionally land exactly on 0, 1 or a tenth
            match rng.random_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                2 => rng.random_range(0..=10) as f64 / 10.0,
                _ => rng.random::<f64>(),
            }
        })
        .collect();
    let y: Vec<bool> = p.iter().map(|&q| rng.random::<f64>() < q).collect();
    ForecastSeries::new(p, y).unwrap()
}

/// A consistent summary with every `a_d >= 2` and `1 <= b_d <= a_d - 1`.
pub fn non_degenerate_counts<R: Rng>(rng: &mut R, bins: usize) -> CountSummary {
    let scheme = BinningScheme::equal_width(bins).unwrap();
    let mut count = Vec::new();
    let mut events = Vec::new();
    let mut sum_p = Vec::new();
    let mut sum_p2 = Vec::new();
    let mut sum_py = Vec::new();
    for _ in 0..bins {
        let a: u64 = rng.random_range(3..60);
        let b: u64 = rng.random_range(1..a);
        let mean_p: f64 = rng.random_range(0.05..0.95);
        let c = mean_p * a as f64;
        count.push(a);
        events.push(b);
        sum_p.push(c);
        sum_p2.push(mean_p * mean_p * a as f64);
        sum_py.push(mean_p * b as f64);
    }
    CountSummary::from_parts(scheme, count, events, sum_p, sum_p2, sum_py).unwrap()
}
