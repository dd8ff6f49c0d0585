//! First-order (delta method) variance estimates for the six estimators.
//!
//! Every estimator is a smooth function of the stacked column sums
//! `x = [A_1..A_D | B_1..B_D | C_1..C_D | Y]` of the per-pair indicator
//! matrix, where `A_d` counts forecasts in bin `d`, `B_d` the events among
//! them, `C_d` their summed probability and `Y` the total number of events.
//! With the rows assumed i.i.d., `Cov(x) ~ X'(I - 11'/N)X`, and
//! `Var F(x) ~ J Cov(x) J'` with `J` the gradient of `F` at the observed
//! sums. The normalising `N` is treated as a constant throughout.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verif::CountSummary;

/// The six estimators that receive variance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Rel,
    Res,
    Unc,
    RelBc,
    ResBc,
    UncBc,
}

/// Which analytic component an estimator targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Reliability,
    Resolution,
    Uncertainty,
}

impl Estimator {
    pub const ALL: [Estimator; 6] = [
        Estimator::Rel,
        Estimator::Res,
        Estimator::Unc,
        Estimator::RelBc,
        Estimator::ResBc,
        Estimator::UncBc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Rel => "rel",
            Estimator::Res => "res",
            Estimator::Unc => "unc",
            Estimator::RelBc => "rel_bc",
            Estimator::ResBc => "res_bc",
            Estimator::UncBc => "unc_bc",
        }
    }

    pub fn is_bias_corrected(self) -> bool {
        matches!(self, Estimator::RelBc | Estimator::ResBc | Estimator::UncBc)
    }

    pub fn component(self) -> Component {
        match self {
            Estimator::Rel | Estimator::RelBc => Component::Reliability,
            Estimator::Res | Estimator::ResBc => Component::Resolution,
            Estimator::Unc | Estimator::UncBc => Component::Uncertainty,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// One value per estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerEstimator<T> {
    pub rel: T,
    pub res: T,
    pub unc: T,
    pub rel_bc: T,
    pub res_bc: T,
    pub unc_bc: T,
}

impl<T> PerEstimator<T> {
    pub fn from_fn(mut f: impl FnMut(Estimator) -> T) -> Self {
        PerEstimator {
            rel: f(Estimator::Rel),
            res: f(Estimator::Res),
            unc: f(Estimator::Unc),
            rel_bc: f(Estimator::RelBc),
            res_bc: f(Estimator::ResBc),
            unc_bc: f(Estimator::UncBc),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Estimator, &T) -> U) -> PerEstimator<U> {
        PerEstimator::from_fn(|e| f(e, &self[e]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Estimator, &T)> {
        Estimator::ALL.into_iter().map(move |e| (e, &self[e]))
    }
}

impl<T> Index<Estimator> for PerEstimator<T> {
    type Output = T;

    fn index(&self, e: Estimator) -> &T {
        match e {
            Estimator::Rel => &self.rel,
            Estimator::Res => &self.res,
            Estimator::Unc => &self.unc,
            Estimator::RelBc => &self.rel_bc,
            Estimator::ResBc => &self.res_bc,
            Estimator::UncBc => &self.unc_bc,
        }
    }
}

impl<T> IndexMut<Estimator> for PerEstimator<T> {
    fn index_mut(&mut self, e: Estimator) -> &mut T {
        match e {
            Estimator::Rel => &mut self.rel,
            Estimator::Res => &mut self.res,
            Estimator::Unc => &mut self.unc,
            Estimator::RelBc => &mut self.rel_bc,
            Estimator::ResBc => &mut self.res_bc,
            Estimator::UncBc => &mut self.unc_bc,
        }
    }
}

/// Index arithmetic for the stacked coordinate vector of a `bins`-bin scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackedLayout {
    pub bins: usize,
}

impl StackedLayout {
    pub fn new(bins: usize) -> Self {
        Self { bins }
    }

    pub fn len(&self) -> usize {
        3 * self.bins + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn count(&self, d: usize) -> usize {
        d
    }

    pub fn events(&self, d: usize) -> usize {
        self.bins + d
    }

    pub fn sum_p(&self, d: usize) -> usize {
        2 * self.bins + d
    }

    pub fn total_events(&self) -> usize {
        3 * self.bins
    }
}

/// Stacked column sums `[A | B | C | Y]` of a summary.
pub fn stacked_vector(counts: &CountSummary) -> Vec<f64> {
    let layout = StackedLayout::new(counts.bins());
    let mut x = vec![0.0; layout.len()];
    for d in 0..counts.bins() {
        x[layout.count(d)] = counts.count()[d] as f64;
        x[layout.events(d)] = counts.events()[d] as f64;
        x[layout.sum_p(d)] = counts.sum_p()[d];
    }
    x[layout.total_events()] = counts.total_events() as f64;
    x
}

/// Evaluates an estimator as a real function of stacked coordinates with
/// the sample size `n` held fixed.
///
/// Bin membership in the sums (`A_d > 0`, or `A_d > 1` for the correction
/// term) is decided from the coordinate values, so the function is smooth in
/// a neighbourhood of any point whose counts avoid 0 and 1.
pub fn estimator_value(estimator: Estimator, x: &[f64], n: f64) -> f64 {
    assert_eq!((x.len() - 1) % 3, 0, "stacked vector must have length 3D+1");
    let layout = StackedLayout::new((x.len() - 1) / 3);
    let y = x[layout.total_events()];
    let ybar = y / n;
    let unc = y * (n - y) / (n * n);
    let mut rel = 0.0;
    let mut res = 0.0;
    let mut s = 0.0;
    for d in 0..layout.bins {
        let a = x[layout.count(d)];
        let b = x[layout.events(d)];
        let c = x[layout.sum_p(d)];
        if a > 0.0 {
            rel += (b - c).powi(2) / a;
            res += a * (b / a - ybar).powi(2);
        }
        if a > 1.0 {
            s += b * (a - b) / (a * (a - 1.0));
        }
    }
    let (rel, res, s) = (rel / n, res / n, s / n);
    let t = y * (n - y) / (n * n * (n - 1.0));
    match estimator {
        Estimator::Rel => rel,
        Estimator::Res => res,
        Estimator::Unc => unc,
        Estimator::RelBc => rel - s,
        Estimator::ResBc => res - s + t,
        Estimator::UncBc => y * (n - y) / (n * (n - 1.0)),
    }
}

/// Covariance matrix of the stacked column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    layout: StackedLayout,
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn layout(&self) -> StackedLayout {
        self.layout
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// `v' Σ v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.matrix * &v)[(0, 0)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// `X'X - (X'1)(1'X)/N`, assembled from the sufficient statistics.
///
/// Each row of `X` has a one in the count slot of its bin, `y` in the event
/// slot of its bin, `p` in the probability slot of its bin, and `y` in the
/// total-events slot, so the Gram matrix is block structured with no
/// cross-bin terms except through the total-events slot.
pub fn covariance_of_sums(counts: &CountSummary) -> CovarianceMatrix {
    let layout = StackedLayout::new(counts.bins());
    let dim = layout.len();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let yt = layout.total_events();
    for d in 0..counts.bins() {
        let (ia, ib, ic) = (layout.count(d), layout.events(d), layout.sum_p(d));
        let a = counts.count()[d] as f64;
        let b = counts.events()[d] as f64;
        let c = counts.sum_p()[d];
        let entries = [
            (ia, ia, a),
            (ia, ib, b),
            (ia, ic, c),
            (ia, yt, b),
            (ib, ib, b),
            (ib, ic, counts.sum_py()[d]),
            (ib, yt, b),
            (ic, ic, counts.sum_p2()[d]),
            (ic, yt, counts.sum_py()[d]),
        ];
        for (i, j, v) in entries {
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    gram[(yt, yt)] = counts.total_events() as f64;
    let sums = DVector::from_vec(stacked_vector(counts));
    let n = counts.n() as f64;
    let matrix = gram - (&sums * sums.transpose()) / n;
    CovarianceMatrix { layout, matrix }
}

/// Gradients of the six estimators with respect to the stacked coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobians {
    layout: StackedLayout,
    rows: PerEstimator<Vec<f64>>,
}

impl Jacobians {
    pub fn layout(&self) -> StackedLayout {
        self.layout
    }

    pub fn row(&self, estimator: Estimator) -> &[f64] {
        &self.rows[estimator]
    }
}

/// Analytic gradients. Entries whose formula has a vanishing denominator
/// (an empty bin, or the `A_d - 1` terms of the corrected estimators for
/// `A_d <= 1`, or `N - 1 = 0`) are zero.
pub fn jacobians(counts: &CountSummary) -> Jacobians {
    let layout = StackedLayout::new(counts.bins());
    let dim = layout.len();
    let n = counts.n() as f64;
    let y = counts.total_events() as f64;
    let ybar = y / n;
    let mut rows = PerEstimator::from_fn(|_| vec![0.0; dim]);

    for d in 0..counts.bins() {
        if counts.count()[d] == 0 {
            continue;
        }
        let a = counts.count()[d] as f64;
        let b = counts.events()[d] as f64;
        let c = counts.sum_p()[d];
        let (ia, ib, ic) = (layout.count(d), layout.events(d), layout.sum_p(d));
        let freq = b / a;

        let rel_a = -(b - c).powi(2) / (n * a * a);
        let rel_b = 2.0 * (b - c) / (n * a);
        let rel_c = -rel_b;
        let res_a = -(freq - ybar) * (freq + ybar) / n;
        let res_b = 2.0 * (freq - ybar) / n;

        rows.rel[ia] = rel_a;
        rows.rel[ib] = rel_b;
        rows.rel[ic] = rel_c;
        rows.res[ia] = res_a;
        rows.res[ib] = res_b;

        // Bins with a single member carry no correction term.
        let (corr_a, corr_b) = if counts.count()[d] > 1 {
            let am1 = a - 1.0;
            (
                b * (a * a - 2.0 * a * b + b) / (n * a * a * am1 * am1),
                -(a - 2.0 * b) / (n * a * am1),
            )
        } else {
            (0.0, 0.0)
        };
        rows.rel_bc[ia] = rel_a + corr_a;
        rows.rel_bc[ib] = rel_b + corr_b;
        rows.rel_bc[ic] = rel_c;
        rows.res_bc[ia] = res_a + corr_a;
        rows.res_bc[ib] = res_b + corr_b;
    }

    let yt = layout.total_events();
    // d RES / d Y = -(2/N^2) B.. + (2Y/N^3) A.. vanishes because B.. = Y and A.. = N.
    rows.res[yt] = 0.0;
    rows.unc[yt] = 1.0 / n - 2.0 * y / (n * n);
    if counts.n() > 1 {
        rows.res_bc[yt] = (n - 2.0 * y) / (n * n * (n - 1.0));
        rows.unc_bc[yt] = (n - 2.0 * y) / (n * (n - 1.0));
    }
    Jacobians { layout, rows }
}

/// Variances of the three estimators of one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentVariances {
    pub rel: f64,
    pub res: f64,
    pub unc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSet {
    pub traditional: ComponentVariances,
    /// Absent when `n < 2`.
    pub bias_corrected: Option<ComponentVariances>,
    /// Estimators whose sandwich product came out negative from round-off
    /// and was clamped to zero.
    pub clamped: Vec<Estimator>,
}

impl VarianceSet {
    pub fn get(&self, estimator: Estimator) -> Option<f64> {
        let family = if estimator.is_bias_corrected() {
            self.bias_corrected.as_ref()?
        } else {
            &self.traditional
        };
        Some(match estimator.component() {
            Component::Reliability => family.rel,
            Component::Resolution => family.res,
            Component::Uncertainty => family.unc,
        })
    }

    pub fn bias_corrected(&self, n: u64) -> Result<&ComponentVariances> {
        self.bias_corrected
            .as_ref()
            .ok_or(Error::UndefinedCorrection { n })
    }

    pub fn to_per_estimator(&self) -> PerEstimator<Option<f64>> {
        PerEstimator::from_fn(|e| self.get(e))
    }
}

/// `J Σ J'` for every estimator.
pub fn variance_estimates(counts: &CountSummary) -> VarianceSet {
    let cov = covariance_of_sums(counts);
    let jac = jacobians(counts);
    let mut clamped = Vec::new();
    let mut eval = |e: Estimator| {
        let v = cov.quadratic_form(jac.row(e));
        if v < 0.0 {
            clamped.push(e);
            0.0
        } else {
            v
        }
    };
    let traditional = ComponentVariances {
        rel: eval(Estimator::Rel),
        res: eval(Estimator::Res),
        unc: eval(Estimator::Unc),
    };
    let bias_corrected = (counts.n() >= 2).then(|| ComponentVariances {
        rel: eval(Estimator::RelBc),
        res: eval(Estimator::ResBc),
        unc: eval(Estimator::UncBc),
    });
    clamped.sort_by_key(|e| e.slot());
    VarianceSet {
        traditional,
        bias_corrected,
        clamped,
    }
}
