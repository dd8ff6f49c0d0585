//! Python bindings for `brier-core`.

use std::collections::BTreeMap;

use brier_core::ar1::{self, Ar1Model, DailySeries, SeasonalModel};
use brier_core::report::ResultDocument;
use brier_core::simlab;
use brier_core::{self as core, Estimator};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(module = "pybrier", name = "ForecastSeries", frozen)]
pub struct PyForecastSeries(core::ForecastSeries);

#[pymethods]
impl PyForecastSeries {
    /// Outcomes may be given as 0/1 numbers or booleans.
    #[new]
    fn new(probabilities: Vec<f64>, outcomes: Vec<f64>) -> PyResult<Self> {
        core::ForecastSeries::from_numeric(&probabilities, &outcomes)
            .map(Self)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.0.probabilities().to_vec()
    }

    #[getter]
    fn outcomes(&self) -> Vec<bool> {
        self.0.outcomes().to_vec()
    }

    /// `(score, standard_error)`; the standard error is `None` for one pair.
    fn brier(&self) -> (f64, Option<f64>) {
        let b = core::empirical_brier(&self.0);
        (b.score, b.standard_error)
    }
}

#[pyclass(module = "pybrier", name = "BinningScheme", frozen)]
pub struct PyBinningScheme(core::BinningScheme);

#[pymethods]
impl PyBinningScheme {
    #[new]
    #[pyo3(signature = (bins=None, *, edges=None))]
    fn new(bins: Option<usize>, edges: Option<Vec<f64>>) -> PyResult<Self> {
        let scheme = match (bins, edges) {
            (Some(b), None) => core::BinningScheme::equal_width(b),
            (None, Some(e)) => core::BinningScheme::from_edges(e),
            _ => return Err(PyValueError::new_err("give exactly one of bins or edges")),
        };
        scheme.map(Self).map_err(err)
    }

    #[getter]
    fn edges(&self) -> Vec<f64> {
        self.0.edges().to_vec()
    }

    #[getter]
    fn bins(&self) -> usize {
        self.0.bins()
    }

    /// Zero-based bin of a probability.
    fn bin_index(&self, p: f64) -> PyResult<usize> {
        self.0.bin_index(p).map_err(err)
    }
}

#[pyclass(module = "pybrier", name = "CountSummary", frozen)]
pub struct PyCountSummary(core::CountSummary);

#[pymethods]
impl PyCountSummary {
    #[getter]
    fn count(&self) -> Vec<u64> {
        self.0.count().to_vec()
    }

    #[getter]
    fn events(&self) -> Vec<u64> {
        self.0.events().to_vec()
    }

    #[getter]
    fn sum_p(&self) -> Vec<f64> {
        self.0.sum_p().to_vec()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    #[getter]
    fn total_events(&self) -> u64 {
        self.0.total_events()
    }

    fn merge(&self, other: &PyCountSummary) -> PyResult<Self> {
        self.0.merge(&other.0).map(Self).map_err(err)
    }
}

#[pyclass(module = "pybrier", name = "Decomposition", frozen)]
pub struct PyDecomposition(core::Decomposition);

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn rel(&self) -> f64 {
        self.0.rel
    }

    #[getter]
    fn res(&self) -> f64 {
        self.0.res
    }

    #[getter]
    fn unc(&self) -> f64 {
        self.0.unc
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.0.gamma
    }

    #[getter]
    fn family(&self) -> &'static str {
        match self.0.family {
            core::Family::Traditional => "traditional",
            core::Family::BiasCorrected => "bias_corrected",
            core::Family::ConsistencyCorrected => "consistency_corrected",
        }
    }

    /// `rel - res + unc`
    fn brier_sum(&self) -> f64 {
        self.0.brier_sum()
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(family={:?}, rel={}, res={}, unc={})",
            self.family(),
            self.0.rel,
            self.0.res,
            self.0.unc
        )
    }
}

#[pyfunction]
fn summarize(series: &PyForecastSeries, scheme: &PyBinningScheme) -> PyCountSummary {
    PyCountSummary(core::summarize(&series.0, &scheme.0))
}

#[pyfunction]
fn decompose_traditional(counts: &PyCountSummary) -> PyDecomposition {
    PyDecomposition(core::decompose_traditional(&counts.0))
}

#[pyfunction]
fn decompose_bias_corrected(counts: &PyCountSummary) -> PyResult<PyDecomposition> {
    core::decompose_bias_corrected(&counts.0)
        .map(PyDecomposition)
        .map_err(err)
}

#[pyfunction]
fn consistency_correct(counts: &PyCountSummary) -> PyResult<PyDecomposition> {
    core::consistency_correct(&counts.0)
        .map(PyDecomposition)
        .map_err(err)
}

/// Variance estimate per estimator name; corrected entries are `None`
/// when `n < 2`.
#[pyfunction]
fn variance_estimates(counts: &PyCountSummary) -> BTreeMap<&'static str, Option<f64>> {
    let v = core::variance_estimates(&counts.0);
    Estimator::ALL
        .iter()
        .map(|&e| (e.name(), v.get(e)))
        .collect()
}

/// Full result document as a JSON string.
#[pyfunction]
fn result_document(series: &PyForecastSeries, scheme: &PyBinningScheme) -> PyResult<String> {
    serde_json::to_string(&ResultDocument::build(&series.0, &scheme.0)).map_err(json_err)
}

#[pyfunction]
fn normal_cdf(x: f64) -> f64 {
    core::normal::std_normal_cdf(x)
}

/// Monte Carlo summary per estimator: sample variance, mean estimated
/// variance, mean squared error and mean bias.
#[pyfunction]
fn simulate(
    py: Python<'_>,
    trials: usize,
    n: usize,
    seed: u64,
) -> PyResult<BTreeMap<&'static str, BTreeMap<&'static str, f64>>> {
    let truths = simlab::true_components();
    let summary = py
        .detach(|| {
            simlab::run_experiment(trials, n, seed)
                .and_then(|r| simlab::summarize_trials(&r, &truths))
        })
        .map_err(err)?;
    Ok(Estimator::ALL
        .iter()
        .map(|&e| {
            let s = summary.estimators[e];
            let row = BTreeMap::from([
                ("truth", truths.for_estimator(e)),
                ("sample_variance", s.sample_variance),
                ("mean_estimated_variance", s.mean_estimated_variance),
                ("mean_squared_error", s.mean_squared_error),
                ("mean_bias", s.mean_bias),
            ]);
            (e.name(), row)
        })
        .collect())
}

#[pyfunction]
fn coverage(
    py: Python<'_>,
    trials: usize,
    n: usize,
    seed: u64,
    k: f64,
) -> PyResult<BTreeMap<&'static str, usize>> {
    let truths = simlab::true_components();
    let covered = py
        .detach(|| {
            simlab::run_experiment(trials, n, seed).and_then(|r| simlab::coverage(&r, &truths, k))
        })
        .map_err(err)?;
    Ok(Estimator::ALL
        .iter()
        .map(|&e| (e.name(), covered[e]))
        .collect())
}

/// Log-log slopes of the variance-estimate error against trial size.
#[pyfunction]
fn convergence_slopes(
    py: Python<'_>,
    grid: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let study = py
        .detach(|| simlab::convergence_study(&grid, trials, seed))
        .map_err(err)?;
    Ok(Estimator::ALL
        .iter()
        .map(|&e| (e.name(), study.slopes[e]))
        .collect())
}

/// Fits the seasonal cycle and AR(1) anomalies: `(beta, alpha, sigma)`.
#[pyfunction]
fn fit_ar1(days: Vec<i64>, temps: Vec<f64>) -> PyResult<([f64; 5], f64, f64)> {
    let series = DailySeries::new(days, temps).map_err(err)?;
    let seasonal = ar1::fit_seasonal(&series).map_err(err)?;
    let model = ar1::fit_ar1(&ar1::anomalies(&series, &seasonal)).map_err(err)?;
    Ok((seasonal.coefficients, model.alpha, model.sigma))
}

#[pyfunction]
fn exceedance_forecast(
    alpha: f64,
    sigma: f64,
    previous_anomaly: f64,
    threshold: f64,
) -> PyResult<f64> {
    let model = Ar1Model::new(alpha, sigma).map_err(err)?;
    ar1::exceedance_forecast(&model, previous_anomaly, threshold).map_err(err)
}

/// Simulated daily series `(days, temps)` starting at day 0.
#[pyfunction]
fn generate_synthetic(
    beta: [f64; 5],
    alpha: f64,
    sigma: f64,
    days: usize,
    seed: u64,
) -> PyResult<(Vec<i64>, Vec<f64>)> {
    let model = Ar1Model::new(alpha, sigma).map_err(err)?;
    let s = ar1::generate_synthetic(&SeasonalModel::new(beta), &model, days, seed).map_err(err)?;
    Ok((s.days().to_vec(), s.values().to_vec()))
}

/// Threshold sweep as a JSON string.
#[pyfunction]
fn threshold_sweep(
    py: Python<'_>,
    train: (Vec<i64>, Vec<f64>),
    test: (Vec<i64>, Vec<f64>),
    thresholds: Vec<f64>,
    bins: usize,
) -> PyResult<String> {
    let train = DailySeries::new(train.0, train.1).map_err(err)?;
    let test = DailySeries::new(test.0, test.1).map_err(err)?;
    let sweep = py
        .detach(|| ar1::threshold_sweep(&train, &test, &thresholds, bins))
        .map_err(err)?;
    serde_json::to_string(&sweep).map_err(json_err)
}

#[pymodule]
fn pybrier(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyForecastSeries>()?;
    m.add_class::<PyBinningScheme>()?;
    m.add_class::<PyCountSummary>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_traditional, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_bias_corrected, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_correct, m)?)?;
    m.add_function(wrap_pyfunction!(variance_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(result_document, m)?)?;
    m.add_function(wrap_pyfunction!(normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ar1, m)?)?;
    m.add_function(wrap_pyfunction!(exceedance_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_sweep, m)?)?;
    Ok(())
}
