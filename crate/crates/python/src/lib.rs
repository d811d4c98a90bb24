//! Python bindings. Datasets cross the boundary as a `Dataset` handle;
//! scores and rankings come back as plain lists keyed by item id.

use ::coarsenrank as core;
use core::io;
use core::{
    Calibration, CoarsenConfig, ConditionalMode, GammaPrior, GibbsConfig, PreferenceDataset,
    Ranking, SynthSpec,
};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e.root() {
        core::Error::InvalidArgument(_) | core::Error::Parse(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn parse_err(e: core::ParseError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(alpha, f, g, dic)` rows and the selected α.
type Curve = (Vec<(f64, f64, f64, f64)>, f64);
/// Dataset, truth ids best first, true scores, replaced indices.
type Generated = (PyDataset, Vec<String>, Vec<f64>, Vec<usize>);

/// A set of partial orderings over named items.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset(PreferenceDataset);

#[pymethods]
impl PyDataset {
    /// Builds a dataset from orderings given as lists of item ids, best first.
    #[new]
    fn new(orderings: Vec<Vec<String>>) -> PyResult<Self> {
        let text: String = orderings.iter().map(|o| o.join(">") + "\n").collect();
        Self::from_text(&text)
    }

    /// Parses the `a>b>c` line format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        io::parse_preferences(text).map(Self).map_err(parse_err)
    }

    fn to_text(&self) -> String {
        io::write_preferences(&self.0)
    }

    #[getter]
    fn items(&self) -> Vec<String> {
        self.0.items().as_slice().to_vec()
    }

    #[getter]
    fn num_items(&self) -> usize {
        self.0.num_items()
    }

    fn orderings(&self) -> Vec<Vec<String>> {
        let ids = self.0.items();
        self.0
            .preferences()
            .iter()
            .map(|p| p.items().iter().map(|&i| ids.id(i).to_owned()).collect())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, m={})", self.0.len(), self.0.num_items())
    }
}

/// Result of a point-estimate fit.
#[pyclass(name = "Fit", frozen, get_all)]
struct PyFit {
    /// Item id to score.
    scores: Vec<(String, f64)>,
    /// Item ids, best first.
    ranking: Vec<String>,
    tau: f64,
    objective_trace: Vec<f64>,
    iterations: usize,
    /// Contents of a scores file for this fit.
    table: String,
}

fn wrap_fit(ds: &PreferenceDataset, r: core::FitResult) -> PyFit {
    let ids = ds.items();
    PyFit {
        scores: r
            .theta
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &s)| (ids.id(i).to_owned(), s))
            .collect(),
        ranking: core::scores_to_ranking(&r.theta)
            .as_slice()
            .iter()
            .map(|&i| ids.id(i).to_owned())
            .collect(),
        tau: r.tau_n,
        objective_trace: r.objective_trace,
        iterations: r.iterations_run,
        table: io::write_scores(&r.theta, ids),
    }
}

fn config(alpha: f64, iterations: usize, c: Option<f64>) -> CoarsenConfig {
    CoarsenConfig {
        alpha,
        iterations,
        calibration: c.map_or(Calibration::Auto, Calibration::Fixed),
        ..Default::default()
    }
}

/// Coarsened MAP scores. `alpha=float("inf")` gives the uncoarsened fit.
#[pyfunction]
#[pyo3(signature = (dataset, alpha, iterations = 15, c = None))]
fn fit(dataset: &PyDataset, alpha: f64, iterations: usize, c: Option<f64>) -> PyResult<PyFit> {
    core::fit(&dataset.0, &config(alpha, iterations, c))
        .map(|r| wrap_fit(&dataset.0, r))
        .map_err(to_py)
}

/// Plain Plackett-Luce EM fit.
#[pyfunction]
#[pyo3(signature = (dataset, iterations = 15, c = None))]
fn pl_em(dataset: &PyDataset, iterations: usize, c: Option<f64>) -> PyResult<PyFit> {
    core::pl_em(&dataset.0, &config(f64::INFINITY, iterations, c))
        .map(|r| wrap_fit(&dataset.0, r))
        .map_err(to_py)
}

fn gibbs_config(samples: usize, burn_in: usize, seed: u64, shifted: bool) -> GibbsConfig {
    GibbsConfig {
        samples,
        burn_in,
        seed,
        mode: if shifted {
            ConditionalMode::Shifted
        } else {
            ConditionalMode::Conjugate
        },
    }
}

/// DIC over an ascending α grid. Returns `(curve, selected_alpha)` where the
/// curve rows are `(alpha, f, g, dic)`.
#[pyfunction]
#[pyo3(signature = (dataset, alpha_grid, seed, samples = 50, burn_in = 50, shifted_shape = false))]
fn diagnose(
    dataset: &PyDataset,
    alpha_grid: Vec<f64>,
    seed: u64,
    samples: usize,
    burn_in: usize,
    shifted_shape: bool,
) -> PyResult<Curve> {
    let gc = gibbs_config(samples, burn_in, seed, shifted_shape);
    let d = core::diagnose(&dataset.0, &alpha_grid, &GammaPrior::default(), &gc).map_err(to_py)?;
    let curve = d.curve.iter().map(|p| (p.alpha, p.f, p.g, p.dic)).collect();
    Ok((curve, d.selected_alpha))
}

/// Posterior draws of the scores, one row per retained sweep.
#[pyfunction]
#[pyo3(signature = (dataset, alpha, seed, samples = 50, burn_in = 50, shifted_shape = false))]
fn sample_posterior(
    dataset: &PyDataset,
    alpha: f64,
    seed: u64,
    samples: usize,
    burn_in: usize,
    shifted_shape: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let gc = gibbs_config(samples, burn_in, seed, shifted_shape);
    let s = core::gibbs_run(&dataset.0, alpha, &GammaPrior::default(), &gc).map_err(to_py)?;
    Ok(s.rows().map(|r| r.to_vec()).collect())
}

/// Kendall agreement in [0, 1] between two orderings of the same item ids.
#[pyfunction]
fn kendall_tau(a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    let ids = core::ItemIds::new(a.clone()).map_err(to_py)?;
    let index = |order: &[String]| -> PyResult<Ranking> {
        let idx = order
            .iter()
            .map(|id| {
                ids.index_of(id)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown item {id:?}")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ranking::new(idx).map_err(to_py)
    };
    core::kendall_tau(&index(&a)?, &index(&b)?).map_err(to_py)
}

/// Synthetic data. Returns `(dataset, truth, theta, replaced)` with `truth`
/// as item ids best first and `theta` indexed like `dataset.items`.
#[pyfunction]
#[pyo3(signature = (items, prefs, length, seed, noise = 0.0))]
fn generate(
    items: usize,
    prefs: usize,
    length: usize,
    seed: u64,
    noise: f64,
) -> PyResult<Generated> {
    let spec = SynthSpec {
        noise_fraction: noise,
        ..SynthSpec::new(items, prefs, length, seed)
    };
    let data = core::generate(&spec).map_err(to_py)?;
    let ids = data.dataset.items();
    let truth = data
        .ground_truth
        .as_slice()
        .iter()
        .map(|&i| ids.id(i).to_owned())
        .collect();
    let theta = data.theta_truth.as_slice().to_vec();
    Ok((PyDataset(data.dataset), truth, theta, data.replaced))
}

/// Parses a scores file into `[(item, score, rank)]` in file order.
#[pyfunction]
fn parse_scores(text: &str) -> PyResult<Vec<(String, f64, usize)>> {
    let table = io::parse_scores(text).map_err(parse_err)?;
    let positions = table.ranking.positions();
    Ok((0..table.items.len())
        .map(|i| {
            (
                table.items.id(i).to_owned(),
                table.scores[i],
                positions[i] + 1,
            )
        })
        .collect())
}

#[pymodule]
fn coarsenrank(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFit>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(pl_em, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(sample_posterior, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_scores, m)?)?;
    Ok(())
}
