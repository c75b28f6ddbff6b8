//! Python bindings: graphs, equilibrium opinions, metrics and the control
//! and attack procedures. Results come back as plain lists and dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use polarize_core::control_network::{self as net, AdminConfig};
use polarize_core::control_opinion::{self as opinion, AttackAlgorithm, AttackObjective};
use polarize_core::numkit::ProjectedGradientConfig;
use polarize_core::{self as core, Error, MetricMatrixKind, MetricReport, MetricRoute};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::MaxIterationsExceeded(_)
        | Error::NoConvergence(_)
        | Error::NonFiniteObjective
        | Error::SolverFailure(_)
        | Error::BoundViolated { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn kind_from(name: &str) -> PyResult<MetricMatrixKind> {
    match name {
        "polarization" => Ok(MetricMatrixKind::Polarization),
        "disagreement" => Ok(MetricMatrixKind::Disagreement),
        "pdi" => Ok(MetricMatrixKind::Pdi),
        _ => Err(PyValueError::new_err(format!(
            "kind must be polarization, disagreement or pdi, got {name:?}"
        ))),
    }
}

fn route_from(name: &str) -> PyResult<MetricRoute> {
    match name {
        "from_z" => Ok(MetricRoute::FromZ),
        "from_sbar" => Ok(MetricRoute::FromSbar),
        "from_s" => Ok(MetricRoute::FromS),
        _ => Err(PyValueError::new_err(format!(
            "route must be from_z, from_sbar or from_s, got {name:?}"
        ))),
    }
}

fn objective_from(name: &str) -> PyResult<AttackObjective> {
    match name {
        "polarization" => Ok(AttackObjective::Polarization),
        "disagreement" => Ok(AttackObjective::Disagreement),
        _ => Err(PyValueError::new_err(format!(
            "objective must be polarization or disagreement, got {name:?}"
        ))),
    }
}

fn algorithm_from(name: &str) -> PyResult<AttackAlgorithm> {
    AttackAlgorithm::ALL
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown algorithm {name:?}")))
}

fn solver(max_iters: usize, grad_tol: f64) -> ProjectedGradientConfig {
    ProjectedGradientConfig {
        max_iters,
        grad_tol,
        ..Default::default()
    }
}

fn report_dict<'py>(py: Python<'py>, r: &MetricReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("polarization", r.polarization)?;
    d.set_item("disagreement", r.disagreement)?;
    d.set_item("pdi", r.pdi)?;
    d.set_item("mu", r.mu)?;
    Ok(d)
}

/// Weighted undirected graph without self-loops.
#[pyclass(name = "Graph", module = "polarize", frozen)]
struct PyGraph {
    inner: core::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: core::Graph::new(n, edges).map_err(to_py)?,
        })
    }

    /// Parses the `n=<count>` plus `i,j,w` edge-list format.
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: core::parse_edge_list(text).map_err(to_py)?,
        })
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.i, e.j, e.w)).collect()
    }

    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees()
    }

    fn laplacian(&self) -> Vec<Vec<f64>> {
        let l = self.inner.laplacian();
        (0..l.nrows()).map(|i| l.row(i).iter().copied().collect()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edge_count())
    }
}

#[pyfunction]
#[pyo3(signature = (n, p, seed, wlo=1.0, whi=1.0))]
fn random_graph(n: usize, p: f64, seed: u64, wlo: f64, whi: f64) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: core::graph::random_graph(n, p, wlo, whi, seed).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (n, p_in, p_out, seed, wlo=1.0, whi=1.0))]
fn two_community_graph(n: usize, p_in: f64, p_out: f64, seed: u64, wlo: f64, whi: f64) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: core::graph::two_community_graph(n, p_in, p_out, wlo, whi, seed).map_err(to_py)?,
    })
}

#[pyfunction]
fn power_law_graph(n: usize, attach: usize, seed: u64) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: core::graph::power_law_graph(n, attach, seed).map_err(to_py)?,
    })
}

#[pyfunction]
fn uniform_opinions(n: usize, seed: u64) -> Vec<f64> {
    core::rng::uniform_opinions(n, seed)
}

#[pyfunction]
#[pyo3(signature = (n, seed, shape=2.0))]
fn power_law_opinions(n: usize, seed: u64, shape: f64) -> Vec<f64> {
    core::rng::power_law_opinions(n, shape, seed)
}

/// Equilibrium expressed opinions `z = (L+I)^-1 s`.
#[pyfunction]
fn equilibrium(g: &PyGraph, s: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(core::equilibrium(&g.inner, &s).map_err(to_py)?.into_inner())
}

/// Every step of the synchronous iteration starting from `z(0) = s`.
#[pyfunction]
#[pyo3(signature = (g, s, tol=1e-10, max_iter=100_000))]
fn simulate(g: &PyGraph, s: Vec<f64>, tol: f64, max_iter: usize) -> PyResult<Vec<Vec<f64>>> {
    let t = core::fj_iterate(&g.inner, &s, &s, tol, max_iter).map_err(to_py)?;
    Ok(t.steps.into_iter().map(|z| z.into_inner()).collect())
}

#[pyfunction]
#[pyo3(signature = (g, s, mu=1.0, route="from_z"))]
fn metrics<'py>(py: Python<'py>, g: &PyGraph, s: Vec<f64>, mu: f64, route: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = core::metrics_from_internal(&g.inner, &s, mu, route_from(route)?).map_err(to_py)?;
    report_dict(py, &r)
}

/// Average-case conflict risk: the trace of the metric matrix.
#[pyfunction]
#[pyo3(signature = (g, kind="pdi"))]
fn acr(g: &PyGraph, kind: &str) -> PyResult<f64> {
    core::acr(&g.inner, kind_from(kind)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (g, s, k, objective="polarization", algorithm="greedy"))]
fn attack<'py>(
    py: Python<'py>,
    g: &PyGraph,
    s: Vec<f64>,
    k: usize,
    objective: &str,
    algorithm: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let plan = algorithm_from(algorithm)?
        .run(&g.inner, &s, k, objective_from(objective)?)
        .map_err(to_py)?;
    let bounds = opinion::check_bounds(&plan, &g.inner, &s).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("omega", plan.omega.clone())?;
    d.set_item("values", plan.values.clone())?;
    d.set_item("baseline", plan.baseline)?;
    d.set_item("objective", plan.objective)?;
    d.set_item("objective_trace", plan.objective_trace.clone())?;
    d.set_item("evaluations", plan.evaluations)?;
    d.set_item("s_new", plan.apply(&s).map_err(to_py)?)?;
    d.set_item("polarization_bound", bounds.polarization_bound)?;
    d.set_item("disagreement_bound", bounds.disagreement_bound)?;
    Ok(d)
}

/// Runs the administrator loop and returns per-round metrics plus the final
/// graph.
#[pyfunction]
#[pyo3(signature = (g, s, epsilon, rounds=10))]
fn admin<'py>(py: Python<'py>, g: &PyGraph, s: Vec<f64>, epsilon: f64, rounds: usize) -> PyResult<Bound<'py, PyDict>> {
    let cfg = AdminConfig {
        epsilon,
        rounds,
        ..Default::default()
    };
    let t = py
        .detach(|| net::admin_loop(&g.inner, &s, &cfg))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("polarization", t.rounds.iter().map(|r| r.polarization).collect::<Vec<_>>())?;
    d.set_item("disagreement", t.rounds.iter().map(|r| r.disagreement).collect::<Vec<_>>())?;
    d.set_item("converged", t.converged)?;
    d.set_item("final_polarization", t.final_polarization)?;
    d.set_item("final_disagreement", t.final_disagreement)?;
    d.set_item("final_z", t.final_z.into_inner())?;
    d.set_item("graph", PyGraph { inner: t.final_graph })?;
    Ok(d)
}

/// Best graph for `s` with Laplacian trace `m`; returns `(graph, pdi)`.
#[pyfunction]
#[pyo3(signature = (s, m, max_iters=20_000, grad_tol=1e-10))]
fn minimize_pdi_over_laplacian(s: Vec<f64>, m: f64, max_iters: usize, grad_tol: f64) -> PyResult<(PyGraph, f64)> {
    let sol = net::minimize_pdi_over_laplacian(&s, m, &solver(max_iters, grad_tol)).map_err(to_py)?;
    Ok((PyGraph { inner: sol.graph }, sol.objective))
}

/// Lowest conflict risk within one-norm `k` of `g`; returns `(graph, acr)`.
#[pyfunction]
#[pyo3(signature = (g, k, kind="pdi", max_iters=20_000, grad_tol=1e-10))]
fn minimize_acr(g: &PyGraph, k: f64, kind: &str, max_iters: usize, grad_tol: f64) -> PyResult<(PyGraph, f64)> {
    let sol = net::minimize_acr(&g.inner, kind_from(kind)?, k, &solver(max_iters, grad_tol)).map_err(to_py)?;
    Ok((PyGraph { inner: sol.graph }, sol.objective))
}

/// Lowers internal opinions by at most `alpha` in total; returns
/// `(shift, new_opinions, pdi)`.
#[pyfunction]
#[pyo3(signature = (g, s, alpha, max_iters=20_000, grad_tol=1e-10))]
fn minimize_pdi_shift(
    g: &PyGraph,
    s: Vec<f64>,
    alpha: f64,
    max_iters: usize,
    grad_tol: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let sol = opinion::minimize_pdi_shift(&g.inner, &s, alpha, &solver(max_iters, grad_tol)).map_err(to_py)?;
    Ok((sol.d.into_inner(), sol.s_new.into_inner(), sol.objective))
}

#[pymodule]
fn polarize(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(random_graph, m)?)?;
    m.add_function(wrap_pyfunction!(two_community_graph, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_graph, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_opinions, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_opinions, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(acr, m)?)?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    m.add_function(wrap_pyfunction!(admin, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_pdi_over_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_acr, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_pdi_shift, m)?)?;
    Ok(())
}
