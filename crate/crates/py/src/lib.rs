//! Python bindings: norms, the 1-D model, lattice domains and the checks.

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use finsler_gap::config::{CaseConfig, SuiteConfig};
use finsler_gap::domain::{self, DiscreteDomain, DomainSpec, Shape, Weight};
use finsler_gap::eigensolver;
use finsler_gap::harness;
use finsler_gap::model1d::{self, Chart, Dimension, ModelProblem};
use finsler_gap::norms::{Covector, NormSpec};

fn err(e: finsler_gap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dimension(n: f64) -> Dimension {
    if n.is_infinite() {
        Dimension::Infinite
    } else {
        Dimension::Finite(n)
    }
}

fn chart(name: &str, c: f64) -> PyResult<Chart> {
    Ok(match name {
        "tan" => Chart::Tan,
        "tanh" => Chart::Tanh,
        "coth" => Chart::Coth,
        "power" => Chart::Power,
        "flat" => Chart::Flat,
        "linear" => Chart::Linear,
        "constant" => Chart::Constant(c),
        other => return Err(PyValueError::new_err(format!("unknown chart {other:?}"))),
    })
}

/// A Minkowski norm on R^n.
#[pyclass(name = "Norm", frozen)]
struct PyNorm {
    inner: NormSpec,
}

#[pymethods]
impl PyNorm {
    #[staticmethod]
    fn euclidean(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: NormSpec::euclidean(dim).map_err(err)? })
    }

    /// `a` is the row-major Gram matrix.
    #[staticmethod]
    fn quadratic(dim: usize, a: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: NormSpec::quadratic(dim, a).map_err(err)? })
    }

    #[staticmethod]
    fn randers(dim: usize, a: Vec<f64>, b: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: NormSpec::randers(dim, a, b).map_err(err)? })
    }

    #[staticmethod]
    fn two_slope(plus: f64, minus: f64) -> PyResult<Self> {
        Ok(Self { inner: NormSpec::two_slope(plus, minus).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn norm(&self, v: Vec<f64>) -> PyResult<f64> {
        self.inner.norm_eval(&v).map_err(err)
    }

    fn dual_norm(&self, xi: Vec<f64>) -> PyResult<f64> {
        self.inner.dual_norm_eval(&Covector(xi)).map_err(err)
    }

    fn legendre(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.legendre(&v).map_err(err)?.0)
    }

    fn legendre_inverse(&self, xi: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.legendre_inverse(&Covector(xi)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Norm({:?})", self.inner.family())
    }
}

/// Sharp lower bound λ₁(K, N, d). Pass `float("inf")` for N = ∞.
#[pyfunction]
fn lambda1_model(k: f64, n: f64, d: f64) -> PyResult<f64> {
    model1d::lambda1_model(k, dimension(n), d).map_err(err)
}

/// First nonzero Neumann eigenvalue of the model operator on `(a, b)`.
#[pyfunction]
#[pyo3(signature = (k, n, chart_name, a, b, c = 0.0))]
fn lambda1_interval(k: f64, n: f64, chart_name: &str, a: f64, b: f64, c: f64) -> PyResult<f64> {
    let p = ModelProblem::new(k, dimension(n), chart(chart_name, c)?).map_err(err)?;
    model1d::lambda1_interval(&p, a, b).map_err(err)
}

#[pyclass(name = "Eigenpair", frozen, get_all)]
struct PyEigen {
    lambda_: f64,
    u: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

#[pymethods]
impl PyEigen {
    fn __repr__(&self) -> String {
        format!("Eigenpair(lambda={}, residual={:e}, iterations={})", self.lambda_, self.residual, self.iterations)
    }
}

/// Lattice discretization of an interval, box or ball.
#[pyclass(name = "Domain", frozen)]
struct PyDomain {
    spec: DomainSpec,
    inner: DiscreteDomain,
}

#[pymethods]
impl PyDomain {
    /// `shape` is "interval", "box" or "ball"; `size` holds the length, the
    /// side lengths or the radius.
    #[new]
    #[pyo3(signature = (shape, size, norm, resolution, kappa = None))]
    fn new(shape: &str, size: Vec<f64>, norm: &PyNorm, resolution: f64, kappa: Option<f64>) -> PyResult<Self> {
        let first = || size.first().copied().ok_or_else(|| PyValueError::new_err("size is empty"));
        let shape = match shape {
            "interval" => Shape::Interval { length: first()? },
            "box" => Shape::Box { lengths: size.clone() },
            "ball" => Shape::Ball { radius: first()? },
            other => return Err(PyValueError::new_err(format!("unknown shape {other:?}"))),
        };
        let weight = kappa.map(|kappa| Weight::Gaussian { kappa }).unwrap_or_default();
        let spec = DomainSpec::new(shape, norm.inner.clone(), weight, resolution);
        let inner = domain::build_domain(&spec).map_err(err)?;
        Ok(Self { spec, inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn coords(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.node(i).to_vec()).collect()
    }

    fn node_measure(&self) -> Vec<f64> {
        self.inner.node_measure.clone()
    }

    fn total_measure(&self) -> f64 {
        self.inner.total_measure()
    }

    fn diameter(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| domain::diameter(&self.inner, &self.spec.norm)).map_err(err)
    }

    fn analytic_diameter(&self) -> PyResult<f64> {
        domain::analytic_diameter(&self.spec).map_err(err)
    }

    /// `(K, N)` of the built-in curvature certificate; N = inf when unbounded.
    fn certificate(&self) -> PyResult<(f64, f64)> {
        let c = domain::curvature_certificate(&self.spec).map_err(err)?;
        Ok((c.k, c.n.finite().unwrap_or(f64::INFINITY)))
    }

    fn rayleigh_quotient(&self, u: Vec<f64>) -> PyResult<f64> {
        eigensolver::rayleigh_quotient(&self.inner, &self.spec.norm, &u).map_err(err)
    }

    #[pyo3(signature = (seed = 0))]
    fn solve(&self, py: Python<'_>, seed: u64) -> PyResult<PyEigen> {
        let r = py
            .detach(|| eigensolver::minimize_rayleigh(&self.inner, &self.spec.norm, seed))
            .map_err(err)?;
        Ok(PyEigen {
            lambda_: r.lambda,
            u: r.u,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
        })
    }

    /// Lowest eigenvalues from a dense solve; quadratic norms only.
    fn dense_eigenvalues(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        py.detach(|| eigensolver::dense_oracle(&self.inner, &self.spec.norm)).map_err(err)
    }
}

/// Runs every check on a single case given as TOML text; returns the report as JSON.
#[pyfunction]
fn verify_case(py: Python<'_>, toml: &str, out: &str) -> PyResult<String> {
    let case = CaseConfig::from_toml(toml).map_err(err)?;
    let report = py.detach(|| harness::verify_case(&case, Path::new(out))).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a suite config given as TOML text; returns the summary as JSON.
#[pyfunction]
#[pyo3(signature = (toml, out, jobs = 1))]
fn run_suite(py: Python<'_>, toml: &str, out: &str, jobs: usize) -> PyResult<String> {
    let cfg = SuiteConfig::from_toml(toml).map_err(err)?;
    let report = py.detach(|| harness::run_suite(&cfg, Path::new(out), jobs)).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pyfinsler(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNorm>()?;
    m.add_class::<PyDomain>()?;
    m.add_class::<PyEigen>()?;
    m.add_function(wrap_pyfunction!(lambda1_model, m)?)?;
    m.add_function(wrap_pyfunction!(lambda1_interval, m)?)?;
    m.add_function(wrap_pyfunction!(verify_case, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
