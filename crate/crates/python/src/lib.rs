//! Python bindings: subspaces of matrix algebras, finite quantales, pair
//! groupoids and the spin-system observers.

use std::collections::BTreeMap;

use mslab_core::finquant::{check_axioms, check_continuity, FiniteQuantale, QuantaleDoc};
use mslab_core::loctop::check_local;
use mslab_core::observer::{spin_beta, spin_observer, Spin};
use mslab_core::relquant::{groupoid_quantale, pair_groupoid, FiniteGroupoid};
use mslab_core::{ComplexMatrix, LawReport, Tolerance};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tolerance(eps: f64) -> PyResult<Tolerance> {
    Tolerance::new(eps).map_err(err)
}

fn spin(name: &str) -> PyResult<Spin> {
    name.parse().map_err(|_| PyValueError::new_err(format!("unknown spin `{name}`, expected half or one")))
}

/// Law name to `(passed, witness)`.
type Verdicts = BTreeMap<String, (bool, Option<Vec<usize>>)>;

fn verdicts(r: &LawReport) -> Verdicts {
    r.verdicts.iter().map(|v| (v.law.clone(), (v.passed, v.witness.clone()))).collect()
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    ComplexMatrix::new(n, rows.into_iter().flatten().collect()).map_err(err)
}

/// A linear subspace of `M_n(C)` with its own tolerance.
#[pyclass(frozen, skip_from_py_object, name = "Subspace")]
#[derive(Clone)]
struct PySubspace {
    inner: mslab_core::Subspace,
    tol: Tolerance,
}

impl PySubspace {
    fn wrap(&self, inner: mslab_core::Subspace) -> Self {
        Self { inner, tol: self.tol }
    }
}

#[pymethods]
impl PySubspace {
    /// Span of square matrices given as nested row lists.
    #[staticmethod]
    #[pyo3(signature = (n, generators, eps = 1e-9))]
    fn span(n: usize, generators: Vec<Vec<Vec<Complex64>>>, eps: f64) -> PyResult<Self> {
        let tol = tolerance(eps)?;
        let gens = generators.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        let inner = mslab_core::Subspace::canonicalize(n, gens, tol).map_err(err)?;
        Ok(Self { inner, tol })
    }

    #[staticmethod]
    #[pyo3(signature = (n, eps = 1e-9))]
    fn zero(n: usize, eps: f64) -> PyResult<Self> {
        Ok(Self { inner: mslab_core::Subspace::zero(n).map_err(err)?, tol: tolerance(eps)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, eps = 1e-9))]
    fn full(n: usize, eps: f64) -> PyResult<Self> {
        Ok(Self { inner: mslab_core::Subspace::full(n).map_err(err)?, tol: tolerance(eps)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Orthonormal basis as nested row lists.
    fn basis(&self) -> Vec<Vec<Vec<Complex64>>> {
        let n = self.inner.n();
        self.inner.basis().iter().map(|m| m.entries().chunks(n).map(<[Complex64]>::to_vec).collect()).collect()
    }

    fn join(&self, other: &Self) -> PyResult<Self> {
        Ok(self.wrap(self.inner.join(&other.inner, self.tol).map_err(err)?))
    }

    fn meet(&self, other: &Self) -> PyResult<Self> {
        Ok(self.wrap(self.inner.meet(&other.inner, self.tol).map_err(err)?))
    }

    fn product(&self, other: &Self) -> PyResult<Self> {
        Ok(self.wrap(self.inner.product(&other.inner, self.tol).map_err(err)?))
    }

    fn involution(&self) -> Self {
        self.wrap(self.inner.involution(self.tol))
    }

    fn contains(&self, other: &Self) -> PyResult<bool> {
        self.inner.contains(&other.inner, self.tol).map_err(err)
    }

    fn equal(&self, other: &Self) -> PyResult<bool> {
        self.inner.equal(&other.inner, self.tol).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.equal(&other.inner, self.tol).unwrap_or(false)
    }

    fn __repr__(&self) -> String {
        format!("Subspace(n={}, dim={})", self.inner.n(), self.inner.dim())
    }
}

/// A finite involutive quantale given by its tables.
#[pyclass(frozen, name = "Quantale")]
struct PyQuantale {
    inner: FiniteQuantale,
}

#[pymethods]
impl PyQuantale {
    /// Parses the JSON document with keys `size`, `leq`, `prod`, `inv` and
    /// optionally `opens`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: QuantaleDoc = serde_json::from_str(text).map_err(err)?;
        Ok(Self { inner: FiniteQuantale::from_doc(doc).map_err(err)? })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.inner.leq(a, b)
    }

    fn prod(&self, a: usize, b: usize) -> usize {
        self.inner.prod(a, b)
    }

    fn inv(&self, a: usize) -> usize {
        self.inner.inv(a)
    }

    fn check_axioms(&self) -> PyResult<Verdicts> {
        Ok(verdicts(&check_axioms(&self.inner).map_err(err)?))
    }

    /// Continuity laws; the Alexandrov topology is used when none is given.
    fn check_continuity(&self) -> PyResult<Verdicts> {
        let q = match self.inner.topology() {
            Some(_) => self.inner.clone(),
            None => self.inner.clone().with_alexandrov_topology().map_err(err)?,
        };
        Ok(verdicts(&check_continuity(&q).map_err(err)?))
    }

    fn check_local(&self) -> PyResult<Verdicts> {
        Ok(verdicts(&check_local(&self.inner).map_err(err)?))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_doc()).map_err(err)
    }
}

/// A finite groupoid.
#[pyclass(frozen, name = "Groupoid")]
struct PyGroupoid {
    inner: FiniteGroupoid,
}

#[pymethods]
impl PyGroupoid {
    #[staticmethod]
    fn pair(n: usize) -> PyResult<Self> {
        Ok(Self { inner: pair_groupoid(n).map_err(err)? })
    }

    /// Parses a groupoid document and checks the groupoid laws.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: FiniteGroupoid = serde_json::from_str(text).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn objects(&self) -> Vec<String> {
        self.inner.objects.clone()
    }

    #[getter]
    fn arrows(&self) -> Vec<String> {
        self.inner.arrows.iter().map(|a| a.id.clone()).collect()
    }

    /// The quantale of all sets of arrows.
    fn quantale(&self) -> PyResult<PyQuantale> {
        Ok(PyQuantale { inner: groupoid_quantale(&self.inner).map_err(err)? })
    }
}

/// The named spin fixtures, `spin` being `"half"` or `"one"`.
#[pyfunction]
#[pyo3(signature = (spin_name, eps = 1e-9))]
fn fixtures(spin_name: &str, eps: f64) -> PyResult<BTreeMap<String, PySubspace>> {
    let tol = tolerance(eps)?;
    Ok(spin(spin_name)?
        .fixtures(tol)
        .iter()
        .map(|(k, s)| (k.to_string(), PySubspace { inner: s.clone(), tol }))
        .collect())
}

/// Fixture name to the label of its image under the diagonal observer.
#[pyfunction]
#[pyo3(signature = (spin_name, eps = 1e-9))]
fn observer_table(spin_name: &str, eps: f64) -> PyResult<BTreeMap<String, String>> {
    let tol = tolerance(eps)?;
    let s = spin(spin_name)?;
    let ctx = spin_observer(s, tol).map_err(err)?;
    s.fixtures(tol)
        .iter()
        .map(|(k, m)| Ok((k.to_string(), ctx.labels()[ctx.retract_index(m).map_err(err)?].clone())))
        .collect()
}

/// Point label to the labels of its assigned closed set.
#[pyfunction]
#[pyo3(signature = (spin_name, eps = 1e-9))]
fn beta(spin_name: &str, eps: f64) -> PyResult<BTreeMap<String, Vec<String>>> {
    let b = spin_beta(spin(spin_name)?, tolerance(eps)?).map_err(err)?;
    let base = b.hyperspace.base();
    Ok(b.assignment
        .iter()
        .enumerate()
        .map(|(x, c)| (base.label(x).to_string(), c.ones().map(|y| base.label(y).to_string()).collect()))
        .collect())
}

#[pymodule]
fn mslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySubspace>()?;
    m.add_class::<PyQuantale>()?;
    m.add_class::<PyGroupoid>()?;
    m.add_function(wrap_pyfunction!(fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(observer_table, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    Ok(())
}
