//! Python bindings. Angular momenta accept `"3/2"`, `1.5` or `3`; reports
//! come back as plain dicts with the same schema as the CLI's JSON.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

use wracah_core::polar::{self, UrParams};
use wracah_core::qarith::{self, HalfInt, ToleranceRule};
use wracah_core::sphere::{self, QuadratureGrid, SphericalPoint};
use wracah_core::sweep::{self, SweepTolerances};
use wracah_core::{fock, wigner, wra, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::CacheConflict { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn half(obj: &Bound<'_, PyAny>) -> PyResult<HalfInt> {
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse().map_err(err);
    }
    let x: f64 = obj.extract()?;
    let twice = 2.0 * x;
    if twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
        return Err(PyValueError::new_err(format!("{x} is not a half-integer")));
    }
    Ok(HalfInt::from_twice(twice as i32))
}

fn halves<const N: usize>(objs: [&Bound<'_, PyAny>; N]) -> PyResult<[HalfInt; N]> {
    let mut out = [HalfInt::ZERO; N];
    for (o, x) in out.iter_mut().zip(objs) {
        *o = half(x)?;
    }
    Ok(out)
}

fn loads<'py>(py: Python<'py>, json: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

fn tolerance(tol: f64) -> PyResult<ToleranceRule> {
    ToleranceRule::uniform(tol).map_err(err)
}

/// `[x]_q = (1 − q^x)/(1 − q)` with `q = exp(2πi/k)`.
#[pyfunction]
fn q_bracket(x: f64, k: u32) -> PyResult<Complex64> {
    qarith::q_bracket(x, k).map_err(err)
}

/// Clebsch–Gordan coefficient `(j1 m1 j2 m2 | j m)`.
#[pyfunction]
fn cg(
    j1: &Bound<'_, PyAny>,
    m1: &Bound<'_, PyAny>,
    j2: &Bound<'_, PyAny>,
    m2: &Bound<'_, PyAny>,
    j: &Bound<'_, PyAny>,
    m: &Bound<'_, PyAny>,
) -> PyResult<f64> {
    let [j1, m1, j2, m2, j, m] = halves([j1, m1, j2, m2, j, m])?;
    wigner::global_table().cg(j1, m1, j2, m2, j, m).map_err(err)
}

/// Wigner 3-jm symbol.
#[pyfunction]
fn threejm(
    j1: &Bound<'_, PyAny>,
    j2: &Bound<'_, PyAny>,
    j3: &Bound<'_, PyAny>,
    m1: &Bound<'_, PyAny>,
    m2: &Bound<'_, PyAny>,
    m3: &Bound<'_, PyAny>,
) -> PyResult<f64> {
    let [j1, j2, j3, m1, m2, m3] = halves([j1, j2, j3, m1, m2, m3])?;
    wigner::global_table().threejm(j1, j2, j3, m1, m2, m3).map_err(err)
}

fn nine(js: &[Bound<'_, PyAny>]) -> PyResult<wigner::NineJArgs> {
    if js.len() != 9 {
        return Err(PyValueError::new_err(format!("expected 9 entries, got {}", js.len())));
    }
    let mut out = [HalfInt::ZERO; 9];
    for (o, x) in out.iter_mut().zip(js) {
        *o = half(x)?;
    }
    Ok(out)
}

/// Wigner 9-j symbol, entries row by row.
#[pyfunction]
fn ninej(js: Vec<Bound<'_, PyAny>>) -> PyResult<f64> {
    Ok(wigner::global_table().ninej(&nine(&js)?))
}

/// The 9-j contraction of `f̄_r` symbols next to the standard value, as a dict.
#[pyfunction]
fn ninej_from_fbar<'py>(py: Python<'py>, js: Vec<Bound<'py, PyAny>>, r: f64) -> PyResult<Bound<'py, PyAny>> {
    let c = wra::ninej_from_fbar(&nine(&js)?, r).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("value", Complex64::new(c.value.re, c.value.im))?;
    d.set_item("reference", c.reference)?;
    d.set_item("residual", c.residual)?;
    d.set_item("literal", Complex64::new(c.literal.re, c.literal.im))?;
    d.set_item("literal_residual", c.literal_residual)?;
    Ok(d.into_any())
}

/// `(j1 j2 α1 α2 | j α; r)` with `α = −j r + s`.
#[pyfunction]
#[pyo3(signature = (j1, j2, s1, s2, j, s, r = 1.0))]
fn cg_ur(
    j1: &Bound<'_, PyAny>,
    j2: &Bound<'_, PyAny>,
    s1: i64,
    s2: i64,
    j: &Bound<'_, PyAny>,
    s: i64,
    r: f64,
) -> PyResult<Complex64> {
    let [j1, j2, j] = halves([j1, j2, j])?;
    wra::cg_ur(j1, j2, s1, s2, j, s, r).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (j1, j2, j3, s1, s2, s3, r = 1.0))]
fn f_symbol(
    j1: &Bound<'_, PyAny>,
    j2: &Bound<'_, PyAny>,
    j3: &Bound<'_, PyAny>,
    s1: i64,
    s2: i64,
    s3: i64,
    r: f64,
) -> PyResult<Complex64> {
    let [j1, j2, j3] = halves([j1, j2, j3])?;
    wra::f_symbol(j1, j2, j3, s1, s2, s3, r).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (j1, j2, j3, s1, s2, s3, r = 1.0))]
fn fbar_symbol(
    j1: &Bound<'_, PyAny>,
    j2: &Bound<'_, PyAny>,
    j3: &Bound<'_, PyAny>,
    s1: i64,
    s2: i64,
    s3: i64,
    r: f64,
) -> PyResult<Complex64> {
    let [j1, j2, j3] = halves([j1, j2, j3])?;
    wra::fbar_symbol(j1, j2, j3, s1, s2, s3, r).map_err(err)
}

/// `Y_{ℓm}(θ, φ)` with the Condon–Shortley phase.
#[pyfunction]
fn spherical_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> PyResult<Complex64> {
    let p = SphericalPoint::new(theta, phi).map_err(err)?;
    sphere::spherical_harmonic(l, m, p).map_err(err)
}

/// `[y_r]_{ℓα}(θ, φ)`, the `U_r` eigenfunction with `α = −ℓ r + s`.
#[pyfunction]
#[pyo3(signature = (l, s, theta, phi, r = 1.0))]
fn y_r(l: u32, s: i64, theta: f64, phi: f64, r: f64) -> PyResult<Complex64> {
    let p = SphericalPoint::new(theta, phi).map_err(err)?;
    sphere::y_r_eigenfunction(l, s, r, p).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, tol = 1e-12))]
fn verify_quon<'py>(py: Python<'py>, k: u32, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let reps = fock::build_quon_reps(k).map_err(err)?;
    loads(py, &fock::verify_quon_relations(&reps, tolerance(tol)?).to_json())
}

#[pyfunction]
#[pyo3(signature = (k, r = 1.0, tol = 1e-10))]
fn verify_su2<'py>(py: Python<'py>, k: u32, r: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = UrParams::new(k, r).map_err(err)?;
    let rep = polar::verify_su2(&p, tolerance(tol)?, &polar::default_s_samples(&p)).map_err(err)?;
    loads(py, &rep.to_json())
}

#[pyfunction]
#[pyo3(signature = (k, r = 1.0, tol = 1e-10))]
fn verify_basis<'py>(py: Python<'py>, k: u32, r: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = UrParams::new(k, r).map_err(err)?;
    loads(py, &polar::verify_ur_basis(&p, tolerance(tol)?).map_err(err)?.to_json())
}

#[pyfunction]
#[pyo3(signature = (j1, j2, r = 1.0, tol = 1e-10))]
fn verify_fbar_orthogonality<'py>(
    py: Python<'py>,
    j1: &Bound<'py, PyAny>,
    j2: &Bound<'py, PyAny>,
    r: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let [j1, j2] = halves([j1, j2])?;
    loads(py, &wra::verify_fbar_orthogonality(j1, j2, r, tol).map_err(err)?.to_json())
}

#[pyfunction]
#[pyo3(signature = (l_max = 8, tol = 1e-10))]
fn verify_sphere<'py>(py: Python<'py>, l_max: u32, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let rep = sphere::verify_sphere_orthonormality(l_max, &QuadratureGrid::for_degree(l_max), tol);
    loads(py, &rep.to_json())
}

/// The full verification sweep, as the CLI's `report` emits it.
#[pyfunction]
#[pyo3(signature = (max_j = None, r = 1.0))]
fn run_sweep<'py>(py: Python<'py>, max_j: Option<&Bound<'py, PyAny>>, r: f64) -> PyResult<Bound<'py, PyAny>> {
    let max_j = match max_j {
        Some(x) => half(x)?,
        None => HalfInt::from_int(2),
    };
    let rep = py.detach(|| sweep::run_sweep(max_j, r, SweepTolerances::default(), None)).map_err(err)?;
    loads(py, &rep.to_json())
}

/// Eigenbasis of `U_r` on the spin-`j` space.
#[pyclass(frozen)]
struct UrBasis {
    inner: polar::UrBasis,
}

#[pymethods]
impl UrBasis {
    #[new]
    #[pyo3(signature = (j, r = 1.0))]
    fn new(j: &Bound<'_, PyAny>, r: f64) -> PyResult<Self> {
        Ok(UrBasis { inner: polar::ur_eigenbasis(half(j)?, r).map_err(err)? })
    }

    #[getter]
    fn j(&self) -> String {
        self.inner.j.to_string()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r.value()
    }

    #[getter]
    fn alphas(&self) -> Vec<f64> {
        self.inner.alphas.clone()
    }

    /// `q^{−α_s}` for `s = 0 … 2j`.
    #[getter]
    fn eigenvalues(&self) -> Vec<Complex64> {
        self.inner.eigenvalues.clone()
    }

    /// Row-major transform, rows `m = −j … j`, columns `s`.
    fn transform(&self) -> Vec<Vec<Complex64>> {
        let w = &self.inner.transform;
        (0..w.nrows()).map(|i| (0..w.ncols()).map(|c| w[(i, c)]).collect()).collect()
    }

    fn vector(&self, s: usize) -> PyResult<Vec<Complex64>> {
        if s >= self.inner.dim() {
            return Err(PyValueError::new_err(format!("s = {s} out of range 0..{}", self.inner.dim())));
        }
        Ok(self.inner.vector(s).iter().copied().collect())
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("UrBasis(j={}, r={})", self.inner.j, self.inner.r.value())
    }
}

#[pymodule]
fn wracah(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<UrBasis>()?;
    m.add_function(wrap_pyfunction!(q_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(cg, m)?)?;
    m.add_function(wrap_pyfunction!(threejm, m)?)?;
    m.add_function(wrap_pyfunction!(ninej, m)?)?;
    m.add_function(wrap_pyfunction!(ninej_from_fbar, m)?)?;
    m.add_function(wrap_pyfunction!(cg_ur, m)?)?;
    m.add_function(wrap_pyfunction!(f_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(fbar_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(spherical_harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(y_r, m)?)?;
    m.add_function(wrap_pyfunction!(verify_quon, m)?)?;
    m.add_function(wrap_pyfunction!(verify_su2, m)?)?;
    m.add_function(wrap_pyfunction!(verify_basis, m)?)?;
    m.add_function(wrap_pyfunction!(verify_fbar_orthogonality, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
