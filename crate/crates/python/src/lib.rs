//! Python bindings. Scalars cross the boundary as strings (`"3/2"`, `"5"`),
//! polynomials as lists of `(exponent, coefficient)` pairs and reports as
//! plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use ribbonlab::cohomology::{self, LevelStack};
use ribbonlab::fredholm::echelonize;
use ribbonlab::geometry::{self, GeometricDatum, Kind, NodalCubicRing};
use ribbonlab::json::{pair_from_json, pair_to_json, to_sorted_json};
use ribbonlab::schur::{self, SchurPair};
use ribbonlab::{
    fredholm_index, membership, pivot_profile, Field, LaurentPoly, LaurentVec, Local2DElement,
    Membership, Scalar, Window2D, WindowedSubspace,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(s: &str) -> PyResult<Field> {
    s.parse().map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_sorted_json(v),))
}

type PolyTerms = Vec<(i64, String)>;

fn poly(f: Field, terms: &PolyTerms) -> PyResult<LaurentPoly> {
    let terms = terms
        .iter()
        .map(|(e, c)| Ok((*e, Scalar::parse(f, c).map_err(err)?)))
        .collect::<PyResult<Vec<_>>>()?;
    LaurentPoly::from_terms(f, terms).map_err(err)
}

fn vector(f: Field, comps: &[PolyTerms]) -> PyResult<LaurentVec> {
    let polys = comps.iter().map(|c| poly(f, c)).collect::<PyResult<Vec<_>>>()?;
    LaurentVec::from_components(f, &polys).map_err(err)
}

#[pyclass(name = "Window", frozen, from_py_object)]
#[derive(Clone)]
struct PyWindow {
    inner: Window2D,
}

#[pymethods]
impl PyWindow {
    #[new]
    #[pyo3(signature = (t_lo=-4, t_hi=4, u_lo=-8, u_hi=8, m_t=2, m_u=2))]
    fn new(t_lo: i64, t_hi: i64, u_lo: i64, u_hi: i64, m_t: i64, m_u: i64) -> PyResult<Self> {
        Ok(PyWindow {
            inner: Window2D::new(t_lo, t_hi, u_lo, u_hi, m_t, m_u).map_err(err)?,
        })
    }

    #[getter]
    fn t_range(&self) -> (i64, i64) {
        (self.inner.t_lo, self.inner.t_hi)
    }

    #[getter]
    fn u_range(&self) -> (i64, i64) {
        (self.inner.u_lo, self.inner.u_hi)
    }

    #[getter]
    fn margins(&self) -> (i64, i64) {
        (self.inner.m_t, self.inner.m_u)
    }

    fn __repr__(&self) -> String {
        let w = &self.inner;
        format!(
            "Window(t_lo={}, t_hi={}, u_lo={}, u_hi={}, m_t={}, m_u={})",
            w.t_lo, w.t_hi, w.u_lo, w.u_hi, w.m_t, w.m_u
        )
    }
}

fn window_or_default(w: Option<PyWindow>) -> Window2D {
    w.map(|w| w.inner)
        .unwrap_or_else(|| Window2D::new(-4, 4, -8, 8, 2, 2).expect("valid default"))
}

/// Element of `k((u))((t))` given by `(a, b, coefficient)` triples for
/// `c·u^a t^b`.
#[pyclass(name = "Element", frozen)]
struct PyElement {
    inner: Local2DElement,
}

#[pymethods]
impl PyElement {
    #[new]
    #[pyo3(signature = (terms, field="Q"))]
    fn new(terms: Vec<(i64, i64, String)>, field: &str) -> PyResult<Self> {
        let f = self::field(field)?;
        let terms = terms
            .into_iter()
            .map(|(a, b, c)| Ok(((a, b), Scalar::parse(f, &c).map_err(err)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyElement {
            inner: Local2DElement::from_terms(f, terms).map_err(err)?,
        })
    }

    fn terms(&self) -> Vec<(i64, i64, String)> {
        self.inner
            .terms()
            .iter()
            .map(|((b, a), c)| (*a, *b, c.to_string()))
            .collect()
    }

    fn ord_t(&self) -> PyResult<i64> {
        self.inner.ord_t().map_err(err)
    }

    fn __mul__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn __add__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn __sub__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &PyElement) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Element({})", self.inner)
    }
}

/// Subspace of `k((u))^r` seen through a u-window. Rows are lists of `r`
/// polynomials.
#[pyclass(name = "Subspace", frozen)]
struct PySubspace {
    inner: WindowedSubspace,
}

#[pymethods]
impl PySubspace {
    #[new]
    #[pyo3(signature = (rows, rank, u_lo, u_hi, full_below=true, margin=0, field="Q"))]
    fn new(
        rows: Vec<Vec<PolyTerms>>,
        rank: usize,
        u_lo: i64,
        u_hi: i64,
        full_below: bool,
        margin: i64,
        field: &str,
    ) -> PyResult<Self> {
        let f = self::field(field)?;
        let rows = rows.iter().map(|r| vector(f, r)).collect::<PyResult<Vec<_>>>()?;
        let inner = echelonize(f, rows, rank, u_lo, u_hi, full_below).map_err(err)?;
        Ok(PySubspace {
            inner: inner.with_margin(margin),
        })
    }

    fn index(&self) -> PyResult<i64> {
        fredholm_index(&self.inner).map_err(err)
    }

    fn pivot_profile(&self) -> Vec<(usize, i64)> {
        pivot_profile(&self.inner)
    }

    fn dim_in_window(&self) -> usize {
        self.inner.dim_in_window()
    }

    fn contains(&self, v: Vec<PolyTerms>) -> PyResult<bool> {
        let v = vector(self.inner.field(), &v)?;
        Ok(membership(&self.inner, &v).map_err(err)? == Membership::In)
    }

    fn enlarge(&self, u_lo: i64, u_hi: i64) -> PyResult<PySubspace> {
        Ok(PySubspace {
            inner: self.inner.enlarge(u_lo, u_hi).map_err(err)?,
        })
    }

    fn direct_sum(&self, other: &PySubspace) -> PyResult<PySubspace> {
        Ok(PySubspace {
            inner: self.inner.direct_sum(&other.inner).map_err(err)?,
        })
    }

    fn rows(&self) -> Vec<String> {
        self.inner.rows().iter().map(|r| r.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(rank={}, u=[{}, {}), dim_in_window={})",
            self.inner.rank(),
            self.inner.u_lo(),
            self.inner.u_hi(),
            self.inner.dim_in_window()
        )
    }
}

#[pyclass(name = "SchurPair", frozen)]
struct PySchurPair {
    inner: SchurPair,
}

#[pymethods]
impl PySchurPair {
    /// Forward construction for a built-in example.
    #[staticmethod]
    #[pyo3(signature = (example, twist=0, window=None, field="Q"))]
    fn build(example: &str, twist: i64, window: Option<PyWindow>, field: &str) -> PyResult<Self> {
        let g = GeometricDatum::new(Kind::parse(example, twist).map_err(err)?, self::field(field)?);
        let inner = geometry::forward_krichever(&g, &window_or_default(window)).map_err(err)?;
        Ok(PySchurPair { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySchurPair {
            inner: pair_from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        pair_to_json(&self.inner)
    }

    #[getter]
    fn window(&self) -> PyWindow {
        PyWindow {
            inner: *self.inner.window(),
        }
    }

    fn check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &schur::check_schur_pair(&self.inner).map_err(err)?)
    }

    #[pyo3(signature = (j, n, space="a"))]
    fn hilbert(&self, j: i64, n: i64, space: &str) -> PyResult<usize> {
        schur::hilbert_function(self.space(space)?, j, n).map_err(err)
    }

    #[pyo3(signature = (n_max=6, space="a"))]
    fn point_ideal<'py>(&self, py: Python<'py>, n_max: i64, space: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &schur::point_ideal_check(self.space(space)?, n_max).map_err(err)?)
    }

    fn __eq__(&self, other: &PySchurPair) -> PyResult<bool> {
        schur::pair_equal_in_window(&self.inner, &other.inner).map_err(err)
    }
}

impl PySchurPair {
    fn space(&self, name: &str) -> PyResult<&schur::LayeredSubspace> {
        match name {
            "a" | "A" => Ok(self.inner.a()),
            "w" | "W" => Ok(self.inner.w()),
            other => Err(PyValueError::new_err(format!("unknown space {other:?}; use \"a\" or \"w\""))),
        }
    }
}

/// `(h⁰, h¹)` of `O(d)` on the projective line.
#[pyfunction]
#[pyo3(signature = (d, bound=12, field="Q"))]
fn cech_line_bundle(d: i64, bound: i64, field: &str) -> PyResult<(usize, usize)> {
    cohomology::cech_line_bundle_over(self::field(field)?, d, bound).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (i, twist=0, bound=12, field="Q"))]
fn ribbon_cohomology<'py>(py: Python<'py>, i: usize, twist: i64, bound: i64, field: &str) -> PyResult<Bound<'py, PyAny>> {
    let stack = LevelStack::from_datum(self::field(field)?, twist, 1, i);
    to_py(py, &cohomology::ribbon_cohomology(&stack, bound).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (i, bound=12))]
fn picard_dimension<'py>(py: Python<'py>, i: usize, bound: i64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &cohomology::picard_dimension(&GeometricDatum::p2_line(0), i, bound).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (example, twist=0, window=None))]
fn order_group<'py>(py: Python<'py>, example: &str, twist: i64, window: Option<PyWindow>) -> PyResult<Bound<'py, PyAny>> {
    let g = GeometricDatum::new(Kind::parse(example, twist).map_err(err)?, Field::Rational);
    to_py(py, &geometry::order_group(&g, &window_or_default(window)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (k_max=3, degree_bound=6, field="Q"))]
fn noncoherent_chain<'py>(py: Python<'py>, k_max: i64, degree_bound: i64, field: &str) -> PyResult<Bound<'py, PyAny>> {
    let ring = NodalCubicRing::new(degree_bound, self::field(field)?);
    let w = Window2D::new(-k_max - 1, 1, -8, 8, 0, 0).map_err(err)?;
    to_py(py, &geometry::noncoherent_chain(&ring, k_max, &w).map_err(err)?)
}

#[pymodule(name = "ribbonlab")]
fn ribbonlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyElement>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PySchurPair>()?;
    m.add_function(wrap_pyfunction!(cech_line_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(ribbon_cohomology, m)?)?;
    m.add_function(wrap_pyfunction!(picard_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(order_group, m)?)?;
    m.add_function(wrap_pyfunction!(noncoherent_chain, m)?)?;
    Ok(())
}
