use hms_core::dedekind::{self, ConeSumSpec, LMode};
use hms_core::forms::{unit_orbit_form, ExpForm2};
use hms_core::membrane::{membrane_integral_type_a, Membrane};
use hms_core::quadfield::{make_field, FieldContext, QuadInt};
use hms_core::quadrature::QuadratureConfig;
use hms_core::suites::{self, Suite, SuiteConfig};
use hms_core::symbols::{pair_commutative, Cusp, Symbol};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: hms_core::Error) -> PyErr {
    match e {
        hms_core::Error::NonConvergence { .. } | hms_core::Error::UnitSearchExhausted(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn quad(nodes: usize) -> QuadratureConfig {
    QuadratureConfig { nodes_per_dim: nodes, ..Default::default() }
}

fn coords(x: &QuadInt) -> (String, String) {
    (x.a.to_string(), x.b.to_string())
}

/// The field Q(√d) with its units; elements are `(a, b)` for `a + bω`.
#[pyclass(name = "Field", frozen)]
struct PyField {
    inner: FieldContext,
}

impl PyField {
    fn elem(&self, x: (i64, i64)) -> QuadInt {
        self.inner.elem(x.0, x.1)
    }
}

#[pymethods]
impl PyField {
    #[new]
    fn new(d: i64) -> PyResult<Self> {
        Ok(PyField { inner: make_field(d).map_err(err)? })
    }

    #[getter]
    fn d(&self) -> i64 {
        self.inner.d()
    }

    /// `ω` in both real embeddings.
    #[getter]
    fn omega_embeddings(&self) -> (f64, f64) {
        self.inner.omega_embeddings
    }

    /// Coordinates `(a, b)` of the fundamental unit, as decimal strings.
    #[getter]
    fn fundamental_unit(&self) -> (String, String) {
        coords(&self.inner.fundamental_unit)
    }

    /// Coordinates of the totally positive generator `ε`.
    #[getter]
    fn eps(&self) -> (String, String) {
        coords(&self.inner.eps)
    }

    #[getter]
    fn eps_embeddings(&self) -> (f64, f64) {
        self.inner.eps_embeddings()
    }

    fn embed(&self, x: (i64, i64)) -> (f64, f64) {
        self.elem(x).embed()
    }

    fn norm(&self, x: (i64, i64)) -> String {
        self.elem(x).norm().to_string()
    }

    fn format(&self, x: (i64, i64)) -> String {
        self.elem(x).to_string()
    }

    fn __repr__(&self) -> String {
        format!("Field(d={}, eps={})", self.inner.d(), self.inner.eps)
    }
}

/// `Σ c e(α z) dz1∧dz2` with `e(αz) = exp(2πi(α1 z1 + α2 z2))`.
#[pyclass(name = "Form2", frozen)]
struct PyForm2 {
    inner: ExpForm2,
}

#[pymethods]
impl PyForm2 {
    /// `terms` is a list of `(coefficient, (a, b))`.
    #[new]
    fn new(field: &PyField, terms: Vec<(Complex64, (i64, i64))>) -> PyResult<Self> {
        let t = terms.into_iter().map(|(c, x)| (c, field.elem(x))).collect();
        Ok(PyForm2 { inner: ExpForm2::new(field.inner.field, t).map_err(err)? })
    }

    /// `Σ_{|k| ≤ orbit} c e(ε^k α z)`.
    #[staticmethod]
    fn unit_orbit(field: &PyField, coeff: Complex64, alpha: (i64, i64), orbit: u32) -> PyResult<Self> {
        Ok(PyForm2 { inner: unit_orbit_form(&field.inner, coeff, &field.elem(alpha), orbit).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyForm2 { inner: ExpForm2::from_json(&v).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __call__(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.inner.eval(z1, z2)
    }

    fn __len__(&self) -> usize {
        self.inner.terms.len()
    }
}

/// A membrane: `unit_diangle(field, u)`, `diangle(r_start, r_end)`, `quadrant()` or `triangle()`.
#[pyclass(name = "Membrane", frozen)]
struct PyMembrane {
    inner: Membrane,
}

#[pymethods]
impl PyMembrane {
    #[staticmethod]
    #[pyo3(signature = (field, u=None))]
    fn unit_diangle(field: &PyField, u: Option<(i64, i64)>) -> PyResult<Self> {
        let u = u.map(|x| field.elem(x)).unwrap_or_else(|| field.inner.eps.clone());
        Ok(PyMembrane { inner: Membrane::diangle_unit(&field.inner, &u).map_err(err)? })
    }

    #[staticmethod]
    fn diangle(r_start: f64, r_end: f64) -> PyResult<Self> {
        Ok(PyMembrane { inner: Membrane::diangle(r_start, r_end).map_err(err)? })
    }

    #[staticmethod]
    fn quadrant() -> Self {
        PyMembrane { inner: Membrane::imaginary_quadrant() }
    }

    #[staticmethod]
    fn triangle() -> Self {
        PyMembrane { inner: Membrane::triangle() }
    }

    /// `(value, error estimate)` of the type-a iterated integral of `forms` in order.
    #[pyo3(signature = (forms, nodes=16))]
    fn integral(&self, forms: Vec<PyRef<'_, PyForm2>>, nodes: usize) -> PyResult<(Complex64, f64)> {
        let f: Vec<ExpForm2> = forms.iter().map(|x| x.inner.clone()).collect();
        let e = membrane_integral_type_a(&f, &self.inner, &quad(nodes)).map_err(err)?;
        Ok((e.value, e.error))
    }
}

/// The closed form of the unit diangle pairing with `e(αz)`.
#[pyfunction]
#[pyo3(signature = (field, alpha, u=None))]
fn unit_diangle_closed_form(field: &PyField, alpha: (i64, i64), u: Option<(i64, i64)>) -> Complex64 {
    let u = u.map(|x| field.elem(x)).unwrap_or_else(|| field.inner.eps.clone());
    suites::unit_diangle_closed_form(&u, &field.elem(alpha))
}

/// `(value, error)` of a triangle (three cusps) or diangle (four cusps) paired with `form`.
/// Cusps are strings: `inf`, `p` or `p/q` with `p`, `q` written `a` or `(a,b)`.
#[pyfunction]
#[pyo3(signature = (field, points, form, nodes=16))]
fn pair_symbol(field: &PyField, points: Vec<String>, form: &PyForm2, nodes: usize) -> PyResult<(Complex64, f64)> {
    let p = points.iter().map(|s| Cusp::parse(field.inner.field, s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let sym = match p.as_slice() {
        [a, b, c] => Symbol::Triangle([a.clone(), b.clone(), c.clone()]),
        [a, b, c, d] => Symbol::Diangle([a.clone(), b.clone(), c.clone(), d.clone()]),
        _ => return Err(PyValueError::new_err("a symbol needs three or four points")),
    };
    let e = pair_commutative(&sym, &form.inner, &quad(nodes)).map_err(err)?;
    Ok((e.value, e.error))
}

/// All shuffles in sh(i, j), one-line notation.
#[pyfunction]
fn shuffles(i: usize, j: usize) -> PyResult<Vec<Vec<usize>>> {
    if i + j > 12 {
        return Err(PyValueError::new_err("i + j must be at most 12"));
    }
    Ok(hms_core::shuffle::shuffles(i, j).iter().map(|p| p.one_line()).collect())
}

/// `(value, tail bound)` of the truncated cone sum ζ(C, ε^{p_2}C, …; k_1, …).
#[pyfunction]
#[pyo3(signature = (field, exponents, powers=None, height_bound=25.0))]
fn mdzv(field: &PyField, exponents: Vec<u32>, powers: Option<Vec<i32>>, height_bound: f64) -> PyResult<(f64, f64)> {
    let powers = powers.unwrap_or_else(|| vec![0; exponents.len()]);
    if powers.len() != exponents.len() {
        return Err(PyValueError::new_err("powers and exponents differ in length"));
    }
    let s = dedekind::mdzv(&ConeSumSpec::new(&field.inner, &powers, &exponents, height_bound)).map_err(err)?;
    Ok((s.value, s.tail_bound))
}

/// `(value, tail bound, [(k, term)])` of Z(m, n) over the unit window.
#[pyfunction]
#[pyo3(signature = (field, m, n, window=8, height_bound=25.0))]
fn z_value(field: &PyField, m: u32, n: u32, window: u32, height_bound: f64) -> PyResult<(f64, f64, Vec<(i32, f64)>)> {
    let spec = ConeSumSpec::new(&field.inner, &[0, 0], &[m, n], height_bound).with_window(window);
    let z = dedekind::z_value(m, n, &spec).map_err(err)?;
    Ok((z.value, z.tail_bound, z.terms))
}

/// `L_{f,g}(m, n)`: `mode = "series"` (no (2πi) factor) or `"integral"`.
#[pyfunction]
#[pyo3(signature = (field, f, g, m, n, mode="series", window=8, nodes=16))]
#[allow(clippy::too_many_arguments)]
fn l_double(field: &PyField, f: &PyForm2, g: &PyForm2, m: u32, n: u32, mode: &str, window: u32, nodes: usize) -> PyResult<Complex64> {
    let mode = match mode {
        "series" => LMode::Series,
        "integral" => LMode::Integral,
        other => return Err(PyValueError::new_err(format!("unknown mode {other}"))),
    };
    dedekind::l_double(&field.inner, &f.inner, &g.inner, m, n, mode, window, &quad(nodes)).map_err(err)
}

/// `(2πi)^{-2k}`.
#[pyfunction]
fn l_prefactor(k: u32) -> Complex64 {
    dedekind::l_prefactor(k)
}

/// Runs a verification suite; `config` is an optional JSON object of suite settings.
/// Returns the JSON report.
#[pyfunction]
#[pyo3(signature = (suite, config=None))]
fn verify(py: Python<'_>, suite: &str, config: Option<&str>) -> PyResult<String> {
    let s: Suite = suite.parse().map_err(err)?;
    let cfg: SuiteConfig = match config {
        Some(c) => serde_json::from_str(c).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => SuiteConfig::default(),
    };
    let out = py.detach(|| suites::run(s, &cfg)).map_err(err)?;
    serde_json::to_string(&out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn hms(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyForm2>()?;
    m.add_class::<PyMembrane>()?;
    m.add_function(wrap_pyfunction!(unit_diangle_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(pair_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(shuffles, m)?)?;
    m.add_function(wrap_pyfunction!(mdzv, m)?)?;
    m.add_function(wrap_pyfunction!(z_value, m)?)?;
    m.add_function(wrap_pyfunction!(l_double, m)?)?;
    m.add_function(wrap_pyfunction!(l_prefactor, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
