//! Python bindings: `import torind`.
//!
//! Reports come back as plain dicts (the same shape the CLI prints under
//! `result`). Bad input raises `ValueError`; failures while computing raise
//! `torind.NumericalError`, a `RuntimeError` subclass.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pythonize::pythonize;

use torind_core::field::{conjugacy_residual as core_conjugacy, pushforward as core_pushforward, sample_grid};
use torind_core::firstintegral::{
    build_first_integral, level_set_drift, residual_x_of_h, FirstIntegralGrid, GradientConvention, GradientSpec, Rect,
};
use torind_core::geometry::{curve_type, ParamCurve, Space, EPS_CLOSE, EPS_REGULAR};
use torind_core::index::{index_report, IndexOptions};
use torind_core::registry::{field_from_spec, map_from_spec};
use torind_core::{expr, plot, uniformization as unif, Error, Point};

create_exception!(
    torind,
    NumericalError,
    PyRuntimeError,
    "A computation failed: no convergence, a zero of the field, a singular Jacobian, ..."
);

fn err(e: Error) -> PyErr {
    let msg = format!("{} ({})", e, e.kind());
    if e.is_validation() || matches!(e, Error::NotClosed { .. } | Error::Irregular { .. }) {
        PyValueError::new_err(msg)
    } else {
        NumericalError::new_err(msg)
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for Result<T, Error> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    Ok(pythonize(py, value)?)
}

fn xy(p: Point) -> (f64, f64) {
    (p.x, p.y)
}

fn rect(domain: (f64, f64, f64, f64)) -> PyResult<Rect> {
    Rect::new(domain.0, domain.1, domain.2, domain.3).py_err()
}

/// Tolerances for the index computation.
#[pyclass(name = "IndexOptions", module = "torind", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIndexOptions {
    inner: IndexOptions,
}

#[pymethods]
impl PyIndexOptions {
    #[new]
    #[pyo3(signature = (*, tol=None, min_panels=None, max_panels=None, snap_tol=None, error_tol=None, zero_tol=None))]
    fn new(
        tol: Option<f64>,
        min_panels: Option<usize>,
        max_panels: Option<usize>,
        snap_tol: Option<f64>,
        error_tol: Option<f64>,
        zero_tol: Option<f64>,
    ) -> PyResult<Self> {
        let d = IndexOptions::default();
        let o = IndexOptions {
            tol: tol.unwrap_or(d.tol),
            min_panels: min_panels.unwrap_or(d.min_panels),
            max_panels: max_panels.unwrap_or(d.max_panels),
            snap_tol: snap_tol.unwrap_or(d.snap_tol),
            error_tol: error_tol.unwrap_or(d.error_tol),
            zero_tol: zero_tol.unwrap_or(d.zero_tol),
        };
        for (name, v) in [
            ("tol", o.tol),
            ("snap_tol", o.snap_tol),
            ("error_tol", o.error_tol),
            ("zero_tol", o.zero_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PyValueError::new_err(format!("{name} must be positive, got {v}")));
            }
        }
        if o.snap_tol > o.error_tol {
            return Err(PyValueError::new_err("snap_tol must not exceed error_tol"));
        }
        if o.min_panels < 8 || o.min_panels > o.max_panels {
            return Err(PyValueError::new_err("need 8 <= min_panels <= max_panels"));
        }
        Ok(PyIndexOptions { inner: o })
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.inner.tol
    }
    #[getter]
    fn min_panels(&self) -> usize {
        self.inner.min_panels
    }
    #[getter]
    fn max_panels(&self) -> usize {
        self.inner.max_panels
    }
    #[getter]
    fn snap_tol(&self) -> f64 {
        self.inner.snap_tol
    }
    #[getter]
    fn error_tol(&self) -> f64 {
        self.inner.error_tol
    }
    #[getter]
    fn zero_tol(&self) -> f64 {
        self.inner.zero_tol
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let o = &self.inner;
        format!(
            "IndexOptions(tol={:e}, min_panels={}, max_panels={}, snap_tol={:e}, error_tol={:e}, zero_tol={:e})",
            o.tol, o.min_panels, o.max_panels, o.snap_tol, o.error_tol, o.zero_tol
        )
    }
}

fn opts(o: Option<PyRef<'_, PyIndexOptions>>) -> IndexOptions {
    o.map(|o| o.inner).unwrap_or_default()
}

/// Plane vector field `(P, Q)`.
///
/// Accepts `"(P, Q)"` in `x, y`, or `radial`, `rotation`, `constant(a, b)`,
/// `example(psi, a, b)`, `theorem-pushforward(p, q)`.
#[pyclass(name = "VectorField", module = "torind", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: torind_core::field::PlaneVectorField,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyField {
            inner: field_from_spec(spec).py_err()?,
        })
    }

    fn __call__(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        Ok(xy(self.inner.eval(Point::new(x, y)).py_err()?))
    }

    /// `d · X ∘ d⁻¹`.
    fn pushforward(&self, map: &PyMap) -> PyField {
        PyField {
            inner: core_pushforward(&self.inner, &map.inner),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn __repr__(&self) -> String {
        format!("VectorField({:?})", self.inner.label())
    }
}

/// Closed curve on `[0, 2π]`, given as `"(x(t), y(t))"`.
///
/// With `torus=True` the coordinates are lift coordinates on `R²/2πZ²`.
/// Curves that are not closed or not regular are refused.
#[pyclass(name = "Curve", module = "torind", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCurve {
    inner: ParamCurve,
}

#[pymethods]
impl PyCurve {
    #[new]
    #[pyo3(signature = (spec, torus=false))]
    fn new(spec: &str, torus: bool) -> PyResult<Self> {
        let space = if torus { Space::Torus } else { Space::Plane };
        let inner = ParamCurve::parse(spec, space).py_err()?;
        inner.check_closed(EPS_CLOSE).py_err()?;
        inner.check_regular(EPS_REGULAR).py_err()?;
        Ok(PyCurve { inner })
    }

    #[staticmethod]
    fn circle(cx: f64, cy: f64, r: f64) -> PyResult<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(PyValueError::new_err(format!("radius must be positive, got {r}")));
        }
        Ok(PyCurve {
            inner: ParamCurve::circle(Point::new(cx, cy), r),
        })
    }

    /// `t ↦ offset + (p t, q t)` on the torus.
    #[staticmethod]
    #[pyo3(signature = (p, q, ox=0.0, oy=0.0))]
    fn torus_line(p: i64, q: i64, ox: f64, oy: f64) -> PyResult<Self> {
        if p == 0 && q == 0 {
            return Err(PyValueError::new_err("(p, q) = (0, 0) is not a closed line"));
        }
        Ok(PyCurve {
            inner: ParamCurve::torus_line(p, q, Point::new(ox, oy)),
        })
    }

    fn __call__(&self, t: f64) -> PyResult<(f64, f64)> {
        Ok(xy(self.inner.eval(t).py_err()?))
    }

    /// `n` points at `t = 2πk/n`.
    fn sample(&self, n: usize) -> PyResult<Vec<(f64, f64)>> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(plot::sample_closed(&self.inner, n)
            .py_err()?
            .into_iter()
            .map(xy)
            .collect())
    }

    fn reversed(&self) -> PyCurve {
        PyCurve {
            inner: self.inner.reversed(),
        }
    }

    fn shifted(&self, s: f64) -> PyCurve {
        PyCurve {
            inner: self.inner.shifted(s),
        }
    }

    /// Image under a plane map.
    fn mapped(&self, map: &PyMap) -> PyCurve {
        let m = map.inner.clone();
        PyCurve {
            inner: self.inner.mapped(move |z| m.apply(z)),
        }
    }

    fn closure_gap(&self) -> PyResult<f64> {
        self.inner.closure_gap().py_err()
    }

    fn is_closed(&self) -> PyResult<bool> {
        Ok(self.inner.closure_gap().py_err()? <= EPS_CLOSE)
    }

    /// Homology class `(p, q)` of a torus curve.
    fn curve_type(&self) -> PyResult<(i64, i64)> {
        let c = curve_type(&self.inner).py_err()?;
        Ok((c.p, c.q))
    }

    #[getter]
    fn torus(&self) -> bool {
        self.inner.space() == Space::Torus
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Curve({:?}, torus={})", self.inner.label(), self.torus())
    }
}

/// Plane map `(f, g)`; also `identity` and `phi(p, q)`.
#[pyclass(name = "Map", module = "torind", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMap {
    inner: torind_core::field::Diffeo2,
}

#[pymethods]
impl PyMap {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyMap {
            inner: map_from_spec(spec).py_err()?,
        })
    }

    fn __call__(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        Ok(xy(self.inner.apply(Point::new(x, y)).py_err()?))
    }

    /// `((f_x, f_y), (g_x, g_y))`.
    fn jacobian(&self, x: f64, y: f64) -> PyResult<((f64, f64), (f64, f64))> {
        let j = self.inner.jacobian(Point::new(x, y)).py_err()?;
        Ok(((j[(0, 0)], j[(0, 1)]), (j[(1, 0)], j[(1, 1)])))
    }

    #[pyo3(signature = (x, y, seed=None))]
    fn preimage(&self, x: f64, y: f64, seed: Option<(f64, f64)>) -> PyResult<(f64, f64)> {
        let seed = seed.map(|(a, b)| Point::new(a, b));
        Ok(xy(self.inner.preimage(Point::new(x, y), seed).py_err()?))
    }

    fn inverse(&self) -> PyMap {
        PyMap {
            inner: self.inner.inverse(),
        }
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &PyMap) -> PyMap {
        PyMap {
            inner: self.inner.compose(&inner.inner),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Map({:?})", self.inner.label())
    }
}

/// Grid first integral of `X = dψ⁻¹ (a, b)`.
#[pyclass(name = "FirstIntegral", module = "torind", frozen)]
struct PyFirstIntegral {
    inner: FirstIntegralGrid,
    field: torind_core::field::PlaneVectorField,
}

#[pymethods]
impl PyFirstIntegral {
    #[new]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (psi, a, b, *, domain=(0.0, 1.0, 0.0, 1.0), res=128, anchor=None, convention="standard"))]
    fn new(
        py: Python<'_>,
        psi: &PyMap,
        a: f64,
        b: f64,
        domain: (f64, f64, f64, f64),
        res: usize,
        anchor: Option<(f64, f64)>,
        convention: &str,
    ) -> PyResult<Self> {
        let convention = match convention {
            "standard" => GradientConvention::Standard,
            "transposed" => GradientConvention::Transposed,
            other => {
                return Err(PyValueError::new_err(format!(
                    "convention must be 'standard' or 'transposed', got {other:?}"
                )))
            }
        };
        if res < 2 {
            return Err(PyValueError::new_err("res must be at least 2"));
        }
        let domain = rect(domain)?;
        let anchor = anchor.map_or(Point::new(domain.x0, domain.y0), |(x, y)| Point::new(x, y));
        let psi = &psi.inner;
        py.detach(|| {
            let spec = GradientSpec::with_convention(psi, a, b, convention)?;
            let inner = build_first_integral(&spec, &domain, res, anchor)?;
            let field = torind_core::field::example_field(psi, a, b)?;
            Ok(PyFirstIntegral { inner, field })
        })
        .py_err()
    }

    /// `h` by bilinear interpolation; `None` outside the grid.
    fn __call__(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.value_at(Point::new(x, y))
    }

    /// Row-major values, `values[j][i]` at `(x_i, y_j)`.
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values.chunks(self.inner.nx).map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.ny, self.inner.nx)
    }

    #[getter]
    fn integrability_residual(&self) -> f64 {
        self.inner.integrability_residual
    }

    #[getter]
    fn path_disagreement(&self) -> f64 {
        self.inner.path_disagreement
    }

    /// Largest `|X(h)|` over interior nodes.
    fn residual(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| residual_x_of_h(&self.field, &self.inner)).py_err()
    }

    /// Change of `h` along the flow of `X` from `(x, y)`.
    #[pyo3(signature = (x, y, time=0.5))]
    fn drift<'py>(&self, py: Python<'py>, x: f64, y: f64, time: f64) -> PyResult<Bound<'py, PyAny>> {
        let d = py
            .detach(|| level_set_drift(&self.field, &self.inner, Point::new(x, y), time))
            .py_err()?;
        to_dict(py, &d)
    }

    /// Columns `x,y,h`.
    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[pyo3(signature = (levels=12, title="first integral"))]
    fn contour_svg(&self, levels: usize, title: &str) -> String {
        plot::contour_figure(&self.inner, levels, title).to_svg()
    }

    fn __repr__(&self) -> String {
        format!("FirstIntegral(shape=({}, {}))", self.inner.ny, self.inner.nx)
    }
}

/// Winding index of `field` along `curve` by quadrature and by angle unwrapping.
#[pyfunction]
#[pyo3(signature = (field, curve, options=None))]
fn index<'py>(
    py: Python<'py>,
    field: &PyField,
    curve: &PyCurve,
    options: Option<PyRef<'py, PyIndexOptions>>,
) -> PyResult<Bound<'py, PyAny>> {
    let o = opts(options);
    let r = py.detach(|| index_report(&field.inner, &curve.inner, &o)).py_err()?;
    to_dict(py, &r)
}

fn theorem_dict<'py>(py: Python<'py>, r: &unif::TheoremReport) -> PyResult<Bound<'py, PyAny>> {
    let d = to_dict(py, r)?;
    d.set_item("holds", r.holds())?;
    Ok(d)
}

/// Index of the pushed-forward constant field along `φ ∘ Γ` for one `(p, q)`.
#[pyfunction]
#[pyo3(signature = (p, q, options=None))]
fn theorem_check<'py>(
    py: Python<'py>,
    p: i64,
    q: i64,
    options: Option<PyRef<'py, PyIndexOptions>>,
) -> PyResult<Bound<'py, PyAny>> {
    let o = opts(options);
    let r = py.detach(|| unif::theorem_check(p, q, &o)).py_err()?;
    theorem_dict(py, &r)
}

/// `theorem_check` over `pairs` (default: the built-in sweep), in input order.
#[pyfunction]
#[pyo3(signature = (pairs=None, options=None))]
fn theorem_sweep<'py>(
    py: Python<'py>,
    pairs: Option<Vec<(i64, i64)>>,
    options: Option<PyRef<'py, PyIndexOptions>>,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let o = opts(options);
    let pairs = pairs.unwrap_or_else(|| unif::SWEEP_PAIRS.to_vec());
    let reports = py.detach(|| unif::theorem_sweep(&pairs, &o));
    reports.into_iter().map(|r| theorem_dict(py, &r.py_err()?)).collect()
}

/// Indices along several curves and whether all of them equal one.
#[pyfunction]
#[pyo3(signature = (field, curves, options=None))]
fn corollary_check<'py>(
    py: Python<'py>,
    field: &PyField,
    curves: Vec<PyRef<'py, PyCurve>>,
    options: Option<PyRef<'py, PyIndexOptions>>,
) -> PyResult<Bound<'py, PyAny>> {
    let o = opts(options);
    let curves: Vec<ParamCurve> = curves.iter().map(|c| c.inner.clone()).collect();
    let r = py
        .detach(|| unif::corollary_check(&field.inner, &curves, &o))
        .py_err()?;
    to_dict(py, &r)
}

/// Radii of `φ` over the strip between the two copies of `Γ₀`.
#[pyfunction]
#[pyo3(signature = (p, q, grid=64))]
fn corona_image_check<'py>(py: Python<'py>, p: i64, q: i64, grid: usize) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| unif::corona_image_check(p, q, grid)).py_err()?;
    to_dict(py, &r)
}

/// Largest `|d·X − Z∘d|` over an `n × n` grid on `domain`.
#[pyfunction]
#[pyo3(signature = (field, target, map, domain=(-1.0, 1.0, -1.0, 1.0), n=9))]
fn conjugacy_residual(
    py: Python<'_>,
    field: &PyField,
    target: &PyField,
    map: &PyMap,
    domain: (f64, f64, f64, f64),
    n: usize,
) -> PyResult<f64> {
    let d = rect(domain)?;
    let samples = sample_grid(d.x0, d.x1, d.y0, d.y1, n.max(1));
    py.detach(|| core_conjugacy(&field.inner, &target.inner, &map.inner, &samples))
        .py_err()
}

#[pyfunction]
fn rho(p: i64, q: i64, x: f64, y: f64) -> PyResult<(f64, f64)> {
    Ok(xy(unif::rho(p, q, Point::new(x, y)).py_err()?))
}

#[pyfunction]
fn tau(x: f64, y: f64) -> (f64, f64) {
    xy(unif::tau(Point::new(x, y)))
}

#[pyfunction]
fn sigma(x: f64, y: f64) -> (f64, f64) {
    xy(unif::sigma(Point::new(x, y)))
}

/// `σ ∘ τ ∘ ρ`.
#[pyfunction]
fn phi(p: i64, q: i64, x: f64, y: f64) -> PyResult<(f64, f64)> {
    Ok(xy(unif::phi(p, q, Point::new(x, y)).py_err()?))
}

/// The expanded one-line formula for `φ`; differs from `phi` unless `p² + q² = 1`.
#[pyfunction]
fn phi_closed_form(p: i64, q: i64, x: f64, y: f64) -> PyResult<(f64, f64)> {
    Ok(xy(unif::phi_closed_form(p, q, Point::new(x, y)).py_err()?))
}

/// Canonical printed form of an expression.
#[pyfunction]
fn parse_expr(source: &str) -> PyResult<String> {
    Ok(expr::parse_expr(source).map_err(|e| err(e.into()))?.to_string())
}

#[pyfunction]
#[pyo3(signature = (source, x=0.0, y=0.0, t=0.0))]
fn eval_expr(source: &str, x: f64, y: f64, t: f64) -> PyResult<f64> {
    let e = expr::parse_expr(source).map_err(|e| err(e.into()))?;
    expr::eval_expr(&e, (x, y), t).map_err(|e| err(e.into()))
}

/// SVG of the given curves, each sampled at `samples` points.
#[pyfunction]
#[pyo3(signature = (curves, samples=512, title="curves"))]
fn curves_svg(curves: Vec<PyRef<'_, PyCurve>>, samples: usize, title: &str) -> PyResult<String> {
    if samples < 2 {
        return Err(PyValueError::new_err("samples must be at least 2"));
    }
    let pts = curves
        .iter()
        .map(|c| plot::sample_closed(&c.inner, samples))
        .collect::<Result<Vec<_>, _>>()
        .py_err()?;
    Ok(plot::curve_figure(&pts, title).to_svg())
}

/// SVG of normalized arrows on an `n × n` grid.
#[pyfunction]
#[pyo3(signature = (field, domain=(-2.0, 2.0, -2.0, 2.0), n=16, title="field"))]
fn quiver_svg(field: &PyField, domain: (f64, f64, f64, f64), n: usize, title: &str) -> PyResult<String> {
    Ok(plot::quiver_figure(&field.inner, rect(domain)?, n, title).to_svg())
}

#[pymodule]
pub fn torind(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyIndexOptions>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyFirstIntegral>()?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_check, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_check, m)?)?;
    m.add_function(wrap_pyfunction!(corona_image_check, m)?)?;
    m.add_function(wrap_pyfunction!(conjugacy_residual, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(parse_expr, m)?)?;
    m.add_function(wrap_pyfunction!(eval_expr, m)?)?;
    m.add_function(wrap_pyfunction!(curves_svg, m)?)?;
    m.add_function(wrap_pyfunction!(quiver_svg, m)?)?;
    Ok(())
}
