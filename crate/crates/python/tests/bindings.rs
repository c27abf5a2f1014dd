use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

/// Runs `code` with `torind` importable; `assert` failures surface as panics.
fn run(code: &str) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(torind::torind)(py);
        py.import("sys")
            .unwrap()
            .getattr("modules")
            .unwrap()
            .set_item("torind", module)
            .unwrap();
        let globals = PyDict::new(py);
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.display(py);
            panic!("python snippet failed: {e}");
        }
    });
}

#[test]
fn index_of_rotation_field() {
    run(r#"
import torind
r = torind.index(torind.VectorField("rotation"), torind.Curve("(2*cos(t), 2*sin(t))"))
assert r["quadrature"]["snapped"] == 1 and r["unwrap"]["snapped"] == 1
assert r["oracle_delta"] < 1e-6
assert r["quadrature"]["status"] == "valid"
c = torind.Curve.circle(0.0, 0.0, 1.0)
f = torind.VectorField("(x^2 - y^2, 2*x*y)")
assert torind.index(f, c.reversed())["quadrature"]["snapped"] == -2
"#);
}

#[test]
fn errors_map_to_python_exceptions() {
    run(r#"
import torind
assert issubclass(torind.NumericalError, RuntimeError)
for bad in [lambda: torind.VectorField("(x, y"),
            lambda: torind.Curve("(cos(t), t)"),
            lambda: torind.Curve("(0*t, 0*t)"),
            lambda: torind.theorem_check(0, 0),
            lambda: torind.IndexOptions(tol=-1.0),
            lambda: torind.FirstIntegral(torind.Map("identity"), 1.0, 2.0, convention="sideways")]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
try:
    torind.index(torind.VectorField("(x - 1, y)"), torind.Curve.circle(0.0, 0.0, 1.0))
except torind.NumericalError as e:
    assert "zero_of_field" in str(e)
else:
    raise AssertionError("expected NumericalError")
"#);
}

#[test]
fn theorem_sweep_holds_in_order() {
    run(r#"
import torind
cases = torind.theorem_sweep([(2, 3), (-1, 1), (1, 0)])
assert [(c["p"], c["q"]) for c in cases] == [(2, 3), (-1, 1), (1, 0)]
assert all(c["holds"] for c in cases)
assert torind.theorem_check(2, 1)["closed_form_index"] == 5
"#);
}

#[test]
fn uniformization_maps() {
    run(r#"
import math, torind
# phi carries (p t, q t) onto the circle of radius 2 pi
for p, q in [(1, 0), (2, 1)]:
    for k in range(8):
        t = 2 * math.pi * k / 8
        x, y = torind.phi(p, q, p * t, q * t)
        assert abs(math.hypot(x, y) - 2 * math.pi) < 1e-12
        x, y = torind.sigma(*torind.tau(*torind.rho(p, q, p * t, q * t)))
        assert (x, y) == torind.phi(p, q, p * t, q * t)
# the closed form agrees only for unit (p, q)
a, b = torind.phi(1, 0, 0.3, 0.4), torind.phi_closed_form(1, 0, 0.3, 0.4)
assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) < 1e-12
"#);
}

#[test]
fn first_integral_of_a_shear() {
    run(r#"
import torind
h = torind.FirstIntegral(torind.Map("(x + 0.1*sin(y), y)"), 0.6, 1.1, res=64)
assert h.shape == (65, 65)
assert h.residual() < 1e-3
d = h.drift(0.3, 0.3, time=0.2)
assert d["relative_rate"] < 1e-3
assert h(2.0, 2.0) is None
assert h.to_csv().startswith("x,y,h\n")
assert h.contour_svg(levels=4).startswith("<svg")
"#);
}

#[test]
fn maps_curves_and_svg() {
    run(r#"
import torind
m = torind.Map("(2*x, y + x)")
assert m(1.0, 1.0) == (2.0, 2.0)
(fx, fy), (gx, gy) = m.jacobian(0.5, 0.5)
assert abs(fx - 2) < 1e-6 and abs(fy) < 1e-6 and abs(gx - 1) < 1e-6 and abs(gy - 1) < 1e-6
x, y = m.preimage(2.0, 2.0)
assert abs(x - 1) < 1e-9 and abs(y - 1) < 1e-9
c = torind.Curve.torus_line(2, 3)
assert c.torus and c.curve_type() == (2, 3)
img = torind.Curve.circle(0.0, 0.0, 1.0).mapped(m)
assert len(img.sample(16)) == 16
f = torind.VectorField("example((x + 0.2*y^2, y + 0.1*x), 1, 2)")
psi = torind.Map("(x + 0.2*y^2, y + 0.1*x)")
assert torind.conjugacy_residual(f, torind.VectorField("constant(1, 2)"), psi, n=4) < 1e-6
assert torind.corollary_check(torind.VectorField("rotation"), [torind.Curve.circle(0.0, 0.0, 1.0)])["condition_holds"]
assert torind.curves_svg([c]).startswith("<svg")
assert torind.quiver_svg(f, n=4).count('<path d="M') == 16
assert torind.parse_expr("x+2*y") == torind.parse_expr("x + 2*y")
assert torind.eval_expr("x*y + t", 2.0, 3.0, 1.0) == 7.0
"#);
}
