//! Scalar and vector fields on the plane, maps with finite-difference
//! differentials, and the pushforward of a field through a map.
//!
//! Every derivative is a central difference with step
//! `1e-6 · max(1, |coordinate|)`. Maps without a closed-form inverse are
//! inverted by damped Newton iteration.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, parse_pair, Expr};
use crate::geometry::Space;
use crate::{Matrix, Point};

pub const FD_REL_STEP: f64 = 1e-6;
pub const EPS_ZERO: f64 = 1e-10;
pub const EPS_JAC: f64 = 1e-12;
pub const EPS_INV: f64 = 1e-8;
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// Step used for first derivatives at coordinate `c`.
pub fn fd_step(c: f64) -> f64 {
    FD_REL_STEP * c.abs().max(1.0)
}

type ScalarFn = dyn Fn(Point) -> Result<f64> + Send + Sync;
type VectorFn = dyn Fn(Point) -> Result<Point> + Send + Sync;

/// Real function of `(x, y)`.
#[derive(Clone)]
pub struct ScalarField2 {
    eval: Arc<ScalarFn>,
    label: String,
}

impl fmt::Debug for ScalarField2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField2({})", self.label)
    }
}

impl ScalarField2 {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Point) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField2 {
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn from_expr(e: Expr) -> Self {
        let label = e.to_string();
        Self::from_fn(label, move |p| Ok(e.eval((p.x, p.y), 0.0)?))
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::from_expr(parse_expr(source)?))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("{c:?}"), move |_| Ok(c))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        let v = (self.eval)(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("{} at ({}, {})", self.label, p.x, p.y)))
        }
    }

    pub fn dx(&self, p: Point) -> Result<f64> {
        let h = fd_step(p.x);
        let e = Point::new(h, 0.0);
        Ok((self.value(p + e)? - self.value(p - e)?) / (2.0 * h))
    }

    pub fn dy(&self, p: Point) -> Result<f64> {
        let h = fd_step(p.y);
        let e = Point::new(0.0, h);
        Ok((self.value(p + e)? - self.value(p - e)?) / (2.0 * h))
    }

    pub fn gradient(&self, p: Point) -> Result<Point> {
        Ok(Point::new(self.dx(p)?, self.dy(p)?))
    }

    /// `self_x` as a new field.
    pub fn partial_x(&self) -> ScalarField2 {
        let s = self.clone();
        Self::from_fn(format!("d/dx {}", self.label), move |p| s.dx(p))
    }

    pub fn partial_y(&self) -> ScalarField2 {
        let s = self.clone();
        Self::from_fn(format!("d/dy {}", self.label), move |p| s.dy(p))
    }
}

/// Plane vector field `X = P ∂/∂x + Q ∂/∂y`.
#[derive(Clone)]
pub struct PlaneVectorField {
    eval: Arc<VectorFn>,
    label: String,
}

impl fmt::Debug for PlaneVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlaneVectorField({})", self.label)
    }
}

impl PlaneVectorField {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Point) -> Result<Point> + Send + Sync + 'static,
    {
        PlaneVectorField {
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn from_components(p: ScalarField2, q: ScalarField2) -> Self {
        let label = format!("({}, {})", p.label, q.label);
        Self::from_fn(label, move |z| Ok(Point::new(p.value(z)?, q.value(z)?)))
    }

    pub fn from_exprs(p: Expr, q: Expr) -> Self {
        Self::from_components(ScalarField2::from_expr(p), ScalarField2::from_expr(q))
    }

    /// Parses `"(P, Q)"` in `x` and `y`.
    pub fn parse(source: &str) -> Result<Self> {
        let (p, q) = parse_pair(source)?;
        Ok(Self::from_exprs(p, q))
    }

    pub fn constant(a: f64, b: f64) -> Self {
        Self::from_fn(format!("constant({a:?}, {b:?})"), move |_| Ok(Point::new(a, b)))
    }

    /// `(x, y)`.
    pub fn radial() -> Self {
        Self::from_fn("radial", Ok)
    }

    /// `(-y, x)`.
    pub fn rotation() -> Self {
        Self::from_fn("rotation", |p| Ok(Point::new(-p.y, p.x)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, p: Point) -> Result<Point> {
        let v = (self.eval)(p)?;
        if !v.x.is_finite() || !v.y.is_finite() {
            return Err(Error::NonFinite(format!("{} at ({}, {})", self.label, p.x, p.y)));
        }
        Ok(v)
    }

    /// Like [`eval`](Self::eval) but reports a zero of the field below `EPS_ZERO`.
    pub fn eval_regular(&self, p: Point) -> Result<Point> {
        let v = self.eval(p)?;
        let norm = v.norm();
        if norm <= EPS_ZERO {
            return Err(Error::ZeroOfField { x: p.x, y: p.y, norm });
        }
        Ok(v)
    }

    pub fn p(&self) -> ScalarField2 {
        let s = self.clone();
        ScalarField2::from_fn(format!("P of {}", self.label), move |z| Ok(s.eval(z)?.x))
    }

    pub fn q(&self) -> ScalarField2 {
        let s = self.clone();
        ScalarField2::from_fn(format!("Q of {}", self.label), move |z| Ok(s.eval(z)?.y))
    }

    /// `X(h) = P h_x + Q h_y` at `p`.
    pub fn derivative_of(&self, h: &ScalarField2, p: Point) -> Result<f64> {
        Ok(self.eval(p)?.dot(&h.gradient(p)?))
    }
}

/// Map `ψ = (f, g)` with an optional inverse.
#[derive(Clone)]
pub struct Diffeo2 {
    forward: Arc<VectorFn>,
    inverse: Option<Arc<VectorFn>>,
    source: Space,
    target: Space,
    seed: Option<Point>,
    label: String,
}

impl fmt::Debug for Diffeo2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeo2")
            .field("label", &self.label)
            .field("has_inverse", &self.inverse.is_some())
            .field("source", &self.source)
            .field("target", &self.target)
            .finish()
    }
}

impl Diffeo2 {
    pub fn from_fn<F>(label: impl Into<String>, forward: F) -> Self
    where
        F: Fn(Point) -> Result<Point> + Send + Sync + 'static,
    {
        Diffeo2 {
            forward: Arc::new(forward),
            inverse: None,
            source: Space::Plane,
            target: Space::Plane,
            seed: None,
            label: label.into(),
        }
    }

    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(Point) -> Result<Point> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Initial guess for Newton inversion when no inverse is supplied.
    pub fn with_seed(mut self, seed: Point) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_spaces(mut self, source: Space, target: Space) -> Self {
        self.source = source;
        self.target = target;
        self
    }

    pub fn from_exprs(f: Expr, g: Expr) -> Self {
        let label = format!("({f}, {g})");
        Self::from_fn(label, move |p| {
            Ok(Point::new(f.eval((p.x, p.y), 0.0)?, g.eval((p.x, p.y), 0.0)?))
        })
    }

    /// Parses `"(f, g)"` in `x` and `y`.
    pub fn parse(source: &str) -> Result<Self> {
        let (f, g) = parse_pair(source)?;
        Ok(Self::from_exprs(f, g))
    }

    pub fn identity() -> Self {
        Self::from_fn("identity", Ok).with_inverse(Ok)
    }

    /// `z ↦ m z` with the inverse matrix as inverse.
    pub fn linear(m: Matrix) -> Result<Self> {
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter(format!("singular linear map {m:?}")))?;
        Ok(Self::from_fn(format!("linear{:?}", m.as_slice()), move |p| Ok(m * p)).with_inverse(move |p| Ok(inv * p)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn source(&self) -> Space {
        self.source
    }

    pub fn target(&self) -> Space {
        self.target
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        let v = (self.forward)(p)?;
        if !v.x.is_finite() || !v.y.is_finite() {
            return Err(Error::NonFinite(format!("{} at ({}, {})", self.label, p.x, p.y)));
        }
        Ok(v)
    }

    pub fn f(&self) -> ScalarField2 {
        let d = self.clone();
        ScalarField2::from_fn(format!("f of {}", self.label), move |p| Ok(d.apply(p)?.x))
    }

    pub fn g(&self) -> ScalarField2 {
        let d = self.clone();
        ScalarField2::from_fn(format!("g of {}", self.label), move |p| Ok(d.apply(p)?.y))
    }

    /// `[[f_x, f_y], [g_x, g_y]]` by central differences.
    pub fn jacobian(&self, p: Point) -> Result<Matrix> {
        let hx = fd_step(p.x);
        let hy = fd_step(p.y);
        let ex = Point::new(hx, 0.0);
        let ey = Point::new(0.0, hy);
        let cx = (self.apply(p + ex)? - self.apply(p - ex)?) / (2.0 * hx);
        let cy = (self.apply(p + ey)? - self.apply(p - ey)?) / (2.0 * hy);
        Ok(Matrix::from_columns(&[cx, cy]))
    }

    /// Jacobian, rejecting `|det| <= EPS_JAC`.
    pub fn regular_jacobian(&self, p: Point) -> Result<Matrix> {
        let j = self.jacobian(p)?;
        let det = j.determinant();
        if det.abs() <= EPS_JAC {
            return Err(Error::SingularJacobian { x: p.x, y: p.y, det });
        }
        Ok(j)
    }

    /// Preimage of `w`; uses the supplied inverse or Newton from `seed`
    /// (falling back to the map's own seed, then `w`).
    pub fn preimage(&self, w: Point, seed: Option<Point>) -> Result<Point> {
        if let Some(inv) = &self.inverse {
            let z = inv(w)?;
            if !z.x.is_finite() || !z.y.is_finite() {
                return Err(Error::NonFinite(format!(
                    "inverse of {} at ({}, {})",
                    self.label, w.x, w.y
                )));
            }
            return Ok(z);
        }
        self.newton_preimage(w, seed.or(self.seed).unwrap_or(w))
    }

    /// Damped Newton iteration for `self(z) = w`.
    pub fn newton_preimage(&self, w: Point, seed: Point) -> Result<Point> {
        let tol = NEWTON_TOL * w.norm().max(1.0);
        let mut z = seed;
        let mut r = self.apply(z)? - w;
        for _ in 0..NEWTON_MAX_ITER {
            if r.norm() <= tol {
                return Ok(z);
            }
            let j = self.regular_jacobian(z)?;
            let step = j.lu().solve(&r).ok_or(Error::SingularJacobian {
                x: z.x,
                y: z.y,
                det: 0.0,
            })?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = z - lambda * step;
                if let Ok(fc) = self.apply(cand) {
                    let rc = fc - w;
                    if rc.norm() < r.norm() {
                        z = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r.norm() <= tol {
            Ok(z)
        } else {
            Err(Error::InverseFailed {
                x: w.x,
                y: w.y,
                residual: r.norm(),
            })
        }
    }

    /// The inverse map as a `Diffeo2`; forward becomes the inverse.
    pub fn inverse(&self) -> Diffeo2 {
        let fwd = self.clone();
        let back = self.clone();
        Diffeo2 {
            forward: Arc::new(move |w| fwd.preimage(w, None)),
            inverse: Some(Arc::new(move |z| back.apply(z))),
            source: self.target,
            target: self.source,
            seed: None,
            label: format!("inverse of {}", self.label),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Diffeo2) -> Diffeo2 {
        let outer = self.clone();
        let first = inner.clone();
        let mut out = Diffeo2::from_fn(format!("{} after {}", self.label, inner.label), move |p| {
            outer.apply(first.apply(p)?)
        })
        .with_spaces(inner.source, self.target);
        if self.inverse.is_some() && inner.inverse.is_some() {
            let outer = self.clone();
            let first = inner.clone();
            out = out.with_inverse(move |w| first.preimage(outer.preimage(w, None)?, None));
        }
        out
    }

    /// Largest `|self(inverse(w)) - w|` over `points`.
    pub fn inverse_error(&self, points: &[Point]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &w in points {
            let z = self.preimage(w, None)?;
            worst = worst.max((self.apply(z)? - w).norm());
        }
        Ok(worst)
    }
}

/// `Y(w) = J_d(d⁻¹ w) · X(d⁻¹ w)`, evaluated lazily at query points.
pub fn pushforward(x: &PlaneVectorField, d: &Diffeo2) -> PlaneVectorField {
    let (x, d) = (x.clone(), d.clone());
    let label = format!("pushforward of {} by {}", x.label, d.label);
    PlaneVectorField::from_fn(label, move |w| {
        let z = d.preimage(w, None)?;
        let j = d.regular_jacobian(z)?;
        Ok(j * x.eval(z)?)
    })
}

/// `max_s ‖J_d(s) X(s) − Z(d(s))‖`.
pub fn conjugacy_residual(x: &PlaneVectorField, z: &PlaneVectorField, d: &Diffeo2, samples: &[Point]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &s in samples {
        let lhs = d.jacobian(s)? * x.eval(s)?;
        let rhs = z.eval(d.apply(s)?)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// The field conjugate to the constant field `(a, b)` through `ψ`:
/// `P = (a g_y − b f_y)/J`, `Q = (b f_x − a g_x)/J`.
pub fn example_field(psi: &Diffeo2, a: f64, b: f64) -> Result<PlaneVectorField> {
    if a == 0.0 && b == 0.0 {
        return Err(Error::InvalidParameter("(a, b) must not be (0, 0)".into()));
    }
    let d = psi.clone();
    let label = format!("example({}, {a:?}, {b:?})", psi.label);
    Ok(PlaneVectorField::from_fn(label, move |p| {
        let j = d.regular_jacobian(p)?;
        let (fx, fy, gx, gy) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
        let det = fx * gy - fy * gx;
        Ok(Point::new((a * gy - b * fy) / det, (b * fx - a * gx) / det))
    }))
}

/// Uniform `n × n` grid of points covering `[x0, x1] × [y0, y1]`, row-major.
pub fn sample_grid(x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> Vec<Point> {
    let n = n.max(2);
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
        for i in 0..n {
            let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
            out.push(Point::new(x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_mat(m: Matrix, expected: [[f64; 2]; 2], eps: f64) {
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(m[(r, c)], expected[r][c], epsilon = eps);
            }
        }
    }

    #[test]
    fn jacobian_examples() {
        let id = Diffeo2::identity();
        assert_mat(
            id.jacobian(Point::new(3.7, -2.0)).unwrap(),
            [[1.0, 0.0], [0.0, 1.0]],
            1e-8,
        );
        let sq = Diffeo2::parse("(x^2, y)").unwrap();
        assert_mat(
            sq.jacobian(Point::new(3.0, 1.0)).unwrap(),
            [[6.0, 0.0], [0.0, 1.0]],
            1e-6,
        );
        let bad = Diffeo2::parse("(1/x, y)").unwrap();
        assert!(matches!(bad.jacobian(Point::new(0.0, 0.0)), Err(Error::Eval(_))));
    }

    #[test]
    fn singular_jacobian_is_rejected() {
        let fold = Diffeo2::parse("(x^2, y)").unwrap();
        assert!(matches!(
            fold.regular_jacobian(Point::new(0.0, 1.0)),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let x = PlaneVectorField::constant(0.3, -1.2);
        let y = pushforward(&x, &Diffeo2::identity());
        let v = y.eval(Point::new(5.0, 7.0)).unwrap();
        assert_abs_diff_eq!(v.x, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(v.y, -1.2, epsilon = 1e-9);

        // chain rule by hand: w = (2, 2), d⁻¹ w = (1, 1), J = 2I, X(1, 1) = (1, 1)
        let dbl = Diffeo2::linear(Matrix::new(2.0, 0.0, 0.0, 2.0)).unwrap();
        let y = pushforward(&PlaneVectorField::radial(), &dbl);
        let v = y.eval(Point::new(2.0, 2.0)).unwrap();
        assert_abs_diff_eq!(v.x, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v.y, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn pushforward_through_newton_inverse() {
        let d = Diffeo2::parse("(x + 0.2*sin(y), y + 0.1*x^2)").unwrap();
        let x = PlaneVectorField::rotation();
        let y = pushforward(&x, &d);
        let z = Point::new(0.4, -0.3);
        let w = d.apply(z).unwrap();
        let expect = d.jacobian(z).unwrap() * x.eval(z).unwrap();
        let got = y.eval(w).unwrap();
        assert!((got - expect).norm() < 1e-8);
    }

    #[test]
    fn newton_failure_is_reported() {
        let d = Diffeo2::parse("(exp(x), y)").unwrap();
        assert!(d.preimage(Point::new(-1.0, 0.0), None).is_err());
    }

    #[test]
    fn conjugacy_examples() {
        let grid = sample_grid(-1.0, 1.0, -1.0, 1.0, 9);
        let c = PlaneVectorField::constant(1.0, 0.0);
        assert!(conjugacy_residual(&c, &c, &Diffeo2::identity(), &grid).unwrap() < 1e-9);
        let rot = PlaneVectorField::parse("(y, -x)").unwrap();
        assert!(conjugacy_residual(&rot, &c, &Diffeo2::identity(), &grid).unwrap() > 0.5);
    }

    #[test]
    fn example_field_examples() {
        let x = example_field(&Diffeo2::identity(), 0.7, -0.4).unwrap();
        let v = x.eval(Point::new(1.3, 2.0)).unwrap();
        assert_abs_diff_eq!(v.x, 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(v.y, -0.4, epsilon = 1e-9);

        // J = 2, P = (2·1 − 3·0)/2 = 1, Q = (3·2 − 2·0)/2 = 3
        let psi = Diffeo2::parse("(2*x, y)").unwrap();
        let x = example_field(&psi, 2.0, 3.0).unwrap();
        let v = x.eval(Point::new(0.25, 0.75)).unwrap();
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v.y, 3.0, epsilon = 1e-8);

        assert!(example_field(&psi, 0.0, 0.0).is_err());
        let fold = Diffeo2::parse("(x^2, y)").unwrap();
        let x = example_field(&fold, 1.0, 1.0).unwrap();
        assert!(matches!(
            x.eval(Point::new(0.0, 0.5)),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn example_field_is_conjugate_to_constant() {
        let grid = sample_grid(0.0, 1.0, 0.0, 1.0, 17);
        for src in ["(x + 0.3*sin(y), y + 0.2*cos(x))", "(exp(x)*cos(y), exp(x)*sin(y))"] {
            let psi = Diffeo2::parse(src).unwrap();
            let x = example_field(&psi, 1.0, 2.0).unwrap();
            let z = PlaneVectorField::constant(1.0, 2.0);
            assert!(conjugacy_residual(&x, &z, &psi, &grid).unwrap() < 1e-6);
        }
    }

    #[test]
    fn scalar_partials() {
        let h = ScalarField2::parse("x^3*y + sin(y)").unwrap();
        let p = Point::new(1.5, 0.4);
        assert_abs_diff_eq!(h.dx(p).unwrap(), 3.0 * 1.5f64.powi(2) * 0.4, epsilon = 1e-8);
        assert_abs_diff_eq!(h.dy(p).unwrap(), 1.5f64.powi(3) + 0.4f64.cos(), epsilon = 1e-8);
        // halving the step barely moves a smooth derivative
        let x = 2.0;
        let f = |x: f64| x.sin() * x.exp();
        let cd = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let (h1, h2) = (1e-3, 5e-4);
        assert!((cd(h1) - cd(h2)).abs() < 10.0 * h1 * h1 * f(x).abs().max(1.0) * 10.0);
    }

    #[test]
    fn field_zero_is_detected() {
        let r = PlaneVectorField::radial();
        assert!(matches!(r.eval_regular(Point::zeros()), Err(Error::ZeroOfField { .. })));
        assert!(r.eval_regular(Point::new(1.0, 0.0)).is_ok());
    }

    #[test]
    fn compose_and_inverse() {
        let a = Diffeo2::linear(Matrix::new(1.0, 2.0, 0.0, 1.0)).unwrap();
        let b = Diffeo2::linear(Matrix::new(3.0, 0.0, 1.0, 1.0)).unwrap();
        let ab = a.compose(&b);
        assert!(ab.has_inverse());
        let pts = sample_grid(-2.0, 2.0, -2.0, 2.0, 5);
        assert!(ab.inverse_error(&pts).unwrap() < EPS_INV);
        let n = Diffeo2::parse("(x + 0.1*y^3, y + 0.2*sin(x))").unwrap();
        assert!(n.inverse_error(&pts).unwrap() < EPS_INV);
    }

    fn smooth_map(c: [f64; 4]) -> Diffeo2 {
        Diffeo2::from_fn("smooth", move |p| {
            Ok(Point::new(
                p.x + c[0] * (p.y).sin() + c[1] * p.x * p.y,
                p.y + c[2] * (p.x).cos() + c[3] * p.y * p.y,
            ))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn chain_rule(
            c1 in proptest::array::uniform4(-0.4f64..0.4),
            c2 in proptest::array::uniform4(-0.4f64..0.4),
            x in -1.0f64..1.0, y in -1.0f64..1.0,
        ) {
            let (d1, d2) = (smooth_map(c1), smooth_map(c2));
            let p = Point::new(x, y);
            let lhs = d2.compose(&d1).jacobian(p).unwrap();
            let rhs = d2.jacobian(d1.apply(p).unwrap()).unwrap() * d1.jacobian(p).unwrap();
            prop_assert!((lhs - rhs).abs().max() < 1e-5);
        }

        #[test]
        fn pushforward_round_trip(
            c in proptest::array::uniform4(-0.3f64..0.3),
            x in -0.8f64..0.8, y in -0.8f64..0.8,
        ) {
            let d = smooth_map(c);
            let field = PlaneVectorField::parse("(1 + y^2, x - 0.5)").unwrap();
            let back = pushforward(&pushforward(&field, &d), &d.inverse());
            let p = Point::new(x, y);
            let got = back.eval(p).unwrap();
            let want = field.eval(p).unwrap();
            prop_assert!((got - want).norm() < 1e-5, "{got:?} vs {want:?}");
        }
    }
}
