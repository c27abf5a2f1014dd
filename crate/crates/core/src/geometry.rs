//! Points in the plane and on the flat torus, closed parametrized curves on
//! `[0, 2π]`, and the lap counts `(p, q)` of torus curves.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_pair, Expr};
use crate::Point;

pub const DEFAULT_SAMPLES: usize = 4096;
pub const EPS_CLOSE: f64 = 1e-9;
pub const EPS_REGULAR: f64 = 1e-12;
pub const EPS_SNAP: f64 = 1e-6;

/// Canonical point of `R² / (2πZ)²`, both coordinates in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusPoint {
    pub u: f64,
    pub v: f64,
}

impl TorusPoint {
    pub fn as_point(self) -> Point {
        Point::new(self.u, self.v)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid of a tiny negative number rounds up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `b - a` reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn wrap_torus(u: f64, v: f64) -> Result<TorusPoint> {
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite(format!("torus point ({u}, {v})")));
    }
    Ok(TorusPoint {
        u: wrap_angle(u),
        v: wrap_angle(v),
    })
}

/// Flat quotient metric: per-axis `min(|d|, 2π - |d|)`, combined Euclidean.
pub fn torus_distance(a: TorusPoint, b: TorusPoint) -> f64 {
    let du = angle_diff(a.u, b.u).abs();
    let dv = angle_diff(a.v, b.v).abs();
    du.hypot(dv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Plane,
    Torus,
}

type CurveFn = dyn Fn(f64) -> Result<Point> + Send + Sync;

/// Closed curve `t ↦ γ(t)` on `[0, 2π]`.
///
/// Torus curves are evaluated in lift coordinates; [`ParamCurve::torus_point`]
/// applies the identification.
#[derive(Clone)]
pub struct ParamCurve {
    eval: Arc<CurveFn>,
    space: Space,
    sample_count: usize,
    label: String,
}

impl fmt::Debug for ParamCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamCurve")
            .field("label", &self.label)
            .field("space", &self.space)
            .field("sample_count", &self.sample_count)
            .finish()
    }
}

impl ParamCurve {
    pub fn from_fn<F>(space: Space, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<Point> + Send + Sync + 'static,
    {
        ParamCurve {
            eval: Arc::new(f),
            space,
            sample_count: DEFAULT_SAMPLES,
            label: label.into(),
        }
    }

    pub fn from_exprs(space: Space, x: Expr, y: Expr) -> Self {
        let label = format!("({x}, {y})");
        Self::from_fn(space, label, move |t| {
            Ok(Point::new(x.eval((0.0, 0.0), t)?, y.eval((0.0, 0.0), t)?))
        })
    }

    /// Parses a component pair in `t`, e.g. `"(2*cos(t), 2*sin(t))"`.
    pub fn parse(source: &str, space: Space) -> Result<Self> {
        let (x, y) = parse_pair(source)?;
        Ok(Self::from_exprs(space, x, y))
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        Self::from_fn(Space::Plane, format!("circle(r={radius})"), move |t| {
            Ok(center + radius * Point::new(t.cos(), t.sin()))
        })
    }

    /// The straight torus line `t ↦ (pt + u0, qt + v0)`.
    pub fn torus_line(p: i64, q: i64, offset: Point) -> Self {
        let (pf, qf) = (p as f64, q as f64);
        Self::from_fn(Space::Torus, format!("line({p},{q})"), move |t| {
            Ok(Point::new(pf * t + offset.x, qf * t + offset.y))
        })
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.sample_count = n.max(4);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        let p = (self.eval)(t)?;
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::NonFinite(format!("curve value at t = {t}")));
        }
        Ok(p)
    }

    pub fn torus_point(&self, t: f64) -> Result<TorusPoint> {
        let p = self.eval(t)?;
        wrap_torus(p.x, p.y)
    }

    /// `sample_count` uniformly spaced samples on `[0, 2π)`.
    pub fn samples(&self) -> Result<Vec<Point>> {
        let n = self.sample_count;
        (0..n)
            .into_par_iter()
            .map(|k| self.eval(TAU * k as f64 / n as f64))
            .collect()
    }

    /// `t ↦ γ(2π - t)`.
    pub fn reversed(&self) -> Self {
        let inner = self.eval.clone();
        ParamCurve {
            eval: Arc::new(move |t| inner(TAU - t)),
            space: self.space,
            sample_count: self.sample_count,
            label: format!("reverse {}", self.label),
        }
    }

    /// `t ↦ γ(t + s)`; for closed curves this is the same curve started at `γ(s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let inner = self.eval.clone();
        ParamCurve {
            eval: Arc::new(move |t| inner((t + s).rem_euclid(TAU))),
            space: self.space,
            sample_count: self.sample_count,
            label: format!("shift({s}) {}", self.label),
        }
    }

    /// Image of the curve under a plane map, as a plane curve.
    pub fn mapped<F>(&self, f: F) -> Self
    where
        F: Fn(Point) -> Result<Point> + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        ParamCurve {
            eval: Arc::new(move |t| f(inner(t)?)),
            space: Space::Plane,
            sample_count: self.sample_count,
            label: format!("image of {}", self.label),
        }
    }

    fn gap(&self, a: Point, b: Point) -> Result<f64> {
        Ok(match self.space {
            Space::Plane => (b - a).norm(),
            Space::Torus => torus_distance(wrap_torus(a.x, a.y)?, wrap_torus(b.x, b.y)?),
        })
    }

    pub fn closure_gap(&self) -> Result<f64> {
        self.gap(self.eval(0.0)?, self.eval(TAU)?)
    }

    pub fn check_closed(&self, tol: f64) -> Result<()> {
        let gap = self.closure_gap()?;
        if gap < tol {
            Ok(())
        } else {
            Err(Error::NotClosed { gap, tol })
        }
    }

    /// Central-difference tangent norm at every sample must exceed `tol`.
    pub fn check_regular(&self, tol: f64) -> Result<()> {
        let n = self.sample_count;
        let dt = 1e-6;
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let a = self.eval(t - dt)?;
            let b = self.eval(t + dt)?;
            let d = match self.space {
                Space::Plane => b - a,
                Space::Torus => Point::new(angle_diff(a.x, b.x), angle_diff(a.y, b.y)),
            };
            let norm = d.norm() / (2.0 * dt);
            if !(norm > tol) {
                return Err(Error::Irregular { t, norm });
            }
        }
        Ok(())
    }
}

/// Lap counts of a closed torus curve around the two circle factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveType {
    pub p: i64,
    pub q: i64,
}

impl CurveType {
    pub fn is_essential(self) -> bool {
        (self.p, self.q) != (0, 0)
    }
}

impl fmt::Display for CurveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Lift the wrapped samples continuously and count whole laps of the
/// displacement. The residual against a whole lap must stay below `EPS_SNAP`.
pub fn curve_type(curve: &ParamCurve) -> Result<CurveType> {
    if curve.space() != Space::Torus {
        return Err(Error::MismatchedTargets);
    }
    let n = curve.sample_count();
    let pts: Vec<TorusPoint> = (0..=n)
        .into_par_iter()
        .map(|k| curve.torus_point(TAU * k as f64 / n as f64))
        .collect::<Result<_>>()?;
    let (mut du, mut dv) = (0.0, 0.0);
    for w in pts.windows(2) {
        du += angle_diff(w[0].u, w[1].u);
        dv += angle_diff(w[0].v, w[1].v);
    }
    let p = (du / TAU).round();
    let q = (dv / TAU).round();
    let residual = (du - TAU * p).abs().max((dv - TAU * q).abs());
    if residual >= EPS_SNAP {
        return Err(Error::LapResidual { residual });
    }
    Ok(CurveType {
        p: p as i64,
        q: q as i64,
    })
}

/// Minimum sampled point distance between two curves on the same space.
///
/// Torus curves use the flat quotient metric. The value is exact up to the
/// sampling resolution of both curves.
pub fn curve_distance(a: &ParamCurve, b: &ParamCurve) -> Result<f64> {
    if a.space() != b.space() {
        return Err(Error::MismatchedTargets);
    }
    let sa = a.samples()?;
    let sb = b.samples()?;
    let space = a.space();
    let dist = move |x: &Point, y: &Point| match space {
        Space::Plane => (x - y).norm(),
        Space::Torus => angle_diff(x.x, y.x).hypot(angle_diff(x.y, y.y)),
    };
    // closest sample pair, then a local pattern search in (s, u)
    let (d0, i, j) = sa
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            sb.iter()
                .enumerate()
                .map(|(j, y)| (dist(x, y), i, j))
                .fold((f64::INFINITY, 0, 0), |m, c| if c.0 < m.0 { c } else { m })
        })
        .reduce(
            || (f64::INFINITY, 0, 0),
            |m, c| {
                if c.0 < m.0 || (c.0 == m.0 && (c.1, c.2) < (m.1, m.2)) {
                    c
                } else {
                    m
                }
            },
        );
    if d0 == 0.0 {
        return Ok(0.0);
    }
    let (ha, hb) = (TAU / sa.len() as f64, TAU / sb.len() as f64);
    let (mut s, mut u, mut best) = (i as f64 * ha, j as f64 * hb, d0);
    let (mut ds, mut du) = (ha, hb);
    for _ in 0..60 {
        let mut moved = false;
        for (ks, ku) in [
            (-1.0, 0.0),
            (1.0, 0.0),
            (0.0, -1.0),
            (0.0, 1.0),
            (-1.0, -1.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (1.0, -1.0),
        ] {
            let (s1, u1) = (s + ks * ds, u + ku * du);
            let d = dist(&a.eval(s1.rem_euclid(TAU))?, &b.eval(u1.rem_euclid(TAU))?);
            if d < best {
                (s, u, best, moved) = (s1, u1, d, true);
            }
        }
        if !moved {
            ds *= 0.5;
            du *= 0.5;
        }
    }
    Ok(best)
}
