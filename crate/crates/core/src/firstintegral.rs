//! First integrals from a uniformizing map.
//!
//! If `dψ · X = (a, b)` for `ψ = (f, g)`, then `h` with gradient
//! `(b f_x − a g_x, b f_y − a g_y)` satisfies `X(h) = 0`. The gradient is
//! integrated on a rectangular grid along axis-aligned paths after checking
//! that its mixed partials agree.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Diffeo2, PlaneVectorField, ScalarField2};
use crate::Point;

pub const EPS_CURL: f64 = 1e-5;
/// Relative outer step for second derivatives (curl of a gradient field).
pub const SECOND_REL_STEP: f64 = 1e-4;
pub const RK4_STEP: f64 = 1e-3;

/// `H(u, v) = b u − a v`, a first integral of the constant torus field `(a, b)`.
pub fn torus_first_integral(a: f64, b: f64) -> Result<ScalarField2> {
    if a == 0.0 && b == 0.0 {
        return Err(Error::InvalidParameter("(a, b) must not be (0, 0)".into()));
    }
    Ok(ScalarField2::from_fn(format!("{b:?}*u - {a:?}*v"), move |p| {
        Ok(b * p.x - a * p.y)
    }))
}

/// Which Jacobian entries feed the gradient system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientConvention {
    /// `h_x = b f_x − a g_x`, `h_y = b f_y − a g_y`; pairs with `dψ · X = (a, b)`.
    #[default]
    Standard,
    /// `h_x = b f_x − a f_y`, `h_y = b g_x − a g_y`; the transposed pairing.
    Transposed,
}

/// Prescribed gradient `(gx, gy)` of the first integral.
#[derive(Debug, Clone)]
pub struct GradientSpec {
    pub gx: ScalarField2,
    pub gy: ScalarField2,
    pub a: f64,
    pub b: f64,
    pub convention: GradientConvention,
}

impl GradientSpec {
    pub fn new(psi: &Diffeo2, a: f64, b: f64) -> Result<Self> {
        Self::with_convention(psi, a, b, GradientConvention::Standard)
    }

    pub fn with_convention(psi: &Diffeo2, a: f64, b: f64, convention: GradientConvention) -> Result<Self> {
        if a == 0.0 && b == 0.0 {
            return Err(Error::InvalidParameter("(a, b) must not be (0, 0)".into()));
        }
        let (d1, d2) = (psi.clone(), psi.clone());
        // j = [[f_x, f_y], [g_x, g_y]]
        let (gx, gy) = match convention {
            GradientConvention::Standard => (
                ScalarField2::from_fn("b f_x - a g_x", move |p| {
                    let j = d1.jacobian(p)?;
                    Ok(b * j[(0, 0)] - a * j[(1, 0)])
                }),
                ScalarField2::from_fn("b f_y - a g_y", move |p| {
                    let j = d2.jacobian(p)?;
                    Ok(b * j[(0, 1)] - a * j[(1, 1)])
                }),
            ),
            GradientConvention::Transposed => (
                ScalarField2::from_fn("b f_x - a f_y", move |p| {
                    let j = d1.jacobian(p)?;
                    Ok(b * j[(0, 0)] - a * j[(0, 1)])
                }),
                ScalarField2::from_fn("b g_x - a g_y", move |p| {
                    let j = d2.jacobian(p)?;
                    Ok(b * j[(1, 0)] - a * j[(1, 1)])
                }),
            ),
        };
        Ok(GradientSpec {
            gx,
            gy,
            a,
            b,
            convention,
        })
    }

    /// Builds a spec from explicit gradient components.
    pub fn from_components(gx: ScalarField2, gy: ScalarField2) -> Self {
        GradientSpec {
            gx,
            gy,
            a: f64::NAN,
            b: f64::NAN,
            convention: GradientConvention::Standard,
        }
    }

    /// `∂y(gx) − ∂x(gy)` at `p`.
    pub fn curl(&self, p: Point) -> Result<f64> {
        let hx = SECOND_REL_STEP * p.x.abs().max(1.0);
        let hy = SECOND_REL_STEP * p.y.abs().max(1.0);
        let ey = Point::new(0.0, hy);
        let ex = Point::new(hx, 0.0);
        let dgx_dy = (self.gx.value(p + ey)? - self.gx.value(p - ey)?) / (2.0 * hy);
        let dgy_dx = (self.gy.value(p + ex)? - self.gy.value(p - ex)?) / (2.0 * hx);
        Ok(dgx_dy - dgy_dx)
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let all = [x0, x1, y0, y1];
        if all.iter().any(|v| !v.is_finite()) || !(x1 > x0) || !(y1 > y0) {
            return Err(Error::InvalidParameter(format!(
                "domain [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Rect {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    /// Parses `"x0,x1,y0,y1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("domain `{s}`: {e}")))?;
        match parts.as_slice() {
            &[x0, x1, y0, y1] => Self::new(x0, x1, y0, y1),
            _ => Err(Error::InvalidParameter(format!(
                "domain `{s}` must have four comma-separated numbers"
            ))),
        }
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be at least 2".into()));
    }
    Ok(())
}

/// Max `|∂y(gx) − ∂x(gy)|` over the `(resolution + 1)²` grid nodes.
pub fn check_integrability(spec: &GradientSpec, domain: &Rect, resolution: usize) -> Result<f64> {
    check_resolution(resolution)?;
    let n = resolution + 1;
    let dx = (domain.x1 - domain.x0) / resolution as f64;
    let dy = (domain.y1 - domain.y0) / resolution as f64;
    let worst = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p = Point::new(domain.x0 + dx * (k % n) as f64, domain.y0 + dy * (k / n) as f64);
            spec.curl(p).map(f64::abs)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst)
}

/// A first integral sampled on a grid, `values[j * nx + i] = h(x_i, y_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct FirstIntegralGrid {
    pub domain: Rect,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub anchor: (usize, usize),
    /// Largest difference between row-first and column-first integration.
    pub path_disagreement: f64,
    pub integrability_residual: f64,
}

impl FirstIntegralGrid {
    pub fn dx(&self) -> f64 {
        (self.domain.x1 - self.domain.x0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.domain.y1 - self.domain.y0) / (self.ny - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.domain.x0 + self.dx() * i as f64,
            self.domain.y0 + self.dy() * j as f64,
        )
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear interpolation; `None` outside the domain.
    pub fn value_at(&self, p: Point) -> Option<f64> {
        if !self.domain.contains(p) {
            return None;
        }
        let fx = (p.x - self.domain.x0) / self.dx();
        let fy = (p.y - self.domain.y0) / self.dy();
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (s, t) = (fx - i as f64, fy - j as f64);
        Some(
            (1.0 - s) * (1.0 - t) * self.value(i, j)
                + s * (1.0 - t) * self.value(i + 1, j)
                + (1.0 - s) * t * self.value(i, j + 1)
                + s * t * self.value(i + 1, j + 1),
        )
    }

    /// Central-difference gradient at an interior node.
    pub fn gradient(&self, i: usize, j: usize) -> Point {
        Point::new(
            (self.value(i + 1, j) - self.value(i - 1, j)) / (2.0 * self.dx()),
            (self.value(i, j + 1) - self.value(i, j - 1)) / (2.0 * self.dy()),
        )
    }

    /// `x,y,h` rows with a header, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,h\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p.x, p.y, self.value(i, j));
            }
        }
        out
    }

    /// Builds a grid from a closed-form function, anchored at node `anchor`.
    pub fn from_fn<F>(domain: Rect, resolution: usize, anchor: (usize, usize), h: F) -> Result<Self>
    where
        F: Fn(Point) -> Result<f64>,
    {
        check_resolution(resolution)?;
        let n = resolution + 1;
        let mut grid = FirstIntegralGrid {
            domain,
            nx: n,
            ny: n,
            values: vec![0.0; n * n],
            anchor,
            path_disagreement: 0.0,
            integrability_residual: 0.0,
        };
        let base = h(grid.node(anchor.0, anchor.1))?;
        for j in 0..n {
            for i in 0..n {
                grid.values[j * n + i] = h(grid.node(i, j))? - base;
            }
        }
        Ok(grid)
    }
}

/// Cumulative composite-Simpson integral along one grid line, zero at `start`.
/// `nodes` has `m + 1` entries, `mids` the `m` interval midpoints.
fn cumulative(nodes: &[f64], mids: &[f64], step: f64, start: usize) -> Vec<f64> {
    let seg = |i: usize| step / 6.0 * (nodes[i] + 4.0 * mids[i] + nodes[i + 1]);
    let mut out = vec![0.0; nodes.len()];
    for i in start + 1..nodes.len() {
        out[i] = out[i - 1] + seg(i - 1);
    }
    for i in (0..start).rev() {
        out[i] = out[i + 1] - seg(i);
    }
    out
}

/// Integrates `(gx, gy)` from the grid node nearest `anchor`.
///
/// Each node gets the average of the row-then-column and column-then-row path
/// integrals. Refuses when the curl exceeds `EPS_CURL` or the two paths
/// disagree by more than `10 · EPS_CURL · diameter`.
pub fn build_first_integral(
    spec: &GradientSpec,
    domain: &Rect,
    resolution: usize,
    anchor: Point,
) -> Result<FirstIntegralGrid> {
    let residual = check_integrability(spec, domain, resolution)?;
    if residual > EPS_CURL {
        return Err(Error::NotIntegrable {
            residual,
            tol: EPS_CURL,
        });
    }
    let m = resolution;
    let n = m + 1;
    let dx = (domain.x1 - domain.x0) / m as f64;
    let dy = (domain.y1 - domain.y0) / m as f64;
    let xs = |i: f64| domain.x0 + dx * i;
    let ys = |j: f64| domain.y0 + dy * j;
    let clamp = |v: f64| (v.round().max(0.0) as usize).min(m);
    let ia = clamp((anchor.x - domain.x0) / dx);
    let ja = clamp((anchor.y - domain.y0) / dy);

    // rows[j][i] = ∫ gx along row j from x_ia to x_i
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = ys(j as f64);
            let nodes = (0..n)
                .map(|i| spec.gx.value(Point::new(xs(i as f64), y)))
                .collect::<Result<Vec<_>>>()?;
            let mids = (0..m)
                .map(|i| spec.gx.value(Point::new(xs(i as f64 + 0.5), y)))
                .collect::<Result<Vec<_>>>()?;
            Ok(cumulative(&nodes, &mids, dx, ia))
        })
        .collect::<Result<_>>()?;
    // cols[i][j] = ∫ gy along column i from y_ja to y_j
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = xs(i as f64);
            let nodes = (0..n)
                .map(|j| spec.gy.value(Point::new(x, ys(j as f64))))
                .collect::<Result<Vec<_>>>()?;
            let mids = (0..m)
                .map(|j| spec.gy.value(Point::new(x, ys(j as f64 + 0.5))))
                .collect::<Result<Vec<_>>>()?;
            Ok(cumulative(&nodes, &mids, dy, ja))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; n * n];
    let mut disagreement: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let row_first = rows[ja][i] + cols[i][j];
            let col_first = cols[ia][j] + rows[j][i];
            disagreement = disagreement.max((row_first - col_first).abs());
            values[j * n + i] = 0.5 * (row_first + col_first);
        }
    }
    let tol = 10.0 * EPS_CURL * domain.diameter();
    if disagreement > tol {
        return Err(Error::PathDependent { disagreement, tol });
    }
    Ok(FirstIntegralGrid {
        domain: *domain,
        nx: n,
        ny: n,
        values,
        anchor: (ia, ja),
        path_disagreement: disagreement,
        integrability_residual: residual,
    })
}

/// Max `|P h_x + Q h_y|` over interior nodes, `h` differentiated on the grid.
pub fn residual_x_of_h(field: &PlaneVectorField, h: &FirstIntegralGrid) -> Result<f64> {
    let rows: Vec<f64> = (1..h.ny - 1)
        .into_par_iter()
        .map(|j| {
            let mut worst: f64 = 0.0;
            for i in 1..h.nx - 1 {
                let v = field.eval(h.node(i, j))?;
                worst = worst.max(v.dot(&h.gradient(i, j)).abs());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowDrift {
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Time actually integrated (shorter if the orbit left the domain).
    pub time: f64,
    pub drift: f64,
    /// `drift / time`.
    pub rate: f64,
    /// `|∇h|` at the interior node nearest `start`.
    pub gradient_scale: f64,
    /// `rate / gradient_scale`; bilinear lookups cost `O(dx² |h''|)` each,
    /// which this normalizes for steep `h`.
    pub relative_rate: f64,
}

fn rk4_step(field: &PlaneVectorField, z: Point, dt: f64) -> Result<Point> {
    let k1 = field.eval(z)?;
    let k2 = field.eval(z + 0.5 * dt * k1)?;
    let k3 = field.eval(z + 0.5 * dt * k2)?;
    let k4 = field.eval(z + dt * k3)?;
    Ok(z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Follows `ż = X(z)` by fixed-step RK4 for up to `time` and reports how much
/// the interpolated `h` changed.
pub fn level_set_drift(field: &PlaneVectorField, h: &FirstIntegralGrid, start: Point, time: f64) -> Result<FlowDrift> {
    let h0 = h
        .value_at(start)
        .ok_or_else(|| Error::InvalidParameter("flow start outside the grid".into()))?;
    let steps = (time / RK4_STEP).round() as usize;
    let mut z = start;
    let mut elapsed = 0.0;
    for _ in 0..steps {
        let next = rk4_step(field, z, RK4_STEP)?;
        if !h.domain.contains(next) {
            break;
        }
        z = next;
        elapsed += RK4_STEP;
    }
    if elapsed == 0.0 {
        return Err(Error::InvalidParameter("orbit leaves the grid immediately".into()));
    }
    let drift = (h.value_at(z).unwrap_or(h0) - h0).abs();
    let near = |v: f64, lo: f64, step: f64, n: usize| (((v - lo) / step).round().max(1.0) as usize).min(n - 2);
    let gradient_scale = h
        .gradient(
            near(start.x, h.domain.x0, h.dx(), h.nx),
            near(start.y, h.domain.y0, h.dy(), h.ny),
        )
        .norm();
    let rate = drift / elapsed;
    Ok(FlowDrift {
        start: [start.x, start.y],
        end: [z.x, z.y],
        time: elapsed,
        drift,
        rate,
        gradient_scale,
        relative_rate: if gradient_scale > 0.0 {
            rate / gradient_scale
        } else {
            rate
        },
    })
}
