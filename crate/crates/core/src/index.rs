//! Winding index of a vector field along a closed plane curve.
//!
//! Two independent routes:
//!
//! * [`index_quadrature`] integrates `det(V, V') / ‖V‖²` over `[0, 2π]` with
//!   composite Simpson on uniform panels, `V(t) = X(γ(t))` and `V'` from a
//!   periodic fourth-order central stencil on the same grid.
//! * [`index_unwrap`] follows `atan2(Q, P)` along a dense grid and counts the
//!   accumulated angle.
//!
//! Both double their grid until successive levels agree to `tol`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{PlaneVectorField, EPS_ZERO};
use crate::geometry::{angle_diff, ParamCurve, Space};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexOptions {
    /// Convergence threshold between successive grid levels.
    pub tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
    /// Residuals at or above this are reported as suspicious.
    pub snap_tol: f64,
    /// Residuals above this are errors.
    pub error_tol: f64,
    pub zero_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            tol: 1e-9,
            min_panels: 64,
            max_panels: 1 << 20,
            snap_tol: 1e-3,
            error_tol: 1e-1,
            zero_tol: EPS_ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexStatus {
    Valid,
    Suspicious,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexResult {
    /// Value before rounding; `2π · raw` is the total change of angle.
    pub raw: f64,
    pub snapped: i64,
    pub snap_residual: f64,
    pub panels: usize,
    pub min_field_norm: f64,
    pub status: IndexStatus,
}

impl IndexResult {
    fn snap(raw: f64, panels: usize, min_field_norm: f64, opts: &IndexOptions) -> Result<Self> {
        let snapped = raw.round();
        let snap_residual = (raw - snapped).abs();
        if snap_residual > opts.error_tol {
            return Err(Error::NotInteger {
                raw,
                residual: snap_residual,
            });
        }
        let status = if snap_residual < opts.snap_tol {
            IndexStatus::Valid
        } else {
            IndexStatus::Suspicious
        };
        Ok(IndexResult {
            raw,
            snapped: snapped as i64,
            snap_residual,
            panels,
            min_field_norm,
            status,
        })
    }

    pub fn is_valid(&self) -> bool {
        self.status == IndexStatus::Valid
    }
}

/// Evaluates `v` at `t_k = 2πk/n` for the given `k`, in order.
fn sample<V>(v: &V, n: usize, ks: impl IndexedParallelIterator<Item = usize>) -> Result<Vec<Point>>
where
    V: Fn(f64) -> Result<Point> + Sync,
{
    ks.map(|k| v(TAU * k as f64 / n as f64)).collect()
}

fn min_norm(values: &[Point], n: usize, zero_tol: f64) -> Result<f64> {
    let (k, norm) = values
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.norm()))
        .fold((0, f64::INFINITY), |acc, it| if it.1 < acc.1 { it } else { acc });
    if norm <= zero_tol {
        // location in parameter space; the caller knows the curve
        return Err(Error::ZeroOfField {
            x: TAU * k as f64 / n as f64,
            y: f64::NAN,
            norm,
        });
    }
    Ok(norm)
}

/// Doubles the periodic grid `values` (length n) by sampling the odd points.
fn refine<V>(v: &V, values: &[Point]) -> Result<Vec<Point>>
where
    V: Fn(f64) -> Result<Point> + Sync,
{
    let n = values.len();
    let odd = sample(v, 2 * n, (0..n).into_par_iter().map(|k| 2 * k + 1))?;
    let mut out = Vec::with_capacity(2 * n);
    for (even, odd) in values.iter().zip(odd) {
        out.push(*even);
        out.push(odd);
    }
    Ok(out)
}

fn simpson_winding(values: &[Point]) -> f64 {
    let n = values.len();
    let h = TAU / n as f64;
    let at = |k: isize| values[k.rem_euclid(n as isize) as usize];
    let mut sum = 0.0;
    for k in 0..n as isize {
        let d = (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * h);
        let v = at(k);
        let integrand = (v.x * d.y - v.y * d.x) / v.norm_squared();
        let w = if k % 2 == 0 { 2.0 } else { 4.0 };
        sum += w * integrand;
    }
    sum * h / 3.0 / TAU
}

/// Quadrature index of the vector function `t ↦ v(t)` on the closed interval
/// `[0, 2π]`, `v(2π) = v(0)` assumed.
pub fn index_along_quadrature<V>(v: V, opts: &IndexOptions) -> Result<IndexResult>
where
    V: Fn(f64) -> Result<Point> + Sync,
{
    let mut n = opts.min_panels.max(8).next_power_of_two();
    let mut values = sample(&v, n, (0..n).into_par_iter())?;
    let mut norm = min_norm(&values, n, opts.zero_tol)?;
    let mut raw = simpson_winding(&values);
    loop {
        if 2 * n > opts.max_panels {
            return Err(Error::NonConvergence {
                what: "index quadrature",
                panels: n,
                delta: f64::NAN,
            });
        }
        values = refine(&v, &values)?;
        n *= 2;
        norm = norm.min(min_norm(&values, n, opts.zero_tol)?);
        let next = simpson_winding(&values);
        let delta = (next - raw).abs();
        raw = next;
        if delta < opts.tol {
            return IndexResult::snap(raw, n, norm, opts);
        }
        if 2 * n > opts.max_panels {
            return Err(Error::NonConvergence {
                what: "index quadrature",
                panels: n,
                delta,
            });
        }
    }
}

fn unwrap_level(values: &[Point]) -> (f64, f64) {
    let mut total = 0.0;
    let mut max_jump: f64 = 0.0;
    for w in values.windows(2) {
        let d = angle_diff(w[0].y.atan2(w[0].x), w[1].y.atan2(w[1].x));
        max_jump = max_jump.max(d.abs());
        total += d;
    }
    (total / TAU, max_jump)
}

/// Angle-unwrapping index of `t ↦ v(t)`; samples include both `t = 0` and `t = 2π`.
pub fn index_along_unwrap<V>(v: V, opts: &IndexOptions) -> Result<IndexResult>
where
    V: Fn(f64) -> Result<Point> + Sync,
{
    let mut n = opts.min_panels.max(8).next_power_of_two();
    let mut values = sample(&v, n, (0..n + 1).into_par_iter())?;
    let mut norm = min_norm(&values, n, opts.zero_tol)?;
    let (mut raw, _) = unwrap_level(&values);
    loop {
        let mut twice = refine(&v, &values[..n])?;
        twice.push(values[n]);
        values = twice;
        n *= 2;
        norm = norm.min(min_norm(&values, n, opts.zero_tol)?);
        let (next, next_jump) = unwrap_level(&values);
        let delta = (next - raw).abs();
        raw = next;
        if next_jump < FRAC_PI_2 && delta < opts.tol {
            return IndexResult::snap(raw, n, norm, opts);
        }
        if 2 * n > opts.max_panels {
            return Err(if next_jump >= FRAC_PI_2 {
                Error::AngleJump {
                    jump: next_jump,
                    panels: n,
                }
            } else {
                Error::NonConvergence {
                    what: "angle unwrapping",
                    panels: n,
                    delta,
                }
            });
        }
    }
}

fn plane_curve(curve: &ParamCurve) -> Result<()> {
    if curve.space() != Space::Plane {
        return Err(Error::MismatchedTargets);
    }
    Ok(())
}

fn locate(err: Error, curve: &ParamCurve) -> Error {
    match err {
        Error::ZeroOfField { x: t, norm, .. } => match curve.eval(t) {
            Ok(p) => Error::ZeroOfField { x: p.x, y: p.y, norm },
            Err(e) => e,
        },
        other => other,
    }
}

pub fn index_quadrature(field: &PlaneVectorField, curve: &ParamCurve, opts: &IndexOptions) -> Result<IndexResult> {
    plane_curve(curve)?;
    index_along_quadrature(|t| field.eval(curve.eval(t)?), opts).map_err(|e| locate(e, curve))
}

pub fn index_unwrap(field: &PlaneVectorField, curve: &ParamCurve, opts: &IndexOptions) -> Result<IndexResult> {
    plane_curve(curve)?;
    index_along_unwrap(|t| field.eval(curve.eval(t)?), opts).map_err(|e| locate(e, curve))
}

/// Both routes side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexReport {
    pub quadrature: IndexResult,
    pub unwrap: IndexResult,
    pub oracle_delta: f64,
}

impl IndexReport {
    pub fn agrees(&self, tol: f64) -> bool {
        self.oracle_delta < tol && self.quadrature.snapped == self.unwrap.snapped
    }
}

pub const ORACLE_TOL: f64 = 1e-6;

/// Runs both routes on `t ↦ v(t)`.
pub fn index_along<V>(v: V, opts: &IndexOptions) -> Result<IndexReport>
where
    V: Fn(f64) -> Result<Point> + Sync,
{
    let quadrature = index_along_quadrature(&v, opts)?;
    let unwrap = index_along_unwrap(&v, opts)?;
    Ok(IndexReport {
        quadrature,
        unwrap,
        oracle_delta: (quadrature.raw - unwrap.raw).abs(),
    })
}

pub fn index_report(field: &PlaneVectorField, curve: &ParamCurve, opts: &IndexOptions) -> Result<IndexReport> {
    plane_curve(curve)?;
    index_along(|t| field.eval(curve.eval(t)?), opts).map_err(|e| locate(e, curve))
}
