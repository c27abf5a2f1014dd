//! The annulus chart of the torus cut along a `(p, q)` line.
//!
//! `Γ(t) = (pt, qt)` and `Γ₀(t) = (pt + 1/2, qt + 1/2)` are parallel torus
//! lines. The map `φ = σ ∘ τ ∘ ρ` sends the lift of the torus minus `Γ₀` onto
//! an annulus around the origin:
//!
//! * `ρ(x, y) = (1/H) (px + qy, −qx + py)` with `H = p² + q²`, so `ρ ∘ Γ = (t, 0)`;
//! * `τ(x, y) = (x, y + 2π)`;
//! * `σ(x, y) = (y cos x, y sin x)`.
//!
//! All maps act on lift coordinates; wrapping to the torus is the caller's
//! business. [`phi_closed_form`] keeps the expanded formula
//! `(1/H)(py − qx + 2π)(cos(px + qy), sin(px + qy))`, which does not agree with
//! the composition once `H > 1`; it is exposed for comparison only.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{fd_step, Diffeo2, PlaneVectorField};
use crate::geometry::{curve_distance, curve_type, CurveType, ParamCurve, Space};
use crate::index::{index_along, index_along_quadrature, IndexOptions, IndexReport, IndexResult, ORACLE_TOL};
use crate::Point;

fn check_pq(p: i64, q: i64) -> Result<f64> {
    if p == 0 && q == 0 {
        return Err(Error::InvalidParameter("(p, q) must not be (0, 0)".into()));
    }
    Ok((p * p + q * q) as f64)
}

/// `(1/(p² + q²)) [[p, q], [−q, p]] · point`.
pub fn rho(p: i64, q: i64, point: Point) -> Result<Point> {
    let h = check_pq(p, q)?;
    let (p, q) = (p as f64, q as f64);
    Ok(Point::new(p * point.x + q * point.y, -q * point.x + p * point.y) / h)
}

pub fn rho_inverse(p: i64, q: i64, point: Point) -> Result<Point> {
    check_pq(p, q)?;
    let (p, q) = (p as f64, q as f64);
    Ok(Point::new(p * point.x - q * point.y, q * point.x + p * point.y))
}

pub fn tau(point: Point) -> Point {
    Point::new(point.x, point.y + TAU)
}

pub fn tau_inverse(point: Point) -> Point {
    Point::new(point.x, point.y - TAU)
}

pub fn sigma(point: Point) -> Point {
    Point::new(point.y * point.x.cos(), point.y * point.x.sin())
}

/// Inverse of `σ` on `y > 0`, angle in `(−π, π]`.
pub fn sigma_inverse(w: Point) -> Result<Point> {
    let r = w.norm();
    if !(r > 0.0) {
        return Err(Error::OutsideStrip {
            x: w.x,
            y: w.y,
            radius: r,
        });
    }
    Ok(Point::new(w.y.atan2(w.x), r))
}

/// `σ(τ(ρ(point)))`; the radius factor `(py − qx)/H + 2π` must be positive.
pub fn phi(p: i64, q: i64, point: Point) -> Result<Point> {
    let r = tau(rho(p, q, point)?);
    if !(r.y > 0.0) {
        return Err(Error::OutsideStrip {
            x: point.x,
            y: point.y,
            radius: r.y,
        });
    }
    Ok(sigma(r))
}

/// The expanded formula `(1/H)(py − qx + 2π)(cos(px + qy), sin(px + qy))`.
pub fn phi_closed_form(p: i64, q: i64, point: Point) -> Result<Point> {
    let h = check_pq(p, q)?;
    let (pf, qf) = (p as f64, q as f64);
    let radius = pf * point.y - qf * point.x + TAU;
    if !(radius > 0.0) {
        return Err(Error::OutsideStrip {
            x: point.x,
            y: point.y,
            radius,
        });
    }
    let angle = pf * point.x + qf * point.y;
    Ok(Point::new(radius * angle.cos(), radius * angle.sin()) / h)
}

/// `φ` as a map with closed-form inverse `ρ⁻¹ ∘ τ⁻¹ ∘ σ⁻¹`.
pub fn phi_diffeo(p: i64, q: i64) -> Result<Diffeo2> {
    check_pq(p, q)?;
    Ok(Diffeo2::from_fn(format!("phi({p},{q})"), move |z| phi(p, q, z))
        .with_inverse(move |w| rho_inverse(p, q, tau_inverse(sigma_inverse(w)?)))
        .with_spaces(Space::Torus, Space::Plane))
}

/// `∂φ/∂x` at a lift point, by central differences.
pub fn phi_partial_x(p: i64, q: i64, point: Point) -> Result<Point> {
    let h = fd_step(point.x);
    let e = Point::new(h, 0.0);
    Ok((phi(p, q, point + e)? - phi(p, q, point - e)?) / (2.0 * h))
}

fn closed_form_partial_x(p: i64, q: i64, point: Point) -> Result<Point> {
    let h = fd_step(point.x);
    let e = Point::new(h, 0.0);
    Ok((phi_closed_form(p, q, point + e)? - phi_closed_form(p, q, point - e)?) / (2.0 * h))
}

/// `dφ(∂/∂x) ∘ φ⁻¹`, the image of the constant field `∂/∂x` in the annulus.
pub fn theorem_field(p: i64, q: i64) -> Result<PlaneVectorField> {
    let d = phi_diffeo(p, q)?;
    Ok(crate::field::pushforward(&PlaneVectorField::constant(1.0, 0.0), &d)
        .with_label(format!("theorem-pushforward({p},{q})")))
}

/// The curves and map of the construction for one type `(p, q)`.
#[derive(Debug, Clone)]
pub struct TorusUniformization {
    pub p: i64,
    pub q: i64,
    /// `p² + q²`.
    pub h: f64,
    pub gamma: ParamCurve,
    pub gamma0: ParamCurve,
    pub phi: Diffeo2,
}

impl TorusUniformization {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        let h = check_pq(p, q)?;
        Ok(TorusUniformization {
            p,
            q,
            h,
            gamma: ParamCurve::torus_line(p, q, Point::zeros()).with_label("gamma"),
            gamma0: ParamCurve::torus_line(p, q, Point::new(0.5, 0.5)).with_label("gamma0"),
            phi: phi_diffeo(p, q)?,
        })
    }

    /// `φ ∘ Γ` evaluated on the lift `(pt, qt)`.
    pub fn image_of_gamma(&self) -> ParamCurve {
        let (p, q) = (self.p, self.q);
        self.gamma
            .mapped(move |z| phi(p, q, z))
            .with_label(format!("phi o gamma ({p},{q})"))
    }

    /// Largest deviation of sampled `φ ∘ Γ` from `(2π/H)(cos Ht, sin Ht)`.
    pub fn image_deviation<F>(&self, map: F, samples: usize) -> Result<f64>
    where
        F: Fn(i64, i64, Point) -> Result<Point>,
    {
        let mut worst: f64 = 0.0;
        for k in 0..=samples {
            let t = TAU * k as f64 / samples as f64;
            let lift = Point::new(self.p as f64 * t, self.q as f64 * t);
            let got = map(self.p, self.q, lift)?;
            let want = Point::new((self.h * t).cos(), (self.h * t).sin()) * (TAU / self.h);
            worst = worst.max((got - want).norm());
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub p: i64,
    pub q: i64,
    pub h: f64,
    pub quadrature: IndexResult,
    pub unwrap: IndexResult,
    pub oracle_delta: f64,
    pub gamma_type: CurveType,
    pub gamma0_type: CurveType,
    /// Sampled distance between `Γ` and `Γ₀` on the torus.
    pub gamma_distance: f64,
    pub disjoint: bool,
    /// Index obtained when the expanded closed form replaces `φ`.
    pub closed_form_index: i64,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.quadrature.snapped == 1 && self.unwrap.snapped == 1
    }
}

/// Disjointness threshold for the sampled curve distance.
pub const DISJOINT_TOL: f64 = 1e-3;

/// Coarse samples per curve before the distance is refined locally.
const DISTANCE_SAMPLES: usize = 512;

/// Index of `dφ ∘ ∂/∂x ∘ φ⁻¹` along `φ ∘ Γ`, by quadrature and by unwrapping.
///
/// Along `φ ∘ Γ` the pushed field equals `∂φ/∂x` evaluated on `Γ`, so both
/// routes sample that vector directly.
pub fn theorem_check(p: i64, q: i64, opts: &IndexOptions) -> Result<TheoremReport> {
    let u = TorusUniformization::new(p, q)?;
    let (pf, qf) = (p as f64, q as f64);
    let on_gamma = |t: f64| Point::new(pf * t, qf * t);
    let IndexReport {
        quadrature,
        unwrap,
        oracle_delta,
    } = index_along(|t| phi_partial_x(p, q, on_gamma(t)), opts)?;
    if oracle_delta >= ORACLE_TOL {
        return Err(Error::OracleDisagreement {
            quadrature: quadrature.raw,
            unwrap: unwrap.raw,
            delta: oracle_delta,
        });
    }
    let closed_form = index_along_quadrature(|t| closed_form_partial_x(p, q, on_gamma(t)), opts)?;
    let gamma_distance = curve_distance(
        &u.gamma.clone().with_samples(DISTANCE_SAMPLES),
        &u.gamma0.clone().with_samples(DISTANCE_SAMPLES),
    )?;
    Ok(TheoremReport {
        p,
        q,
        h: u.h,
        quadrature,
        unwrap,
        oracle_delta,
        gamma_type: curve_type(&u.gamma)?,
        gamma0_type: curve_type(&u.gamma0)?,
        gamma_distance,
        disjoint: gamma_distance > DISJOINT_TOL,
        closed_form_index: closed_form.snapped,
    })
}

/// Runs [`theorem_check`] for each pair in parallel; output keeps input order.
pub fn theorem_sweep(pairs: &[(i64, i64)], opts: &IndexOptions) -> Vec<Result<TheoremReport>> {
    pairs.par_iter().map(|&(p, q)| theorem_check(p, q, opts)).collect()
}

pub const SWEEP_PAIRS: [(i64, i64); 8] = [(1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (1, 2), (3, 2), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoronaReport {
    pub rmin: f64,
    pub rmax: f64,
    /// Radius of `φ ∘ Γ`.
    pub gamma_radius: f64,
    /// Radii of the two copies of `Γ₀` bounding the strip.
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// `Γ₀` coincides with `Γ` (happens when `p = q`).
    pub degenerate: bool,
}

/// Radii of `φ` over a grid on the fundamental strip of the torus cut along `Γ₀`.
///
/// In `ρ` coordinates the lifts of `Γ₀` are horizontal lines spaced `2π/H`
/// apart; the strip is the band between the two copies enclosing `Γ`.
pub fn corona_image_check(p: i64, q: i64, grid: usize) -> Result<CoronaReport> {
    let h = check_pq(p, q)?;
    let grid = grid.max(2);
    let spacing = TAU / h;
    let mut top = ((p - q) as f64 / (2.0 * h)).rem_euclid(spacing);
    let degenerate = top < 1e-12 || spacing - top < 1e-12;
    if degenerate {
        top = spacing;
    }
    let bottom = top - spacing;
    let radii: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % grid, k / grid);
            let xr = TAU * i as f64 / (grid - 1) as f64;
            let yr = bottom + spacing * j as f64 / (grid - 1) as f64;
            let lift = rho_inverse(p, q, Point::new(xr, yr))?;
            Ok(phi(p, q, lift)?.norm())
        })
        .collect::<Result<_>>()?;
    let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    if !(rmin > 0.0) {
        return Err(Error::OutsideStrip {
            x: f64::NAN,
            y: f64::NAN,
            radius: rmin,
        });
    }
    Ok(CoronaReport {
        rmin,
        rmax,
        gamma_radius: phi(p, q, Point::zeros())?.norm(),
        inner_radius: TAU + bottom,
        outer_radius: TAU + top,
        degenerate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub curves: Vec<String>,
    pub indices: Vec<IndexReport>,
    /// Every curve has index 1 by both routes.
    pub condition_holds: bool,
}

/// Index of `field` along each curve; the necessary condition for a torus
/// uniformization through an annulus chart is index 1 on every curve.
pub fn corollary_check(
    field: &PlaneVectorField,
    curves: &[ParamCurve],
    opts: &IndexOptions,
) -> Result<CorollaryReport> {
    let indices = curves
        .iter()
        .map(|c| crate::index::index_report(field, c, opts))
        .collect::<Result<Vec<_>>>()?;
    let condition_holds = indices
        .iter()
        .all(|r| r.quadrature.snapped == 1 && r.unwrap.snapped == 1);
    Ok(CorollaryReport {
        curves: curves.iter().map(|c| c.label().to_string()).collect(),
        indices,
        condition_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn close(a: Point, b: Point, eps: f64) {
        assert!((a - b).norm() < eps, "{a:?} vs {b:?}");
    }

    #[test]
    fn rho_examples() {
        close(
            rho(1, 0, Point::new(0.3, -2.0)).unwrap(),
            Point::new(0.3, -2.0),
            0.0 + 1e-15,
        );
        for &(p, q) in &SWEEP_PAIRS {
            let end = Point::new(TAU * p as f64, TAU * q as f64);
            close(rho(p, q, end).unwrap(), Point::new(TAU, 0.0), 1e-12);
        }
        close(rho(0, 1, Point::new(0.0, TAU)).unwrap(), Point::new(TAU, 0.0), 1e-15);
        assert!(rho(0, 0, Point::zeros()).is_err());
    }

    #[test]
    fn rho_inverse_round_trip() {
        let z = Point::new(0.7, -1.9);
        for &(p, q) in &SWEEP_PAIRS {
            close(rho_inverse(p, q, rho(p, q, z).unwrap()).unwrap(), z, 1e-12);
        }
    }

    #[test]
    fn tau_examples() {
        close(tau(Point::zeros()), Point::new(0.0, TAU), 0.0 + 1e-15);
        close(tau(Point::new(1.0, -TAU)), Point::new(1.0, 0.0), 1e-15);
        let z = Point::new(-3.3, 8.1);
        close(tau(tau_inverse(z)), z, 1e-15);
    }

    #[test]
    fn sigma_examples() {
        close(sigma(Point::new(0.0, TAU)), Point::new(TAU, 0.0), 1e-15);
        close(sigma(Point::new(PI / 2.0, 1.0)), Point::new(0.0, 1.0), 1e-12);
        for &(x, y) in &[(0.3, -2.0), (5.0, 0.1), (-1.0, 3.0)] {
            assert_abs_diff_eq!(sigma(Point::new(x, y)).norm(), f64::abs(y), epsilon = 1e-14);
        }
        assert!(sigma_inverse(Point::zeros()).is_err());
    }

    #[test]
    fn phi_examples() {
        // (1, 0): ρ = id, so φ(t, 0) = 2π (cos t, sin t)
        for &t in &[0.0, 0.4, 2.0, 5.5] {
            let w = phi(1, 0, Point::new(t, 0.0)).unwrap();
            close(w, Point::new(TAU * t.cos(), TAU * t.sin()), 1e-12);
        }
        // composed map sends the origin to σ(0, 2π)
        close(phi(1, 1, Point::zeros()).unwrap(), Point::new(TAU, 0.0), 1e-12);
        assert!(matches!(
            phi(1, 0, Point::new(0.0, -7.0)),
            Err(Error::OutsideStrip { .. })
        ));
        assert!(phi(0, 0, Point::zeros()).is_err());
    }

    #[test]
    fn closed_form_examples() {
        close(
            phi_closed_form(1, 1, Point::zeros()).unwrap(),
            Point::new(PI, 0.0),
            1e-12,
        );
        // on Γ: py − qx = 0 and px + qy = Ht
        for &(p, q) in &SWEEP_PAIRS {
            let u = TorusUniformization::new(p, q).unwrap();
            assert!(u.image_deviation(phi_closed_form, 256).unwrap() < 1e-9);
        }
        // the two agree only when H = 1
        let z = Point::new(0.3, 0.2);
        close(phi_closed_form(1, 0, z).unwrap(), phi(1, 0, z).unwrap(), 1e-12);
        close(phi_closed_form(0, 1, z).unwrap(), phi(0, 1, z).unwrap(), 1e-12);
        assert!((phi_closed_form(2, 1, z).unwrap() - phi(2, 1, z).unwrap()).norm() > 0.1);
    }

    #[test]
    fn phi_is_the_composition() {
        for &(p, q) in &SWEEP_PAIRS {
            for &(x, y) in &[(0.0, 0.0), (0.5, 0.1), (-0.3, 0.2), (3.0, 2.0)] {
                let z = Point::new(x, y);
                let direct = phi(p, q, z).unwrap();
                let composed = sigma(tau(rho(p, q, z).unwrap()));
                close(direct, composed, 1e-9);
            }
        }
    }

    #[test]
    fn image_of_gamma_is_circle_of_radius_tau() {
        for &(p, q) in &SWEEP_PAIRS {
            let u = TorusUniformization::new(p, q).unwrap();
            let c = u.image_of_gamma();
            for k in 0..32 {
                let t = TAU * k as f64 / 32.0;
                let w = c.eval(t).unwrap();
                close(w, Point::new(t.cos(), t.sin()) * TAU, 1e-9);
            }
        }
    }

    #[test]
    fn phi_inverse() {
        let d = phi_diffeo(2, 3).unwrap();
        let z = Point::new(0.1, 0.2);
        let w = d.apply(z).unwrap();
        let back = d.preimage(w, None).unwrap();
        // same torus point up to a lattice translation
        let diff = (back - z) / TAU;
        assert!((diff.x - diff.x.round()).abs() < 1e-12);
        assert!((diff.y - diff.y.round()).abs() < 1e-12);
        close(d.apply(back).unwrap(), w, 1e-12);
    }

    #[test]
    fn theorem_holds_for_unit_types() {
        for &(p, q) in &[(1, 0), (0, 1)] {
            let r = theorem_check(p, q, &IndexOptions::default()).unwrap();
            assert_eq!(r.quadrature.snapped, 1);
            assert!(r.quadrature.snap_residual < 1e-6);
            assert!(r.oracle_delta < 1e-6);
            assert_eq!(r.closed_form_index, 1);
            assert!(r.disjoint);
        }
    }

    #[test]
    fn theorem_rejects_zero_type() {
        assert!(matches!(
            theorem_check(0, 0, &IndexOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn closed_form_winds_h_times() {
        let r = theorem_check(2, 1, &IndexOptions::default()).unwrap();
        assert_eq!(r.quadrature.snapped, 1);
        assert_eq!(r.closed_form_index, 5);
    }

    #[test]
    fn gamma0_meets_gamma_when_p_equals_q() {
        let u = TorusUniformization::new(1, 1).unwrap();
        assert!(curve_distance(&u.gamma, &u.gamma0).unwrap() < 1e-9);
        let u = TorusUniformization::new(-1, 1).unwrap();
        assert!(curve_distance(&u.gamma, &u.gamma0).unwrap() > 0.3);
    }

    #[test]
    fn corona_for_unit_type() {
        let r = corona_image_check(1, 0, 64).unwrap();
        assert!(r.rmin > 0.0 && r.rmax < 2.0 * TAU);
        assert!(r.rmin < r.gamma_radius && r.gamma_radius < r.rmax);
        assert_abs_diff_eq!(r.gamma_radius, TAU, epsilon = 1e-12);
        // Γ₀ sits at height 1/2 in ρ coordinates; the strip is [1/2 − 2π, 1/2]
        assert_abs_diff_eq!(r.outer_radius, TAU + 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.inner_radius, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rmin, r.inner_radius, epsilon = 1e-9);
        assert_abs_diff_eq!(r.rmax, r.outer_radius, epsilon = 1e-9);
        assert!(!r.degenerate);
    }

    #[test]
    fn corona_for_all_types() {
        for &(p, q) in &SWEEP_PAIRS {
            let r = corona_image_check(p, q, 48).unwrap();
            assert!(0.0 < r.rmin && r.rmin < r.rmax && r.rmax.is_finite());
            assert_eq!(r.degenerate, p == q);
        }
        assert!(corona_image_check(0, 0, 8).is_err());
    }

    #[test]
    fn theorem_field_along_image() {
        let u = TorusUniformization::new(1, 0).unwrap();
        let y = theorem_field(1, 0).unwrap();
        let c = u.image_of_gamma();
        for k in 0..16 {
            let t = TAU * k as f64 / 16.0;
            let via_push = y.eval(c.eval(t).unwrap()).unwrap();
            let direct = phi_partial_x(1, 0, Point::new(t, 0.0)).unwrap();
            close(via_push, direct, 1e-6);
        }
    }
}
