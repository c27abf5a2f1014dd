//! One function per subcommand. Each parses every input first, then computes.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use torind_core::field::{conjugacy_residual, example_field, pushforward, sample_grid};
use torind_core::firstintegral::{
    build_first_integral, level_set_drift, residual_x_of_h, FirstIntegralGrid, GradientConvention, GradientSpec, Rect,
};
use torind_core::geometry::{ParamCurve, Space, EPS_CLOSE, EPS_REGULAR};
use torind_core::index::index_report;
use torind_core::plot::{contour_figure, curve_figure, quiver_figure, sample_closed, Figure};
use torind_core::registry::{field_from_spec, map_from_spec};
use torind_core::uniformization::{
    corollary_check, phi, phi_closed_form, theorem_sweep, TorusUniformization, SWEEP_PAIRS,
};
use torind_core::{Error, Point};

use crate::config::*;
use crate::output::write_file;

/// First-integral claims are checked against this bound.
pub const FIRST_INTEGRAL_TOL: f64 = 1e-4;
const IMAGE_SAMPLES: usize = 1024;
const HAUSDORFF: &str = "the flow of X is Hausdorff (orbit space is Hausdorff); assumed, not checked";

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: "validation".into(),
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // a user curve that is open or singular is bad input, not a numerical failure
        let input = e.is_validation() || matches!(e, Error::NotClosed { .. } | Error::Irregular { .. });
        Failure {
            code: if input { 2 } else { 3 },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure::validation(message)
    }
}

/// Result document body plus whether the checked claim held.
pub struct Outcome {
    pub config: Value,
    pub result: Value,
    pub holds: bool,
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pair(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

fn parse_point(s: &str, what: &str) -> Result<Point, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
    if parts.len() != 2 || nums.len() != 2 || nums.iter().any(|v| !v.is_finite()) {
        return Err(Failure::validation(format!("{what} must be \"x,y\", got `{s}`")));
    }
    Ok(Point::new(nums[0], nums[1]))
}

fn parse_pairs(s: &str) -> Result<Vec<(i64, i64)>, Failure> {
    s.split(';')
        .map(|item| {
            let nums: Vec<Option<i64>> = item.split(',').map(|v| v.trim().parse().ok()).collect();
            match nums[..] {
                [Some(p), Some(q)] => Ok((p, q)),
                _ => Err(Failure::validation(format!(
                    "bad (p,q) pair `{item}`; expected \"p,q;p,q\""
                ))),
            }
        })
        .collect()
}

fn plane_curve(src: &str) -> Result<ParamCurve, Failure> {
    Ok(ParamCurve::parse(src, Space::Plane)?.with_label(src))
}

fn check_user_curve(c: &ParamCurve) -> Result<(), Failure> {
    c.check_closed(EPS_CLOSE)?;
    c.check_regular(EPS_REGULAR)?;
    Ok(())
}

fn grid_size(n: usize, name: &str, max: usize) -> Result<usize, Failure> {
    if n < 2 || n > max {
        return Err(Failure::validation(format!("{name} must be in 2..={max}, got {n}")));
    }
    Ok(n)
}

pub fn index(args: IndexArgs, file: &FileConfig, tol: &Tolerances) -> Result<Outcome, Failure> {
    let field_src = required(args.field.or(file.field.clone()), "field")?;
    let curve_src = required(args.curve.or(file.curve.clone()), "curve")?;
    let field = field_from_spec(&field_src)?;
    let curve = plane_curve(&curve_src)?;
    check_user_curve(&curve)?;

    let report = index_report(&field, &curve, &tol.index_options())?;
    if report.oracle_delta >= tol.oracle_tol {
        return Err(Error::OracleDisagreement {
            quadrature: report.quadrature.raw,
            unwrap: report.unwrap.raw,
            delta: report.oracle_delta,
        }
        .into());
    }
    Ok(Outcome {
        config: json!({ "field": field_src, "curve": curve_src, "tolerances": tol }),
        result: json!({
            "snapped": report.quadrature.snapped,
            "snap_residual": report.quadrature.snap_residual,
            "oracle_delta": report.oracle_delta,
            "status": report.quadrature.status,
            "quadrature": report.quadrature,
            "unwrap": report.unwrap,
        }),
        holds: true,
    })
}

pub fn theorem_check(args: TheoremArgs, file: &FileConfig, tol: &Tolerances) -> Result<Outcome, Failure> {
    let pairs: Vec<(i64, i64)> = if args.sweep || (args.pairs.is_none() && args.p.is_none() && file.sweep == Some(true))
    {
        SWEEP_PAIRS.to_vec()
    } else if let Some(s) = &args.pairs {
        parse_pairs(s)?
    } else if let (Some(list), None) = (&file.pairs, args.p) {
        list.clone()
    } else {
        let p = required(args.p.or(file.p), "p")?;
        let q = required(args.q.or(file.q), "q")?;
        vec![(p, q)]
    };
    if pairs.is_empty() {
        return Err(Failure::validation("no (p,q) pairs given"));
    }
    let setups = pairs
        .iter()
        .map(|&(p, q)| TorusUniformization::new(p, q))
        .collect::<Result<Vec<_>, _>>()?;

    let reports = theorem_sweep(&pairs, &tol.index_options());
    let mut cases = Vec::with_capacity(reports.len());
    let mut all_hold = true;
    for (report, u) in reports.into_iter().zip(&setups) {
        let report = report?;
        let holds = report.holds() && report.oracle_delta < tol.oracle_tol;
        all_hold &= holds;
        let mut case = value(&report);
        let obj = case.as_object_mut().expect("report is an object");
        obj.insert("holds".into(), json!(holds));
        obj.insert(
            "image_deviation".into(),
            json!({
                "phi": u.image_deviation(phi, IMAGE_SAMPLES)?,
                "closed_form": u.image_deviation(phi_closed_form, IMAGE_SAMPLES)?,
                "samples": IMAGE_SAMPLES,
            }),
        );
        cases.push(case);
    }
    Ok(Outcome {
        config: json!({ "pairs": pairs, "tolerances": tol }),
        result: json!({ "all_hold": all_hold, "cases": cases }),
        holds: all_hold,
    })
}

pub fn corollary_check_cmd(args: CorollaryArgs, file: &FileConfig, tol: &Tolerances) -> Result<Outcome, Failure> {
    let field_src = required(args.field.or(file.field.clone()), "field")?;
    let curve_srcs = if args.curve.is_empty() {
        file.curves
            .clone()
            .or(file.curve.clone().map(|c| vec![c]))
            .unwrap_or_default()
    } else {
        args.curve
    };
    if curve_srcs.is_empty() {
        return Err(Failure::validation("missing required parameter `curve`"));
    }
    let field = field_from_spec(&field_src)?;
    let curves = curve_srcs
        .iter()
        .map(|s| plane_curve(s))
        .collect::<Result<Vec<_>, _>>()?;
    for c in &curves {
        check_user_curve(c)?;
    }
    let report = corollary_check(&field, &curves, &tol.index_options())?;
    Ok(Outcome {
        config: json!({ "field": field_src, "curves": curve_srcs, "tolerances": tol }),
        // failing the necessary condition is an answer, not an error
        result: value(&report),
        holds: true,
    })
}

fn h_range(h: &FirstIntegralGrid) -> [f64; 2] {
    let lo = h.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = h.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [lo, hi]
}

pub fn first_integral(args: FirstIntegralArgs, file: &FileConfig, tol: &Tolerances) -> Result<Outcome, Failure> {
    let psi_src = required(args.psi.or(file.psi.clone()), "psi")?;
    let a = required(args.a.or(file.a), "a")?;
    let b = required(args.b.or(file.b), "b")?;
    let domain_src = args.domain.or(file.domain.clone()).unwrap_or_else(|| "0,1,0,1".into());
    let res = grid_size(args.res.or(file.res).unwrap_or(128), "res", 4096)?;
    let convention: GradientConvention = args
        .convention
        .or(file.convention)
        .unwrap_or(ConventionArg::Standard)
        .into();
    let flow_time = args.flow_time.or(file.flow_time).unwrap_or(0.5);
    let levels = args.levels.or(file.levels).unwrap_or(12);
    let csv = args.csv.or(file.csv.clone());
    let svg = args.svg.or(file.svg.clone());

    let psi = map_from_spec(&psi_src)?;
    let domain = Rect::parse(&domain_src)?;
    let anchor = match args.anchor {
        Some(s) => parse_point(&s, "anchor")?,
        None => file
            .anchor
            .map(|[x, y]| Point::new(x, y))
            .unwrap_or(Point::new(domain.x0, domain.y0)),
    };
    if !domain.contains(anchor) {
        return Err(Failure::validation(format!(
            "anchor ({}, {}) lies outside the domain",
            anchor.x, anchor.y
        )));
    }
    if !(flow_time > 0.0 && flow_time.is_finite()) {
        return Err(Failure::validation("flow_time must be positive"));
    }
    let spec = GradientSpec::with_convention(&psi, a, b, convention)?;
    let field = example_field(&psi, a, b)?;

    let h = build_first_integral(&spec, &domain, res, anchor)?;
    let residual = residual_x_of_h(&field, &h)?;
    let mut flows = Vec::new();
    for (fx, fy) in [(0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (0.25, 0.75), (0.75, 0.25)] {
        let start = Point::new(
            domain.x0 + fx * (domain.x1 - domain.x0),
            domain.y0 + fy * (domain.y1 - domain.y0),
        );
        flows.push(match level_set_drift(&field, &h, start, flow_time) {
            Ok(d) => value(&d),
            Err(e) => json!({ "start": pair(start), "error": e.to_string() }),
        });
    }
    let max_rate = flows
        .iter()
        .filter_map(|f| f.get("relative_rate").and_then(Value::as_f64))
        .fold(0.0, f64::max);
    let holds = residual < FIRST_INTEGRAL_TOL && max_rate < FIRST_INTEGRAL_TOL;

    let csv_path = csv.map(|p| write_file(&p, &h.to_csv())).transpose()?;
    let svg_path = svg
        .map(|p| {
            write_file(
                &p,
                &contour_figure(&h, levels, &format!("h for example({psi_src}, {a}, {b})")).to_svg(),
            )
        })
        .transpose()?;

    Ok(Outcome {
        config: json!({
            "psi": psi_src, "a": a, "b": b, "domain": domain, "res": res, "anchor": pair(anchor),
            "convention": convention, "flow_time": flow_time, "levels": levels,
            "csv": csv_path, "svg": svg_path, "first_integral_tol": FIRST_INTEGRAL_TOL, "tolerances": tol,
        }),
        result: json!({
            "holds": holds,
            "integrability_residual": h.integrability_residual,
            "path_disagreement": h.path_disagreement,
            "residual_x_of_h": residual,
            "max_relative_drift_rate": max_rate,
            "anchor_node": h.anchor,
            "grid": { "nx": h.nx, "ny": h.ny, "dx": h.dx(), "dy": h.dy() },
            "h_range": h_range(&h),
            "flow": flows,
            "assumptions": [HAUSDORFF],
        }),
        holds,
    })
}

pub fn pushforward_cmd(args: PushforwardArgs, file: &FileConfig, _tol: &Tolerances) -> Result<Outcome, Failure> {
    let field_src = required(args.field.or(file.field.clone()), "field")?;
    let map_src = required(args.map.or(file.map.clone()), "map")?;
    let target_src = args.target.or(file.target.clone());
    let domain_src = args.domain.or(file.domain.clone()).unwrap_or_else(|| "0,1,0,1".into());
    let n = grid_size(args.grid.or(file.grid).unwrap_or(5), "grid", 1024)?;

    let field = field_from_spec(&field_src)?;
    let map = map_from_spec(&map_src)?;
    let target = target_src.as_deref().map(field_from_spec).transpose()?;
    let domain = Rect::parse(&domain_src)?;

    let points = sample_grid(domain.x0, domain.x1, domain.y0, domain.y1, n);
    let pushed = pushforward(&field, &map);
    let mut samples = Vec::with_capacity(points.len());
    let mut inverse_gap: f64 = 0.0;
    for &z in &points {
        let w = map.apply(z)?;
        let direct = map.regular_jacobian(z)? * field.eval(z)?;
        // evaluating the pushed field at w goes through the inverse of the map
        let via_inverse = pushed.eval(w)?;
        inverse_gap = inverse_gap.max((via_inverse - direct).norm());
        samples.push(json!({ "source": pair(z), "image": pair(w), "value": pair(direct) }));
    }
    let residual = match &target {
        Some(t) => Some(conjugacy_residual(&field, t, &map, &points)?),
        None => None,
    };
    Ok(Outcome {
        config: json!({ "field": field_src, "map": map_src, "target": target_src, "domain": domain, "grid": n }),
        result: json!({ "conjugacy_residual": residual, "inverse_consistency": inverse_gap, "samples": samples }),
        holds: true,
    })
}

pub fn plot(args: PlotArgs, file: &FileConfig, _tol: &Tolerances) -> Result<Outcome, Failure> {
    let p = args.p.or(file.p);
    let q = args.q.or(file.q);
    let field_src = args.field.or(file.field.clone());
    let curve_srcs = if args.curve.is_empty() {
        file.curves
            .clone()
            .or(file.curve.clone().map(|c| vec![c]))
            .unwrap_or_default()
    } else {
        args.curve
    };
    let kind = args.kind.or(file.kind).unwrap_or(if p.is_some() {
        PlotKind::Image
    } else if field_src.is_some() {
        PlotKind::Quiver
    } else {
        PlotKind::Curves
    });
    let svg: PathBuf = args.svg.or(file.svg.clone()).unwrap_or_else(|| "plot.svg".into());
    let samples = grid_size(args.samples.or(file.samples).unwrap_or(512), "samples", 1 << 16)?;
    let map_src = args.map.or(file.map.clone());
    let domain_src = args
        .domain
        .or(file.domain.clone())
        .unwrap_or_else(|| "-1,1,-1,1".into());
    let grid = grid_size(args.grid.or(file.grid).unwrap_or(15), "grid", 200)?;

    let (fig, config): (Figure, Value) = match kind {
        PlotKind::Curves => {
            if curve_srcs.is_empty() {
                return Err(Failure::validation("missing required parameter `curve`"));
            }
            let map = map_src.as_deref().map(map_from_spec).transpose()?;
            let mut curves = curve_srcs
                .iter()
                .map(|s| plane_curve(s))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(m) = map {
                curves = curves
                    .into_iter()
                    .map(|c| {
                        let m = m.clone();
                        c.mapped(move |z| m.apply(z))
                    })
                    .collect();
            }
            let pts = curves
                .iter()
                .map(|c| sample_closed(c, samples))
                .collect::<Result<Vec<_>, _>>()?;
            let title = match &map_src {
                Some(m) => format!("curves under {m}"),
                None => "curves".into(),
            };
            (
                curve_figure(&pts, &title),
                json!({ "curves": curve_srcs, "map": map_src, "samples": samples }),
            )
        }
        PlotKind::Quiver => {
            let field_src = required(field_src, "field")?;
            let field = field_from_spec(&field_src)?;
            let domain = Rect::parse(&domain_src)?;
            (
                quiver_figure(&field, domain, grid, &field_src),
                json!({ "field": field_src, "domain": domain, "grid": grid }),
            )
        }
        PlotKind::Image => {
            let (p, q) = (required(p, "p")?, required(q, "q")?);
            let u = TorusUniformization::new(p, q)?;
            let image0 = u.gamma0.mapped(move |z| phi(p, q, z));
            let pts = vec![
                sample_closed(&u.image_of_gamma(), samples)?,
                sample_closed(&image0, samples)?,
            ];
            (
                curve_figure(&pts, &format!("phi o gamma and phi o gamma0, (p,q) = ({p},{q})")),
                json!({ "p": p, "q": q, "samples": samples }),
            )
        }
    };
    let text = fig.to_svg();
    let path = write_file(&svg, &text)?;
    let mut config = config;
    let obj = config.as_object_mut().expect("config is an object");
    obj.insert("kind".into(), value(&kind));
    obj.insert("svg".into(), value(&path));
    Ok(Outcome {
        config,
        result: json!({ "svg": path, "bytes": text.len() }),
        holds: true,
    })
}
