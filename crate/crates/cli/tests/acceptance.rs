//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p torind-cli --test acceptance`.
//! Criterion 4 cannot hold together with criterion 1 when H = p² + q² > 1
//! (see README, "Known deviations"); its line still reads FAIL and the run only
//! stays green while that failure has exactly the analysed shape.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torind_core::field::{conjugacy_residual, example_field, sample_grid, Diffeo2, PlaneVectorField};
use torind_core::firstintegral::{
    build_first_integral, level_set_drift, residual_x_of_h, FirstIntegralGrid, GradientSpec, Rect, EPS_CURL,
};
use torind_core::geometry::{ParamCurve, Space};
use torind_core::index::{index_report, IndexOptions, IndexReport};
use torind_core::uniformization::{phi, phi_closed_form, theorem_sweep, TorusUniformization, SWEEP_PAIRS};
use torind_core::Point;

struct Line {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, title: &'static str, run: impl FnOnce() -> Result<(bool, String), String>) -> Line {
    let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
    Line {
        id,
        title,
        pass,
        detail,
    }
}

fn opts() -> IndexOptions {
    IndexOptions::default()
}

fn index(field: &PlaneVectorField, curve: &ParamCurve) -> Result<IndexReport, String> {
    index_report(field, curve, &opts()).map_err(|e| e.to_string())
}

fn check_index(r: &IndexReport, want: i64) -> bool {
    r.quadrature.snapped == want
        && r.unwrap.snapped == want
        && r.quadrature.snap_residual < 1e-6
        && r.unwrap.snap_residual < 1e-6
        && r.oracle_delta < 1e-6
}

fn ac1() -> Result<(bool, String), String> {
    let start = Instant::now();
    let reports = theorem_sweep(&SWEEP_PAIRS, &opts());
    let elapsed = start.elapsed().as_secs_f64();
    let mut ok = 0;
    let (mut worst_res, mut worst_delta): (f64, f64) = (0.0, 0.0);
    for r in reports {
        let r = r.map_err(|e| e.to_string())?;
        worst_res = worst_res.max(r.quadrature.snap_residual);
        worst_delta = worst_delta.max(r.oracle_delta);
        if r.holds() && r.quadrature.snap_residual < 1e-6 && r.oracle_delta < 1e-6 {
            ok += 1;
        }
    }
    Ok((
        ok == SWEEP_PAIRS.len() && elapsed < 10.0,
        format!(
            "{ok}/{} pairs snap to 1; max snap residual {worst_res:.1e}, max oracle delta {worst_delta:.1e}, {elapsed:.2} s",
            SWEEP_PAIRS.len()
        ),
    ))
}

/// Star-shaped curve around `c` with a few random harmonics.
fn random_jordan(rng: &mut ChaCha8Rng) -> ParamCurve {
    let c = Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let r0 = rng.random_range(0.5..2.0);
    let terms: Vec<(f64, f64, f64)> = (2..5)
        .map(|k| (k as f64, rng.random_range(-0.15..0.15), rng.random_range(0.0..TAU)))
        .collect();
    ParamCurve::from_fn(Space::Plane, "random jordan", move |t| {
        let r = r0 * (1.0 + terms.iter().map(|(k, a, ph)| a * (k * t + ph).cos()).sum::<f64>());
        Ok(c + r * Point::new(t.cos(), t.sin()))
    })
}

fn ac2() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(0.1..2.0));
        let r = index(&PlaneVectorField::constant(a, b), &random_jordan(&mut rng))?;
        worst = worst.max(r.quadrature.snap_residual).max(r.unwrap.snap_residual);
        ok += check_index(&r, 0) as usize;
    }
    Ok((
        ok == 20,
        format!("{ok}/20 curves give index 0; max residual {worst:.1e}"),
    ))
}

fn ac3() -> Result<(bool, String), String> {
    let circle = ParamCurve::circle(Point::new(0.2, -0.1), 1.3);
    let cases = [
        ("radial", PlaneVectorField::radial(), 1),
        ("rotation", PlaneVectorField::rotation(), 1),
        (
            "z^2",
            PlaneVectorField::parse("(x^2 - y^2, 2*x*y)").map_err(|e| e.to_string())?,
            2,
        ),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, f, want) in cases {
        let r = index(&f, &circle)?;
        pass &= check_index(&r, want);
        parts.push(format!(
            "{name} -> {} (delta {:.1e})",
            r.quadrature.snapped, r.oracle_delta
        ));
    }
    Ok((pass, parts.join(", ")))
}

/// Expected shape of the criterion-4 failure: exact for H = 1, off for H > 1.
fn ac4() -> Result<(bool, String), String> {
    let mut passing = Vec::new();
    let mut failing = Vec::new();
    let mut closed_form_worst: f64 = 0.0;
    for &(p, q) in &SWEEP_PAIRS {
        let u = TorusUniformization::new(p, q).map_err(|e| e.to_string())?;
        let dev = u.image_deviation(phi, 4096).map_err(|e| e.to_string())?;
        closed_form_worst = closed_form_worst.max(u.image_deviation(phi_closed_form, 4096).map_err(|e| e.to_string())?);
        if dev < 1e-9 {
            passing.push(format!("({p},{q})"));
        } else {
            failing.push(format!("({p},{q}) {dev:.2}"));
        }
    }
    Ok((
        failing.is_empty(),
        format!(
            "phi = sigma o tau o rho matches for [{}]; deviates for [{}]; expanded closed form deviates by {closed_form_worst:.1e}",
            passing.join(" "),
            failing.join(", ")
        ),
    ))
}

fn ac4_shape_is_expected() -> bool {
    SWEEP_PAIRS.iter().all(|&(p, q)| {
        let u = TorusUniformization::new(p, q).unwrap();
        let dev = u.image_deviation(phi, 4096).unwrap();
        let closed = u.image_deviation(phi_closed_form, 4096).unwrap();
        closed < 1e-9 && ((p * p + q * q == 1) == (dev < 1e-9))
    })
}

fn test_maps() -> Vec<(&'static str, Diffeo2)> {
    [
        "(x + 0.1*sin(y), y)",
        "(x + 0.2*y^2, y + 0.1*x)",
        "(exp(x) + 0.1*y, y + 0.2*sin(x))",
    ]
    .into_iter()
    .map(|s| (s, Diffeo2::parse(s).unwrap()))
    .collect()
}

fn ac5() -> Result<(bool, String), String> {
    let grid = sample_grid(0.0, 1.0, 0.0, 1.0, 33);
    let (a, b) = (0.7, -1.3);
    let mut worst: f64 = 0.0;
    for (_, psi) in test_maps() {
        let x = example_field(&psi, a, b).map_err(|e| e.to_string())?;
        let r = conjugacy_residual(&x, &PlaneVectorField::constant(a, b), &psi, &grid).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    Ok((
        worst < 1e-6,
        format!("3 maps, 33x33 grid, max conjugacy residual {worst:.1e}"),
    ))
}

fn ac6() -> Result<(bool, String), String> {
    let unit = Rect::unit();
    let spec = GradientSpec::new(&Diffeo2::identity(), 1.0, 2.0).map_err(|e| e.to_string())?;
    let h = build_first_integral(&spec, &unit, 64, Point::zeros()).map_err(|e| e.to_string())?;
    let mut id_err: f64 = 0.0;
    for j in 0..h.ny {
        for i in 0..h.nx {
            let p = h.node(i, j);
            id_err = id_err.max((h.value(i, j) - (2.0 * p.x - p.y)).abs());
        }
    }
    let (mut worst_res, mut worst_rate, mut worst_abs, mut used): (f64, f64, f64, usize) = (0.0, 0.0, 0.0, 0);
    for (_, psi) in test_maps() {
        let (a, b) = (1.0, 2.0);
        let spec = GradientSpec::new(&psi, a, b).map_err(|e| e.to_string())?;
        let h = build_first_integral(&spec, &unit, 128, Point::zeros()).map_err(|e| e.to_string())?;
        if h.integrability_residual >= EPS_CURL {
            continue;
        }
        used += 1;
        let x = example_field(&psi, a, b).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(residual_x_of_h(&x, &h).map_err(|e| e.to_string())?);
        for start in [Point::new(0.2, 0.2), Point::new(0.5, 0.5), Point::new(0.3, 0.7)] {
            let d = level_set_drift(&x, &h, start, 0.5).map_err(|e| e.to_string())?;
            worst_rate = worst_rate.max(d.relative_rate);
            worst_abs = worst_abs.max(d.rate);
        }
    }
    Ok((
        id_err < 1e-10 && used == 3 && worst_res < 1e-4 && worst_rate < 1e-4,
        format!(
            "identity |h - (2x - y)| {id_err:.1e}; {used}/3 integrable instances, max |X(h)| {worst_res:.1e}, max drift rate per unit gradient {worst_rate:.1e} (unnormalized {worst_abs:.1e})"
        ),
    ))
}

fn max_diff_on_coarse(fine: &FirstIntegralGrid, coarse: &FirstIntegralGrid) -> f64 {
    let step = (fine.nx - 1) / (coarse.nx - 1);
    let mut worst: f64 = 0.0;
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            worst = worst.max((fine.value(i * step, j * step) - coarse.value(i, j)).abs());
        }
    }
    worst
}

fn ac7() -> Result<(bool, String), String> {
    let e = |e: torind_core::Error| e.to_string();

    // homotopy: star-shaped curves around the zero of z^2
    let z2 = PlaneVectorField::parse("(x^2 - y^2, 2*x*y)").map_err(e)?;
    let mut indices = Vec::new();
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let curve = ParamCurve::from_fn(Space::Plane, "homotopy", move |t| {
            let r = 1.0 + s * 0.4 * (3.0 * t).cos();
            Ok(Point::new(0.3 * s, 0.2 * s) + r * Point::new(t.cos(), t.sin()))
        });
        let r = index(&z2, &curve)?;
        if !check_index(&r, 2) {
            return Ok((false, format!("homotopy step {k} gave {}", r.quadrature.snapped)));
        }
        indices.push(r.quadrature.snapped);
    }

    // anchor shift
    let psi = Diffeo2::parse("(x + 0.3*sin(3*y), y + 0.3*sin(3*x))").map_err(e)?;
    let spec = GradientSpec::new(&psi, 1.0, 2.0).map_err(e)?;
    let unit = Rect::unit();
    let h1 = build_first_integral(&spec, &unit, 64, Point::new(0.0, 0.0)).map_err(e)?;
    let h2 = build_first_integral(&spec, &unit, 64, Point::new(0.7, 0.4)).map_err(e)?;
    let diffs: Vec<f64> = h1.values.iter().zip(&h2.values).map(|(a, b)| a - b).collect();
    let spread =
        diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - diffs.iter().copied().fold(f64::INFINITY, f64::min);

    // Simpson order under grid doubling
    let grids = [8, 16, 32]
        .iter()
        .map(|&n| build_first_integral(&spec, &unit, n, Point::zeros()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let d1 = max_diff_on_coarse(&grids[1], &grids[0]);
    let d2 = max_diff_on_coarse(&grids[2], &grids[1]);
    let ratio = d1 / d2;

    // chain rule on random map pairs
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut chain: f64 = 0.0;
    for _ in 0..10 {
        let (a1, a2, a3, a4) = (
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
        );
        let outer = Diffeo2::from_fn("outer", move |p: Point| {
            Ok(Point::new(p.x + a1 * p.y.sin(), p.y + a2 * p.x * p.x))
        });
        let inner = Diffeo2::from_fn("inner", move |p: Point| {
            Ok(Point::new(p.x.exp() * (1.0 + a3 * p.y), p.y + a4 * p.x.cos()))
        });
        let composed = outer.compose(&inner);
        for _ in 0..5 {
            let p = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let lhs = composed.jacobian(p).map_err(e)?;
            let rhs = outer.jacobian(inner.apply(p).map_err(e)?).map_err(e)? * inner.jacobian(p).map_err(e)?;
            chain = chain.max((lhs - rhs).abs().max());
        }
    }
    Ok((
        spread < 1e-8 && ratio >= 8.0 && chain < 1e-5,
        format!(
            "homotopy indices {indices:?}; anchor spread {spread:.1e}; Simpson ratio {ratio:.1}; chain rule {chain:.1e}"
        ),
    ))
}

fn torind(args: &[&str], dir: &std::path::Path) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_torind"))
        .args(args)
        .env("TORIND_OUT_DIR", dir)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn ac8() -> Result<(bool, String), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let jobs: [&[&str]; 4] = [
        &[
            "index",
            "--field",
            "(x^2 - y^2, 2*x*y)",
            "--curve",
            "(cos(t), 2*sin(t))",
        ],
        &["theorem-check", "--sweep"],
        &[
            "first-integral",
            "--psi",
            "(x + 0.1*sin(y), y)",
            "--a",
            "1",
            "--b",
            "2",
            "--res",
            "32",
            "--csv",
            "h.csv",
            "--svg",
            "h.svg",
        ],
        &["plot", "--kind", "image", "--p", "2", "--q", "1", "--svg", "image.svg"],
    ];
    let mut checked = 0;
    for job in jobs {
        let (c1, j1) = torind(job, dir.path())?;
        let files1: Vec<Vec<u8>> = ["h.csv", "h.svg", "image.svg"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default())
            .collect();
        let (c2, j2) = torind(job, dir.path())?;
        let files2: Vec<Vec<u8>> = ["h.csv", "h.svg", "image.svg"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default())
            .collect();
        if c1 != 0 || c2 != 0 {
            return Ok((false, format!("`{}` exited with {c1}/{c2}", job[0])));
        }
        if j1 != j2 || files1 != files2 {
            return Ok((false, format!("`{}` output differs between runs", job[0])));
        }
        checked += 1;
    }
    Ok((
        checked == jobs.len(),
        format!("{checked} commands byte-identical across two runs (JSON, CSV, SVG)"),
    ))
}

fn main() {
    let lines = vec![
        line("AC1", "theorem reproduction", ac1),
        line("AC2", "constant-field index", ac2),
        line("AC3", "classical indices", ac3),
        line("AC4", "closed-form curve image", ac4),
        line("AC5", "example-family conjugacy", ac5),
        line("AC6", "first-integral pipeline", ac6),
        line("AC7", "property suites", ac7),
        line("AC8", "determinism", ac8),
    ];
    let mut unexpected = Vec::new();
    for l in &lines {
        println!(
            "{} {} {}: {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.title,
            l.detail
        );
        if !l.pass && !(l.id == "AC4" && ac4_shape_is_expected()) {
            unexpected.push(l.id);
        }
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("{passed}/{} criteria pass", lines.len());
    if !lines[3].pass && unexpected.is_empty() {
        println!("AC4 failure matches the known deviation (exact for H = 1 only)");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
