//! Acceptance gate: one PASS/FAIL line per criterion, with its runtime budget.

mod common;

use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::http::StatusCode;
use common::{mixed_requests, octagon, post, strip_timings, unit_circle, vcurve_body};
use faircurve_cli::service::router;
use faircurve_core::analytic::{build_schedule, sample_hermite, SampleSchedule, Superspiral, SuperspiralParams};
use faircurve_core::curve::{uniform_parameters, CurveGeometry};
use faircurve_core::fairing::{vcurve, FairingConfig, Polyline};
use faircurve_core::io::{decode_model, encode_model, read_dxf, write_dxf, EntityValue, ModelDocument, Units};
use faircurve_core::numerics::{gauss_2f1, integrate, ToleranceConfig};
use faircurve_core::nurbs::{
    bspline_from_hermite, curvature_profile, extract_segments, nurbzs_from_hermite, NurbsCurve, Topology,
};
use faircurve_core::quality::{bending_energy, curvature_extrema, curvature_variation, deviation, smoothness_order};
use faircurve_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn graded_table(params: SuperspiralParams) -> (Superspiral, faircurve_core::analytic::HermiteTable) {
    let sched = build_schedule(&SampleSchedule { n_points: 16, t0: 0.0, h_first: 0.1, h_last: 1.0 }).unwrap();
    let curve = Superspiral::new(params, (0.0, *sched.last().unwrap()), cfg()).unwrap();
    let table = sample_hermite(&curve, &sched, &cfg()).unwrap();
    (curve, table)
}

fn clothoid_equivalence() -> Outcome {
    let c = Superspiral::new(SuperspiralParams::clothoid(), (0.0, 3.0), cfg()).map_err(|e| e.to_string())?;
    let samples: Vec<(f64, f64)> = uniform_parameters((0.0, 3.0), 50)
        .into_iter()
        .map(|t| (c.arclength_at(t).unwrap(), c.curvature(t).unwrap()))
        .collect();
    let n = samples.len() as f64;
    let (ms, mk) = samples.iter().fold((0.0, 0.0), |(a, b), &(s, k)| (a + s / n, b + k / n));
    let sxy: f64 = samples.iter().map(|&(s, k)| (s - ms) * (k - mk)).sum();
    let sxx: f64 = samples.iter().map(|&(s, _)| (s - ms).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mk - slope * ms;
    let residual = samples.iter().map(|&(s, k)| (k - slope * s - intercept).abs()).fold(0.0, f64::max);
    ensure!(residual < 1e-8, "max residual {residual:e}");
    ensure!((slope - 0.5).abs() < 1e-8 && (intercept - 1.0).abs() < 1e-8, "fit {slope} s + {intercept}");
    Ok(format!("max residual {residual:.1e}, kappa = {slope:.10} s + {intercept:.10}"))
}

fn hypergeometric_identities() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=10 {
        for j in 1..=10 {
            for k in 0..10 {
                let (a, b, z) = (0.2 * i as f64, 0.2 * j as f64, -5.0 * k as f64 / 9.0);
                let f = gauss_2f1(a, b, b, z).map_err(|e| e.to_string())?;
                worst = worst.max((f - (1.0 - z).powf(-a)).abs());
            }
        }
    }
    ensure!(worst < 1e-12, "binomial identity error {worst:e}");
    let ln2 = gauss_2f1(1.0, 1.0, 2.0, -1.0).map_err(|e| e.to_string())?;
    ensure!((ln2 - LN_2).abs() < 1e-12, "2F1(1,1;2;-1) = {ln2}");
    Ok(format!("grid max error {worst:.1e}, ln 2 error {:.1e}", (ln2 - LN_2).abs()))
}

fn template_magnitude() -> Outcome {
    let (clothoid, table) = graded_table(SuperspiralParams::clothoid());
    let c = bspline_from_hermite(&table, 8).map_err(|e| e.to_string())?;
    let clipped = extract_segments(&c, 0, c.segment_count() - 3).map_err(|e| e.to_string())?;
    let (hi, lo) = deviation(&clipped, &clothoid, 1000).map_err(|e| e.to_string())?;
    ensure!(hi.abs() < 5e-3 && lo.abs() < 5e-3, "deviation max {hi:e} min {lo:e}");
    Ok(format!(
        "{} of {} segments kept, deviation max {hi:.3e} min {lo:.3e}",
        clipped.segment_count(),
        c.segment_count()
    ))
}

fn isogeometric_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut triples = Vec::new();
    while triples.len() < 5 {
        let p =
            SuperspiralParams::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        if p.is_monotone_family() {
            triples.push(p);
        }
    }
    for p in &triples {
        let (_, table) = graded_table(*p);
        let mut curves = vec![("nurbzs", nurbzs_from_hermite(&table).map_err(|e| e.to_string())?)];
        for m in [6, 8, 10] {
            curves.push(("bspline", bspline_from_hermite(&table, m).map_err(|e| e.to_string())?));
        }
        for (label, c) in &curves {
            let ext = curvature_extrema(c).map_err(|e| e.to_string())?;
            ensure!(
                ext.is_empty(),
                "{label} degree {} for ({}, {}, {}): {} extrema",
                c.degree(),
                p.a,
                p.b,
                p.c,
                ext.len()
            );
        }
    }
    Ok(format!("{} triples x (NURBzS + degree 6/8/10): no interior extrema", triples.len()))
}

fn fairing_circle_oracle() -> Outcome {
    let r = 2.5;
    let fc = vcurve(&octagon(r), &FairingConfig::default()).map_err(|e| e.to_string())?;
    let prof = curvature_profile(&fc.curve, 1000, None).map_err(|e| e.to_string())?;
    let worst = prof.iter().map(|s| (s.kappa.unwrap() * r - 1.0).abs()).fold(0.0, f64::max);
    ensure!(worst < 0.02, "curvature off by {:.2}%", worst * 100.0);
    let ext = curvature_extrema(&fc.curve).map_err(|e| e.to_string())?;
    ensure!(ext.is_empty(), "{} extrema", ext.len());
    let pts: Vec<Vec2> = (0..5).map(|i| Vec2::new(1.0 + i as f64 * 0.7, 2.0 - i as f64 * 0.35)).collect();
    let line = vcurve(&Polyline::support(pts.clone(), Topology::Open), &FairingConfig::default())
        .map_err(|e| e.to_string())?;
    let dir = (pts[4] - pts[0]).normalized().unwrap();
    let off = line.curve.control_points().iter().map(|&p| dir.cross(p - pts[0]).abs()).fold(0.0, f64::max);
    ensure!(off < 1e-12 && line.functional == 0.0, "line control points off by {off:e}");
    Ok(format!("octagon max |kappa R - 1| = {:.2e}, 0 extrema; collinear input exact line", worst))
}

fn quality_values() -> Outcome {
    let c = unit_circle();
    let e = bending_energy(&c).map_err(|e| e.to_string())?;
    ensure!((e - 2.0 * PI).abs() < 1e-6, "bending energy {e}");
    let (v, _) = curvature_variation(&c).map_err(|e| e.to_string())?;
    ensure!(v.abs() < 1e-9, "variation {v:e}");
    let pts: Vec<Vec2> = (0..12).map(|i| Vec2::new(i as f64, (i as f64 * 0.9).sin())).collect();
    let spans = pts.len() - 6;
    let mut knots = vec![0.0; 7];
    knots.extend((1..spans).map(|i| i as f64));
    knots.extend(vec![spans as f64; 7]);
    let spline = NurbsCurve::polynomial(6, knots, pts).map_err(|e| e.to_string())?;
    let order = smoothness_order(&spline);
    ensure!(order == 5, "degree-6 smoothness order {order}");
    let ellipse = unit_circle().map_points(|p| Vec2::new(2.0 * p.x, p.y));
    let ext = curvature_extrema(&ellipse).map_err(|e| e.to_string())?;
    ensure!(ext.len() == 4, "ellipse has {} extrema", ext.len());
    Ok(format!("energy - 2pi = {:.1e}, variation {v:.1e}, order {order}, ellipse extrema {}", e - 2.0 * PI, ext.len()))
}

fn quadrature() -> Outcome {
    let p = SuperspiralParams::clothoid();
    let c = Superspiral::new(p, (0.0, 3.0), cfg()).map_err(|e| e.to_string())?;
    let s3 = c.arclength_at(3.0).map_err(|e| e.to_string())?;
    ensure!((s3 - 2.0).abs() < 1e-10, "s(3) = {s3}");
    let rho = |t: f64| 1.0 / c.curvature(t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut v = [rng.random_range(0.0..3.0), rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)];
        v.sort_by(f64::total_cmp);
        let [a, b, d] = v;
        let whole = integrate(rho, a, d, &cfg()).map_err(|e| e.to_string())?.value;
        let parts = integrate(rho, a, b, &cfg()).unwrap().value + integrate(rho, b, d, &cfg()).unwrap().value;
        let tol = cfg().abs_tol.max(cfg().rel_tol * whole.abs());
        worst = worst.max((whole - parts).abs() / tol);
        ensure!((whole - parts).abs() <= 10.0 * tol, "split [{a}, {b}, {d}] differs by {:e}", (whole - parts).abs());
    }
    Ok(format!("s(3) - 2 = {:.1e}; 100 splits, worst {worst:.2} x tolerance", s3 - 2.0))
}

fn interchange() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (_, table) = graded_table(SuperspiralParams::clothoid());
    let curves = vec![unit_circle(), bspline_from_hermite(&table, 8).map_err(|e| e.to_string())?];
    let text = write_dxf(&curves, Units::Mm, 1.0).map_err(|e| e.to_string())?;
    let back = read_dxf(&text).map_err(|e| e.to_string())?;
    for (a, b) in curves.iter().zip(&back.curves) {
        ensure!(a.degree() == b.degree(), "degree changed");
        let knots = a.knots().iter().zip(b.knots()).all(|(x, y)| (x - y).abs() <= 1e-12);
        let points = a.control_points().iter().zip(b.control_points()).all(|(p, q)| p.distance(*q) <= 1e-12);
        let weights = a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= 1e-12);
        ensure!(knots && points && weights, "round trip changed the curve data");
        for t in uniform_parameters(a.domain(), 100) {
            ensure!(a.point(t).unwrap().distance(b.point(t).unwrap()) < 1e-9, "evaluation differs at {t}");
        }
    }

    let mut doc = ModelDocument::new(Units::Mm);
    doc.push("circle", EntityValue::NurbsCurve(curves[0].clone())).unwrap();
    doc.push("template", EntityValue::NurbsCurve(curves[1].clone())).unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, encode_model(&doc).unwrap()).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_faircurve");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let dxf = dir.path().join(format!("out{run}.dxf"));
        let status = Command::new(bin)
            .args(["dxf", "export", "--in"])
            .arg(&model)
            .args(["--scale", "10", "--dxf"])
            .arg(&dxf)
            .status()
            .map_err(|e| e.to_string())?;
        ensure!(status.success(), "export exited with {status}");
        outputs.push(std::fs::read(&dxf).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] == outputs[1], "repeated exports differ");
    let reimported = dir.path().join("back.json");
    let status = Command::new(bin)
        .args(["dxf", "import", "--dxf"])
        .arg(dir.path().join("out0.dxf"))
        .arg("--out")
        .arg(&reimported)
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "import exited with {status}");
    let back = decode_model(&std::fs::read_to_string(&reimported).unwrap()).map_err(|e| e.to_string())?;
    for (i, c) in curves.iter().enumerate() {
        let d = back.nurbs_curve(&format!("dxf{i}")).map_err(|e| e.to_string())?;
        let exact =
            c.control_points().iter().zip(d.control_points()).all(|(p, q)| q.x == 10.0 * p.x && q.y == 10.0 * p.y);
        ensure!(exact, "curve {i}: control points are not exactly 10x");
    }
    Ok(format!("{} curves round-trip, scale 10 exact, {} identical bytes", curves.len(), outputs[0].len()))
}

fn service_statelessness() -> Outcome {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let requests = mixed_requests(100, 5);
        let mut serial = Vec::new();
        for (path, body) in &requests {
            let (status, bytes) = post(router(), path, body.clone()).await;
            ensure!(status == StatusCode::OK, "{path} -> {status}: {}", String::from_utf8_lossy(&bytes));
            serial.push(strip_timings(&bytes));
        }
        let app = router();
        let handles: Vec<_> = requests
            .iter()
            .cloned()
            .map(|(path, body)| {
                let app = app.clone();
                tokio::spawn(async move { post(app, path, body).await })
            })
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            let (status, bytes) = h.await.map_err(|e| e.to_string())?;
            ensure!(status == StatusCode::OK, "parallel request {i} -> {status}");
            ensure!(strip_timings(&bytes) == serial[i], "parallel request {i} differs from its serial run");
        }

        let short = Polyline::support(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)], Topology::Open);
        let concave = Polyline::tangent(
            vec![Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.5), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)],
            Topology::Closed,
        );
        let cases = [
            ("/api/vcurve", vcurve_body(short), "POLYLINE_TOO_SHORT"),
            ("/api/vcurve", vcurve_body(concave), "TANGENT_NOT_CONVEX"),
            ("/api/analytic", common::analytic_body(SuperspiralParams::new(0.5, 1.0, -1.0)), "HYPERGEOMETRIC_DOMAIN"),
            ("/api/approx", common::approx_body(SuperspiralParams::clothoid(), 7), "DEGREE_NOT_SUPPORTED"),
        ];
        for (path, body, want) in cases {
            for _ in 0..2 {
                let (status, bytes) = post(router(), path, body.clone()).await;
                ensure!(status == StatusCode::UNPROCESSABLE_ENTITY, "{want}: status {status}");
                let code = common::error_code(&bytes);
                ensure!(code == want, "expected {want}, got {code}");
            }
        }
        Ok("100 parallel mixed requests match serial bodies; 4 error codes stable".to_string())
    })
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "clothoid equivalence", budget: Duration::from_secs(1), run: clothoid_equivalence },
        Criterion {
            id: 2,
            name: "hypergeometric identities",
            budget: Duration::from_secs(1),
            run: hypergeometric_identities,
        },
        Criterion {
            id: 3,
            name: "template deviation magnitude",
            budget: Duration::from_secs(10),
            run: template_magnitude,
        },
        Criterion {
            id: 4,
            name: "isogeometric preservation",
            budget: Duration::from_secs(30),
            run: isogeometric_preservation,
        },
        Criterion { id: 5, name: "fairing circle oracle", budget: Duration::from_secs(10), run: fairing_circle_oracle },
        Criterion { id: 6, name: "quality values", budget: Duration::from_secs(5), run: quality_values },
        Criterion { id: 7, name: "quadrature", budget: Duration::from_secs(1), run: quadrature },
        Criterion { id: 8, name: "interchange", budget: Duration::from_secs(1), run: interchange },
        Criterion { id: 9, name: "service statelessness", budget: Duration::from_secs(30), run: service_statelessness },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over the {:?} budget", c.budget)),
            other => other,
        };
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {} ({secs:.2} s): {detail}", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {} ({secs:.2} s): {detail}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
