use std::f64::consts::{PI, TAU};

use faircurve_core::analytic::{build_schedule, SampleSchedule, Superspiral, SuperspiralParams};
use faircurve_core::curve::CurveGeometry;
use faircurve_core::fairing::{
    hermite_of, vcurve_from_support, vcurve_from_tangent, FairedCurve, FairingConfig, Functional, HermiteStations,
    Polyline,
};
use faircurve_core::numerics::ToleranceConfig;
use faircurve_core::nurbs::{curvature_profile, Side, Topology};
use faircurve_core::quality::{curvature_extrema, curvature_variation, smoothness_order};
use faircurve_core::{Error, Vec2};

fn regular_polygon(n: usize, r: f64) -> Vec<Vec2> {
    (0..n).map(|i| Vec2::from_angle(TAU * i as f64 / n as f64) * r).collect()
}

fn clothoid_points(n: usize) -> Vec<Vec2> {
    let cfg = ToleranceConfig::default();
    let sched = build_schedule(&SampleSchedule { n_points: n, t0: 0.0, h_first: 0.1, h_last: 1.0 }).unwrap();
    let c = Superspiral::new(SuperspiralParams::clothoid(), (0.0, *sched.last().unwrap()), cfg).unwrap();
    sched.iter().map(|&t| c.point(t).unwrap()).collect()
}

fn superspiral_points(p: SuperspiralParams, n: usize) -> Vec<Vec2> {
    let cfg = ToleranceConfig::default();
    let c = Superspiral::new(p, (0.0, 3.0), cfg).unwrap();
    (0..n).map(|i| c.point(3.0 * i as f64 / (n - 1) as f64).unwrap()).collect()
}

fn kappas(fc: &FairedCurve, n: usize) -> Vec<f64> {
    curvature_profile(&fc.curve, n, None).unwrap().iter().map(|s| s.kappa.unwrap()).collect()
}

fn max_vertex_distance(fc: &FairedCurve, vertices: &[Vec2]) -> f64 {
    fc.nodes.iter().zip(vertices).map(|(&t, &v)| fc.curve.evaluate(t).unwrap().distance(v)).fold(0.0, f64::max)
}

#[test]
fn octagon_approaches_circle() {
    let r = 3.0;
    let pts = regular_polygon(8, r);
    let fc = vcurve_from_support(&Polyline::support(pts.clone(), Topology::Closed), &FairingConfig::default()).unwrap();
    assert!(fc.curve.is_periodic());
    assert_eq!(fc.curve.degree(), 6);
    for k in kappas(&fc, 100) {
        assert!((k * r - 1.0).abs() < 0.02, "{k}");
    }
    assert!(curvature_extrema(&fc.curve).unwrap().is_empty());
    assert!(max_vertex_distance(&fc, &pts) < 1e-9);

    let table = hermite_of(&fc, HermiteStations::VertexNodes).unwrap();
    assert_eq!(table.len(), 8);
    assert!(table.closed);
    for node in &table.nodes {
        assert!((node.curvature * r - 1.0).abs() < 0.02);
    }
    assert!((table.total_length() - TAU * r).abs() < 0.02 * TAU * r);
}

#[test]
fn collinear_support_is_a_line() {
    let pts: Vec<Vec2> = (0..4).map(|i| Vec2::new(i as f64, 0.0)).collect();
    let fc = vcurve_from_support(&Polyline::support(pts.clone(), Topology::Open), &FairingConfig::default()).unwrap();
    assert_eq!(fc.functional, 0.0);
    assert!(kappas(&fc, 50).iter().all(|k| k.abs() < 1e-12));
    assert!(max_vertex_distance(&fc, &pts) < 1e-12);
    let table = hermite_of(&fc, HermiteStations::VertexNodes).unwrap();
    assert!(table.nodes.iter().all(|n| n.curvature == 0.0 && n.normal.is_none()));
}

#[test]
fn collinear_fold_back_is_rejected() {
    let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0)];
    assert!(matches!(
        vcurve_from_support(&Polyline::support(pts, Topology::Open), &FairingConfig::default()),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn clothoid_samples_give_monotone_curvature() {
    let pts = clothoid_points(16);
    let fc = vcurve_from_support(&Polyline::support(pts.clone(), Topology::Open), &FairingConfig::default()).unwrap();
    let k = kappas(&fc, 200);
    for w in k.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "{} then {}", w[0], w[1]);
    }
    assert!(max_vertex_distance(&fc, &pts) < 1e-9);
    let table = hermite_of(&fc, HermiteStations::VertexNodes).unwrap();
    for w in table.nodes.windows(2) {
        assert!(w[1].curvature > w[0].curvature);
    }
}

#[test]
fn superspiral_samples_keep_monotone_curvature() {
    for (a, b, c) in [(0.5, 1.0, 1.0), (1.0, 1.5, 2.0), (0.3, 0.7, 1.4)] {
        let p = SuperspiralParams::new(a, b, c);
        let pts = superspiral_points(p, 12);
        let fc = vcurve_from_support(&Polyline::support(pts, Topology::Open), &FairingConfig::default()).unwrap();
        let ext = curvature_extrema(&fc.curve).unwrap();
        assert!(ext.is_empty(), "{p:?}: {ext:?}");
    }
}

#[test]
fn square_tangent_polygon_touches_midpoints() {
    let sq = vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)];
    let fc = vcurve_from_tangent(&Polyline::tangent(sq.clone(), Topology::Closed), &FairingConfig::default()).unwrap();
    let mids = [Vec2::new(0.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)];
    for (&t, m) in fc.nodes.iter().zip(mids) {
        assert!(fc.curve.evaluate(t).unwrap().distance(m) < 1e-6);
    }
    assert!(kappas(&fc, 200).iter().all(|&k| k > 0.0));
    // four-fold symmetry: rotating a sample by 90° lands on the curve a quarter period later
    let (lo, hi) = fc.curve.domain();
    let quarter = (hi - lo) / 4.0;
    for i in 0..20 {
        let t = lo + quarter * i as f64 / 20.0;
        let p = fc.curve.evaluate(t).unwrap().rotated(PI / 2.0);
        assert!(p.distance(fc.curve.evaluate(t + quarter).unwrap()) < 1e-6);
    }
}

#[test]
fn tangency_conditions_hold() {
    let poly =
        vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.2), Vec2::new(4.5, 2.0), Vec2::new(4.0, 4.5), Vec2::new(1.0, 4.0)];
    for topo in [Topology::Open, Topology::Closed] {
        let pl = Polyline::tangent(poly.clone(), topo);
        let fc = vcurve_from_tangent(&pl, &FairingConfig::default()).unwrap();
        for (i, (&t, e)) in fc.nodes.iter().zip(pl.edges()).enumerate() {
            let d = fc.curve.derivatives_sided(t, 1, Side::Right).unwrap();
            let v0 = poly[i];
            let rel = d[0] - v0;
            let along = rel.dot(e) / e.norm_sq();
            assert!(along > 0.0 && along < 1.0);
            assert!((rel - e * along).norm() < 1e-9);
            let dir = d[1].normalized().unwrap();
            assert!(dir.cross(e.normalized().unwrap()).abs() < 1e-9);
            assert!(dir.dot(e) > 0.0);
        }
    }
}

#[test]
fn hexagon_tangent_curve_is_nearly_circular() {
    let fc =
        vcurve_from_tangent(&Polyline::tangent(regular_polygon(6, 2.0), Topology::Closed), &FairingConfig::default())
            .unwrap();
    let k = kappas(&fc, 300);
    let (lo, hi) = k.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo > 0.0 && hi / lo < 1.5, "{lo} {hi}");
    // comparison: the hexagon with corners rounded by arcs running between edge quarter
    // points; its curvature jumps 0 -> 1/r -> 0 at each corner
    let (var, _) = curvature_variation(&fc.curve).unwrap();
    let corner_radius = 0.25 * 2.0 * (PI / 3.0).tan();
    let comparison = 12.0 / corner_radius;
    assert!(var < comparison, "{var} vs {comparison}");
}

#[test]
fn open_fan_gives_monotone_arc() {
    let fan = vec![Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(7.0, 2.0), Vec2::new(8.5, 4.5)];
    let fc = vcurve_from_tangent(&Polyline::tangent(fan, Topology::Open), &FairingConfig::default()).unwrap();
    let k = kappas(&fc, 200);
    assert!(k.iter().all(|&x| x > 0.0));
    let up = k.windows(2).all(|w| w[1] >= w[0] - 1e-6);
    let down = k.windows(2).all(|w| w[1] <= w[0] + 1e-6);
    assert!(up || down, "{k:?}");
}

#[test]
fn non_convex_tangent_polygon_is_rejected() {
    let dart = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(4.0, 0.0), Vec2::new(2.0, 3.0)];
    assert!(matches!(
        vcurve_from_tangent(&Polyline::tangent(dart, Topology::Closed), &FairingConfig::default()),
        Err(Error::TangentNotConvex)
    ));
}

#[test]
fn short_and_degenerate_polylines_are_rejected() {
    let cfg = FairingConfig::default();
    let two = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
    assert!(matches!(
        vcurve_from_support(&Polyline::support(two, Topology::Open), &cfg),
        Err(Error::PolylineTooShort { got: 2, need: 3 })
    ));
    let tri = regular_polygon(3, 1.0);
    assert!(matches!(
        vcurve_from_support(&Polyline::support(tri, Topology::Closed), &cfg),
        Err(Error::PolylineTooShort { got: 3, need: 4 })
    ));
    let dup = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 0.0)];
    assert!(matches!(
        vcurve_from_support(&Polyline::support(dup, Topology::Open), &cfg),
        Err(Error::DegenerateEdge { index: 1, next: 2 })
    ));
}

#[test]
fn vcurve_is_c5_and_reduces_the_functional() {
    let pts = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.6),
        Vec2::new(2.2, 0.8),
        Vec2::new(3.1, 0.3),
        Vec2::new(4.0, -0.4),
        Vec2::new(5.2, -0.2),
    ];
    for functional in [Functional::Variation, Functional::Energy] {
        let cfg = FairingConfig { functional, ..Default::default() };
        let fc = vcurve_from_support(&Polyline::support(pts.clone(), Topology::Open), &cfg).unwrap();
        assert_eq!(smoothness_order(&fc.curve), 5);
        assert!(max_vertex_distance(&fc, &pts) < 1e-9);
        let unfaired = FairingConfig { max_iterations: 1, ..cfg };
        let start = match vcurve_from_support(&Polyline::support(pts.clone(), Topology::Open), &unfaired) {
            Ok(c) => c.functional,
            Err(Error::FairingNonConvergence { functional, .. }) => functional,
            Err(e) => panic!("{e}"),
        };
        assert!(fc.functional <= start, "{functional:?}: {} > {start}", fc.functional);
    }
}

#[test]
fn non_convergence_carries_best_iterate() {
    let pts = clothoid_points(10);
    let cfg = FairingConfig { max_iterations: 2, gradient_tol: 1e-300, ..Default::default() };
    match vcurve_from_support(&Polyline::support(pts.clone(), Topology::Open), &cfg) {
        Err(Error::FairingNonConvergence { iterations, functional, best }) => {
            assert_eq!(iterations, 2);
            assert_eq!(functional, best.functional);
            assert!(max_vertex_distance(&best, &pts) < 1e-9);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rigid_motion_equivariance() {
    let pts = clothoid_points(10);
    let (angle, shift) = (1.1, Vec2::new(-4.0, 2.5));
    let moved: Vec<Vec2> = pts.iter().map(|p| p.rotated(angle) + shift).collect();
    let cfg = FairingConfig::default();
    for topo in [Topology::Open, Topology::Closed] {
        let a = vcurve_from_support(&Polyline::support(pts.clone(), topo), &cfg).unwrap();
        let b = vcurve_from_support(&Polyline::support(moved.clone(), topo), &cfg).unwrap();
        for (p, q) in a.curve.control_points().iter().zip(b.curve.control_points()) {
            assert!((p.rotated(angle) + shift).distance(*q) < 1e-9);
        }
        assert!((a.functional - b.functional).abs() <= 1e-9 * a.functional.max(1.0));
    }
}

#[test]
fn uniform_stations_are_equally_spaced() {
    let fc =
        vcurve_from_support(&Polyline::support(clothoid_points(8), Topology::Open), &FairingConfig::default()).unwrap();
    let table = hermite_of(&fc, HermiteStations::Uniform(9)).unwrap();
    assert_eq!(table.len(), 9);
    let mean = table.total_length() / 8.0;
    for l in &table.arc_lengths {
        assert!((l - mean).abs() < 1e-9 * mean);
    }
    let closed =
        vcurve_from_support(&Polyline::support(regular_polygon(5, 1.0), Topology::Closed), &FairingConfig::default())
            .unwrap();
    let table = hermite_of(&closed, HermiteStations::Uniform(10)).unwrap();
    assert_eq!(table.arc_lengths.len(), 10);
    let mean = table.total_length() / 10.0;
    assert!(table.arc_lengths.iter().all(|l| (l - mean).abs() < 1e-9 * mean));
}
