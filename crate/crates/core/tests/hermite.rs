use faircurve_core::analytic::{
    build_schedule, sample_hermite, HermiteTable, SampleSchedule, Superspiral, SuperspiralParams,
};
use faircurve_core::numerics::ToleranceConfig;
use faircurve_core::nurbs::{
    bspline_from_hermite, curvature_profile, extract_segments, nurbzs_from_hermite, NurbsCurve,
};
use faircurve_core::quality::{curvature_extrema, deviation, smoothness_order};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graded_schedule() -> Vec<f64> {
    build_schedule(&SampleSchedule { n_points: 16, t0: 0.0, h_first: 0.1, h_last: 1.0 }).unwrap()
}

fn table_for(params: SuperspiralParams) -> (Superspiral, HermiteTable) {
    let cfg = ToleranceConfig::default();
    let sched = graded_schedule();
    let curve = Superspiral::new(params, (0.0, *sched.last().unwrap()), cfg).unwrap();
    let table = sample_hermite(&curve, &sched, &cfg).unwrap();
    (curve, table)
}

fn assert_monotone(c: &NurbsCurve, label: &str) {
    let ext = curvature_extrema(c).unwrap();
    assert!(ext.is_empty(), "{label}: {ext:?}");
}

#[test]
fn clipped_clothoid_template_deviation() {
    let (clothoid, table) = table_for(SuperspiralParams::clothoid());
    let c = bspline_from_hermite(&table, 8).unwrap();
    assert_eq!(c.segment_count(), 15);
    let clipped = extract_segments(&c, 0, 12).unwrap();
    assert_eq!(clipped.segment_count(), 12);
    let (hi, lo) = deviation(&clipped, &clothoid, 1000).unwrap();
    assert!(hi.abs() < 5e-3 && lo.abs() < 5e-3, "max {hi} min {lo}");
    assert_monotone(&c, "clothoid degree 8");
    assert!(smoothness_order(&c) >= 5);
}

#[test]
fn clothoid_nurbzs_segment_accuracy() {
    let (clothoid, table) = table_for(SuperspiralParams::clothoid());
    let c = nurbzs_from_hermite(&table).unwrap();
    let breaks = c.segment_breaks();
    for seg in 0..c.segment_count() {
        let piece = extract_segments(&c, seg, 1).unwrap();
        let (hi, lo) = deviation(&piece, &clothoid, 50).unwrap();
        let len = breaks[seg + 1] - breaks[seg];
        assert!(hi.abs().max(lo.abs()) < 1e-3 * len, "segment {seg}: {hi} {lo}");
    }
    assert_monotone(&c, "clothoid nurbzs");
}

#[test]
fn clothoid_template_profile_is_linear() {
    let (_, table) = table_for(SuperspiralParams::clothoid());
    let c = bspline_from_hermite(&table, 8).unwrap();
    let prof = curvature_profile(&c, 200, None).unwrap();
    // κ = (s + 2) / 2 with s measured from θ = 0
    let worst = prof.iter().map(|p| (p.kappa.unwrap() - (p.s + 2.0) / 2.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3 * 5.0, "{worst}");
}

#[test]
fn superspiral_conversions_add_no_extrema() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 5 {
        let p =
            SuperspiralParams::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        if !p.is_monotone_family() {
            continue;
        }
        tested += 1;
        let (_, table) = table_for(p);
        assert_monotone(&nurbzs_from_hermite(&table).unwrap(), &format!("nurbzs {p:?}"));
        for m in [6, 8, 10] {
            assert_monotone(&bspline_from_hermite(&table, m).unwrap(), &format!("degree {m} {p:?}"));
        }
    }
}
