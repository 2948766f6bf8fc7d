#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use faircurve_core::nurbs::NurbsCurve;
use faircurve_core::Vec2;

/// Full circle of radius `r` as nine-point rational quadratic, counter-clockwise from (r, 0).
pub fn circle(r: f64) -> NurbsCurve {
    ellipse(r, r)
}

pub fn ellipse(a: f64, b: f64) -> NurbsCurve {
    let h = FRAC_1_SQRT_2;
    let unit = [
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, 1.0),
        (-1.0, 1.0),
        (-1.0, 0.0),
        (-1.0, -1.0),
        (0.0, -1.0),
        (1.0, -1.0),
        (1.0, 0.0),
    ];
    let pts = unit.iter().map(|&(x, y)| Vec2::new(a * x, b * y)).collect();
    let w = vec![1.0, h, 1.0, h, 1.0, h, 1.0, h, 1.0];
    let knots = vec![0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0];
    NurbsCurve::new(2, knots, pts, w).unwrap()
}

/// Quarter of the ellipse in the first quadrant.
pub fn ellipse_quadrant(a: f64, b: f64) -> NurbsCurve {
    NurbsCurve::new(
        2,
        vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        vec![Vec2::new(a, 0.0), Vec2::new(a, b), Vec2::new(0.0, b)],
        vec![1.0, FRAC_1_SQRT_2, 1.0],
    )
    .unwrap()
}

/// Clamped polynomial spline with uniform simple interior knots.
pub fn uniform_spline(degree: usize, pts: Vec<Vec2>) -> NurbsCurve {
    let n = pts.len();
    let spans = n - degree;
    let mut knots = vec![0.0; degree + 1];
    knots.extend((1..spans).map(|i| i as f64));
    knots.extend(vec![spans as f64; degree + 1]);
    NurbsCurve::polynomial(degree, knots, pts).unwrap()
}
