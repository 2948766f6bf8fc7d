//! Adaptive Gauss-Kronrod quadrature.
//!
//! The 7-point Gauss / 15-point Kronrod pair is applied on each subinterval; the
//! interval with the largest error estimate is bisected until the summed error
//! estimate drops below `max(abs_tol, rel_tol * |value|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1] (non-negative half, descending). Odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive and max_subdivisions >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn with_tolerance(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }
}

/// Vector-valued result of [`integrate_vec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecQuadrature<const N: usize> {
    pub value: [f64; N],
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// The 15 Kronrod nodes and weights mapped onto `[a, b]`.
pub fn kronrod15_rule(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for j in 0..7 {
        out[2 * j] = (c - h * XGK[j], h * WGK[j]);
        out[2 * j + 1] = (c + h * XGK[j], h * WGK[j]);
    }
    out[14] = (c, h * WGK[7]);
    out
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<const N: usize> Eq for Panel<N> {}

impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn check_finite<const N: usize>(v: &[f64; N], x: f64) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteIntegrand { at: x })
    }
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    check_finite(&fc, c)?;

    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        fv1[j] = f(x1);
        check_finite(&fv1[j], x1)?;
        fv2[j] = f(x2);
        check_finite(&fv2[j], x2)?;
    }

    let mut value = [0.0; N];
    let mut error: f64 = 0.0;
    for k in 0..N {
        let mut resk = fc[k] * WGK[7];
        let mut resg = fc[k] * WG[3];
        let mut resabs = resk.abs();
        for j in 0..7 {
            let sum = fv1[j][k] + fv2[j][k];
            resk += WGK[j] * sum;
            resabs += WGK[j] * (fv1[j][k].abs() + fv2[j][k].abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * sum;
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[7] * (fc[k] - mean).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
        }
        let resasc = resasc * h.abs();
        let resabs = resabs * h.abs();
        let mut err = ((resk - resg) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[k] = resk * h;
        error = error.max(err);
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates a vector-valued function over `[a, b]`; the error estimate is the
/// componentwise maximum and the tolerance is taken against the largest component.
pub fn integrate_vec<const N: usize, F>(mut f: F, a: f64, b: f64, cfg: &ToleranceConfig) -> Result<VecQuadrature<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("invalid integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(VecQuadrature { value: [0.0; N], error_estimate: 0.0, subdivisions: 1 });
    }

    let first = gk15(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let magnitude = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = cfg.abs_tol.max(cfg.rel_tol * magnitude);
        if total_err <= target {
            break;
        }
        if heap.len() >= cfg.max_subdivisions {
            let subdivisions = heap.len();
            return Err(Error::QuadratureNonConvergence {
                best: crate::numerics::QuadratureResult { value: total[0], error_estimate: total_err, subdivisions },
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating point resolution; nothing left to refine
            heap.push(worst);
            let subdivisions = heap.len();
            return Err(Error::QuadratureNonConvergence {
                best: QuadratureResult { value: total[0], error_estimate: total_err, subdivisions },
            });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        for k in 0..N {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // resum occasionally to keep the running totals free of drift
        if heap.len() % 64 == 0 {
            total = [0.0; N];
            total_err = 0.0;
            for p in heap.iter() {
                for k in 0..N {
                    total[k] += p.value[k];
                }
                total_err += p.error;
            }
        }
    }

    // final value summed in interval order for reproducibility
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = [0.0; N];
    let mut error_estimate = 0.0;
    for p in &panels {
        for k in 0..N {
            value[k] += p.value[k];
        }
        error_estimate += p.error;
    }
    Ok(VecQuadrature { value, error_estimate, subdivisions: panels.len() })
}

/// Integrates `f` over `[a, b]` with adaptive G7/K15 bisection.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &ToleranceConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x| [f(x)], a, b, cfg)?;
    Ok(QuadratureResult { value: r.value[0], error_estimate: r.error_estimate, subdivisions: r.subdivisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x, 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.subdivisions, 1);
    }

    #[test]
    fn inverse_sqrt_closed_form() {
        let r = integrate(|t| (1.0 + t).powf(-0.5), 0.0, 3.0, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_against_midpoint_oracle() {
        let n = 1_000_000;
        let h = PI / n as f64;
        let oracle: f64 = (0..n).map(|i| (50.0 * (i as f64 + 0.5) * h).sin()).sum::<f64>() * h;
        let r = integrate(|x| (50.0 * x).sin(), 0.0, PI, &cfg()).unwrap();
        assert!((r.value - oracle).abs() < 1e-9, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn nan_integrand_is_domain_error() {
        let e = integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(e, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let tight = ToleranceConfig { abs_tol: 1e-14, rel_tol: 1e-14, max_subdivisions: 3 };
        let e = integrate(|x| x.abs().sqrt(), -1.0, 1.0, &tight).unwrap_err();
        match e {
            Error::QuadratureNonConvergence { best } => {
                assert!((best.value - 4.0 / 3.0).abs() < 1e-3);
                assert!(best.error_estimate > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_interval() {
        let r = integrate(|x| x, 2.0, 2.0, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(integrate(|x| x, 2.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn kronrod_rule_weights_sum_to_length() {
        let s: f64 = kronrod15_rule(1.0, 4.0).iter().map(|p| p.1).sum();
        assert!((s - 3.0).abs() < 1e-14);
    }
}
