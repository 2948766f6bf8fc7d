//! Fairness functionals over a fixed spline space, in least-squares form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::numerics::kronrod15_rule;
use crate::nurbs::fit::SplineSpace;
use crate::nurbs::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    /// `∫ (dκ/ds)² ds`
    #[default]
    #[serde(alias = "curvature-variation")]
    Variation,
    /// `∫ κ² ds`
    #[serde(alias = "bending-energy")]
    Energy,
}

struct Station {
    weight: f64,
    indices: Vec<usize>,
    /// First, second and third derivatives of the basis functions.
    d: [Vec<f64>; 3],
}

/// Functional plus `regularization * ∫ (C'·C'')² dt`, evaluated by a Kronrod-15 rule per
/// span as a sum of squared residuals. The penalty vanishes for constant speed, which
/// pins down the parametrization without favouring any shape.
pub(crate) struct Objective {
    n: usize,
    stations: Vec<Station>,
    functional: Functional,
    regularization: f64,
}

/// Residual of one station and its partials with respect to `C'`, `C''` and `C'''`.
struct Partials {
    value: f64,
    da: Vec2,
    db: Vec2,
    dd: Vec2,
}

impl Objective {
    pub fn new(space: &SplineSpace, functional: Functional, regularization: f64) -> Self {
        let mut stations = Vec::new();
        for w in space.breaks.windows(2) {
            for (t, weight) in kronrod15_rule(w[0], w[1]) {
                let row = space.basis(t, 3, Side::Right);
                let d = [row.values[1].clone(), row.values[2].clone(), row.values[3].clone()];
                stations.push(Station { weight, indices: row.indices, d });
            }
        }
        Self { n: space.n_free, stations, functional, regularization }
    }

    fn derivs(&self, x: &DVector<f64>, st: &Station) -> [Vec2; 3] {
        let mut out = [Vec2::ZERO; 3];
        for (j, &i) in st.indices.iter().enumerate() {
            let p = Vec2::new(x[i], x[self.n + i]);
            for k in 0..3 {
                out[k] += p * st.d[k][j];
            }
        }
        out
    }

    /// The functional alone. `None` where the curve has a stationary point.
    pub fn functional(&self, x: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for st in &self.stations {
            let [a, b, d] = self.derivs(x, st);
            total += st.weight * self.partials(a, b, d)?.value.powi(2);
        }
        total.is_finite().then_some(total)
    }

    /// Residuals and their Jacobian with respect to `y`, where `x = x0 + z y`.
    pub fn residuals(&self, x: &DVector<f64>, z: &DMatrix<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n;
        let rows = 2 * self.stations.len();
        let mut r = DVector::zeros(rows);
        let mut jacobian = DMatrix::zeros(rows, z.ncols());
        let mu = self.regularization.sqrt();
        for (q, st) in self.stations.iter().enumerate() {
            let [a, b, d] = self.derivs(x, st);
            let p = self.partials(a, b, d)?;
            let sw = st.weight.sqrt();
            r[2 * q] = sw * p.value;
            r[2 * q + 1] = sw * mu * a.dot(b);
            for (j, &i) in st.indices.iter().enumerate() {
                let gv = (p.da * st.d[0][j] + p.db * st.d[1][j] + p.dd * st.d[2][j]) * sw;
                let gr = (b * st.d[0][j] + a * st.d[1][j]) * (sw * mu);
                for k in 0..z.ncols() {
                    let (zx, zy) = (z[(i, k)], z[(n + i, k)]);
                    jacobian[(2 * q, k)] += gv.x * zx + gv.y * zy;
                    jacobian[(2 * q + 1, k)] += gr.x * zx + gr.y * zy;
                }
            }
        }
        r.iter().all(|v| v.is_finite()).then_some((r, jacobian))
    }

    /// Variation: `(dκ/dt) / sqrt(v)`. Energy: `κ sqrt(v)`. Squared and integrated over
    /// `t` these give the functionals over arc length.
    fn partials(&self, a: Vec2, b: Vec2, d: Vec2) -> Option<Partials> {
        let v2 = a.norm_sq();
        if !(v2 > 0.0) {
            return None;
        }
        let v = v2.sqrt();
        let c = a.cross(b);
        let dc_da = Vec2::new(b.y, -b.x);
        let dc_db = Vec2::new(-a.y, a.x);
        match self.functional {
            Functional::Energy => {
                let inv = v.powf(-2.5);
                Some(Partials {
                    value: c * inv,
                    da: dc_da * inv - a * (2.5 * c * inv / v2),
                    db: dc_db * inv,
                    dd: Vec2::ZERO,
                })
            }
            Functional::Variation => {
                let v3 = v2 * v;
                let v5 = v3 * v2;
                let v7 = v5 * v2;
                let q = a.cross(d);
                let r = a.dot(b);
                let ku = q / v3 - 3.0 * c * r / v5;
                let dku_da = Vec2::new(d.y, -d.x) / v3 - a * (3.0 * q / v5) - (dc_da * r + b * c) * (3.0 / v5)
                    + a * (15.0 * c * r / v7);
                let dku_db = (dc_db * r + a * c) * (-3.0 / v5);
                let dku_dd = Vec2::new(-a.y, a.x) / v3;
                let is = 1.0 / v.sqrt();
                Some(Partials {
                    value: ku * is,
                    da: dku_da * is - a * (0.5 * ku * is / v2),
                    db: dku_db * is,
                    dd: dku_dd * is,
                })
            }
        }
    }
}
