//! Quadrature, the Gauss hypergeometric function and scalar root finding.

mod hypergeometric;
mod quadrature;
mod roots;

pub use hypergeometric::gauss_2f1;
pub use quadrature::{integrate, integrate_vec, kronrod15_rule, QuadratureResult, ToleranceConfig, VecQuadrature};
pub use roots::bracket_root;
