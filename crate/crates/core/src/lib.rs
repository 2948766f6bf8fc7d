//! Fair curve kernel: analytic aesthetic curves, fairing of polylines into smooth
//! high-degree splines, NURBS conversion from Hermite data, curve quality metrics,
//! and DXF / model-document interchange.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod analytic;
pub mod api;
pub mod curve;
pub mod error;
pub mod fairing;
pub mod geom;
pub mod io;
pub mod numerics;
pub mod nurbs;
pub mod quality;

pub use error::{Error, ErrorClass, Result};
pub use geom::{Point2, Vec2};
