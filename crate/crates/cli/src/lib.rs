//! Command line and HTTP service over the faircurve kernel.

pub mod cli;
pub mod service;
