//! Rational lemniscates, harmonic measure and conformal welding.
//!
//! The crate traces level sets `|r(z)| = c` of rational maps, assembles them
//! into lemniscate graphs, estimates harmonic measure by walk-on-spheres,
//! computes conformal weldings, and checks the harmonic-measure
//! characterisation of rational lemniscates on given candidate points.

pub mod certify;
pub mod curves;
pub mod koch;
pub mod ratfun;
pub mod lemgraph;
pub mod matching;
pub mod potential;
pub mod tracer;
pub mod welding;

pub use num_complex::Complex64;
