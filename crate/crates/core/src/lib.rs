//! Probability-free trading on price paths.
//!
//! The crate models price paths as positive step functions and provides
//! exact variation functionals, crossing counters and a simple-strategy
//! execution engine, together with the explicit strategies whose capital
//! certifies roughness bounds: Doob's upcrossing strategy, dyadic
//! volatility-harvesting mixtures, the clairvoyant singleton strategy and
//! the borrowing-free audit.

pub mod experiment;
pub mod numeric;
pub mod paths;
pub mod strategies;
pub mod variation;
