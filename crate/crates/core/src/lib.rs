//! Simulation and estimation for back-and-forth tail chains of GARCH(1,1)
//! and related Markov-type processes.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backward;
pub mod bftc;
pub mod cdf_table;
pub mod counterexample;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod garch_chain;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod streams;
pub mod tail_index;

pub use error::{Error, Result};
