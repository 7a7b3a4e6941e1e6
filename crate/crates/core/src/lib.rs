//! Error-exponent upper bounds for classical-quantum channels.
//!
//! The crate is organised bottom-up: [`operator`] provides Hermitian and
//! density operators, [`channel`] the channel model and combinatorial
//! objects, [`renyi`] the `μ` function and hypothesis-testing exponents.
//! [`exponent`] computes `E₀`, the sphere packing exponent and `R_∞`,
//! [`theta`] the theta functions of confusability graphs with certificates,
//! and [`composite`] the conditional, umbrella and Elias-type distance bounds
//! together with brute-force code oracles. [`io`] holds the file formats and
//! [`par`] the parallel/sequential execution switch.

pub mod channel;
pub mod composite;
pub mod error;
pub mod exponent;
pub mod io;
pub mod operator;
pub mod optimize;
pub mod par;
pub mod renyi;
pub mod theta;

pub use error::{Error, Result};
