//! Modular symbols of weight-2 Bianchi newforms over the norm-Euclidean
//! imaginary quadratic fields, and the statistics of their distribution.

pub mod cli;
pub mod coeffs;
pub mod constants;
pub mod enumerate;
pub mod error;
pub mod hyperbolic;
pub mod modsym;
pub mod quad;
pub mod quadfield;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
