//! Certification of approximate roots for square systems mixing polynomials
//! and univariate D-finite functions.

pub mod error;
pub mod exact;
pub mod dfinite;
pub mod interval;
pub mod poly;
pub mod system;
pub mod krawczyk;
pub mod alpha;
pub mod parse;
pub mod experiments;
pub mod report;

pub use error::{Error, Result};
