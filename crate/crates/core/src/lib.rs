//! Genus theory, class numbers and Euclidean-ideal verdicts for odd real
//! biquadratic fields, with a census of those fields by discriminant.

pub mod arith;
pub mod biquadratic;
pub mod brauer;
pub mod census;
pub mod error;
pub mod euclid;
pub mod multiquadratic;
pub mod par;
pub mod quadratic;
pub mod sieve;
pub mod table;

pub use error::{Error, Result};
