//! Bessel functions and L-functions of generic representations of GL_n over
//! finite fields.

pub mod arith;
pub mod bessel;
pub mod characters;
pub mod charsum;
pub mod error;
pub mod etale;
pub mod field;
pub mod hecke;
pub mod reps;
pub mod symfun;
pub mod verify;

pub use error::{Error, Result};
