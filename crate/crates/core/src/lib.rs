//! su(2) built from two quon algebras at a common root of unity, the
//! `{J², U_r}` quantization scheme, and the Wigner–Racah calculus in the
//! `U_r` eigenbasis.

pub mod cli;
pub mod error;
pub mod fock;
pub mod polar;
pub mod qarith;
pub mod report;
pub mod sphere;
pub mod sweep;
pub mod wigner;
pub mod wra;

pub use error::{Error, Result};
pub use qarith::{Amplitude, HalfInt, ToleranceRule};
