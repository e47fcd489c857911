//! Exact counting for systems of bilinear equations over small finite vector
//! spaces, with every supporting piece needed to certify the counting bounds
//! numerically: finite-field arithmetic, additive characters, discrete
//! Fourier transforms on F_q^d, sumset-based Waring numbers, and a
//! deterministic verification suite.
//!
//! Everything is sized for desk-scale exhaustive enumeration (q^d capped at
//! 2^31, loop counts guarded); see [`exec::Budget`].

pub mod bilinear;
pub mod counting;
pub mod error;
pub mod exec;
pub mod field;
pub mod fourier;
pub mod rng;
pub mod suite;
pub mod waring;

pub use bilinear::{BilinearForm, VecSet};
pub use error::{Error, Result};
pub use exec::Budget;
pub use field::{Fe, Field, FieldSpec};
