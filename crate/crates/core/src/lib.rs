//! Universal Khovanov complexes over `Z[H]`.
//!
//! A knot diagram is cut open at a marked edge and reduced crossing by
//! crossing to a complex of special lines with monomial differentials
//! `c * H^k`. Every standard theory (Khovanov, Lee, reduced, Bar-Natan) is a
//! promotion of that complex.

pub mod cobalg;
pub mod complex;
pub mod decomp;
pub mod diagram;
pub mod error;
pub mod homology;
pub mod jones;
pub mod knots;
pub mod linalg;
pub mod poly;
pub mod promote;
pub mod ring;

pub use error::{Error, Result};
