//! Geometric complexes over the cobordism category and their reduction to
//! complexes of special lines.

mod build;
mod geometric;
mod universal;

pub use build::{build_universal, cube, cube_universal, to_universal, BuildOptions};
pub use geometric::{GeometricComplex, GradedObject, ObjId, SmId, Smoothings};
pub use universal::{Line, Monomial, UniversalComplex, SCHEMA};
