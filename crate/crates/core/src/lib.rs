//! Freely floating cylinders in oblique waves: geometry, hydrostatics,
//! dispersion, a finite-element field solver with modal DtN closure, the
//! coupled water/body system, energy audits and uniqueness certificates.

pub mod audits;
pub mod banded;
pub mod dispersion;
pub mod coupled;
pub mod error;
pub mod field_solver;
pub mod geometry;
pub mod hydrostatics;
pub mod mesh;
pub mod polygon;

pub use error::{Error, Result};
