//! Residual distribution discretizations of steady and unsteady 2D scalar
//! conservation laws on conformal triangulations.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds triangulations and degree-of-freedom maps,
//! * [`basis`] and [`quadrature`] provide reference-element machinery,
//! * [`space`] binds a mesh to a finite-element space with precomputed tables,
//! * [`problems`] holds fluxes, entropy pairs and numerical fluxes,
//! * [`residuals`] evaluates per-element and boundary residuals,
//! * [`entropy`] adds the element-wise entropy correction and dissipation filters,
//! * [`solver`] assembles the global residual and marches in (pseudo-)time,
//! * [`audit`] measures conservation, errors and convergence slopes,
//! * [`fvrecover`] converts between finite-volume fluxes and residuals.
//!
//! Element loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to plain iterators otherwise. Accumulation into
//! global arrays always follows element order, so both builds produce
//! bit-identical results.

pub mod audit;
pub mod basis;
pub mod entropy;
mod error;
pub mod fvrecover;
pub mod geometry;
pub mod mesh;
pub mod par;
pub mod problems;
pub mod quadrature;
pub mod residuals;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
