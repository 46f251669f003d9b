//! Numerical inverse spectral theory for Jacobi matrices and one-dimensional
//! Schrödinger operators.
//!
//! The crate is organised around the objects that carry spectral data:
//!
//! * [`herglotz`] – discrete measures, Stieltjes transforms, boundary values
//!   of Herglotz functions and the boundary-condition Möbius map.
//! * [`jacobi`] – finite Jacobi matrices, their spectral measures and
//!   m-functions, and recovery of the Jacobi parameters from a measure.
//! * [`rankone`] – rank-one perturbations `A + α⟨φ,·⟩φ`, including the
//!   infinite-coupling limit.
//! * [`schrodinger`] – Weyl m-functions, eigenvalue and band solvers, Green
//!   functions and heat traces for `-u'' + V u`.
//! * [`xi`] – Krein spectral shifts, xi functions and trace formulas.
//! * [`afunc`] – the A-function: forward and inverse maps, fits from
//!   m-function samples and spectral measures, and a local Borg-Marchenko
//!   decay check.
//! * [`cli`] – the `weyllab` command line front end.

pub mod afunc;
pub mod cli;
pub mod error;
pub mod herglotz;
pub mod jacobi;
pub mod linalg;
pub mod numerics;
pub mod rankone;
pub mod schrodinger;
pub mod xi;

pub use error::{Result, WeylError};
pub use num_complex::Complex64;
