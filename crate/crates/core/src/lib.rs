//! Pseudospectral simulation of the generalized derivative nonlinear
//! Schrödinger equations
//!
//! ```text
//!   ∂ₜu = i∂ₓ²u + μ|u|^α ∂ₓu          (advective form)
//!   ∂ₜu = i∂ₓ²u + μ∂ₓ(|u|^α u)        (conservative form)
//! ```
//!
//! on a large periodic box standing in for the real line, together with the
//! diagnostics needed to check the small-data local theory numerically:
//! weighted Sobolev norms, the weighted lower bound `inf ⟨x⟩^m |u|`, the
//! Duhamel/Picard construction, smoothing and interpolation inequalities.
//!
//! Module map:
//!
//! * [`grid`], [`field`], [`spectral`], [`norms`]: periodic grid, fields and
//!   Fourier multipliers.
//! * [`data`]: solitary waves, admissible data and the admissibility checks.
//! * [`evolution`]: IFRK4 and Picard–Duhamel time stepping, gauge transform,
//!   discrete residual.
//! * [`diagnostics`]: norm ledger, triple norm, energy, ball monitor, lemma
//!   checks and their corpus calibration.

pub mod corpus;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod norms;
pub mod spectral;

pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::Grid;
pub use num_complex::Complex64;
