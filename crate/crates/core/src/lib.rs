//! Survival probability, ionization rate and ejected-electron spectrum of a
//! one-dimensional delta well whose strength is modulated as `r sin(ωt)`.
//!
//! Units are ħ = 2m = g/2 = 1, so the bound state sits at energy −1 and
//! p₀ = ω₀ = 1. Two independent routes are provided:
//!
//! * [`volterra`]: time marching of the weakly singular Volterra equation for
//!   the auxiliary amplitude `Y(t)`, from which θ(t) and Θ(k, t) follow;
//! * [`lattice`] + [`resolvent`]: the Laplace-space resolvent `y(p)` built from
//!   minimal solutions of a three-term recurrence, inverted back to θ(t) on a
//!   Bromwich line.
//!
//! [`rates`] locates the resolvent pole that governs exponential decay and
//! evaluates the small-amplitude closed forms.

pub mod acceptance;
pub mod cli;
pub mod csv;
pub mod error;
pub mod fit;
pub mod kernel;
pub mod lattice;
pub mod quadrature;
pub mod rates;
pub mod resolvent;
pub mod scaled;
pub mod volterra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
