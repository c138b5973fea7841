//! Core numerics for simulating active nematic liquid crystals in the
//! Beris-Edwards / Landau-de Gennes framework on a periodic box.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It is split
//! into:
//!
//! - [`tensor`]: pointwise algebra on symmetric traceless tensors, the bulk
//!   potential and the molecular field.
//! - [`spectral`]: the periodic grid, Fourier transforms, spectral calculus,
//!   the Leray projector, the Friedrichs truncation, the mollifier and the
//!   two-thirds dealiasing rule.
//! - [`lp`]: Littlewood-Paley partition of unity, dyadic blocks, `H^s` norms,
//!   Bony's paraproduct and empirical Bernstein / commutator / product
//!   estimates.
//! - [`dynamics`]: right-hand sides of the coupled Q-tensor / velocity system,
//!   plain or regularized (see [`tensor::Mode`]).
//! - [`integrator`]: exponential (IMEX) Runge-Kutta time stepping.
//! - [`diagnostics`]: energy ledger, dissipation identity and inequality,
//!   Gronwall envelopes and growth-bound fits.
#![no_std]

extern crate alloc;

pub mod diagnostics;
pub mod dynamics;
mod error;
mod fft;
pub mod integrator;
pub mod lp;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
