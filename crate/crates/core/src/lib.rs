//! Resolvent kernels and threshold behaviour of two-dimensional magnetic
//! Schrödinger operators `(i∇ + A)² + V` with Aharonov–Bohm type flux.
//!
//! Module map:
//! - [`specfun`]: Gamma, Bessel `J/Y/I/K` of real order, Kummer `M/U`.
//! - [`refop`]: partial-wave kernels of the reference operator and their
//!   threshold coefficients.
//! - [`oracle`]: ODE-shooting Green's functions and extended precision series.
//! - [`gauge`]: vector potentials, flux, Stokes and decay reports.
//! - [`expansion`]: weighted norms, threshold fits, Nyström perturbed
//!   coefficients, bound checks, Hardy probe.
//! - [`timedecay`]: propagator matrix elements by Filon quadrature and decay fits.

pub mod error;
pub mod expansion;
pub mod fit;
pub mod gauge;
pub mod oracle;
pub mod par;
pub mod quad;
pub mod refop;
pub mod specfun;
pub mod timedecay;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
