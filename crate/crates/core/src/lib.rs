//! Numerical laboratory for the De Gregorio / gCLM model on the torus,
//! specialized to the dynamics near the first excited state `-sin 2θ`.
//!
//! The crate is organized around three views of the same dynamics:
//!
//! * [`coefficients`] — the exact rational coefficient sequences of the
//!   linearized Galerkin chain (`d_k`, `d_k - d_{k+2}`, `ε_k`) together with
//!   certified eigenvalue bounds for the 2x2 quadratic forms they generate.
//! * [`linear`] — the truncated chain ODE for the tilde-basis coefficients,
//!   its energy diagnostics and the hyperbolic comparison envelopes.
//! * [`nonlinear`] — a dealiased pseudo-spectral solver for the full model
//!   and for the perturbation system around `-sin 2θ`, plus the stability and
//!   instability experiments.
//!
//! [`series`] and [`field`] provide the basis machinery (tilde basis of the
//! weighted space, sine series, general Fourier fields on a grid), and
//! [`oracle`] holds deliberately independent reference computations used only
//! to cross-validate the fast paths.

pub mod coefficients;
pub mod error;
pub mod field;
pub mod io;
pub mod linear;
pub mod nonlinear;
pub mod oracle;
pub mod rational;
pub mod series;
pub mod verify;

pub use error::Error;
pub use rational::Rational;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
