//! Numerical core for shear-flow mixing at small diffusivity.
//!
//! The crate models the x-Fourier mode equation
//! `∂_t f + i k b(y) f = κ (∂_y² − k²) f` on the periodic interval and the
//! associated non-self-adjoint operators `L_ε = ε ∂_y² − i b(y)` and
//! `A_ε = −ε ∂_y² + α − σ₀ ε^{(N+1)/(N+3)} + i (b(y) − λ)`.
//!
//! Modules:
//!
//! * [`profiles`]: shear profiles, critical points, the regularized derivative `|B′|`.
//! * [`fourier`]: periodic grids, FFT-backed fields, Sobolev norms, operator assembly.
//! * [`evolution`]: exact-substep Strang splitting, diagnostics and decay fits.
//! * [`spectral`]: dense and shift-invert eigensolvers, slow-mode windows, projections.
//! * [`hermite`] and [`asymptotics`]: Hermite functions and the high-order
//!   eigenvalue expansion around non-degenerate critical points.
//! * [`resolvent`]: Airy-type kernels, envelope bounds, functional inequalities and
//!   the Laplace representation of the semigroup.
//!
//! Everything here is `no_std` + `alloc`; IO, configuration and parallel sweeps live
//! in the companion `shearmix` crate.

#![no_std]
// When dev-dependencies pull std into the graph its inherent float methods shadow
// `num_traits::Float`, leaving the trait imports unused in those builds only.
#![allow(unused_imports)]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod fit;
pub mod fourier;
pub mod hermite;
pub mod linalg;
pub mod profiles;
pub mod resolvent;
pub mod spectral;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub(crate) const TAU: f64 = core::f64::consts::TAU;
pub(crate) const PI: f64 = core::f64::consts::PI;

/// `x` reduced to `[0, period)`.
pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x % period;
    if r < 0.0 {
        r + period
    } else {
        r
    }
}
