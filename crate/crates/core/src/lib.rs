//! Entanglement generated by low-energy two-body quantum scattering.
//!
//! Two spinless particles prepared in a product of Gaussian momentum-space
//! wave packets scatter off each other through a short-range interaction
//! `V(x)`. After the collision the pair is entangled; the purity of the
//! one-particle reduced density matrix drops below one. At low energy the
//! deficit is governed by a single closed law,
//!
//! ```text
//! P = 1 - (c0 * sigma / hbar)^2 * E(mu1),
//! ```
//!
//! where `c0` is the scattering length of the interaction, `sigma` the
//! momentum spread of the packets, and `E(mu1)` a coefficient that depends
//! only on the mass fraction `mu1 = m1/(m1+m2)`. The coefficient is smallest
//! for equal masses and grows by more than a factor of four as the mass
//! ratio becomes extreme.
//!
//! This crate computes every ingredient of that law and cross-checks it:
//!
//! * [`model`] — Gaussian packet states, kinematic transforms and
//!   closed-form packet-distance bounds,
//! * [`quad`] — Gauss rules, nested radial-angular quadrature and a
//!   reproducible Gaussian-measure Monte-Carlo engine,
//! * [`coeff`] — the mass-ratio integrals `J`, `L`, `N` and the
//!   entanglement coefficient `E(mu1)`,
//! * [`scatlen`] — the scattering length from a zero-energy
//!   Lippmann-Schwinger solve for a user-supplied potential,
//! * [`smatrix`] — the truncated low-energy scattering matrix on a
//!   spherical-harmonic basis,
//! * [`purity`] — the purity functional evaluated three independent ways
//!   (closed formula, expansion-term quadrature, 12-dimensional Monte-Carlo),
//! * [`cli`] — the `entscat` command-line front end.
//!
//! A narrative guide with runnable examples lives in `book/`; the same
//! chapters are attached to [`guide`] so `cargo test` keeps them compiling.

// domain guards are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeff;
pub mod guide;
pub mod model;
pub mod purity;
pub mod quad;
pub mod scatlen;
pub mod smatrix;

mod vec3;

pub use quad::{Estimate, MCSpec, Method, QuadratureSpec};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the validated domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The zero-energy operator is numerically singular: the interaction is
    /// at (or extremely close to) a zero-energy resonance or bound state, so
    /// the low-energy expansion does not apply.
    #[error(
        "zero-energy resonance suspected: condition estimate {condition:.3e} \
         exceeds threshold {threshold:.1e}"
    )]
    Resonance { condition: f64, threshold: f64 },

    /// A Monte-Carlo integrand returned a non-finite value.
    #[error("non-finite integrand value at sample index {index}")]
    NonFiniteSample { index: u64 },

    /// Vector length did not match the operator dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A potential-definition file could not be parsed.
    #[error("potential file: {0}")]
    PotentialFile(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
