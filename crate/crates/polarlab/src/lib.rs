//! Random polarization laboratory.
//!
//! Polarization (two-point rearrangement) pushes a function toward its
//! symmetric decreasing rearrangement; iterating polarizations with
//! reflections drawn from the radially uniform pole measure converges at an
//! O(1/n) rate. This crate simulates those dynamics and verifies the rates,
//! recurrences and identities that govern them:
//!
//! * [`geom`] — points, hyperplane reflections, half-space classification and
//!   the radial pole sampler.
//! * [`rearrange`] — grid-sampled functions, the polarization operator, the
//!   symmetric decreasing (Schwarz) rearrangement and level-set profiles.
//! * [`quad`] — quadrature for the singular kernel `|x-y|^-(d-1)`: moment
//!   coefficients, kernel-ball integrals and the constants `gamma_d`,
//!   `eta_d`, `b_d`.
//! * [`ballchain`] — the exact ball dynamics: the distance chain, moment
//!   recurrences, closed forms in d=1, symmetric-difference geometry and both
//!   comparison chains (projected 1-d and order-statistic).
//! * [`harness`] — Monte Carlo driver estimating the expected L1 distance to
//!   the rearrangement per step, with the upper/lower/limsup bound checks.
//! * [`verify`] — reduced-scale verification suite and the numeric
//!   discrepancy report.

pub mod ballchain;
pub mod geom;
pub mod harness;
pub mod quad;
pub mod rearrange;
pub mod rng;
pub mod stats;
pub mod verify;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("reflection pole must not be the origin")]
    ZeroPole,
    #[error("points must be distinct")]
    CoincidentPoints,
    #[error("|x| == |y|: the reflection mapping x to y fixes the origin and has no pole")]
    OriginFixed,
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },
    #[error("grid geometries do not match")]
    GridMismatch,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("quadrature did not reach the requested tolerance: {0}")]
    Tolerance(String),
    #[error("alternating sum loses more than {digits} digits at n = {n}; reduce n")]
    Unstable { n: usize, digits: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn parameter_error(name: &'static str, message: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        message: message.into(),
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // kappa_d = (2 pi / d) * kappa_{d-2}, kappa_0 = 1, kappa_1 = 2.
    assert!(d >= 1, "dimension must be positive");
    let mut prev = 1.0; // kappa_0
    let mut cur = 2.0; // kappa_1
    for k in 2..=d {
        let next = 2.0 * std::f64::consts::PI / k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if d == 1 {
        2.0
    } else {
        cur
    }
}

/// Surface area of the unit sphere in `d` dimensions (`omega_d = d * kappa_d`).
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}
