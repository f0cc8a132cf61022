//! Simulation and verification toolkit for affine actions of the free
//! two-generator semigroup on the half-line `[0, ∞)`.
//!
//! The two generators are `T0(x) = a*x` (contracting, `0 < a < 1`) and
//! `T1(x) = b*x + 1` (expanding, `b > 1`). Finite 0-1 words act by
//! composition, with the first symbol applied first. On top of that word
//! algebra the crate provides:
//!
//! * shift-invariant driving measures (Bernoulli and two-state Markov) and
//!   their Lyapunov exponents,
//! * skew-product orbits, path averages and contraction diagnostics,
//! * exact enumeration of cylinder-weighted sphere averages,
//! * the Bernoulli stationary measure as a fixed point of the transfer
//!   operator on CDFs, with closed-form moment oracles and constructive
//!   Holder certificates,
//! * Ulam-method absolutely continuous invariant densities for the
//!   associated piecewise expanding interval map, and
//! * constructive steering / universal approximation sequences.

pub mod acim;
pub mod affine;
pub mod error;
pub mod measure;
pub mod shift;
pub mod skew;
pub mod sphere;
pub mod stationary;
pub mod steering;
pub mod verify;
pub mod word;

pub use affine::{AffineMap, ExactAffineMap, SystemParams};
pub use error::Error;
pub use measure::{kolmogorov_distance, Cdf, GridMeasure, PointMassMeasure};
pub use shift::ShiftMeasure;
pub use word::Word;

pub type Result<T> = std::result::Result<T, Error>;
