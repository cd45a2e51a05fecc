//! Decoherence times of a linear ion-trap quantum computer.
//!
//! The crate computes, from physical constants and trap parameters:
//!
//! * the exact equilibrium of an ion chain and its continuum approximations,
//! * inverse-power lattice sums over the chain,
//! * the adiabatic phase picked up by a two-level system under a weak, slow drive,
//! * per-ion and aggregate vibrational decoherence rates and the radiative window,
//! * the growth of those rates with the number of ions.
//!
//! Lengths inside [`chain`], [`continuum`] and [`sums`] are dimensionless, in units of
//! the trap length `d0`. Everything else is SI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod chain;
pub mod continuum;
pub mod decoherence;
mod error;
pub mod physmodel;
pub mod scaling;
pub mod sums;

pub use adiabatic::{DriveField, SpinTrajectory};
pub use chain::{solve_equilibrium, IonChain, SolverOptions};
pub use continuum::{ContinuumModel, MJFit};
pub use decoherence::{DecoherenceReport, RateMode};
pub use error::{Error, Result};
pub use physmodel::{derive_scales, DerivedScales, IonSpecies, Multipole, TrapConfig};
pub use scaling::{LogCorrection, ScalingPolicy, ScalingSeries};
