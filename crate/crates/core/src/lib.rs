//! Simulation and analysis toolkit for a PPLN-waveguide entangled photon-pair
//! source.
//!
//! The crate is organised bottom-up:
//!
//! * [`dispersion`]: temperature-dependent Sellmeier model for MgO:LiNbO3.
//! * [`phasematch`]: quasi-phase-matching mismatch, degeneracy search and
//!   temperature tuning curves.
//! * [`biphoton`]: joint spectral amplitude, fiber dispersion phase, joint
//!   temporal amplitude and entanglement-time extraction.
//! * [`counting`]: detection-chain efficiencies, Monte Carlo click streams,
//!   coincidence counting and heralded g2.
//! * [`etpa`]: entangled two-photon absorption feasibility estimates.
//! * [`analysis`]: transmitted-rate tables, regressions and the biphoton
//!   absorption ratio.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod biphoton;
pub mod constants;
pub mod counting;
pub mod dispersion;
pub mod error;
pub mod etpa;
pub mod phasematch;
pub mod units;

pub use error::{Error, Result};
