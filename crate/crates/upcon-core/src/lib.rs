//! Monte Carlo simulator and analysis toolkit for a quantum-dot
//! single-photon source read out through frequency upconversion.
//!
//! The crate models the full measurement chain at the event level:
//!
//! * a pulsed quantum-dot emitter at 1.3 µm with per-pulse memory and an
//!   uncorrelated background component ([`emitter`]),
//! * quasi-phase-matched sum-frequency conversion to ~710 nm with its
//!   sinc² spectral acceptance, pump-power-dependent internal efficiency
//!   and anti-Stokes Raman noise ([`upconversion`]),
//! * free-running Si and gated InGaAs single-photon detectors with dead
//!   time, dark counts, jitter and afterpulsing ([`detector`]),
//! * a streaming start–stop / coincidence correlator ([`tcspc`]),
//! * spectrum, lifetime and photon-correlation analysis including the
//!   background-subtraction arithmetic ([`analysis`]),
//! * ready-made experiment pipelines tying the stages together
//!   ([`pipeline`]).
//!
//! Everything is deterministic: random decisions are drawn from
//! counter-based streams keyed by `(seed, stage, item index)`
//! ([`rng`]), so results are identical for any thread count. The
//! `parallel` feature (on by default) runs the data-parallel inner loops
//! on rayon; without it the same code paths run sequentially.

pub mod analysis;
pub mod detector;
pub mod emitter;
pub mod error;
pub mod events;
pub mod physics;
pub mod pipeline;
pub mod rng;
pub mod tcspc;
pub mod units;
pub mod upconversion;

pub use error::{Error, Result};
