//! Units and physical constants.
//!
//! Wavelengths are labels for photon-energy arithmetic and phase-matching
//! detuning only; no dispersion or phase is modeled. Timestamps are integer
//! picoseconds so sorting, merging and equality are exact: one picosecond is
//! well below the ~40 ps detector jitter, and 10^4 s of experiment is still
//! only 10^16 ps, comfortably inside an `i64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant times the speed of light, J·m.
///
/// Single source of truth for photon-energy arithmetic; every frozen test
/// value was computed with this constant.
pub const HC_JOULE_METER: f64 = 1.98645e-25;

/// Timestamp or duration in integer picoseconds.
pub type TimePs = i64;

pub const PS_PER_NS: i64 = 1_000;
pub const PS_PER_US: i64 = 1_000_000;
pub const PS_PER_MS: i64 = 1_000_000_000;
pub const PS_PER_S: i64 = 1_000_000_000_000;

/// Convert seconds to integer picoseconds, failing on i64 overflow.
pub fn seconds_to_ps(seconds: f64) -> Result<TimePs> {
    let ps = seconds * PS_PER_S as f64;
    if !ps.is_finite() || ps.abs() >= i64::MAX as f64 {
        return Err(Error::Domain(format!(
            "duration {seconds} s does not fit in 64-bit picoseconds"
        )));
    }
    Ok(ps.round() as TimePs)
}

pub fn ns_to_ps(ns: f64) -> TimePs {
    (ns * PS_PER_NS as f64).round() as TimePs
}

pub fn ps_to_ns(ps: TimePs) -> f64 {
    ps as f64 / PS_PER_NS as f64
}

pub fn ps_to_seconds(ps: TimePs) -> f64 {
    ps as f64 / PS_PER_S as f64
}

/// Optical wavelength in nanometers; finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WavelengthNm(f64);

impl WavelengthNm {
    pub fn new(value_nm: f64) -> Result<Self> {
        if value_nm.is_finite() && value_nm > 0.0 {
            Ok(Self(value_nm))
        } else {
            Err(Error::Domain(format!(
                "wavelength must be finite and positive, got {value_nm}"
            )))
        }
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn meters(self) -> f64 {
        self.0 * 1e-9
    }

    /// Photon energy at this wavelength, joules.
    pub fn photon_energy_joule(self) -> f64 {
        HC_JOULE_METER / self.meters()
    }
}
