//! Closed-form photon-energy and detection-efficiency arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::WavelengthNm;

/// Multiplicative loss/efficiency chain of the upconversion detection path.
///
/// Defaults are the measured optical losses of the reference setup:
/// WDM 0.95, PPLN coupling/transmission 0.61, beamsplitter and mirrors 0.81,
/// bandpass filter 0.85, Si SPAD quantum efficiency 0.70, peak internal
/// conversion 0.752, and a fiber-taper collection efficiency of 0.1 %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EfficiencyBudget {
    pub eta_wdm: f64,
    pub eta_ppln_coupling: f64,
    pub eta_bs_mirrors: f64,
    pub eta_bf: f64,
    pub eta_spad: f64,
    pub eta_internal_peak: f64,
    pub collection_ftw: f64,
}

impl Default for EfficiencyBudget {
    fn default() -> Self {
        Self {
            eta_wdm: 0.95,
            eta_ppln_coupling: 0.61,
            eta_bs_mirrors: 0.81,
            eta_bf: 0.85,
            eta_spad: 0.70,
            eta_internal_peak: 0.752,
            collection_ftw: 0.001,
        }
    }
}

impl EfficiencyBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_wdm", self.eta_wdm),
            ("eta_ppln_coupling", self.eta_ppln_coupling),
            ("eta_bs_mirrors", self.eta_bs_mirrors),
            ("eta_bf", self.eta_bf),
            ("eta_spad", self.eta_spad),
            ("eta_internal_peak", self.eta_internal_peak),
            ("collection_ftw", self.collection_ftw),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "efficiency budget field {name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Product of all passive losses, i.e. the chain without the internal
    /// conversion efficiency (and without collection).
    pub fn loss_product(&self) -> f64 {
        self.eta_wdm * self.eta_ppln_coupling * self.eta_bs_mirrors * self.eta_bf * self.eta_spad
    }

    /// Pre-detector transmission: everything except SPAD quantum efficiency
    /// and internal conversion.
    pub fn pre_detector_product(&self) -> f64 {
        self.eta_wdm * self.eta_ppln_coupling * self.eta_bs_mirrors * self.eta_bf
    }
}

/// Sum-frequency output wavelength: 1/λ_out = 1/λ_signal + 1/λ_pump.
pub fn sum_frequency(signal: WavelengthNm, pump: WavelengthNm) -> WavelengthNm {
    let out = 1.0 / (1.0 / signal.nm() + 1.0 / pump.nm());
    // Strictly below both inputs, so construction cannot fail.
    WavelengthNm::new(out).expect("sum-frequency output is positive and finite")
}

/// Solve the sum-frequency relation for the pump given signal and output.
pub fn pump_for_output(signal: WavelengthNm, output: WavelengthNm) -> Result<WavelengthNm> {
    let inv = 1.0 / output.nm() - 1.0 / signal.nm();
    if inv <= 0.0 {
        return Err(Error::Domain(format!(
            "output {} nm is not below signal {} nm",
            output.nm(),
            signal.nm()
        )));
    }
    WavelengthNm::new(1.0 / inv)
}

/// Optical power of a photon flux: power = rate · hc / λ.
pub fn flux_to_power(rate_hz: f64, wavelength: WavelengthNm) -> Result<f64> {
    if !(rate_hz >= 0.0) {
        return Err(Error::Domain(format!("photon rate must be >= 0, got {rate_hz}")));
    }
    Ok(rate_hz * wavelength.photon_energy_joule())
}

/// Total detection efficiency of the upconversion chain at a given internal
/// conversion efficiency.
pub fn overall_detection_efficiency(budget: &EfficiencyBudget, eta_internal: f64) -> f64 {
    budget.eta_wdm
        * budget.eta_ppln_coupling
        * eta_internal
        * budget.eta_bs_mirrors
        * budget.eta_bf
        * budget.eta_spad
}

/// Internal conversion efficiency implied by a measured overall efficiency.
///
/// Fails if the measured overall efficiency exceeds what the passive losses
/// allow (an implied internal efficiency above one).
pub fn internal_from_overall(overall: f64, budget: &EfficiencyBudget) -> Result<f64> {
    let loss = budget.loss_product();
    if loss <= 0.0 {
        return Err(Error::Domain("loss product must be positive".into()));
    }
    let internal = overall / loss;
    if internal > 1.0 {
        return Err(Error::Inconsistency(format!(
            "overall efficiency {overall} implies internal efficiency {internal} > 1"
        )));
    }
    Ok(internal)
}

/// End-to-end efficiency: fiber-taper collection times overall detection.
pub fn end_to_end_efficiency(budget: &EfficiencyBudget, overall: f64) -> f64 {
    budget.collection_ftw * overall
}
