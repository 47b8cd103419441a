//! Quasi-phase-matched sum-frequency conversion of the 1.3 µm stream to
//! ~710 nm: spectral acceptance, pump-power-dependent internal efficiency,
//! the passive loss chain, and anti-Stokes Raman noise injection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventStream, Origin, PhotonEvent};
use crate::physics::EfficiencyBudget;
use crate::rng::{CounterRng, StreamId};

/// Half-max abscissa of sinc²: sinc²(x) = 1/2 at x = 1.39155737825151, so a
/// response sinc²(2x₀·Δλ/FWHM) has exactly the configured full width.
pub const SINC2_HALF_MAX_X: f64 = 1.391_557_378_251_51;

/// First sidelobe of sinc² sits at the root of tan x = x.
pub const SINC2_SIDELOBE_X: f64 = 4.493_409_457_909_064;

/// Peak value of the first sinc² sidelobe (≈ 4.72 % of the main peak).
pub const SINC2_SIDELOBE_VALUE: f64 = 0.047_190_449_225_811_28;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpmParams {
    /// Current pump wavelength, nm.
    pub pump_wavelength_nm: f64,
    /// Signal wavelength phase-matched when the pump sits at `pump_ref_nm`.
    pub qpm_center_at_ref_nm: f64,
    /// Reference pump wavelength for the center map, nm.
    pub pump_ref_nm: f64,
    /// d(center)/d(pump), dimensionless.
    pub center_slope: f64,
    /// Spectral acceptance full width at half maximum, nm.
    pub acceptance_fwhm_nm: f64,
    /// Operating pump power, mW.
    pub pump_power_mw: f64,
    /// Pump power of maximum internal conversion, mW.
    pub p_peak_mw: f64,
    /// Internal conversion efficiency at `p_peak_mw`.
    pub eta_internal_peak: f64,
    /// Anti-Stokes Raman coefficient, detected counts/s per mW with the
    /// reference 20 nm bandpass filter.
    pub asr_coeff_hz_per_mw: f64,
    /// Bandpass filter width in front of the detector, nm.
    pub filter_bandwidth_nm: f64,
}

impl Default for QpmParams {
    fn default() -> Self {
        Self {
            pump_wavelength_nm: 1556.8,
            qpm_center_at_ref_nm: 1302.6,
            pump_ref_nm: 1556.8,
            center_slope: -1.0,
            acceptance_fwhm_nm: 0.35,
            pump_power_mw: 85.0,
            p_peak_mw: 85.0,
            eta_internal_peak: 0.752,
            asr_coeff_hz_per_mw: 11.2,
            filter_bandwidth_nm: 20.0,
        }
    }
}

impl QpmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.acceptance_fwhm_nm > 0.0) {
            return Err(Error::Config("acceptance_fwhm_nm must be positive".into()));
        }
        if !(self.p_peak_mw > 0.0) {
            return Err(Error::Config("p_peak_mw must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.eta_internal_peak) {
            return Err(Error::Config("eta_internal_peak must lie in [0, 1]".into()));
        }
        if self.pump_power_mw < 0.0 {
            return Err(Error::Config("pump_power_mw must be >= 0".into()));
        }
        if self.asr_coeff_hz_per_mw < 0.0 {
            return Err(Error::Config("asr_coeff_hz_per_mw must be >= 0".into()));
        }
        if !(self.filter_bandwidth_nm > 0.0) {
            return Err(Error::Config("filter_bandwidth_nm must be positive".into()));
        }
        Ok(())
    }

    /// Phase-matched signal wavelength for a given pump wavelength. The map
    /// is linear with configurable slope; only the reference pairing is
    /// anchored by measurement.
    pub fn qpm_center_nm(&self, pump_nm: f64) -> f64 {
        self.qpm_center_at_ref_nm + self.center_slope * (pump_nm - self.pump_ref_nm)
    }
}

/// sinc² spectral acceptance, normalized to 1 at zero detuning and scaled so
/// the full width at half maximum equals `acceptance_fwhm_nm`.
pub fn qpm_transfer(detuning_nm: f64, acceptance_fwhm_nm: f64) -> f64 {
    debug_assert!(acceptance_fwhm_nm > 0.0);
    let x = 2.0 * SINC2_HALF_MAX_X * detuning_nm / acceptance_fwhm_nm;
    if x.abs() < 1e-9 {
        return 1.0;
    }
    let s = x.sin() / x;
    s * s
}

/// Internal conversion efficiency vs pump power: the standard
/// depletion-free SFG law `η_peak·sin²((π/2)·√(P/P_peak))`, anchored to the
/// measured maximum.
pub fn internal_efficiency(pump_power_mw: f64, params: &QpmParams) -> f64 {
    debug_assert!(pump_power_mw >= 0.0);
    let arg = std::f64::consts::FRAC_PI_2 * (pump_power_mw / params.p_peak_mw).sqrt();
    params.eta_internal_peak * arg.sin().powi(2)
}

/// Detected anti-Stokes Raman background rate, linear in pump power and in
/// the detector bandpass width.
pub fn asr_background_rate(pump_power_mw: f64, params: &QpmParams) -> f64 {
    debug_assert!(pump_power_mw >= 0.0);
    params.asr_coeff_hz_per_mw * pump_power_mw * (params.filter_bandwidth_nm / 20.0)
}

/// Detected signal-to-background count ratio at a given pump power:
/// signal flux times overall efficiency over (ASR + detector dark counts).
/// Returns infinity when the background vanishes.
pub fn signal_to_background(
    pump_power_mw: f64,
    signal_flux_fiber_hz: f64,
    params: &QpmParams,
    budget: &EfficiencyBudget,
    dark_rate_hz: f64,
) -> f64 {
    let eta = internal_efficiency(pump_power_mw, params);
    let signal = signal_flux_fiber_hz * crate::physics::overall_detection_efficiency(budget, eta);
    let background = asr_background_rate(pump_power_mw, params) + dark_rate_hz;
    if background <= 0.0 {
        return f64::INFINITY;
    }
    signal / background
}

/// Transform a 1.3 µm stream into the pre-detector 710 nm stream.
///
/// Each input event survives independently with probability
/// `η_wdm·η_ppln·η_internal(P)·sinc²(detuning)·η_bs·η_bf`; anti-Stokes Raman
/// noise is injected as a homogeneous Poisson process whose rate is referred
/// back to pre-detector flux (`asr rate / η_spad`) so the detector quantum
/// efficiency applies exactly once, downstream.
pub fn convert_stream(
    input: &EventStream,
    params: &QpmParams,
    budget: &EfficiencyBudget,
    line_wavelengths_nm: &BTreeMap<u8, f64>,
    seed: u64,
) -> Result<EventStream> {
    params.validate()?;
    budget.validate()?;

    let center = params.qpm_center_nm(params.pump_wavelength_nm);
    let eta_int = internal_efficiency(params.pump_power_mw, params);
    let passive = budget.pre_detector_product();

    // Per-channel survival probability.
    let mut survival: BTreeMap<u8, f64> = BTreeMap::new();
    for (&ch, &line_nm) in line_wavelengths_nm {
        let transfer = qpm_transfer(line_nm - center, params.acceptance_fwhm_nm);
        survival.insert(ch, passive * eta_int * transfer);
    }
    for e in input.events() {
        if !survival.contains_key(&e.channel) {
            return Err(Error::Config(format!(
                "no wavelength mapped for channel {}",
                e.channel
            )));
        }
    }

    // Independent per-event thinning keyed by event index.
    let survivors = thin_events(input.events(), seed, &survival);

    // ASR injection, referred to pre-detector flux.
    let mut asr_events = Vec::new();
    if budget.eta_spad <= 0.0 {
        if asr_background_rate(params.pump_power_mw, params) > 0.0 {
            return Err(Error::Config(
                "eta_spad must be positive to refer ASR rate to pre-detector flux".into(),
            ));
        }
    } else {
        let rate = asr_background_rate(params.pump_power_mw, params) / budget.eta_spad;
        crate::emitter::push_homogeneous(
            &mut asr_events,
            rate,
            input.duration(),
            seed,
            StreamId::ConvertAsr,
            crate::events::channel::SIGNAL,
            Origin::Asr,
        );
    }
    let survivors = EventStream::new(survivors, input.duration())?;
    let asr = EventStream::from_unsorted(asr_events, input.duration());
    survivors.merge(&asr)
}

fn thin_events(
    events: &[PhotonEvent],
    seed: u64,
    survival: &BTreeMap<u8, f64>,
) -> Vec<PhotonEvent> {
    let keep = |(idx, e): (usize, &PhotonEvent)| -> Option<PhotonEvent> {
        let p = survival[&e.channel];
        let mut rng = CounterRng::keyed(seed, StreamId::ConvertThin, idx as u64);
        rng.bernoulli(p).then_some(*e)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        events.par_iter().enumerate().filter_map(keep).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        events.iter().enumerate().filter_map(keep).collect()
    }
}
