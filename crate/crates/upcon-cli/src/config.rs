//! One JSON document fully determines a simulated experiment.
//!
//! Sub-configs are optional: omitted blocks fall back to the
//! paper-calibrated defaults of the selected scenario (the correlation
//! scenarios, for instance, default to the bright-source/one-third-
//! background operating point). Present blocks are taken verbatim, with
//! per-field type defaults filling anything unspecified.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use upcon_core::detector::{InGaAsSpadParams, SiSpadParams};
use upcon_core::emitter::EmitterParams;
use upcon_core::physics::EfficiencyBudget;
use upcon_core::pipeline::{
    g2_paper_setup, ingaas_lifetime_defaults, G2Scenario, LifetimeScenario, ResponseScenario,
    SpectrumScenario,
};
use upcon_core::upconversion::QpmParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Budget,
    Spectrum,
    LifetimeSi,
    LifetimeIngaas,
    G2,
    G2PowerSweep,
    InstrumentResponse,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Budget => "budget",
            ScenarioKind::Spectrum => "spectrum",
            ScenarioKind::LifetimeSi => "lifetime_si",
            ScenarioKind::LifetimeIngaas => "lifetime_ingaas",
            ScenarioKind::G2 => "g2",
            ScenarioKind::G2PowerSweep => "g2_power_sweep",
            ScenarioKind::InstrumentResponse => "instrument_response",
        }
    }
}

/// On-disk scenario configuration. `scenario` and `seed` are mandatory;
/// everything else has scenario defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// Overrides the per-scenario default simulated duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    /// Number of independent seeds pooled into one histogram (correlation
    /// scenarios).
    #[serde(default = "default_pool")]
    pub pool: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter: Option<EmitterParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qpm: Option<QpmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<EfficiencyBudget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si: Option<SiSpadParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingaas: Option<InGaAsSpadParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<ResponseScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<LifetimeScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<G2Scenario>,
    #[serde(default = "default_sweep_powers")]
    pub sweep_powers_mw: Vec<f64>,
}

fn default_pool() -> u32 {
    1
}

fn default_sweep_powers() -> Vec<f64> {
    vec![25.0, 85.0, 120.0]
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            duration_s: None,
            pool: 1,
            emitter: None,
            qpm: None,
            budget: None,
            si: None,
            ingaas: None,
            spectrum: None,
            response: None,
            lifetime: None,
            g2: None,
            sweep_powers_mw: default_sweep_powers(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.pool == 0 {
            return Err("config key `pool` must be at least 1".into());
        }
        if let Some(d) = self.duration_s {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(format!("config key `duration_s` must be finite and >= 0, got {d}"));
            }
        }
        let r = self.resolve();
        r.emitter.validate().map_err(|e| format!("config key `emitter`: {e}"))?;
        r.qpm.validate().map_err(|e| format!("config key `qpm`: {e}"))?;
        r.budget.validate().map_err(|e| format!("config key `budget`: {e}"))?;
        r.si.validate().map_err(|e| format!("config key `si`: {e}"))?;
        r.ingaas.validate().map_err(|e| format!("config key `ingaas`: {e}"))?;
        if !(25.0..=120.0).contains(&r.qpm.pump_power_mw) && self.scenario != ScenarioKind::Budget
        {
            // The chain is characterized for 25–120 mW of pump.
            return Err(format!(
                "config key `qpm.pump_power_mw`: {} outside the characterized 25–120 mW range",
                r.qpm.pump_power_mw
            ));
        }
        if self.scenario == ScenarioKind::G2PowerSweep {
            if self.sweep_powers_mw.is_empty() {
                return Err("config key `sweep_powers_mw` must not be empty".into());
            }
            for &p in &self.sweep_powers_mw {
                if !(25.0..=120.0).contains(&p) {
                    return Err(format!(
                        "config key `sweep_powers_mw`: {p} outside the characterized 25–120 mW range"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fill omitted blocks with the scenario's paper defaults.
    pub fn resolve(&self) -> ResolvedConfig {
        let correlation = matches!(self.scenario, ScenarioKind::G2 | ScenarioKind::G2PowerSweep);
        let (g2_default, g2_emitter, g2_qpm, budget_default, si_default) = g2_paper_setup();
        let emitter = self.emitter.clone().unwrap_or_else(|| {
            if correlation {
                g2_emitter.clone()
            } else {
                EmitterParams::default()
            }
        });
        let qpm = self.qpm.clone().unwrap_or_else(|| {
            if correlation {
                g2_qpm.clone()
            } else {
                match self.scenario {
                    // The Si lifetime runs at the low-power operating point.
                    ScenarioKind::LifetimeSi => {
                        QpmParams { pump_power_mw: 25.5, ..QpmParams::default() }
                    }
                    ScenarioKind::InstrumentResponse => {
                        QpmParams { pump_power_mw: 25.0, ..QpmParams::default() }
                    }
                    _ => QpmParams::default(),
                }
            }
        });
        let ingaas = self
            .ingaas
            .unwrap_or_else(|| ingaas_lifetime_defaults(&emitter));
        let mut lifetime = self.lifetime.clone().unwrap_or_default();
        if let Some(d) = self.duration_s {
            lifetime.duration_s = d;
        }
        let mut g2 = self.g2.clone().unwrap_or(g2_default);
        if let Some(d) = self.duration_s {
            g2.duration_s = d;
        }
        ResolvedConfig {
            scenario: self.scenario,
            seed: self.seed,
            pool: self.pool,
            emitter,
            qpm,
            budget: self.budget.unwrap_or(budget_default),
            si: self.si.unwrap_or(si_default),
            ingaas,
            spectrum: self.spectrum.clone().unwrap_or_default(),
            response: self.response.clone().unwrap_or_default(),
            lifetime,
            g2,
            sweep_powers_mw: self.sweep_powers_mw.clone(),
        }
    }

    /// Hash of the fully resolved configuration, carried by every output
    /// for provenance checks.
    pub fn config_hash(&self) -> String {
        let resolved = self.resolve();
        let canonical = serde_json::to_string(&resolved).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A configuration with every default applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub pool: u32,
    pub emitter: EmitterParams,
    pub qpm: QpmParams,
    pub budget: EfficiencyBudget,
    pub si: SiSpadParams,
    pub ingaas: InGaAsSpadParams,
    pub spectrum: SpectrumScenario,
    pub response: ResponseScenario,
    pub lifetime: LifetimeScenario,
    pub g2: G2Scenario,
    pub sweep_powers_mw: Vec<f64>,
}
