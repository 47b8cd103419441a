//! Pulsed quantum-dot emitter at 1.3 µm.
//!
//! Each excitation pulse produces at most one quantum-dot photon (the single
//! pulse is far shorter than the radiative lifetime, so re-excitation within
//! a pulse is excluded by construction). Emission timing is the pulse time
//! plus Gaussian excitation jitter plus an exponential radiative decay.
//!
//! On top of the antibunched stream there is an uncorrelated background
//! component collected by the fiber taper, modeled as a pulse-synchronized
//! Poisson process with the same temporal envelope (a CW alternative is a
//! config switch).
//!
//! A one-variable memory `m` reproduces the incomplete recovery of the
//! coincidence peaks near zero delay: `m` jumps to 1 on emission and relaxes
//! back to 0 with time constant `mem_tau`, suppressing the emission
//! probability of the following pulses by `1 - mem_depth·m` (a two-state
//! carrier-capture surrogate).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{channel, EventStream, Origin, PhotonEvent};
use crate::rng::{CounterRng, StreamId};
use crate::units::{seconds_to_ps, TimePs, PS_PER_NS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmitterParams {
    /// Excitation repetition rate, Hz.
    pub rep_rate_hz: f64,
    /// Gaussian excitation-jitter sigma, ps.
    pub pulse_width_ps: f64,
    /// Radiative lifetime, ns.
    pub lifetime_tau_ns: f64,
    /// Per-pulse emission probability when fully armed. `None` derives it
    /// from `target_flux_fiber_hz` (memory-corrected).
    pub p_emit_sat: Option<f64>,
    /// Fraction of the emitted flux that is uncorrelated background.
    pub uncorr_fraction: f64,
    /// Depth of the per-pulse memory suppression, in [0, 1).
    pub mem_depth: f64,
    /// Relaxation time of the memory variable, ns.
    pub mem_tau_ns: f64,
    /// Target total photon flux in fiber at 1.3 µm, photons/s.
    pub target_flux_fiber_hz: f64,
    /// When true the uncorrelated component is CW (uniform in time) instead
    /// of pulse-synchronized.
    pub cw_background: bool,
}

impl Default for EmitterParams {
    fn default() -> Self {
        Self {
            rep_rate_hz: 5e7,
            pulse_width_ps: 50.0,
            lifetime_tau_ns: 1.38,
            p_emit_sat: None,
            uncorr_fraction: 0.0861,
            mem_depth: 0.12,
            mem_tau_ns: 100.0,
            target_flux_fiber_hz: 1e4,
            cw_background: false,
        }
    }
}

impl EmitterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate_hz > 0.0) {
            return Err(Error::Config("rep_rate_hz must be positive".into()));
        }
        if !(self.lifetime_tau_ns > 0.0) {
            return Err(Error::Config("lifetime_tau_ns must be positive".into()));
        }
        if !(self.mem_tau_ns > 0.0) {
            return Err(Error::Config("mem_tau_ns must be positive".into()));
        }
        if self.pulse_width_ps < 0.0 {
            return Err(Error::Config("pulse_width_ps must be >= 0".into()));
        }
        for (name, v, hi) in [
            ("uncorr_fraction", self.uncorr_fraction, 1.0),
            ("mem_depth", self.mem_depth, 1.0),
        ] {
            if !(0.0..=hi).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, {hi}], got {v}")));
            }
        }
        if let Some(p) = self.p_emit_sat {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("p_emit_sat must lie in [0, 1], got {p}")));
            }
        }
        if self.target_flux_fiber_hz < 0.0 {
            return Err(Error::Config("target_flux_fiber_hz must be >= 0".into()));
        }
        if self.mean_total_per_pulse() > 1.0 {
            return Err(Error::Config(
                "target flux exceeds one photon per pulse; reduce target_flux_fiber_hz".into(),
            ));
        }
        Ok(())
    }

    /// Pulse period quantized to integer picoseconds.
    pub fn period_ps(&self) -> TimePs {
        (1e12 / self.rep_rate_hz).round() as TimePs
    }

    fn mean_total_per_pulse(&self) -> f64 {
        self.target_flux_fiber_hz / self.rep_rate_hz
    }

    /// Mean quantum-dot emissions per pulse implied by the target flux.
    pub fn qd_mean_per_pulse(&self) -> f64 {
        (1.0 - self.uncorr_fraction) * self.mean_total_per_pulse()
    }

    /// Mean uncorrelated-background photons per pulse.
    pub fn uncorr_mean_per_pulse(&self) -> f64 {
        self.uncorr_fraction * self.mean_total_per_pulse()
    }

    /// Per-pulse decay factor of the memory variable.
    pub fn memory_decay_per_pulse(&self) -> f64 {
        (-(self.period_ps() as f64) / (self.mem_tau_ns * PS_PER_NS as f64)).exp()
    }

    /// Saturated per-pulse emission probability. When not set explicitly it
    /// is calibrated so the memory-suppressed mean matches the target flux:
    /// the stationary memory mean is `m̄ ≈ γ·p̄/(1−γ)` with `γ` the
    /// per-pulse decay, so `p_sat = p̄ / (1 − mem_depth·m̄)`.
    pub fn effective_p_emit_sat(&self) -> f64 {
        if let Some(p) = self.p_emit_sat {
            return p;
        }
        let target = self.qd_mean_per_pulse();
        let gamma = self.memory_decay_per_pulse();
        let m_bar = gamma * target / (1.0 - gamma);
        (target / (1.0 - self.mem_depth * m_bar)).min(1.0)
    }

    /// Closed-form second-order correlation at zero delay for the mixed
    /// stream: with signal purity `p = 1 − uncorr_fraction` and a Poissonian
    /// background, g²(0) = 1 − p² (the quantum-dot component contributes no
    /// same-pulse pairs).
    pub fn true_g2_zero(&self) -> f64 {
        let p = 1.0 - self.uncorr_fraction;
        1.0 - p * p
    }
}

/// Candidate pulse chain: visits pulses selected by a Bernoulli(`p`) process
/// using geometric skips, so the cost is proportional to the number of
/// candidates rather than the number of pulses. Draws are keyed by the pulse
/// index at which they are made, which makes the chain deterministic.
struct PulseChain {
    seed: u64,
    stream: StreamId,
    log_q: f64, // ln(1 - p)
    next: i64,
    n_pulses: i64,
}

impl PulseChain {
    fn new(seed: u64, stream: StreamId, p: f64, n_pulses: i64) -> Self {
        let mut chain = Self { seed, stream, log_q: (1.0 - p).ln(), next: 0, n_pulses };
        if p <= 0.0 {
            chain.next = n_pulses; // never fires
        } else if p >= 1.0 {
            chain.log_q = f64::NEG_INFINITY;
        } else {
            chain.advance_from(0);
        }
        chain
    }

    /// Geometric skip: number of failures before the next success.
    fn advance_from(&mut self, from: i64) {
        if self.log_q == f64::NEG_INFINITY {
            self.next = from;
            return;
        }
        let mut rng = CounterRng::keyed(self.seed, self.stream, from as u64);
        let skip = (rng.uniform_open().ln() / self.log_q).floor() as i64;
        self.next = from.saturating_add(skip);
    }
}

impl Iterator for PulseChain {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        if self.next >= self.n_pulses {
            return None;
        }
        let hit = self.next;
        self.advance_from(hit + 1);
        Some(hit)
    }
}

/// Generate the 1.3 µm photon stream of the pulsed quantum dot.
pub fn generate_emission(params: &EmitterParams, duration_s: f64, seed: u64) -> Result<EventStream> {
    params.validate()?;
    if !(duration_s >= 0.0) {
        return Err(Error::Domain(format!("duration must be >= 0, got {duration_s} s")));
    }
    let duration_ps = seconds_to_ps(duration_s)?;
    let period = params.period_ps();
    let n_pulses = duration_ps / period;
    let tau_ps = params.lifetime_tau_ns * PS_PER_NS as f64;
    let jitter_ps = params.pulse_width_ps;
    let p_sat = params.effective_p_emit_sat();
    let mem_depth = params.mem_depth;
    let gamma = params.memory_decay_per_pulse();

    let mut events: Vec<PhotonEvent> = Vec::new();

    // Quantum-dot photons: candidate pulses at the saturated probability,
    // thinned by the memory factor in a single sequential pass. Rejected
    // candidates do not touch the memory, so skipping non-candidate pulses
    // is exact.
    let mut last_emit: Option<i64> = None;
    for k in PulseChain::new(seed, StreamId::EmitterQdChain, p_sat, n_pulses) {
        let mut rng = CounterRng::keyed(seed, StreamId::EmitterQdDraws, k as u64);
        let accept = rng.uniform();
        let m_k = match last_emit {
            // m jumps to 1 on emission and then decays once per period.
            Some(e) => gamma.powi((k - e) as i32),
            None => 0.0,
        };
        if accept < 1.0 - mem_depth * m_k {
            let t = emission_time(k, period, jitter_ps, tau_ps, &mut rng);
            events.push(PhotonEvent::new(t, channel::SIGNAL, Origin::Qd));
            last_emit = Some(k);
        }
    }

    // Uncorrelated background.
    let u = params.uncorr_mean_per_pulse();
    if u > 0.0 {
        if params.cw_background {
            // Homogeneous Poisson over the scenario, drawn per one-second
            // bucket so the stream is independent of any partitioning.
            let rate_hz = params.uncorr_fraction * params.target_flux_fiber_hz;
            push_homogeneous(
                &mut events,
                rate_hz,
                duration_ps,
                seed,
                StreamId::EmitterUncorrChain,
                channel::SIGNAL,
                Origin::Uncorrelated,
            );
        } else {
            let p_any = 1.0 - (-u).exp();
            for k in PulseChain::new(seed, StreamId::EmitterUncorrChain, p_any, n_pulses) {
                let mut rng = CounterRng::keyed(seed, StreamId::EmitterUncorrDraws, k as u64);
                let n = poisson_at_least_one(u, &mut rng);
                for _ in 0..n {
                    let t = emission_time(k, period, jitter_ps, tau_ps, &mut rng);
                    events.push(PhotonEvent::new(t, channel::SIGNAL, Origin::Uncorrelated));
                }
            }
        }
    }

    Ok(EventStream::from_unsorted(events, duration_ps))
}

fn emission_time(
    pulse_index: i64,
    period: TimePs,
    jitter_ps: f64,
    tau_ps: f64,
    rng: &mut CounterRng,
) -> TimePs {
    let jitter = if jitter_ps > 0.0 { gaussian(rng) * jitter_ps } else { 0.0 };
    let decay = rng.exponential(tau_ps);
    pulse_index * period + (jitter + decay).round() as TimePs
}

/// Box–Muller standard normal (two uniforms per draw; the spare is dropped
/// to keep the per-key draw count fixed).
#[inline]
pub(crate) fn gaussian(rng: &mut CounterRng) -> f64 {
    let u1 = rng.uniform_open();
    let u2 = rng.uniform();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Poisson(mean) conditioned on being >= 1, by sequential inversion.
fn poisson_at_least_one(mean: f64, rng: &mut CounterRng) -> u32 {
    let p_zero = (-mean).exp();
    let mut u = p_zero + rng.uniform() * (1.0 - p_zero);
    let mut n = 0u32;
    let mut term = p_zero;
    let mut cum = p_zero;
    while u > cum && n < 64 {
        n += 1;
        term *= mean / n as f64;
        cum += term;
        if term < f64::MIN_POSITIVE {
            break;
        }
        u = u.min(1.0);
    }
    n.max(1)
}

/// Unconditioned Poisson by inversion; suitable for small means.
pub(crate) fn poisson_small(mean: f64, rng: &mut CounterRng) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let u = rng.uniform();
    let mut term = (-mean).exp();
    let mut cum = term;
    let mut n = 0u32;
    while u > cum && n < 1_000 {
        n += 1;
        term *= mean / n as f64;
        cum += term;
    }
    n
}

/// Append a homogeneous Poisson stream drawn per one-second bucket.
pub(crate) fn push_homogeneous(
    events: &mut Vec<PhotonEvent>,
    rate_hz: f64,
    duration_ps: TimePs,
    seed: u64,
    stream: StreamId,
    channel: u8,
    origin: Origin,
) {
    if rate_hz <= 0.0 || duration_ps <= 0 {
        return;
    }
    const BUCKET_PS: TimePs = crate::units::PS_PER_S;
    let n_buckets = (duration_ps + BUCKET_PS - 1) / BUCKET_PS;
    for b in 0..n_buckets {
        let start = b * BUCKET_PS;
        let width = BUCKET_PS.min(duration_ps - start);
        let mean = rate_hz * width as f64 / crate::units::PS_PER_S as f64;
        let mut rng = CounterRng::keyed(seed, stream, b as u64);
        let n = sample_poisson(mean, &mut rng);
        for _ in 0..n {
            let t = start + (rng.uniform() * width as f64) as TimePs;
            events.push(PhotonEvent::new(t, channel, origin));
        }
    }
}

/// Poisson sampler valid for any mean: inversion below 30, PTRS-free normal
/// approximation is avoided — large means use rand_distr's exact sampler.
pub(crate) fn sample_poisson(mean: f64, rng: &mut CounterRng) -> u64 {
    if mean <= 0.0 {
        0
    } else if mean < 30.0 {
        poisson_small(mean, rng) as u64
    } else {
        use rand_distr::Distribution;
        let dist = rand_distr::Poisson::new(mean).expect("positive finite mean");
        dist.sample(rng) as u64
    }
}
