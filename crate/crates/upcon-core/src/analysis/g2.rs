//! Second-order correlation extraction from coincidence histograms:
//! pulsed-peak integration, flat-background subtraction, and shot-noise
//! error propagation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tcspc::CorrelationHistogram;
use crate::units::TimePs;

/// Windows steering the peak/background bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct G2Windows {
    /// Excitation repetition period (peak spacing).
    pub rep_period_ps: TimePs,
    /// Half-width of the integration window around each peak center.
    pub peak_half_window_ps: TimePs,
    /// Peaks at least this far from zero delay normalize g²(0), keeping the
    /// memory-suppressed near peaks out of the reference.
    pub far_peak_min_delay_ps: TimePs,
    /// Background bins must be farther than this from every peak center;
    /// at 8.2 ns the residual decay contribution is ~0.3 %.
    pub bg_exclusion_ps: TimePs,
}

impl Default for G2Windows {
    fn default() -> Self {
        Self {
            rep_period_ps: 20_000,
            peak_half_window_ps: 2_000,
            far_peak_min_delay_ps: 60_000,
            bg_exclusion_ps: 8_200,
        }
    }
}

impl G2Windows {
    pub fn validate(&self) -> Result<()> {
        if self.rep_period_ps <= 0 {
            return Err(Error::Config("rep_period_ps must be positive".into()));
        }
        if self.peak_half_window_ps <= 0 || self.peak_half_window_ps >= self.rep_period_ps / 2 {
            return Err(Error::Config(
                "peak_half_window_ps must lie in (0, rep_period/2)".into(),
            ));
        }
        if self.bg_exclusion_ps <= self.peak_half_window_ps {
            return Err(Error::Config(
                "bg_exclusion_ps must exceed peak_half_window_ps".into(),
            ));
        }
        Ok(())
    }
}

/// Integrated area of one coincidence peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakArea {
    /// Peak order: delay = k · rep_period.
    pub k: i64,
    /// Window sum before background subtraction.
    pub raw: f64,
    /// Window sum minus background_per_bin × window bins.
    pub subtracted: f64,
    pub n_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    /// Background-subtracted g²(0), normalized by the far peaks.
    pub g2_zero: f64,
    /// Propagated shot-noise error on `g2_zero`.
    pub err: f64,
    /// Zero-peak to mean satellite ratio before any subtraction.
    pub raw_suppression: f64,
    pub raw_err: f64,
    /// Estimated flat background per bin.
    pub background_per_bin: f64,
    pub peak_areas: Vec<PeakArea>,
    pub n_far_peaks: usize,
    /// Set when a negative zero-peak area was clamped to zero.
    pub clamped: bool,
}

/// Extract g²(0) from a symmetric coincidence histogram.
///
/// 1. The flat background per bin is the mean over bins farther than
///    `bg_exclusion` from every peak center.
/// 2. Peak areas are window sums minus that background.
/// 3. `raw_suppression` compares the zero peak to the mean of all other
///    peaks before subtraction.
/// 4. `g2_zero` compares the subtracted zero peak to the mean of the far
///    subtracted peaks.
/// 5. Errors propagate the zero-peak shot noise, the empirical scatter of
///    the far-peak areas, and the background-estimate shot noise.
pub fn extract_g2(hist: &CorrelationHistogram, windows: &G2Windows) -> Result<G2Result> {
    windows.validate()?;
    let cfg = hist.config();
    let period = windows.rep_period_ps;
    if cfg.range_start_ps > -8 * period || cfg.range_end_ps < 8 * period {
        return Err(Error::Precondition(
            "histogram must span at least 8 repetition periods on each side".into(),
        ));
    }

    // Peaks whose full window fits inside the histogram.
    let w = windows.peak_half_window_ps as f64;
    let k_min = (-((cfg.range_start_ps.abs() as f64 - w) / period as f64)).ceil() as i64;
    let k_max = ((cfg.range_end_ps as f64 - w) / period as f64).floor() as i64;
    if k_min > 0 || k_max < 0 {
        return Err(Error::Precondition("histogram does not contain the zero peak".into()));
    }

    // Single pass: classify every bin by distance to the nearest peak center.
    let mut bg_sum = 0.0f64;
    let mut bg_bins = 0usize;
    let mut peaks: Vec<PeakArea> = (k_min..=k_max)
        .map(|k| PeakArea { k, raw: 0.0, subtracted: 0.0, n_bins: 0 })
        .collect();
    for (i, &c) in hist.counts().iter().enumerate() {
        let center = cfg.bin_center_ps(i);
        let nearest_k = (center / period as f64).round() as i64;
        let dist = (center - nearest_k as f64 * period as f64).abs();
        if dist <= w {
            if let Some(p) = peaks.get_mut((nearest_k - k_min) as usize) {
                if p.k == nearest_k {
                    p.raw += c as f64;
                    p.n_bins += 1;
                }
            }
        } else if dist > windows.bg_exclusion_ps as f64 {
            bg_sum += c as f64;
            bg_bins += 1;
        }
    }
    if bg_bins == 0 {
        return Err(Error::Precondition("no background bins outside the exclusion zones".into()));
    }
    let background_per_bin = bg_sum / bg_bins as f64;
    // Poisson variance of the per-bin background estimate.
    let var_bg_per_bin = bg_sum.max(1.0) / (bg_bins as f64 * bg_bins as f64);

    for p in peaks.iter_mut() {
        p.subtracted = p.raw - background_per_bin * p.n_bins as f64;
    }

    let zero = *peaks
        .iter()
        .find(|p| p.k == 0)
        .ok_or_else(|| Error::Precondition("zero peak missing".into()))?;

    // Raw suppression over every non-zero peak.
    let others: Vec<&PeakArea> = peaks.iter().filter(|p| p.k != 0).collect();
    if others.is_empty() {
        return Err(Error::Precondition("no satellite peaks in range".into()));
    }
    let raw_sum: f64 = others.iter().map(|p| p.raw).sum();
    let raw_mean = raw_sum / others.len() as f64;
    let raw_suppression = if raw_mean > 0.0 { zero.raw / raw_mean } else { f64::NAN };
    let raw_err = if zero.raw > 0.0 && raw_sum > 0.0 {
        raw_suppression * (1.0 / zero.raw + 1.0 / raw_sum).sqrt()
    } else {
        f64::NAN
    };

    // Far peaks for the g²(0) normalization.
    let far: Vec<&PeakArea> = peaks
        .iter()
        .filter(|p| p.k != 0 && (p.k.abs() * period) >= windows.far_peak_min_delay_ps)
        .collect();
    if far.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 far peaks beyond {} ps, found {}",
            windows.far_peak_min_delay_ps,
            far.len()
        )));
    }
    let n_far = far.len() as f64;
    let far_mean = far.iter().map(|p| p.subtracted).sum::<f64>() / n_far;
    if far_mean <= 0.0 {
        return Err(Error::Inconsistency(
            "far peaks carry no counts above background; cannot normalize".into(),
        ));
    }
    let far_std = (far
        .iter()
        .map(|p| (p.subtracted - far_mean) * (p.subtracted - far_mean))
        .sum::<f64>()
        / (n_far - 1.0))
        .sqrt();

    let mut clamped = false;
    let mut a0 = zero.subtracted;
    if a0 < 0.0 {
        a0 = 0.0;
        clamped = true;
    }
    let g2_zero = a0 / far_mean;
    let n_far_peaks = far.len();

    // Error terms: zero-peak shot noise, background-estimate shot noise on
    // the zero window, and the empirical far-peak scatter.
    let sigma_a0 =
        (zero.raw.max(1.0) + (zero.n_bins as f64 * zero.n_bins as f64) * var_bg_per_bin).sqrt();
    let sigma_mean_far = far_std / n_far.sqrt();
    let err = if a0 > 0.0 {
        g2_zero * ((sigma_a0 / a0).powi(2) + (sigma_mean_far / far_mean).powi(2)).sqrt()
    } else {
        sigma_a0 / far_mean
    };
    drop(far);
    drop(others);

    Ok(G2Result {
        g2_zero,
        err,
        raw_suppression,
        raw_err,
        background_per_bin,
        peak_areas: peaks,
        n_far_peaks,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{CounterRng, StreamId};
    use crate::tcspc::{coincidence_histogram, HistogramConfig, HistogramMode};
    use crate::units::PS_PER_S;

    fn symmetric_cfg() -> HistogramConfig {
        HistogramConfig::new(250, -410_000, 410_000, HistogramMode::AllPairs).unwrap()
    }

    /// Ideal pulsed antibunched source seen by two arms: a photon goes to
    /// exactly one arm per pulse, so the zero peak is empty.
    #[test]
    fn ideal_antibunched_source_gives_zero() {
        let period = 20_000i64;
        let n_pulses = 400_000i64;
        let mut rng = CounterRng::keyed(1, StreamId::TestOnly, 0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 0..n_pulses {
            if rng.uniform() < 0.05 {
                let t = k * period + rng.exponential(1_380.0) as i64;
                if rng.uniform() < 0.5 {
                    a.push(t);
                } else {
                    b.push(t);
                }
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        let h = coincidence_histogram(&a, &b, &symmetric_cfg(), n_pulses * period).unwrap();
        let r = extract_g2(&h, &G2Windows::default()).unwrap();
        assert!(r.g2_zero < 3.0 * r.err.max(1e-3), "g2 {} err {}", r.g2_zero, r.err);
        assert!(r.raw_suppression < 0.02, "raw {}", r.raw_suppression);
    }

    /// Pulse-synchronized Poisson light is uncorrelated: every peak equal,
    /// g².(0) consistent with 1.
    #[test]
    fn pulsed_poisson_source_gives_unity() {
        let period = 20_000i64;
        let n_pulses = 1_500_000i64;
        let mut rng = CounterRng::keyed(2, StreamId::TestOnly, 0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mean = 0.05f64;
        for k in 0..n_pulses {
            for arm in [&mut a, &mut b] {
                let n = crate::emitter::sample_poisson(mean, &mut rng);
                for _ in 0..n {
                    arm.push(k * period + rng.exponential(1_380.0) as i64);
                }
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        let h = coincidence_histogram(&a, &b, &symmetric_cfg(), n_pulses * period).unwrap();
        let r = extract_g2(&h, &G2Windows::default()).unwrap();
        assert!(
            (r.g2_zero - 1.0).abs() < 4.0 * r.err,
            "g2 {} +- {} not consistent with 1",
            r.g2_zero,
            r.err
        );
    }

    /// Two independent homogeneous Poisson streams: a flat histogram, all
    /// raw peak areas statistically equal.
    #[test]
    fn homogeneous_poisson_streams_have_flat_peaks() {
        let duration = 20 * PS_PER_S;
        let mut rng = CounterRng::keyed(3, StreamId::TestOnly, 0);
        let r1 = 3_000.0;
        let r2 = 2_500.0;
        let mut a: Vec<TimePs> = (0..(r1 * 20.0) as usize)
            .map(|_| (rng.uniform() * duration as f64) as TimePs)
            .collect();
        let mut b: Vec<TimePs> = (0..(r2 * 20.0) as usize)
            .map(|_| (rng.uniform() * duration as f64) as TimePs)
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        let cfg = symmetric_cfg();
        let h = coincidence_histogram(&a, &b, &cfg, duration).unwrap();
        // Analytic accidental rate per bin.
        let per_bin = r1 * r2 * 20.0 * (cfg.bin_width_ps as f64 / PS_PER_S as f64);
        let n_bins = cfg.bin_count() as f64;
        let total = h.total_counts() as f64;
        assert!(
            (total - per_bin * n_bins).abs() < 4.0 * (per_bin * n_bins).sqrt(),
            "flat floor total {total} vs {}",
            per_bin * n_bins
        );
        let r = extract_g2(&h, &G2Windows::default()).unwrap();
        assert!(
            (r.raw_suppression - 1.0).abs() < 4.0 * r.raw_err,
            "raw {} +- {}",
            r.raw_suppression,
            r.raw_err
        );
        // Background estimate matches the analytic floor.
        assert!((r.background_per_bin - per_bin).abs() < 4.0 * per_bin.sqrt());
    }

    #[test]
    fn flat_offset_leaves_g2_unchanged() {
        // Build a pulsed source histogram, then add a constant to every bin.
        let period = 20_000i64;
        let n_pulses = 500_000i64;
        let mut rng = CounterRng::keyed(4, StreamId::TestOnly, 0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 0..n_pulses {
            for arm in [&mut a, &mut b] {
                if rng.uniform() < 0.04 {
                    arm.push(k * period + rng.exponential(1_380.0) as i64);
                }
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        let cfg = symmetric_cfg();
        let h = coincidence_histogram(&a, &b, &cfg, n_pulses * period).unwrap();
        let base = extract_g2(&h, &G2Windows::default()).unwrap();
        let lifted_counts: Vec<u64> = h.counts().iter().map(|&c| c + 37).collect();
        let lifted = CorrelationHistogram::from_parts_for_tests(
            cfg,
            lifted_counts,
            h.n_starts,
            h.n_stops,
            h.duration_ps,
        );
        let shifted = extract_g2(&lifted, &G2Windows::default()).unwrap();
        assert!(
            (base.g2_zero - shifted.g2_zero).abs() < 1e-9,
            "{} vs {}",
            base.g2_zero,
            shifted.g2_zero
        );
    }

    #[test]
    fn integer_rescaling_preserves_g2() {
        let period = 20_000i64;
        let n_pulses = 300_000i64;
        let mut rng = CounterRng::keyed(5, StreamId::TestOnly, 0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 0..n_pulses {
            for arm in [&mut a, &mut b] {
                if rng.uniform() < 0.05 {
                    arm.push(k * period + rng.exponential(1_380.0) as i64);
                }
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        let cfg = symmetric_cfg();
        let h = coincidence_histogram(&a, &b, &cfg, n_pulses * period).unwrap();
        let base = extract_g2(&h, &G2Windows::default()).unwrap();
        let scaled_counts: Vec<u64> = h.counts().iter().map(|&c| c * 5).collect();
        let scaled = CorrelationHistogram::from_parts_for_tests(
            cfg,
            scaled_counts,
            h.n_starts,
            h.n_stops,
            h.duration_ps,
        );
        let s = extract_g2(&scaled, &G2Windows::default()).unwrap();
        assert!((base.g2_zero - s.g2_zero).abs() < 1e-9);
        assert!((base.raw_suppression - s.raw_suppression).abs() < 1e-12);
    }

    #[test]
    fn too_few_far_peaks_is_an_error() {
        let cfg = HistogramConfig::new(250, -170_000, 170_000, HistogramMode::AllPairs).unwrap();
        let counts = vec![10u64; cfg.bin_count()];
        let h = CorrelationHistogram::from_parts_for_tests(cfg, counts, 0, 0, PS_PER_S);
        let windows = G2Windows { far_peak_min_delay_ps: 160_000, ..G2Windows::default() };
        assert!(matches!(
            extract_g2(&h, &windows),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn short_histogram_fails_precondition() {
        let cfg = HistogramConfig::new(250, -100_000, 100_000, HistogramMode::AllPairs).unwrap();
        let h = CorrelationHistogram::from_parts_for_tests(
            cfg,
            vec![0; cfg.bin_count()],
            0,
            0,
            PS_PER_S,
        );
        assert!(extract_g2(&h, &G2Windows::default()).is_err());
    }
}
