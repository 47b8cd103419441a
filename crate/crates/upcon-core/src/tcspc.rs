//! Streaming construction of start–stop and coincidence histograms from
//! sorted click streams.
//!
//! Both operations are a single pass over the two streams with a monotone
//! lower-bound pointer, O(|starts| + |stops| + matches). The start stream is
//! processed in independent blocks (each block sees every stop it can match,
//! the overlap-carry rule), so block partitioning — and therefore thread
//! count — never changes a single bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::TimePs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramMode {
    /// For each start, only the earliest stop inside the window counts
    /// (hardware-faithful).
    FirstStop,
    /// Every (start, stop) pair inside the window counts. Unbiased pair
    /// counting; the default for correlation analysis.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub bin_width_ps: TimePs,
    pub range_start_ps: TimePs,
    pub range_end_ps: TimePs,
    pub mode: HistogramMode,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bin_width_ps: 256,
            range_start_ps: 0,
            range_end_ps: 20_000,
            mode: HistogramMode::AllPairs,
        }
    }
}

impl HistogramConfig {
    pub fn new(bin_width_ps: TimePs, range_start_ps: TimePs, range_end_ps: TimePs, mode: HistogramMode) -> Result<Self> {
        let cfg = Self { bin_width_ps, range_start_ps, range_end_ps, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_width_ps <= 0 {
            return Err(Error::Config("bin_width_ps must be positive".into()));
        }
        if self.range_end_ps <= self.range_start_ps {
            return Err(Error::Config("range_end_ps must exceed range_start_ps".into()));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        let span = self.range_end_ps - self.range_start_ps;
        ((span + self.bin_width_ps - 1) / self.bin_width_ps) as usize
    }

    #[inline]
    pub fn bin_index(&self, dt: TimePs) -> Option<usize> {
        if dt < self.range_start_ps || dt >= self.range_end_ps {
            return None;
        }
        Some(((dt - self.range_start_ps) / self.bin_width_ps) as usize)
    }

    pub fn bin_left_edge_ps(&self, index: usize) -> TimePs {
        self.range_start_ps + index as TimePs * self.bin_width_ps
    }

    pub fn bin_center_ps(&self, index: usize) -> f64 {
        self.bin_left_edge_ps(index) as f64 + self.bin_width_ps as f64 / 2.0
    }
}

/// Binned start–stop or coincidence counts plus bookkeeping totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    config: HistogramConfig,
    counts: Vec<u64>,
    pub n_starts: u64,
    pub n_stops: u64,
    pub duration_ps: TimePs,
}

impl CorrelationHistogram {
    pub fn zeroed(config: HistogramConfig) -> Self {
        let bins = config.bin_count();
        Self { config, counts: vec![0; bins], n_starts: 0, n_stops: 0, duration_ps: 0 }
    }

    pub fn config(&self) -> &HistogramConfig {
        &self.config
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Test-only constructor for fabricating exact-count histograms.
    #[cfg(test)]
    pub(crate) fn from_parts_for_tests(
        config: HistogramConfig,
        counts: Vec<u64>,
        n_starts: u64,
        n_stops: u64,
        duration_ps: TimePs,
    ) -> Self {
        assert_eq!(counts.len(), config.bin_count());
        Self { config, counts, n_starts, n_stops, duration_ps }
    }
}

fn ensure_sorted(name: &str, times: &[TimePs]) -> Result<()> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition(format!("{name} stream is not time-sorted")));
    }
    Ok(())
}

fn correlate_block(starts: &[TimePs], stops: &[TimePs], cfg: &HistogramConfig) -> Vec<u64> {
    let mut counts = vec![0u64; cfg.bin_count()];
    let mut lo = 0usize;
    for &s in starts {
        let wlo = s.saturating_add(cfg.range_start_ps);
        let whi = s.saturating_add(cfg.range_end_ps);
        while lo < stops.len() && stops[lo] < wlo {
            lo += 1;
        }
        match cfg.mode {
            HistogramMode::FirstStop => {
                if let Some(&t) = stops.get(lo) {
                    if t < whi {
                        if let Some(b) = cfg.bin_index(t - s) {
                            counts[b] += 1;
                        }
                    }
                }
            }
            HistogramMode::AllPairs => {
                let mut j = lo;
                while j < stops.len() && stops[j] < whi {
                    if let Some(b) = cfg.bin_index(stops[j] - s) {
                        counts[b] += 1;
                    }
                    j += 1;
                }
            }
        }
    }
    counts
}

fn add_counts(mut acc: Vec<u64>, other: Vec<u64>) -> Vec<u64> {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
    acc
}

fn correlate(starts: &[TimePs], stops: &[TimePs], cfg: &HistogramConfig) -> Vec<u64> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunk = (starts.len() / rayon::current_num_threads().max(1)).max(16_384);
        starts
            .par_chunks(chunk)
            .map(|block| {
                // Each block scans stops from its own lower bound; combined
                // with the full stop slice this realizes the overlap carry.
                let wlo = block
                    .first()
                    .map(|&s| s.saturating_add(cfg.range_start_ps))
                    .unwrap_or(TimePs::MAX);
                let from = stops.partition_point(|&t| t < wlo);
                correlate_block(block, &stops[from..], cfg)
            })
            .reduce(|| vec![0u64; cfg.bin_count()], add_counts)
    }
    #[cfg(not(feature = "parallel"))]
    correlate_block(starts, stops, cfg)
}

/// Single-threaded reference path; the benchmark suite compares it against
/// the default (possibly parallel) entry points.
pub fn start_stop_histogram_seq(
    starts: &[TimePs],
    stops: &[TimePs],
    cfg: &HistogramConfig,
    duration_ps: TimePs,
) -> Result<CorrelationHistogram> {
    cfg.validate()?;
    ensure_sorted("start", starts)?;
    ensure_sorted("stop", stops)?;
    Ok(CorrelationHistogram {
        config: *cfg,
        counts: correlate_block(starts, stops, cfg),
        n_starts: starts.len() as u64,
        n_stops: stops.len() as u64,
        duration_ps,
    })
}

/// Histogram of stop − start intervals for every start.
///
/// `FirstStop` bins, per start, only the earliest stop whose interval lies
/// inside `[range_start, range_end)`; `AllPairs` bins every pair in range.
pub fn start_stop_histogram(
    starts: &[TimePs],
    stops: &[TimePs],
    cfg: &HistogramConfig,
    duration_ps: TimePs,
) -> Result<CorrelationHistogram> {
    cfg.validate()?;
    ensure_sorted("start", starts)?;
    ensure_sorted("stop", stops)?;
    Ok(CorrelationHistogram {
        config: *cfg,
        counts: correlate(starts, stops, cfg),
        n_starts: starts.len() as u64,
        n_stops: stops.len() as u64,
        duration_ps,
    })
}

/// Coincidence histogram between two detector arms over a (typically
/// symmetric) interval range; identical machinery to
/// [`start_stop_histogram`] with a-clicks as starts and b-clicks as stops,
/// the negative lags standing in for the hardware delay offset.
pub fn coincidence_histogram(
    a: &[TimePs],
    b: &[TimePs],
    cfg: &HistogramConfig,
    duration_ps: TimePs,
) -> Result<CorrelationHistogram> {
    start_stop_histogram(a, b, cfg, duration_ps)
}

/// Sequential reference for [`coincidence_histogram`].
pub fn coincidence_histogram_seq(
    a: &[TimePs],
    b: &[TimePs],
    cfg: &HistogramConfig,
    duration_ps: TimePs,
) -> Result<CorrelationHistogram> {
    start_stop_histogram_seq(a, b, cfg, duration_ps)
}

/// Start–stop histogram against an implicit periodic start comb (one start
/// per pulse at `k·period`), without materializing billions of sync events.
///
/// With the window inside a single period every stop pairs with exactly one
/// start, so this equals `AllPairs` against the explicit comb bin for bin.
pub fn fold_periodic_histogram(
    stops: &[TimePs],
    period_ps: TimePs,
    cfg: &HistogramConfig,
    duration_ps: TimePs,
) -> Result<CorrelationHistogram> {
    cfg.validate()?;
    ensure_sorted("stop", stops)?;
    if period_ps <= 0 {
        return Err(Error::Config("period_ps must be positive".into()));
    }
    if cfg.range_start_ps < 0 || cfg.range_end_ps > period_ps {
        return Err(Error::Config(
            "fold window must lie within [0, period] for the periodic histogram".into(),
        ));
    }
    let fold = |block: &[TimePs]| -> Vec<u64> {
        let mut counts = vec![0u64; cfg.bin_count()];
        for &t in block {
            let dt = t.rem_euclid(period_ps);
            if let Some(bin) = cfg.bin_index(dt) {
                counts[bin] += 1;
            }
        }
        counts
    };
    #[cfg(feature = "parallel")]
    let counts = {
        use rayon::prelude::*;
        let chunk = (stops.len() / rayon::current_num_threads().max(1)).max(16_384);
        stops
            .par_chunks(chunk)
            .map(fold)
            .reduce(|| vec![0u64; cfg.bin_count()], add_counts)
    };
    #[cfg(not(feature = "parallel"))]
    let counts = fold(stops);
    Ok(CorrelationHistogram {
        config: *cfg,
        counts,
        n_starts: (duration_ps / period_ps) as u64,
        n_stops: stops.len() as u64,
        duration_ps,
    })
}

/// Bin-wise sum of two histograms with identical configs.
pub fn merge(h1: &CorrelationHistogram, h2: &CorrelationHistogram) -> Result<CorrelationHistogram> {
    if h1.config != h2.config {
        return Err(Error::Config("cannot merge histograms with different configs".into()));
    }
    let counts = h1
        .counts
        .iter()
        .zip(&h2.counts)
        .map(|(a, b)| a + b)
        .collect();
    Ok(CorrelationHistogram {
        config: h1.config,
        counts,
        n_starts: h1.n_starts + h2.n_starts,
        n_stops: h1.n_stops + h2.n_stops,
        duration_ps: h1.duration_ps + h2.duration_ps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(bin: TimePs, lo: TimePs, hi: TimePs, mode: HistogramMode) -> HistogramConfig {
        HistogramConfig::new(bin, lo, hi, mode).unwrap()
    }

    /// Quadratic brute-force oracle.
    fn brute_force(starts: &[TimePs], stops: &[TimePs], cfg: &HistogramConfig) -> Vec<u64> {
        let mut counts = vec![0u64; cfg.bin_count()];
        for &s in starts {
            match cfg.mode {
                HistogramMode::AllPairs => {
                    for &t in stops {
                        if let Some(b) = cfg.bin_index(t - s) {
                            counts[b] += 1;
                        }
                    }
                }
                HistogramMode::FirstStop => {
                    let hit = stops
                        .iter()
                        .filter(|&&t| t - s >= cfg.range_start_ps && t - s < cfg.range_end_ps)
                        .min();
                    if let Some(&t) = hit {
                        counts[cfg.bin_index(t - s).unwrap()] += 1;
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn first_stop_takes_earliest_in_range() {
        let c = cfg(1_000, 0, 10_000, HistogramMode::FirstStop);
        let h = start_stop_histogram(&[0], &[5_000, 7_000], &c, 10_000).unwrap();
        assert_eq!(h.total_counts(), 1);
        assert_eq!(h.counts()[5], 1);
    }

    #[test]
    fn all_pairs_counts_both() {
        let c = cfg(1_000, 0, 10_000, HistogramMode::AllPairs);
        let h = start_stop_histogram(&[0], &[5_000, 7_000], &c, 10_000).unwrap();
        assert_eq!(h.counts()[5], 1);
        assert_eq!(h.counts()[7], 1);
        assert_eq!(h.total_counts(), 2);
    }

    #[test]
    fn coincidence_of_identical_single_events_hits_zero_bin() {
        let c = cfg(256, -100_000, 100_000, HistogramMode::AllPairs);
        let h = coincidence_histogram(&[50_000], &[50_000], &c, 1_000_000).unwrap();
        assert_eq!(h.total_counts(), 1);
        assert_eq!(h.counts()[c.bin_index(0).unwrap()], 1);
    }

    #[test]
    fn unsorted_input_is_a_precondition_error() {
        let c = cfg(256, 0, 10_000, HistogramMode::AllPairs);
        assert!(matches!(
            start_stop_histogram(&[5, 1], &[1], &c, 10_000),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            start_stop_histogram(&[1], &[5, 1], &c, 10_000),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn merge_identities() {
        let c = cfg(256, -10_000, 10_000, HistogramMode::AllPairs);
        let h = coincidence_histogram(&[0, 100, 5_000], &[50, 600], &c, 10_000).unwrap();
        let zero = CorrelationHistogram::zeroed(c);
        let m = merge(&h, &zero).unwrap();
        assert_eq!(m.counts(), h.counts());
        let ab = merge(&h, &h).unwrap();
        let ba = merge(&h, &h).unwrap();
        assert_eq!(ab, ba);
        let mismatched = cfg(128, -10_000, 10_000, HistogramMode::AllPairs);
        let other = CorrelationHistogram::zeroed(mismatched);
        assert!(merge(&h, &other).is_err());
    }

    #[test]
    fn fold_matches_materialized_comb() {
        let period = 20_000;
        let c = cfg(250, 0, period, HistogramMode::AllPairs);
        let mut rng = crate::rng::CounterRng::keyed(10, crate::rng::StreamId::TestOnly, 0);
        let duration = 200 * period;
        let mut stops: Vec<TimePs> = (0..2_000)
            .map(|_| (rng.uniform() * duration as f64) as TimePs)
            .collect();
        stops.sort_unstable();
        let starts: Vec<TimePs> = (0..200).map(|k| k * period).collect();
        let explicit = start_stop_histogram(&starts, &stops, &c, duration).unwrap();
        let folded = fold_periodic_histogram(&stops, period, &c, duration).unwrap();
        assert_eq!(explicit.counts(), folded.counts());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_brute_force_oracle(
            seed in 0u64..1_000_000,
            n_a in 1usize..400,
            n_b in 1usize..400,
            all_pairs in proptest::bool::ANY,
        ) {
            let mut rng = crate::rng::CounterRng::keyed(seed, crate::rng::StreamId::TestOnly, 1);
            let duration = 1_000_000;
            let mut a: Vec<TimePs> = (0..n_a).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            let mut b: Vec<TimePs> = (0..n_b).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            a.sort_unstable();
            b.sort_unstable();
            let mode = if all_pairs { HistogramMode::AllPairs } else { HistogramMode::FirstStop };
            let c = cfg(999, -77_777, 77_777, mode);
            let h = start_stop_histogram(&a, &b, &c, duration).unwrap();
            prop_assert_eq!(h.counts(), &brute_force(&a, &b, &c)[..]);
        }

        #[test]
        fn first_stop_is_subset_of_all_pairs(
            seed in 0u64..1_000_000,
            n_a in 1usize..200,
            n_b in 1usize..200,
        ) {
            let mut rng = crate::rng::CounterRng::keyed(seed, crate::rng::StreamId::TestOnly, 2);
            let duration = 500_000;
            let mut a: Vec<TimePs> = (0..n_a).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            let mut b: Vec<TimePs> = (0..n_b).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            a.sort_unstable();
            b.sort_unstable();
            let fs = start_stop_histogram(&a, &b, &cfg(500, -50_000, 50_000, HistogramMode::FirstStop), duration).unwrap();
            let ap = start_stop_histogram(&a, &b, &cfg(500, -50_000, 50_000, HistogramMode::AllPairs), duration).unwrap();
            for (f, p) in fs.counts().iter().zip(ap.counts()) {
                prop_assert!(f <= p);
            }
            prop_assert!(fs.total_counts() <= fs.n_starts);
        }

        #[test]
        fn split_and_merge_equals_whole(
            seed in 0u64..1_000_000,
            n_a in 2usize..300,
            n_b in 2usize..300,
            cut in 0.1f64..0.9,
        ) {
            // Overlap-carry rule: a block of starts in [t0, t1) is paired
            // against stops in [t0 + range_start, t1 + range_end).
            let mut rng = crate::rng::CounterRng::keyed(seed, crate::rng::StreamId::TestOnly, 3);
            let duration = 1_000_000;
            let mut a: Vec<TimePs> = (0..n_a).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            let mut b: Vec<TimePs> = (0..n_b).map(|_| (rng.uniform()*duration as f64) as TimePs).collect();
            a.sort_unstable();
            b.sort_unstable();
            let c = cfg(1_000, -60_000, 60_000, HistogramMode::AllPairs);
            let whole = start_stop_histogram(&a, &b, &c, duration).unwrap();

            let t_cut = (duration as f64 * cut) as TimePs;
            let ia = a.partition_point(|&t| t < t_cut);
            let (a1, a2) = a.split_at(ia);
            let carve = |lo: TimePs, hi: TimePs| -> Vec<TimePs> {
                b.iter().copied().filter(|&t| t >= lo && t < hi).collect()
            };
            let b1 = carve(TimePs::MIN, t_cut.saturating_add(c.range_end_ps));
            let b2 = carve(t_cut.saturating_add(c.range_start_ps), TimePs::MAX);
            let h1 = start_stop_histogram(a1, &b1, &c, t_cut).unwrap();
            let h2 = start_stop_histogram(a2, &b2, &c, duration - t_cut).unwrap();
            let merged = merge(&h1, &h2).unwrap();
            prop_assert_eq!(merged.counts(), whole.counts());
        }
    }
}
