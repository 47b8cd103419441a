//! Deterministic counter-based random streams.
//!
//! Every stochastic decision in the simulator draws from an RNG keyed by
//! `(seed, stream id, item index)` — pulse index for emission, event index
//! for thinning, bucket or gate index for background injection. A value
//! depends only on its key, never on how work is partitioned across threads,
//! so any parallel split reproduces byte-identical output.
//!
//! The generator is SplitMix64 with a per-key derived increment, i.e. each
//! key owns its own arithmetic progression through the mixer. That is the
//! `split()` construction of the original SplitMix design: cheap, stateless
//! to seed, and statistically solid for Monte Carlo work.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies the stochastic stage a stream belongs to, so that streams for
/// different purposes never collide even under the same seed and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum StreamId {
    EmitterQdChain = 1,
    EmitterQdDraws = 2,
    EmitterUncorrChain = 3,
    EmitterUncorrDraws = 4,
    ConvertThin = 5,
    ConvertAsr = 6,
    BeamSplit = 7,
    DetectorThin = 8,
    DetectorDark = 9,
    DetectorAfterpulse = 10,
    SpectrumNoise = 11,
    TestOnly = 255,
}

/// Counter-based deterministic RNG.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    gamma: u64,
}

impl CounterRng {
    /// Stream for item `index` of stage `stream` under `seed`.
    pub fn keyed(seed: u64, stream: StreamId, index: u64) -> Self {
        let lane = mix(seed ^ mix(((stream as u64) << 32) | 0x5851_F42D));
        let state = mix(lane.wrapping_add(index.wrapping_mul(GOLDEN)));
        // Distinct odd increment per key keeps streams on separate orbits.
        let gamma = mix(state ^ 0xD6E8_FEB8_6659_FD93) | 1;
        Self { state, gamma }
    }

    #[inline]
    pub fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in (0, 1], safe as a log argument.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Exponential with the given mean.
    #[inline]
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * self.uniform_open().ln()
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let v = self.next().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Derive a component seed from the master scenario seed.
///
/// The scheme is a fixed hash of `(master, component, stage)`, so adding a
/// new stage or component never perturbs the randomness of existing ones.
pub fn derive_seed(master: u64, component: u32, stage: u32) -> u64 {
    mix(master ^ mix(((component as u64) << 32) | stage as u64))
}
