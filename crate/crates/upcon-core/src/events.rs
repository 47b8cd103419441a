//! Photon event records and time-sorted event streams — the currency passed
//! between pipeline stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::TimePs;

/// Simulation bookkeeping: what generated an event.
///
/// Origins exist for diagnostics and calibration checks only. Analysis
/// operations consume bare timestamp slices (see [`EventStream::times`]),
/// so no measured quantity can depend on this hidden truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Origin {
    Qd = 0,
    Uncorrelated = 1,
    Asr = 2,
    Dark = 3,
    Afterpulse = 4,
}

impl Origin {
    pub fn to_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Origin::Qd),
            1 => Some(Origin::Uncorrelated),
            2 => Some(Origin::Asr),
            3 => Some(Origin::Dark),
            4 => Some(Origin::Afterpulse),
            _ => None,
        }
    }
}

/// Channel tag conventions used by the pipelines.
pub mod channel {
    /// Main optical path before any beamsplitter.
    pub const SIGNAL: u8 = 0;
    /// Hanbury Brown–Twiss arm A.
    pub const HBT_A: u8 = 1;
    /// Hanbury Brown–Twiss arm B.
    pub const HBT_B: u8 = 2;
    /// Excitation-laser sync.
    pub const SYNC: u8 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonEvent {
    pub time: TimePs,
    pub channel: u8,
    pub origin: Origin,
}

impl PhotonEvent {
    pub fn new(time: TimePs, channel: u8, origin: Origin) -> Self {
        Self { time, channel, origin }
    }

    /// Total order used for canonical stream sorting. Ties on time are broken
    /// by channel and origin so that any generation order produces the same
    /// byte-identical stream.
    #[inline]
    pub fn sort_key(&self) -> (TimePs, u8, u8) {
        (self.time, self.channel, self.origin.to_u8())
    }
}

/// A time-sorted sequence of photon events over `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    events: Vec<PhotonEvent>,
    duration: TimePs,
}

impl EventStream {
    /// Wrap an already-sorted event list, validating order and time bounds.
    pub fn new(events: Vec<PhotonEvent>, duration: TimePs) -> Result<Self> {
        if duration < 0 {
            return Err(Error::Domain(format!("negative duration {duration} ps")));
        }
        for pair in events.windows(2) {
            if pair[0].sort_key() > pair[1].sort_key() {
                return Err(Error::Precondition(
                    "event stream is not sorted by (time, channel, origin)".into(),
                ));
            }
        }
        if let (Some(first), Some(last)) = (events.first(), events.last()) {
            if first.time < 0 || last.time > duration {
                return Err(Error::Precondition(format!(
                    "event times must lie in [0, {duration}] ps"
                )));
            }
        }
        Ok(Self { events, duration })
    }

    /// Sort events into canonical order and drop any outside `[0, duration]`.
    pub fn from_unsorted(mut events: Vec<PhotonEvent>, duration: TimePs) -> Self {
        events.retain(|e| e.time >= 0 && e.time <= duration);
        // Generation is pulse-ordered, so the list arrives nearly sorted and
        // the stable (run-adaptive) sort is close to linear here.
        sort_events(&mut events);
        Self { events, duration }
    }

    pub fn empty(duration: TimePs) -> Self {
        Self { events: Vec::new(), duration }
    }

    pub fn events(&self) -> &[PhotonEvent] {
        &self.events
    }

    pub fn duration(&self) -> TimePs {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The strip step: bare timestamps with channel and origin removed.
    /// Every analysis operation consumes these, never full events.
    pub fn times(&self) -> Vec<TimePs> {
        self.events.iter().map(|e| e.time).collect()
    }

    /// Stripped timestamps restricted to one channel.
    pub fn times_for_channel(&self, channel: u8) -> Vec<TimePs> {
        self.events
            .iter()
            .filter(|e| e.channel == channel)
            .map(|e| e.time)
            .collect()
    }

    /// Merge two sorted streams into one sorted stream. Durations must match.
    pub fn merge(&self, other: &EventStream) -> Result<EventStream> {
        if self.duration != other.duration {
            return Err(Error::Config(format!(
                "cannot merge streams of different durations ({} vs {})",
                self.duration, other.duration
            )));
        }
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.events.len() && j < other.events.len() {
            if self.events[i].sort_key() <= other.events[j].sort_key() {
                merged.push(self.events[i]);
                i += 1;
            } else {
                merged.push(other.events[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&self.events[i..]);
        merged.extend_from_slice(&other.events[j..]);
        Ok(EventStream { events: merged, duration: self.duration })
    }

    /// Count events carrying a given origin tag (diagnostics only).
    pub fn count_origin(&self, origin: Origin) -> usize {
        self.events.iter().filter(|e| e.origin == origin).count()
    }
}

/// Canonical stable sort by (time, channel, origin).
pub fn sort_events(events: &mut [PhotonEvent]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        events.par_sort_by_key(|e| e.sort_key());
    }
    #[cfg(not(feature = "parallel"))]
    events.sort_by_key(|e| e.sort_key());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: TimePs) -> PhotonEvent {
        PhotonEvent::new(t, channel::SIGNAL, Origin::Qd)
    }

    #[test]
    fn new_rejects_unsorted_and_out_of_range() {
        assert!(EventStream::new(vec![ev(5), ev(3)], 10).is_err());
        assert!(EventStream::new(vec![ev(5), ev(11)], 10).is_err());
        assert!(EventStream::new(vec![ev(3), ev(5)], 10).is_ok());
    }

    #[test]
    fn from_unsorted_sorts_and_clips() {
        let s = EventStream::from_unsorted(vec![ev(7), ev(2), ev(-1), ev(12)], 10);
        let times: Vec<_> = s.events().iter().map(|e| e.time).collect();
        assert_eq!(times, vec![2, 7]);
    }

    #[test]
    fn merge_preserves_order_and_counts() {
        let a = EventStream::new(vec![ev(1), ev(4), ev(9)], 10).unwrap();
        let b = EventStream::new(vec![ev(2), ev(4), ev(8)], 10).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.len(), 6);
        let times: Vec<_> = m.events().iter().map(|e| e.time).collect();
        assert_eq!(times, vec![1, 2, 4, 4, 8, 9]);
    }

    #[test]
    fn strip_hides_origins() {
        let s = EventStream::new(
            vec![
                PhotonEvent::new(1, channel::HBT_A, Origin::Qd),
                PhotonEvent::new(2, channel::HBT_B, Origin::Dark),
            ],
            10,
        )
        .unwrap();
        assert_eq!(s.times(), vec![1, 2]);
        assert_eq!(s.times_for_channel(channel::HBT_A), vec![1]);
    }

    #[test]
    fn origin_round_trips_through_u8() {
        for v in 0..5u8 {
            assert_eq!(Origin::from_u8(v).unwrap().to_u8(), v);
        }
        assert!(Origin::from_u8(5).is_none());
    }
}
