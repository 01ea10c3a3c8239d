//! The event loop: a virtual clock plus a binary heap of pending events.
//!
//! Ordering is total and deterministic: (fire_time, insertion sequence).
//! Cancellation is by tombstone — the heap entry stays put and is discarded
//! when it surfaces, so cancel is O(1) and the heap never needs repair.

use crate::error::RunError;
use crate::time::SimTime;
use std::collections::{BinaryHeap, HashSet};

/// Identifies one scheduled event for later cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Entry<E> {
    at: SimTime,
    seq: u64,
    ev: E,
}

// Manual ordering on (at, seq) only — reversed, so BinaryHeap's max-heap pops
// the earliest event first. Payloads never participate in comparison.
impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.at.cmp(&self.at).then(other.seq.cmp(&self.seq))
    }
}

/// Bookkeeping counters; `scheduled == dispatched + cancelled + pending`
/// holds at every instant (liveness accounting).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub scheduled: u64,
    pub dispatched: u64,
    pub cancelled: u64,
}

pub struct Engine<E> {
    now: SimTime,
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
    /// Events scheduled, not yet dispatched or cancelled.
    pending: HashSet<u64>,
    /// Cancelled events whose heap entries have not yet surfaced.
    tombstones: HashSet<u64>,
    stats: EngineStats,
}

impl<E> Default for Engine<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Engine<E> {
    pub fn new() -> Self {
        Engine {
            now: SimTime::ZERO,
            heap: BinaryHeap::new(),
            next_seq: 0,
            pending: HashSet::new(),
            tombstones: HashSet::new(),
            stats: EngineStats::default(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of live (non-cancelled) pending events.
    pub fn pending_events(&self) -> usize {
        self.pending.len()
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Panics if `at` lies in the past — scheduling backwards is always a
    /// logic bug and must not be silently clamped.
    pub fn schedule(&mut self, at: SimTime, ev: E) -> EventHandle {
        assert!(
            at >= self.now,
            "event scheduled in the past: at={at} now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { at, seq, ev });
        self.pending.insert(seq);
        self.stats.scheduled += 1;
        EventHandle(seq)
    }

    pub fn schedule_in(&mut self, delay: SimTime, ev: E) -> EventHandle {
        self.schedule(self.now + delay, ev)
    }

    /// True if the event was still pending; false for already-dispatched,
    /// already-cancelled, or never-issued handles.
    pub fn cancel(&mut self, h: EventHandle) -> bool {
        if self.pending.remove(&h.0) {
            self.tombstones.insert(h.0);
            self.stats.cancelled += 1;
            true
        } else {
            false
        }
    }

    /// Next live event, advancing the clock to its fire time.
    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        while let Some(entry) = self.heap.pop() {
            if self.tombstones.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.at >= self.now, "clock would move backwards");
            self.now = entry.at;
            self.pending.remove(&entry.seq);
            self.stats.dispatched += 1;
            return Some((entry.at, entry.ev));
        }
        None
    }

    /// Dispatches events in order until `done(world)` holds, the queue
    /// drains (deadlock), or the next event would pass `cap`.
    ///
    /// `done` is evaluated before every dispatch, so a condition that already
    /// holds returns immediately at the current clock with nothing dispatched.
    pub fn run_until<W>(
        &mut self,
        world: &mut W,
        mut dispatch: impl FnMut(&mut Engine<E>, &mut W, SimTime, E),
        done: impl Fn(&W) -> bool,
        cap: SimTime,
    ) -> Result<SimTime, RunError> {
        loop {
            if done(world) {
                return Ok(self.now);
            }
            let Some((at, ev)) = self.pop() else {
                return Err(RunError::Deadlock {
                    at: self.now,
                    diagnostic: format!(
                        "{} events dispatched, none pending",
                        self.stats.dispatched
                    ),
                });
            };
            if at > cap {
                return Err(RunError::TimeLimitExceeded { next: at, cap });
            }
            dispatch(self, world, at, ev);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_time_dispatches_in_insertion_order() {
        let mut eng: Engine<u32> = Engine::new();
        eng.schedule(SimTime(5), 7);
        eng.schedule(SimTime(5), 9);
        eng.schedule(SimTime(0), 1);
        assert_eq!(eng.pop(), Some((SimTime(0), 1)));
        assert_eq!(eng.pop(), Some((SimTime(5), 7)));
        assert_eq!(eng.pop(), Some((SimTime(5), 9)));
        assert_eq!(eng.pop(), None);
    }

    #[test]
    fn schedule_at_current_time_is_allowed() {
        let mut eng: Engine<&str> = Engine::new();
        eng.schedule(SimTime(3), "a");
        assert_eq!(eng.pop(), Some((SimTime(3), "a")));
        // now == 3; same-time scheduling is legal and fires next
        eng.schedule(SimTime(3), "b");
        assert_eq!(eng.pop(), Some((SimTime(3), "b")));
    }

    #[test]
    #[should_panic(expected = "scheduled in the past")]
    fn schedule_in_the_past_panics() {
        let mut eng: Engine<()> = Engine::new();
        eng.schedule(SimTime(4), ());
        eng.pop();
        eng.schedule(SimTime(3), ());
    }

    #[test]
    fn cancel_semantics() {
        let mut eng: Engine<u32> = Engine::new();
        let h1 = eng.schedule(SimTime(1), 1);
        let h2 = eng.schedule(SimTime(2), 2);
        assert!(eng.cancel(h1));
        assert!(!eng.cancel(h1), "double cancel must report false");
        assert_eq!(eng.pop(), Some((SimTime(2), 2)));
        assert!(!eng.cancel(h2), "cancel after dispatch must report false");
        assert_eq!(eng.pop(), None);
        let s = eng.stats();
        assert_eq!((s.scheduled, s.dispatched, s.cancelled), (2, 1, 1));
    }

    #[test]
    fn run_until_returns_immediately_when_done_holds() {
        let mut eng: Engine<()> = Engine::new();
        let mut w = ();
        let t = eng
            .run_until(&mut w, |_, _, _, _| {}, |_| true, SimTime::MAX)
            .unwrap();
        assert_eq!(t, SimTime::ZERO);
        assert_eq!(eng.stats().dispatched, 0);
    }

    #[test]
    fn run_until_stops_at_satisfying_event() {
        let mut eng: Engine<u32> = Engine::new();
        for t in 1..=3 {
            eng.schedule(SimTime(t), t as u32);
        }
        let mut count = 0u32;
        let t = eng
            .run_until(
                &mut count,
                |_, w, _, _| *w += 1,
                |w| *w == 2,
                SimTime::MAX,
            )
            .unwrap();
        assert_eq!(t, SimTime(2), "returns the time of the satisfying event");
        assert_eq!(eng.pending_events(), 1, "later events stay pending");
    }

    #[test]
    fn run_until_reports_deadlock() {
        let mut eng: Engine<u32> = Engine::new();
        eng.schedule(SimTime(1), 1);
        let mut w = ();
        let err = eng
            .run_until(&mut w, |_, _, _, _| {}, |_| false, SimTime::MAX)
            .unwrap_err();
        assert!(matches!(err, RunError::Deadlock { at: SimTime(1), .. }));
    }

    #[test]
    fn run_until_respects_time_cap() {
        let mut eng: Engine<u32> = Engine::new();
        eng.schedule(SimTime(10), 1);
        eng.schedule(SimTime(100), 2);
        let mut seen = 0u32;
        let err = eng
            .run_until(&mut seen, |_, w, _, _| *w += 1, |_| false, SimTime(50))
            .unwrap_err();
        assert!(
            matches!(err, RunError::TimeLimitExceeded { next: SimTime(100), cap: SimTime(50) }),
            "{err:?}"
        );
        assert_eq!(seen, 1, "events within the cap were dispatched");
    }

    #[test]
    fn handlers_can_schedule_followups() {
        // Each event schedules its successor; clock walks forward.
        let mut eng: Engine<u64> = Engine::new();
        eng.schedule(SimTime(1), 1);
        let mut times = Vec::new();
        let _ = eng.run_until(
            &mut times,
            |eng, w: &mut Vec<u64>, at, k| {
                w.push(at.as_micros());
                if k < 5 {
                    eng.schedule(at + SimTime(10), k + 1);
                }
            },
            |w| w.len() == 5,
            SimTime::MAX,
        );
        assert_eq!(times, vec![1, 11, 21, 31, 41]);
    }

    proptest! {
        /// Random schedule/cancel scripts: dispatch order is globally sorted
        /// by (time, seq), the clock never regresses, and the liveness
        /// accounting identity holds throughout.
        #[test]
        fn ordering_and_conservation(script in proptest::collection::vec((0u64..50, prop::bool::ANY), 1..120)) {
            let mut eng: Engine<u64> = Engine::new();
            let mut handles = Vec::new();
            for (i, &(dt, cancel_one)) in script.iter().enumerate() {
                handles.push(eng.schedule(eng.now() + SimTime(dt), i as u64));
                if cancel_one && !handles.is_empty() {
                    let victim = handles[i / 2];
                    eng.cancel(victim);
                }
                let s = eng.stats();
                prop_assert_eq!(
                    s.scheduled,
                    s.dispatched + s.cancelled + eng.pending_events() as u64
                );
            }
            let mut last = SimTime::ZERO;
            let mut seen = Vec::new();
            while let Some((t, id)) = eng.pop() {
                prop_assert!(t >= last);
                last = t;
                seen.push(id);
            }
            let s = eng.stats();
            prop_assert_eq!(s.scheduled, s.dispatched + s.cancelled);
            prop_assert_eq!(s.scheduled as usize, script.len());
            // no duplicates
            let mut sorted = seen.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), seen.len());
        }
    }
}
