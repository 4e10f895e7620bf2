//! Deterministic discrete-event core.
//!
//! Events are ordered by `(fire_at, seq)` where `seq` is a global insertion
//! counter, so simultaneous events fire in the order they were scheduled.
//! Time is kept as integer nanoseconds; there is no wall clock and no
//! randomness anywhere in this module.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::time::Duration;

use thiserror::Error;

/// A point on the simulated clock, in integer nanoseconds.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_nanos(nanos: u64) -> Self {
        SimTime(nanos)
    }

    pub const fn from_micros(micros: u64) -> Self {
        SimTime(micros * 1_000)
    }

    pub const fn from_millis(millis: u64) -> Self {
        SimTime(millis * 1_000_000)
    }

    pub const fn from_secs(secs: u64) -> Self {
        SimTime(secs * 1_000_000_000)
    }

    /// Rounds to the nearest nanosecond. Negative or NaN inputs clamp to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if secs.is_nan() || secs <= 0.0 {
            return SimTime::ZERO;
        }
        SimTime((secs * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    /// Elapsed time since `earlier`, zero if `earlier` is later than `self`.
    pub fn saturating_since(self, earlier: SimTime) -> Duration {
        Duration::from_nanos(self.0.saturating_sub(earlier.0))
    }

    pub fn as_duration(self) -> Duration {
        Duration::from_nanos(self.0)
    }
}

impl From<Duration> for SimTime {
    fn from(d: Duration) -> Self {
        SimTime(duration_nanos(d))
    }
}

fn duration_nanos(d: Duration) -> u64 {
    u64::try_from(d.as_nanos()).unwrap_or(u64::MAX)
}

impl Add<Duration> for SimTime {
    type Output = SimTime;

    fn add(self, rhs: Duration) -> SimTime {
        SimTime(self.0.saturating_add(duration_nanos(rhs)))
    }
}

impl AddAssign<Duration> for SimTime {
    fn add_assign(&mut self, rhs: Duration) {
        *self = *self + rhs;
    }
}

impl Sub<SimTime> for SimTime {
    type Output = Duration;

    /// Panics if `rhs` is later than `self`; use [`SimTime::saturating_since`]
    /// when the ordering is not guaranteed.
    fn sub(self, rhs: SimTime) -> Duration {
        let nanos = self
            .0
            .checked_sub(rhs.0)
            .expect("SimTime subtraction went negative");
        Duration::from_nanos(nanos)
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}s", self.0 / 1_000_000_000, self.0 % 1_000_000_000)
    }
}

/// Identifies a scheduled event so it can be cancelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

impl EventHandle {
    #[cfg(test)]
    pub(crate) fn from_seq(seq: u64) -> Self {
        EventHandle(seq)
    }

    pub fn seq(self) -> u64 {
        self.0
    }
}

/// Describes an event payload for the optional event log.
pub trait EventInfo {
    fn kind(&self) -> &'static str;

    fn flow(&self) -> Option<usize> {
        None
    }
}

/// Receives events popped from an [`EventQueue`].
pub trait Handler<E> {
    type Error: std::error::Error + Send + Sync + 'static;

    fn handle(&mut self, queue: &mut EventQueue<E>, now: SimTime, event: E) -> Result<(), Self::Error>;
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("event scheduled at {at} but the clock is already at {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("run_until({t_end}) called with the clock already at {now}")]
    EndInPast { t_end: SimTime, now: SimTime },
    #[error("handler failed on {kind} event #{seq} at {at}: {source}")]
    Handler {
        at: SimTime,
        seq: u64,
        kind: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunStats {
    pub events_processed: u64,
    pub queue_depth: usize,
    pub now: SimTime,
}

/// Priority queue of pending events plus the simulation clock.
#[derive(Debug)]
pub struct EventQueue<E> {
    now: SimTime,
    next_seq: u64,
    order: BinaryHeap<Reverse<(SimTime, u64)>>,
    pending: HashMap<u64, E>,
    processed: u64,
    log: Option<Vec<String>>,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            now: SimTime::ZERO,
            next_seq: 0,
            order: BinaryHeap::new(),
            pending: HashMap::new(),
            processed: 0,
            log: None,
        }
    }

    /// Enables the line-oriented event log (`time kind flow` per fired event).
    pub fn with_event_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events still waiting to fire (cancelled events excluded).
    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn events_processed(&self) -> u64 {
        self.processed
    }

    pub fn event_log(&self) -> Option<&[String]> {
        self.log.as_deref()
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<EventHandle, EngineError> {
        if at < self.now {
            return Err(EngineError::ScheduleInPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.order.push(Reverse((at, seq)));
        self.pending.insert(seq, event);
        Ok(EventHandle(seq))
    }

    /// Schedules `event` at `now + delay`; never fails.
    pub fn schedule_in(&mut self, delay: Duration, event: E) -> EventHandle {
        let at = self.now + delay;
        self.schedule(at, event).expect("relative schedule cannot be in the past")
    }

    /// Returns `true` if the event was pending and will now never fire.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&handle.0).is_some()
    }

    pub fn is_pending(&self, handle: EventHandle) -> bool {
        self.pending.contains_key(&handle.0)
    }

    fn pop_due(&mut self, limit: Option<SimTime>) -> Option<(SimTime, u64, E)> {
        while let Some(&Reverse((at, seq))) = self.order.peek() {
            if limit.is_some_and(|t| at > t) {
                return None;
            }
            self.order.pop();
            if let Some(event) = self.pending.remove(&seq) {
                return Some((at, seq, event));
            }
        }
        None
    }

    fn dispatch<H>(&mut self, handler: &mut H, at: SimTime, seq: u64, event: E) -> Result<(), EngineError>
    where
        H: Handler<E>,
        E: EventInfo,
    {
        debug_assert!(at >= self.now);
        self.now = at;
        self.processed += 1;
        let kind = event.kind();
        if let Some(log) = self.log.as_mut() {
            let flow = event.flow().map_or_else(|| "-".to_string(), |f| f.to_string());
            log.push(format!("{} {} {}", at, kind, flow));
        }
        handler
            .handle(self, at, event)
            .map_err(|e| EngineError::Handler { at, seq, kind, source: Box::new(e) })
    }

    /// Processes every event with `fire_at <= t_end`, then leaves the clock at `t_end`.
    pub fn run_until<H>(&mut self, t_end: SimTime, handler: &mut H) -> Result<RunStats, EngineError>
    where
        H: Handler<E>,
        E: EventInfo,
    {
        if t_end < self.now {
            return Err(EngineError::EndInPast { t_end, now: self.now });
        }
        let start = self.processed;
        while let Some((at, seq, event)) = self.pop_due(Some(t_end)) {
            self.dispatch(handler, at, seq, event)?;
        }
        self.now = t_end;
        Ok(RunStats {
            events_processed: self.processed - start,
            queue_depth: self.len(),
            now: self.now,
        })
    }

    /// Processes events until none remain. The clock stops at the last event.
    pub fn run_to_completion<H>(&mut self, handler: &mut H) -> Result<RunStats, EngineError>
    where
        H: Handler<E>,
        E: EventInfo,
    {
        let start = self.processed;
        while let Some((at, seq, event)) = self.pop_due(None) {
            self.dispatch(handler, at, seq, event)?;
        }
        Ok(RunStats {
            events_processed: self.processed - start,
            queue_depth: 0,
            now: self.now,
        })
    }
}
