//! Dumbbell bottleneck: a fixed-rate link fed by a drop-tail FIFO.
//!
//! Only the forward (data) direction is congested. Acks travel back over a
//! pure-delay path that never queues or drops. One-way delays are measured
//! against the shared simulation clock, so sender and receiver clocks are
//! perfectly synchronized; the controllers only ever use differences
//! against a running minimum, which makes a constant offset irrelevant.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::time::Duration;

use crate::engine::SimTime;

pub const DEFAULT_ACK_BYTES: u32 = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub usize);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Data segment or cumulative acknowledgement.
#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub flow: FlowId,
    /// Packet-granular sequence number (data only).
    pub seq: u64,
    pub size_bytes: u32,
    /// Sender timestamp. On acks this is the time the ack left the receiver.
    pub sent_at: SimTime,
    /// One-way delay of the data packet that triggered this ack.
    pub measured_owd: Option<Duration>,
    /// Sender timestamp of the data packet that triggered this ack.
    pub echo_sent_at: Option<SimTime>,
    pub is_ack: bool,
    /// Next expected sequence number (acks only).
    pub ack_no: u64,
}

impl Packet {
    pub fn data(flow: FlowId, seq: u64, size_bytes: u32, sent_at: SimTime) -> Self {
        Packet {
            flow,
            seq,
            size_bytes,
            sent_at,
            measured_owd: None,
            echo_sent_at: None,
            is_ack: false,
            ack_no: 0,
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum EnqueueOutcome {
    Accepted,
    Dropped(Packet),
}

/// Finite FIFO buffer. The packet currently being serialized is not part of
/// the backlog.
#[derive(Clone, Debug)]
pub struct DropTailQueue {
    capacity_pkts: usize,
    backlog: VecDeque<Packet>,
}

impl DropTailQueue {
    pub fn new(capacity_pkts: usize) -> Self {
        DropTailQueue {
            capacity_pkts,
            backlog: VecDeque::with_capacity(capacity_pkts),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity_pkts
    }

    pub fn len(&self) -> usize {
        self.backlog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backlog.is_empty()
    }

    pub fn offer(&mut self, p: Packet) -> EnqueueOutcome {
        if self.backlog.len() >= self.capacity_pkts {
            EnqueueOutcome::Dropped(p)
        } else {
            self.backlog.push_back(p);
            EnqueueOutcome::Accepted
        }
    }

    pub fn pop(&mut self) -> Option<Packet> {
        self.backlog.pop_front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.backlog.iter()
    }
}

/// Backlog observed at every enqueue attempt, drops included.
#[derive(Clone, Debug, Default)]
pub struct QueueSamples {
    pub count: u64,
    pub sum: u64,
    pub max: usize,
    pub series: Option<Vec<(SimTime, usize)>>,
}

impl QueueSamples {
    fn record(&mut self, now: SimTime, backlog: usize) {
        self.count += 1;
        self.sum += backlog as u64;
        self.max = self.max.max(backlog);
        if let Some(series) = self.series.as_mut() {
            series.push((now, backlog));
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum as f64 / self.count as f64)
    }

    /// Writes the recorded series as `time_s,backlog` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time_s,backlog")?;
        for (t, b) in self.series.iter().flatten() {
            writeln!(out, "{:.6},{}", t.as_secs_f64(), b)?;
        }
        Ok(())
    }
}

/// Serialization time of `size_bytes` on a `capacity_bps` link, rounded up
/// to the next nanosecond.
pub fn serialization_time(size_bytes: u32, capacity_bps: u64) -> Duration {
    let bits = size_bytes as u128 * 8 * 1_000_000_000;
    let cap = capacity_bps as u128;
    Duration::from_nanos(bits.div_ceil(cap) as u64)
}

/// The bottleneck link. At most one packet is in transmission at a time.
#[derive(Clone, Debug)]
pub struct Link {
    capacity_bps: u64,
    prop_delay: Duration,
    queue: DropTailQueue,
    transmitting: Option<Packet>,
    samples: QueueSamples,
    drops: u64,
}

impl Link {
    pub fn new(capacity_bps: u64, prop_delay: Duration, buffer_pkts: usize) -> Self {
        assert!(capacity_bps > 0, "link capacity must be positive");
        Link {
            capacity_bps,
            prop_delay,
            queue: DropTailQueue::new(buffer_pkts),
            transmitting: None,
            samples: QueueSamples::default(),
            drops: 0,
        }
    }

    /// Keeps every queue sample, not only the running sums.
    pub fn record_series(&mut self) {
        self.samples.series.get_or_insert_with(Vec::new);
    }

    pub fn capacity_bps(&self) -> u64 {
        self.capacity_bps
    }

    pub fn prop_delay(&self) -> Duration {
        self.prop_delay
    }

    pub fn queue(&self) -> &DropTailQueue {
        &self.queue
    }

    pub fn busy(&self) -> bool {
        self.transmitting.is_some()
    }

    pub fn transmitting(&self) -> Option<&Packet> {
        self.transmitting.as_ref()
    }

    pub fn samples(&self) -> &QueueSamples {
        &self.samples
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    /// Offers a data packet to the buffer. The occupancy sample is taken
    /// before the accept/drop decision.
    pub fn enqueue(&mut self, now: SimTime, p: Packet) -> EnqueueOutcome {
        debug_assert!(!p.is_ack, "acks never traverse the bottleneck");
        self.samples.record(now, self.queue.len());
        let outcome = self.queue.offer(p);
        if matches!(outcome, EnqueueOutcome::Dropped(_)) {
            self.drops += 1;
        }
        outcome
    }

    /// Starts serializing the head-of-line packet if the link is idle.
    /// Returns the completion time, or `None` when nothing was started.
    pub fn transmit_next(&mut self, now: SimTime) -> Option<SimTime> {
        if self.transmitting.is_some() {
            return None;
        }
        let p = self.queue.pop()?;
        let done = now + serialization_time(p.size_bytes, self.capacity_bps);
        self.transmitting = Some(p);
        Some(done)
    }

    /// Ends the current transmission and returns the packet with the time it
    /// reaches the far end of the link.
    pub fn complete_transmission(&mut self, now: SimTime) -> Option<(Packet, SimTime)> {
        self.transmitting.take().map(|p| (p, now + self.prop_delay))
    }
}

/// Uncongested reverse path: each ack arrives after exactly its delay.
#[derive(Clone, Copy, Debug)]
pub struct ReturnPath {
    pub base_delay: Duration,
}

impl ReturnPath {
    pub fn arrival(&self, now: SimTime, extra: Duration) -> SimTime {
        now + self.base_delay + extra
    }
}
