//! The dumbbell world: senders feeding one drop-tail bottleneck, receivers
//! acking over a pure-delay return path, all driven by the event queue.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::controllers::{Controller, Protocol};
use crate::engine::{EngineError, EventHandle, EventInfo, EventQueue, Handler, SimTime};
use crate::metrics::{FlowCounters, RunRecord};
use crate::network::{EnqueueOutcome, FlowId, Link, Packet, ReturnPath};
use crate::transport::{AckRecord, FlowEndpoint, FlowIo, Receiver, SenderStats, TimerKind, TransportError};

#[derive(Clone, Debug)]
pub enum Event {
    FlowStart(FlowId),
    /// A data packet reaching its receiver, or an ack reaching its sender.
    PacketArrival(Packet),
    TransmissionComplete,
    RtoTimer(FlowId),
    InferencePhaseEnd(FlowId),
    PacingTimer(FlowId),
    MetricsSampleTick(Tick),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tick {
    /// Closes a fairness window and checks packet conservation.
    Window,
    /// Records one cwnd sample per flow.
    Trace,
}

impl EventInfo for Event {
    fn kind(&self) -> &'static str {
        match self {
            Event::FlowStart(_) => "flow_start",
            Event::PacketArrival(p) if p.is_ack => "ack_arrival",
            Event::PacketArrival(_) => "data_arrival",
            Event::TransmissionComplete => "transmission_complete",
            Event::RtoTimer(_) => "rto",
            Event::InferencePhaseEnd(_) => "inference_end",
            Event::PacingTimer(_) => "pacing",
            Event::MetricsSampleTick(Tick::Window) => "window_tick",
            Event::MetricsSampleTick(Tick::Trace) => "trace_tick",
        }
    }

    fn flow(&self) -> Option<usize> {
        match self {
            Event::FlowStart(f)
            | Event::RtoTimer(f)
            | Event::InferencePhaseEnd(f)
            | Event::PacingTimer(f) => Some(f.0),
            Event::PacketArrival(p) => Some(p.flow.0),
            Event::TransmissionComplete | Event::MetricsSampleTick(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Topology {
    pub capacity_bps: u64,
    pub fwd_prop_delay: Duration,
    /// Base return delay shared by all flows.
    pub return_delay: Duration,
    pub buffer_pkts: usize,
    pub pkt_size: u32,
    pub ack_size: u32,
}

#[derive(Clone, Debug)]
pub struct FlowSetup {
    pub controller: Controller,
    pub extra_return_delay: Duration,
    pub start_at: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub horizon: Duration,
    pub fairness_window: Duration,
    /// cwnd sampling period; `None` disables traces.
    pub trace_interval: Option<Duration>,
    pub event_log: bool,
}

impl RunOptions {
    pub fn new(horizon: Duration) -> Self {
        RunOptions {
            horizon,
            fairness_window: Duration::from_secs(1),
            trace_interval: None,
            event_log: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("flow {flow}: sent {sent} != arrived {arrived} + dropped {dropped} + in network {in_network}")]
    Conservation {
        flow: FlowId,
        sent: u64,
        arrived: u64,
        dropped: u64,
        in_network: u64,
    },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no flows configured")]
    NoFlows,
    #[error("horizon must be positive")]
    EmptyHorizon,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("flow {flow} still has {in_network} packets in the network after drain")]
    Undrained { flow: FlowId, in_network: u64 },
}

/// One flow's packet bookkeeping at the bottleneck.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Conservation {
    pub sent: u64,
    pub dropped: u64,
    /// Past the link, not yet at the receiver.
    pub propagating: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Traces {
    /// Per flow, `(time_s, cwnd)` samples.
    pub cwnd: Vec<Vec<(f64, f64)>>,
    /// Backlog before every enqueue attempt.
    pub queue: Vec<(SimTime, usize)>,
}

impl Traces {
    pub fn write_cwnd_csv<W: std::io::Write>(&self, flow: usize, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time_s,cwnd")?;
        for (t, w) in &self.cwnd[flow] {
            writeln!(out, "{t:.3},{w:.6}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub record: RunRecord,
    pub sender_stats: Vec<SenderStats>,
    pub traces: Option<Traces>,
    pub events_processed: u64,
    pub event_log: Option<Vec<String>>,
}

struct Io<'a> {
    queue: &'a mut EventQueue<Event>,
    link: &'a mut Link,
    books: &'a mut [Conservation],
}

impl FlowIo for Io<'_> {
    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn send(&mut self, packet: Packet) {
        let now = self.queue.now();
        let flow = packet.flow.0;
        self.books[flow].sent += 1;
        match self.link.enqueue(now, packet) {
            EnqueueOutcome::Dropped(_) => self.books[flow].dropped += 1,
            EnqueueOutcome::Accepted => {
                if let Some(done) = self.link.transmit_next(now) {
                    self.queue.schedule_in(done - now, Event::TransmissionComplete);
                }
            }
        }
    }

    fn arm(&mut self, flow: FlowId, kind: TimerKind, at: SimTime) -> EventHandle {
        let event = match kind {
            TimerKind::Rto => Event::RtoTimer(flow),
            TimerKind::Inference => Event::InferencePhaseEnd(flow),
            TimerKind::Pacing => Event::PacingTimer(flow),
        };
        let now = self.queue.now();
        self.queue.schedule_in(at.saturating_since(now), event)
    }

    fn cancel(&mut self, handle: EventHandle) -> bool {
        self.queue.cancel(handle)
    }
}

struct World {
    topo: Topology,
    link: Link,
    ret: ReturnPath,
    senders: Vec<FlowEndpoint>,
    receivers: Vec<Receiver>,
    extra_return: Vec<Duration>,
    books: Vec<Conservation>,
    window_bytes: Vec<Vec<u64>>,
    last_goodput: Vec<u64>,
    cwnd_trace: Option<Vec<Vec<(f64, f64)>>>,
    trace_interval: Option<Duration>,
    horizon: SimTime,
}

impl World {
    fn in_network(&self, flow: usize) -> u64 {
        let id = FlowId(flow);
        let queued = self.link.queue().iter().filter(|p| p.flow == id).count() as u64;
        let on_wire = self.link.transmitting().map_or(0, |p| u64::from(p.flow == id));
        queued + on_wire + self.books[flow].propagating
    }

    fn check_conservation(&self) -> Result<(), WorldError> {
        for (i, b) in self.books.iter().enumerate() {
            let arrived = self.receivers[i].arrivals();
            let in_network = self.in_network(i);
            if b.sent != arrived + b.dropped + in_network {
                return Err(WorldError::Conservation {
                    flow: FlowId(i),
                    sent: b.sent,
                    arrived,
                    dropped: b.dropped,
                    in_network,
                });
            }
        }
        Ok(())
    }

    fn close_window(&mut self) {
        let row = self
            .receivers
            .iter()
            .zip(&mut self.last_goodput)
            .map(|(r, last)| {
                let now = r.goodput_bytes();
                let delta = now - *last;
                *last = now;
                delta
            })
            .collect();
        self.window_bytes.push(row);
    }

    fn io<'a>(
        queue: &'a mut EventQueue<Event>,
        link: &'a mut Link,
        books: &'a mut [Conservation],
    ) -> Io<'a> {
        Io { queue, link, books }
    }
}

impl Handler<Event> for World {
    type Error = WorldError;

    fn handle(&mut self, queue: &mut EventQueue<Event>, now: SimTime, event: Event) -> Result<(), WorldError> {
        match event {
            Event::FlowStart(f) => {
                let mut io = World::io(queue, &mut self.link, &mut self.books);
                self.senders[f.0].start(&mut io);
            }
            Event::TransmissionComplete => {
                if let Some((p, arrive_at)) = self.link.complete_transmission(now) {
                    self.books[p.flow.0].propagating += 1;
                    queue.schedule_in(arrive_at - now, Event::PacketArrival(p));
                }
                if let Some(done) = self.link.transmit_next(now) {
                    queue.schedule_in(done - now, Event::TransmissionComplete);
                }
            }
            Event::PacketArrival(p) if p.is_ack => {
                let ack = AckRecord::try_from(&p)?;
                let mut io = World::io(queue, &mut self.link, &mut self.books);
                self.senders[p.flow.0].on_ack(&mut io, &ack)?;
            }
            Event::PacketArrival(p) => {
                let f = p.flow.0;
                self.books[f].propagating -= 1;
                let ack = self.receivers[f].on_data_arrival(now, &p);
                let at = self.ret.arrival(now, self.extra_return[f]);
                queue.schedule_in(at - now, Event::PacketArrival(ack));
            }
            Event::RtoTimer(f) => {
                let mut io = World::io(queue, &mut self.link, &mut self.books);
                self.senders[f.0].on_rto(&mut io);
            }
            Event::InferencePhaseEnd(f) => {
                let mut io = World::io(queue, &mut self.link, &mut self.books);
                self.senders[f.0].on_inference_end(&mut io);
            }
            Event::PacingTimer(f) => {
                let mut io = World::io(queue, &mut self.link, &mut self.books);
                self.senders[f.0].on_pacing_timer(&mut io);
            }
            Event::MetricsSampleTick(Tick::Window) => {
                self.check_conservation()?;
                self.close_window();
            }
            Event::MetricsSampleTick(Tick::Trace) => {
                if let Some(trace) = &mut self.cwnd_trace {
                    let t = now.as_secs_f64();
                    for (s, series) in self.senders.iter().zip(trace.iter_mut()) {
                        series.push((t, s.cwnd()));
                    }
                }
                if let Some(dt) = self.trace_interval {
                    if now + dt <= self.horizon {
                        queue.schedule_in(dt, Event::MetricsSampleTick(Tick::Trace));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("World").field("flows", &self.senders.len()).finish()
    }
}

/// Runs one scenario to its horizon, then drains the network with every
/// sender stopped. Metrics cover `[0, horizon]` only.
pub fn simulate(topo: Topology, flows: Vec<FlowSetup>, opts: RunOptions) -> Result<SimOutput, SimError> {
    if flows.is_empty() {
        return Err(SimError::NoFlows);
    }
    if opts.horizon.is_zero() {
        return Err(SimError::EmptyHorizon);
    }
    let n = flows.len();
    let horizon = SimTime::ZERO + opts.horizon;
    let mut link = Link::new(topo.capacity_bps, topo.fwd_prop_delay, topo.buffer_pkts);
    if opts.trace_interval.is_some() {
        link.record_series();
    }
    let protocols: Vec<Protocol> = flows.iter().map(|f| f.controller.protocol()).collect();
    let mut queue = EventQueue::new();
    if opts.event_log {
        queue = queue.with_event_log();
    }
    let mut world = World {
        topo,
        link,
        ret: ReturnPath { base_delay: topo.return_delay },
        senders: Vec::with_capacity(n),
        receivers: (0..n).map(|i| Receiver::new(FlowId(i), topo.ack_size)).collect(),
        extra_return: flows.iter().map(|f| f.extra_return_delay).collect(),
        books: vec![Conservation::default(); n],
        window_bytes: Vec::new(),
        last_goodput: vec![0; n],
        cwnd_trace: opts.trace_interval.map(|_| vec![Vec::new(); n]),
        trace_interval: opts.trace_interval,
        horizon,
    };
    for (i, f) in flows.into_iter().enumerate() {
        let id = FlowId(i);
        world
            .senders
            .push(FlowEndpoint::new(id, f.controller, topo.pkt_size, f.start_at));
        queue.schedule(f.start_at, Event::FlowStart(id))?;
    }
    let window = opts.fairness_window;
    let mut t = SimTime::ZERO + window;
    while t <= horizon {
        queue.schedule(t, Event::MetricsSampleTick(Tick::Window))?;
        t += window;
    }
    if opts.trace_interval.is_some() {
        queue.schedule(SimTime::ZERO, Event::MetricsSampleTick(Tick::Trace))?;
    }

    queue.run_until(horizon, &mut world)?;

    // A trailing partial window still counts.
    if !opts.horizon.as_nanos().is_multiple_of(window.as_nanos()) {
        world.close_window();
    }
    let counters: Vec<FlowCounters> = (0..n)
        .map(|i| FlowCounters {
            flow: FlowId(i),
            protocol: Some(protocols[i]),
            bytes_delivered: world.receivers[i].goodput_bytes(),
            packets_sent: world.books[i].sent,
            packets_dropped: world.books[i].dropped,
            packets_arrived: world.receivers[i].arrivals(),
        })
        .collect();
    let mean_backlog = world.link.samples().mean();
    let sender_stats = world.senders.iter().map(|s| s.stats()).collect();

    {
        let World { senders, link, books, .. } = &mut world;
        let mut io = World::io(&mut queue, link, books);
        for s in senders.iter_mut() {
            s.stop(&mut io);
        }
    }
    queue.run_to_completion(&mut world)?;
    for i in 0..n {
        let in_network = world.in_network(i);
        if in_network != 0 {
            return Err(SimError::Undrained { flow: FlowId(i), in_network });
        }
    }
    world.check_conservation()?;

    let traces = world.cwnd_trace.take().map(|cwnd| Traces {
        cwnd,
        queue: world.link.samples().series.clone().unwrap_or_default(),
    });
    Ok(SimOutput {
        record: RunRecord {
            capacity_bps: world.topo.capacity_bps,
            horizon: opts.horizon,
            buffer_pkts: world.topo.buffer_pkts,
            fairness_window: window,
            flows: counters,
            window_bytes: world.window_bytes,
            mean_backlog,
        },
        sender_stats,
        traces,
        events_processed: queue.events_processed(),
        event_log: queue.event_log().map(<[String]>::to_vec),
    })
}
