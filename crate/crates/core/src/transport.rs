//! Window-based sender and cumulative-ack receiver.
//!
//! Sources are backlogged: the sender always has a next packet. Every data
//! packet is acked immediately (no delayed acks) and the ack carries the
//! one-way delay of the packet that triggered it plus its send timestamp.
//! Loss recovery is plain Reno: fast retransmit on the third duplicate ack,
//! fast recovery until the next new ack, and go-back-N on timeout.

use std::collections::BTreeSet;
use std::time::Duration;

use thiserror::Error;

use crate::controllers::{AckSample, Controller, LossKind, TimerRequest, Window};
use crate::engine::{EventHandle, SimTime};
use crate::network::{FlowId, Packet};

pub const INITIAL_RTO: Duration = Duration::from_secs(1);
pub const MIN_RTO: Duration = Duration::from_millis(200);
pub const MAX_RTO: Duration = Duration::from_secs(60);
pub const DUPACK_THRESHOLD: u32 = 3;

const CREDIT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("flow {flow}: ack {ack_no} acknowledges data never sent (highest sent {max_sent})")]
    AckBeyondSent { flow: FlowId, ack_no: u64, max_sent: u64 },
    #[error("flow {flow}: ack without delay measurement")]
    MalformedAck { flow: FlowId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimerKind {
    Rto,
    Inference,
    Pacing,
}

/// The sender's view of the outside world.
pub trait FlowIo {
    fn now(&self) -> SimTime;
    fn send(&mut self, packet: Packet);
    fn arm(&mut self, flow: FlowId, kind: TimerKind, at: SimTime) -> EventHandle;
    fn cancel(&mut self, handle: EventHandle) -> bool;
}

/// Feedback carried by one ack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AckRecord {
    pub ack_no: u64,
    pub measured_owd: Duration,
    pub data_sent_at: SimTime,
}

impl TryFrom<&Packet> for AckRecord {
    type Error = TransportError;

    fn try_from(p: &Packet) -> Result<Self, TransportError> {
        match (p.is_ack, p.measured_owd, p.echo_sent_at) {
            (true, Some(owd), Some(sent)) => Ok(AckRecord {
                ack_no: p.ack_no,
                measured_owd: owd,
                data_sent_at: sent,
            }),
            _ => Err(TransportError::MalformedAck { flow: p.flow }),
        }
    }
}

/// Smoothed RTT and retransmission timeout (srtt + 4 rttvar, 200 ms floor).
#[derive(Clone, Debug)]
pub struct RttEstimator {
    srtt: Option<Duration>,
    rttvar: Duration,
    rto: Duration,
    backoff: u32,
}

impl Default for RttEstimator {
    fn default() -> Self {
        RttEstimator {
            srtt: None,
            rttvar: Duration::ZERO,
            rto: INITIAL_RTO,
            backoff: 0,
        }
    }
}

impl RttEstimator {
    pub fn sample(&mut self, rtt: Duration) {
        match self.srtt {
            None => {
                self.srtt = Some(rtt);
                self.rttvar = rtt / 2;
            }
            Some(srtt) => {
                let err = srtt.abs_diff(rtt);
                self.rttvar = (self.rttvar * 3 + err) / 4;
                self.srtt = Some((srtt * 7 + rtt) / 8);
            }
        }
        let srtt = self.srtt.unwrap_or(rtt);
        self.rto = (srtt + self.rttvar * 4).max(MIN_RTO);
        self.backoff = 0;
    }

    pub fn srtt(&self) -> Option<Duration> {
        self.srtt
    }

    pub fn backoff(&mut self) {
        self.backoff = (self.backoff + 1).min(16);
    }

    pub fn rto(&self) -> Duration {
        self.rto.saturating_mul(1 << self.backoff).min(MAX_RTO)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SenderStats {
    pub packets_sent: u64,
    pub retransmits: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
}

#[derive(Clone, Copy, Debug)]
struct Recovery {
    /// Window to restore when recovery ends (deflation).
    cwnd_after: f64,
}

/// Sender half of one flow.
#[derive(Clone, Debug)]
pub struct FlowEndpoint {
    id: FlowId,
    pkt_size: u32,
    pub window: Window,
    /// Next sequence number to transmit.
    next_seq: u64,
    /// One past the highest sequence number ever transmitted.
    max_sent: u64,
    /// Cumulative ack point: everything below is acknowledged.
    highest_acked: u64,
    dupacks: u32,
    recovery: Option<Recovery>,
    /// After a timeout, duplicate acks below this point never trigger a
    /// fast retransmit (they are echoes of the go-back-N resend).
    recover_guard: u64,
    rtt: RttEstimator,
    rto_handle: Option<EventHandle>,
    inference_handle: Option<EventHandle>,
    pacing_handle: Option<EventHandle>,
    controller: Controller,
    start_at: SimTime,
    started: bool,
    stopped: bool,
    fractional_credit: f64,
    credit_at: SimTime,
    stats: SenderStats,
}

impl FlowEndpoint {
    pub fn new(id: FlowId, controller: Controller, pkt_size: u32, start_at: SimTime) -> Self {
        FlowEndpoint {
            id,
            pkt_size,
            window: Window::initial(),
            next_seq: 0,
            max_sent: 0,
            highest_acked: 0,
            dupacks: 0,
            recovery: None,
            recover_guard: 0,
            rtt: RttEstimator::default(),
            rto_handle: None,
            inference_handle: None,
            pacing_handle: None,
            controller,
            start_at,
            started: false,
            stopped: false,
            fractional_credit: 0.0,
            credit_at: start_at,
            stats: SenderStats::default(),
        }
    }

    pub fn id(&self) -> FlowId {
        self.id
    }

    pub fn start_at(&self) -> SimTime {
        self.start_at
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn cwnd(&self) -> f64 {
        self.window.cwnd
    }

    pub fn stats(&self) -> SenderStats {
        self.stats
    }

    pub fn highest_acked(&self) -> u64 {
        self.highest_acked
    }

    /// One past the highest sequence ever sent.
    pub fn highest_sent(&self) -> u64 {
        self.max_sent
    }

    pub fn in_flight(&self) -> u64 {
        self.next_seq - self.highest_acked
    }

    pub fn in_recovery(&self) -> bool {
        self.recovery.is_some()
    }

    pub fn dupacks(&self) -> u32 {
        self.dupacks
    }

    pub fn rtt(&self) -> &RttEstimator {
        &self.rtt
    }

    pub fn fractional_credit(&self) -> f64 {
        self.fractional_credit
    }

    pub fn set_fractional_credit(&mut self, credit: f64) {
        self.fractional_credit = credit.clamp(0.0, 1.0 - f64::EPSILON);
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    fn srtt_or_initial(&self) -> Duration {
        self.rtt.srtt().unwrap_or(INITIAL_RTO)
    }

    pub fn start(&mut self, io: &mut impl FlowIo) -> usize {
        self.started = true;
        self.credit_at = io.now();
        self.try_send(io)
    }

    /// Stops all transmission and disarms every timer (used to drain the
    /// network at the end of a run).
    pub fn stop(&mut self, io: &mut impl FlowIo) {
        self.stopped = true;
        for h in [self.rto_handle.take(), self.inference_handle.take(), self.pacing_handle.take()]
            .into_iter()
            .flatten()
        {
            io.cancel(h);
        }
    }

    fn emit(&mut self, io: &mut impl FlowIo, seq: u64) {
        let now = io.now();
        if seq < self.max_sent {
            self.stats.retransmits += 1;
        }
        self.stats.packets_sent += 1;
        io.send(Packet::data(self.id, seq, self.pkt_size, now));
        self.max_sent = self.max_sent.max(seq + 1);
        self.credit_at = now;
        if self.rto_handle.is_none() {
            let at = now + self.rtt.rto();
            self.rto_handle = Some(io.arm(self.id, TimerKind::Rto, at));
        }
    }

    fn emit_next(&mut self, io: &mut impl FlowIo) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.emit(io, seq);
    }

    /// Emits as many packets as the window allows; returns how many.
    pub fn try_send(&mut self, io: &mut impl FlowIo) -> usize {
        if !self.started || self.stopped {
            return 0;
        }
        if self.window.cwnd < 1.0 {
            return self.try_send_fractional(io);
        }
        if let Some(h) = self.pacing_handle.take() {
            io.cancel(h);
        }
        let allowance = (self.window.cwnd + self.fractional_credit).floor() as u64;
        let mut sent = 0;
        while self.in_flight() < allowance {
            self.emit_next(io);
            sent += 1;
        }
        sent
    }

    /// Sub-packet windows: credit accrues at `cwnd` per srtt since the last
    /// emission, and one packet goes out whenever it reaches a full packet
    /// with nothing in flight.
    fn try_send_fractional(&mut self, io: &mut impl FlowIo) -> usize {
        let now = io.now();
        let srtt = self.srtt_or_initial().as_secs_f64();
        let elapsed = now.saturating_since(self.credit_at).as_secs_f64();
        self.fractional_credit = (self.fractional_credit + self.window.cwnd * elapsed / srtt).min(1.0);
        self.credit_at = now;
        if self.in_flight() > 0 {
            return 0;
        }
        if self.fractional_credit >= 1.0 - CREDIT_EPSILON {
            if let Some(h) = self.pacing_handle.take() {
                io.cancel(h);
            }
            self.fractional_credit = 0.0;
            self.emit_next(io);
            return 1;
        }
        if self.pacing_handle.is_none() {
            let wait = (1.0 - self.fractional_credit) * srtt / self.window.cwnd;
            let at = now + Duration::from_nanos((wait * 1e9).round() as u64);
            self.pacing_handle = Some(io.arm(self.id, TimerKind::Pacing, at));
        }
        0
    }

    fn apply_timer_request(&mut self, io: &mut impl FlowIo, req: TimerRequest) {
        match req {
            TimerRequest::None => {}
            TimerRequest::ArmInference(d) => {
                if let Some(h) = self.inference_handle.take() {
                    io.cancel(h);
                }
                let at = io.now() + d;
                self.inference_handle = Some(io.arm(self.id, TimerKind::Inference, at));
            }
            TimerRequest::CancelInference => {
                if let Some(h) = self.inference_handle.take() {
                    io.cancel(h);
                }
            }
        }
    }

    fn restart_rto(&mut self, io: &mut impl FlowIo) {
        if let Some(h) = self.rto_handle.take() {
            io.cancel(h);
        }
        if self.in_flight() > 0 {
            let at = io.now() + self.rtt.rto();
            self.rto_handle = Some(io.arm(self.id, TimerKind::Rto, at));
        }
    }

    pub fn on_ack(&mut self, io: &mut impl FlowIo, ack: &AckRecord) -> Result<(), TransportError> {
        if self.stopped {
            return Ok(());
        }
        if ack.ack_no > self.max_sent {
            return Err(TransportError::AckBeyondSent {
                flow: self.id,
                ack_no: ack.ack_no,
                max_sent: self.max_sent,
            });
        }
        let now = io.now();
        if ack.ack_no > self.highest_acked {
            self.highest_acked = ack.ack_no;
            self.next_seq = self.next_seq.max(self.highest_acked);
            self.dupacks = 0;
            let rtt = now.saturating_since(ack.data_sent_at);
            self.rtt.sample(rtt);
            if let Some(rec) = self.recovery.take() {
                self.window.cwnd = rec.cwnd_after;
            } else {
                let sample = AckSample {
                    now,
                    owd: ack.measured_owd,
                    rtt,
                    srtt: self.srtt_or_initial(),
                    ack_no: ack.ack_no,
                    next_seq: self.next_seq,
                };
                let req = self.controller.on_ack(&mut self.window, &sample);
                self.apply_timer_request(io, req);
            }
            self.try_send(io);
            self.restart_rto(io);
        } else if ack.ack_no == self.highest_acked && self.in_flight() > 0 {
            self.dupacks += 1;
            if self.recovery.is_some() {
                if self.controller.inflates_in_recovery() {
                    self.window.cwnd += 1.0;
                    self.try_send(io);
                }
            } else if self.dupacks == DUPACK_THRESHOLD && self.highest_acked >= self.recover_guard {
                self.stats.fast_retransmits += 1;
                let missing = self.highest_acked;
                self.emit(io, missing);
                let req = self.controller.on_loss(&mut self.window, LossKind::DupAck);
                self.apply_timer_request(io, req);
                self.recovery = Some(Recovery { cwnd_after: self.window.cwnd });
                self.try_send(io);
            }
        }
        Ok(())
    }

    pub fn on_rto(&mut self, io: &mut impl FlowIo) {
        self.rto_handle = None;
        if self.stopped || self.in_flight() == 0 {
            return;
        }
        self.stats.timeouts += 1;
        let in_flight = self.in_flight() as f64;
        self.window.ssthresh = (in_flight / 2.0).max(2.0);
        self.window.cwnd = 1.0;
        self.recovery = None;
        self.dupacks = 0;
        self.recover_guard = self.max_sent;
        self.rtt.backoff();
        let req = self.controller.on_loss(&mut self.window, LossKind::Timeout);
        self.apply_timer_request(io, req);
        self.next_seq = self.highest_acked;
        self.fractional_credit = 0.0;
        self.try_send(io);
        if self.rto_handle.is_none() {
            self.restart_rto(io);
        }
    }

    pub fn on_inference_end(&mut self, io: &mut impl FlowIo) {
        self.inference_handle = None;
        if self.stopped {
            return;
        }
        self.controller.on_inference_end(&mut self.window);
        self.try_send(io);
    }

    pub fn on_pacing_timer(&mut self, io: &mut impl FlowIo) {
        self.pacing_handle = None;
        self.try_send(io);
    }
}

/// Receiver half of one flow: cumulative acks, out-of-order buffering.
#[derive(Clone, Debug)]
pub struct Receiver {
    flow: FlowId,
    ack_size: u32,
    next_expected: u64,
    out_of_order: BTreeSet<u64>,
    arrivals: u64,
    /// In-order bytes handed to the application; duplicates never count.
    goodput_bytes: u64,
}

impl Receiver {
    pub fn new(flow: FlowId, ack_size: u32) -> Self {
        Receiver {
            flow,
            ack_size,
            next_expected: 0,
            out_of_order: BTreeSet::new(),
            arrivals: 0,
            goodput_bytes: 0,
        }
    }

    pub fn next_expected(&self) -> u64 {
        self.next_expected
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn goodput_bytes(&self) -> u64 {
        self.goodput_bytes
    }

    pub fn on_data_arrival(&mut self, now: SimTime, p: &Packet) -> Packet {
        debug_assert!(!p.is_ack && p.flow == self.flow);
        self.arrivals += 1;
        let size = u64::from(p.size_bytes);
        if p.seq == self.next_expected {
            self.next_expected += 1;
            self.goodput_bytes += size;
            while self.out_of_order.remove(&self.next_expected) {
                self.next_expected += 1;
                self.goodput_bytes += size;
            }
        } else if p.seq > self.next_expected {
            self.out_of_order.insert(p.seq);
        }
        Packet {
            flow: self.flow,
            seq: 0,
            size_bytes: self.ack_size,
            sent_at: now,
            measured_owd: Some(now.saturating_since(p.sent_at)),
            echo_sent_at: Some(p.sent_at),
            is_ack: true,
            ack_no: self.next_expected,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{LedbatParams, LedbatState, NiceParams, NiceState, RenoState};

    #[derive(Default)]
    struct MockIo {
        now: SimTime,
        sent: Vec<Packet>,
        armed: Vec<(TimerKind, SimTime, EventHandle)>,
        cancelled: Vec<EventHandle>,
        next: u64,
    }

    impl MockIo {
        fn handle(&mut self) -> EventHandle {
            self.next += 1;
            EventHandle::from_seq(self.next)
        }

        fn sent_seqs(&self) -> Vec<u64> {
            self.sent.iter().map(|p| p.seq).collect()
        }

        fn last_armed(&self, kind: TimerKind) -> Option<SimTime> {
            self.armed
                .iter()
                .rev()
                .find(|(k, _, h)| *k == kind && !self.cancelled.contains(h))
                .map(|a| a.1)
        }
    }

    impl FlowIo for MockIo {
        fn now(&self) -> SimTime {
            self.now
        }
        fn send(&mut self, packet: Packet) {
            self.sent.push(packet);
        }
        fn arm(&mut self, _flow: FlowId, kind: TimerKind, at: SimTime) -> EventHandle {
            let h = self.handle();
            self.armed.push((kind, at, h));
            h
        }
        fn cancel(&mut self, handle: EventHandle) -> bool {
            self.cancelled.push(handle);
            true
        }
    }

    fn reno() -> FlowEndpoint {
        FlowEndpoint::new(FlowId(0), Controller::Reno(RenoState), 1500, SimTime::ZERO)
    }

    fn ack(n: u64, sent_at: SimTime) -> AckRecord {
        AckRecord {
            ack_no: n,
            measured_owd: Duration::from_micros(26_200),
            data_sent_at: sent_at,
        }
    }

    #[test]
    fn window_limits_emission() {
        let mut io = MockIo::default();
        let mut f = reno();
        f.window.cwnd = 4.0;
        f.started = true;
        f.next_seq = 2;
        f.max_sent = 2;
        assert_eq!(f.try_send(&mut io), 2);
        assert_eq!(io.sent_seqs(), [2, 3]);

        let mut f = reno();
        f.started = true;
        f.window.cwnd = 1.5;
        f.next_seq = 1;
        f.max_sent = 1;
        f.set_fractional_credit(0.6);
        assert_eq!(f.try_send(&mut MockIo::default()), 1);
    }

    #[test]
    fn slow_start_and_avoidance_steps() {
        let mut io = MockIo::default();
        let mut f = reno();
        f.start(&mut io);
        f.window = Window { cwnd: 4.0, ssthresh: 8.0 };
        f.try_send(&mut io);
        io.now = SimTime::from_millis(52);
        f.on_ack(&mut io, &ack(1, SimTime::ZERO)).unwrap();
        assert_eq!(f.cwnd(), 5.0);
        f.window = Window { cwnd: 10.0, ssthresh: 8.0 };
        f.on_ack(&mut io, &ack(2, SimTime::ZERO)).unwrap();
        assert!((f.cwnd() - 10.1).abs() < 1e-12);
    }

    #[test]
    fn third_dupack_fast_retransmits_and_halves() {
        let mut io = MockIo::default();
        let mut f = reno();
        f.start(&mut io);
        f.window = Window { cwnd: 20.0, ssthresh: f64::INFINITY };
        f.try_send(&mut io);
        assert_eq!(f.in_flight(), 20);
        io.now = SimTime::from_millis(60);
        f.on_ack(&mut io, &ack(1, SimTime::ZERO)).unwrap();
        f.window.cwnd = 20.0;
        io.sent.clear();
        for _ in 0..2 {
            f.on_ack(&mut io, &ack(1, SimTime::ZERO)).unwrap();
        }
        assert!(io.sent.is_empty());
        f.on_ack(&mut io, &ack(1, SimTime::ZERO)).unwrap();
        assert_eq!(io.sent_seqs(), [1], "missing segment resent");
        assert_eq!((f.cwnd(), f.window.ssthresh), (10.0, 10.0));
        assert!(f.in_recovery());
        // Inflation: each further dupack adds one packet of window.
        f.on_ack(&mut io, &ack(1, SimTime::ZERO)).unwrap();
        assert_eq!(f.cwnd(), 11.0);
        // New ack deflates.
        f.on_ack(&mut io, &ack(21, SimTime::from_millis(60))).unwrap();
        assert_eq!(f.cwnd(), 10.0);
        assert!(!f.in_recovery());
    }

    #[test]
    fn delay_based_controllers_do_not_inflate() {
        let mut io = MockIo::default();
        let mut f = FlowEndpoint::new(
            FlowId(1),
            Controller::Ledbat(LedbatState::new(LedbatParams::default())),
            1500,
            SimTime::ZERO,
        );
        f.start(&mut io);
        f.window.cwnd = 30.0;
        f.try_send(&mut io);
        for _ in 0..3 {
            f.on_ack(&mut io, &ack(0, SimTime::ZERO)).unwrap();
        }
        assert_eq!(f.cwnd(), 15.0);
        f.on_ack(&mut io, &ack(0, SimTime::ZERO)).unwrap();
        assert_eq!(f.cwnd(), 15.0);
    }

    #[test]
    fn timeout_collapses_window_and_backs_off() {
        let mut io = MockIo::default();
        let mut f = reno();
        f.start(&mut io);
        f.window.cwnd = 20.0;
        f.try_send(&mut io);
        let first_rto = io.last_armed(TimerKind::Rto).unwrap();
        assert_eq!(first_rto, SimTime::ZERO + INITIAL_RTO);
        io.now = first_rto;
        io.sent.clear();
        f.on_rto(&mut io);
        assert_eq!((f.cwnd(), f.window.ssthresh), (1.0, 10.0));
        assert_eq!(io.sent_seqs(), [0], "go-back-N from the ack point");
        assert_eq!(io.last_armed(TimerKind::Rto).unwrap(), first_rto + INITIAL_RTO * 2);
        io.now = first_rto + INITIAL_RTO * 2;
        f.on_rto(&mut io);
        assert_eq!(io.last_armed(TimerKind::Rto).unwrap(), io.now + INITIAL_RTO * 4);
    }

    #[test]
    fn ledbat_restarts_linearly_after_timeout() {
        let mut io = MockIo::default();
        let mut f = FlowEndpoint::new(
            FlowId(0),
            Controller::Ledbat(LedbatState::new(LedbatParams::default())),
            1500,
            SimTime::ZERO,
        );
        f.start(&mut io);
        io.now = SimTime::from_secs(1);
        f.on_rto(&mut io);
        assert_eq!(f.cwnd(), 1.0);
        io.now = SimTime::from_millis(1052);
        f.on_ack(&mut io, &ack(1, SimTime::from_secs(1))).unwrap();
        // Empty queue: offset = target, so +G/cwnd = +1 packet.
        assert!((f.cwnd() - 2.0).abs() < 1e-9, "{}", f.cwnd());
        f.on_ack(&mut io, &ack(1, SimTime::from_secs(1))).unwrap();
        assert!(f.window.ssthresh.is_finite());
    }

    #[test]
    fn ack_beyond_sent_is_a_fault() {
        let mut io = MockIo::default();
        let mut f = reno();
        f.start(&mut io);
        let err = f.on_ack(&mut io, &ack(5, SimTime::ZERO)).unwrap_err();
        assert!(matches!(err, TransportError::AckBeyondSent { ack_no: 5, max_sent: 1, .. }));
    }

    #[test]
    fn quarter_window_sends_every_four_rtts() {
        let mut io = MockIo::default();
        let mut f = FlowEndpoint::new(
            FlowId(0),
            Controller::Nice(NiceState::new(NiceParams { floor: 1.0 / 48.0, ..NiceParams::default() })),
            1500,
            SimTime::ZERO,
        );
        f.rtt.sample(Duration::from_millis(100));
        f.start(&mut io);
        assert_eq!(io.sent.len(), 1);
        f.window.cwnd = 0.25;
        // The ack comes back one RTT later; nothing else may go out yet.
        io.now = SimTime::from_millis(100);
        f.highest_acked = 1;
        f.next_seq = 1;
        assert_eq!(f.try_send(&mut io), 0);
        let wake = io.last_armed(TimerKind::Pacing).unwrap();
        assert_eq!(wake, SimTime::from_millis(400));
        io.now = wake;
        f.on_pacing_timer(&mut io);
        assert_eq!(io.sent.len(), 2);
    }

    #[test]
    fn receiver_cumulative_acks() {
        let mut r = Receiver::new(FlowId(0), 40);
        let t = SimTime::from_micros(26_200);
        let p0 = Packet::data(FlowId(0), 0, 1500, SimTime::ZERO);
        let a = r.on_data_arrival(t, &p0);
        assert_eq!(a.ack_no, 1);
        assert_eq!(a.measured_owd, Some(Duration::from_micros(26_200)));
        assert_eq!(a.echo_sent_at, Some(SimTime::ZERO));
        assert_eq!(a.size_bytes, 40);
        // Seq 1 lost; 2 and 3 arrive.
        let a = r.on_data_arrival(t, &Packet::data(FlowId(0), 2, 1500, SimTime::ZERO));
        assert_eq!(a.ack_no, 1);
        r.on_data_arrival(t, &Packet::data(FlowId(0), 3, 1500, SimTime::ZERO));
        assert_eq!(r.goodput_bytes(), 1500);
        let a = r.on_data_arrival(t, &Packet::data(FlowId(0), 1, 1500, SimTime::ZERO));
        assert_eq!(a.ack_no, 4);
        assert_eq!(r.goodput_bytes(), 4 * 1500);
        // Duplicates re-ack without counting.
        let a = r.on_data_arrival(t, &p0);
        assert_eq!(a.ack_no, 4);
        assert_eq!(r.goodput_bytes(), 4 * 1500);
        assert_eq!(r.arrivals(), 5);
    }

    #[test]
    fn rto_estimator() {
        let mut e = RttEstimator::default();
        assert_eq!(e.rto(), INITIAL_RTO);
        e.sample(Duration::from_millis(50));
        assert_eq!(e.rto(), Duration::from_millis(200));
        e.sample(Duration::from_millis(250));
        // rttvar = (25*3 + 200)/4 = 68.75, srtt = (350+250)/8 = 75
        assert_eq!(e.rto(), Duration::from_micros(75_000 + 275_000));
        e.backoff();
        assert_eq!(e.rto(), Duration::from_millis(700));
    }
}
