//! Congestion controllers behind a single contract.
//!
//! The transport owns the window ([`Window`]) and calls into the controller
//! on every new cumulative ack and on every detected loss. Controllers may
//! ask the transport to arm or cancel a per-flow timer through
//! [`TimerRequest`]; only LP uses this, for its inference phase.

mod coords;
mod ledbat;
mod lp;
mod nice;
mod reno;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::engine::SimTime;

pub use coords::{buffer_drain_secs, CoordsError, GainTargetCoords};
pub use ledbat::{LedbatParams, LedbatState};
pub use lp::{LpParams, LpPhase, LpState};
pub use nice::{NiceParams, NiceState};
pub use reno::RenoState;

/// Smallest window for every controller except NICE.
pub const MIN_CWND: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Reno,
    Lp,
    Nice,
    Ledbat,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Reno, Protocol::Lp, Protocol::Nice, Protocol::Ledbat];
    pub const LBE: [Protocol; 3] = [Protocol::Lp, Protocol::Nice, Protocol::Ledbat];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Reno => "reno",
            Protocol::Lp => "lp",
            Protocol::Nice => "nice",
            Protocol::Ledbat => "ledbat",
        }
    }

    pub fn is_lbe(self) -> bool {
        self != Protocol::Reno
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reno" | "tcp" => Ok(Protocol::Reno),
            "lp" | "tcp-lp" => Ok(Protocol::Lp),
            "nice" | "tcp-nice" => Ok(Protocol::Nice),
            "ledbat" => Ok(Protocol::Ledbat),
            other => Err(format!("unknown protocol `{other}` (expected reno, lp, nice or ledbat)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    DupAck,
    Timeout,
}

/// Congestion window state shared between transport and controller, in packets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub cwnd: f64,
    pub ssthresh: f64,
}

impl Window {
    pub fn initial() -> Self {
        Window { cwnd: 1.0, ssthresh: f64::INFINITY }
    }
}

/// What the controller sees for each new cumulative ack.
#[derive(Clone, Copy, Debug)]
pub struct AckSample {
    pub now: SimTime,
    /// One-way delay of the data packet that triggered the ack.
    pub owd: Duration,
    /// `now` minus the echoed data send time.
    pub rtt: Duration,
    pub srtt: Duration,
    pub ack_no: u64,
    /// Next new sequence number the sender will emit.
    pub next_seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimerRequest {
    None,
    ArmInference(Duration),
    CancelInference,
}

/// Reno congestion avoidance step: +1 per ack below ssthresh, +1/cwnd above.
pub fn reno_increase(w: &mut Window) {
    if w.cwnd < w.ssthresh {
        w.cwnd += 1.0;
    } else {
        w.cwnd += 1.0 / w.cwnd;
    }
}

/// Multiplicative decrease on a fast retransmit.
pub fn halve(w: &mut Window, floor: f64) {
    let half = w.cwnd / 2.0;
    w.ssthresh = half.max(2.0);
    w.cwnd = half.max(floor);
}

/// Per-flow controller state.
#[derive(Clone, Debug)]
pub enum Controller {
    Reno(RenoState),
    Lp(LpState),
    Nice(NiceState),
    Ledbat(LedbatState),
}

impl Controller {
    pub fn protocol(&self) -> Protocol {
        match self {
            Controller::Reno(_) => Protocol::Reno,
            Controller::Lp(_) => Protocol::Lp,
            Controller::Nice(_) => Protocol::Nice,
            Controller::Ledbat(_) => Protocol::Ledbat,
        }
    }

    pub fn floor(&self) -> f64 {
        match self {
            Controller::Nice(s) => s.fractional_floor(),
            _ => MIN_CWND,
        }
    }

    /// Whether fast recovery inflates the window by one per extra dupack.
    pub fn inflates_in_recovery(&self) -> bool {
        matches!(self, Controller::Reno(_) | Controller::Lp(_))
    }

    pub fn on_ack(&mut self, w: &mut Window, ack: &AckSample) -> TimerRequest {
        match self {
            Controller::Reno(s) => {
                s.on_ack(w);
                TimerRequest::None
            }
            Controller::Lp(s) => s.on_ack(w, ack),
            Controller::Nice(s) => {
                s.on_ack(w, ack);
                TimerRequest::None
            }
            Controller::Ledbat(s) => {
                s.on_ack(w, ack.owd);
                TimerRequest::None
            }
        }
    }

    /// Loss notification. For `DupAck` the controller applies the window
    /// decrease; for `Timeout` the transport has already collapsed the
    /// window and the controller only resets its own state.
    pub fn on_loss(&mut self, w: &mut Window, kind: LossKind) -> TimerRequest {
        let floor = self.floor();
        if kind == LossKind::DupAck {
            halve(w, floor);
        }
        match self {
            Controller::Reno(_) => TimerRequest::None,
            Controller::Lp(s) => s.on_loss(),
            Controller::Nice(s) => {
                s.on_loss(kind);
                TimerRequest::None
            }
            Controller::Ledbat(s) => {
                s.on_loss();
                TimerRequest::None
            }
        }
    }

    pub fn on_inference_end(&mut self, w: &mut Window) {
        if let Controller::Lp(s) = self {
            s.on_inference_end(w);
        }
    }
}
