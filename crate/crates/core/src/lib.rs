//! Packet-level discrete-event simulation of lower-than-best-effort
//! congestion control (TCP-LP, TCP-NICE, LEDBAT) against TCP Reno on a
//! dumbbell bottleneck, with the metric suite and experiment catalog.

pub mod controllers;
pub mod engine;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod sim;
pub mod transport;
