//! Semi-dynamic simulator for LTE downlink mobility load balancing.
//!
//! The crate models a sectorized cellular layout (path loss, shadowing,
//! antenna patterns, co-channel interference), runs a snapshot-based traffic
//! simulation with handover-margin control, and couples the simulator to a
//! multi-objective particle swarm that searches for margin surfaces trading
//! network throughput against call acceptance.
//!
//! Layering, from the bottom up:
//!
//! * [`net`]: static radio model (gains, SINR, spectral efficiency).
//! * [`control`]: handover-margin surfaces and the periodic sampler.
//! * [`sim`]: the snapshot engine and its KPI accounting.
//! * [`mopso`]: the multi-objective particle swarm and Pareto archive.
//! * [`harness`]: campaign orchestration tying the swarm to the simulator.
//! * [`scenario`], [`config`], [`tables`], [`analysis`]: file formats and
//!   post-processing used by the command-line front end.

pub mod analysis;
pub mod config;
pub mod control;
pub mod harness;
pub mod mopso;
pub mod net;
pub mod scenario;
pub mod sim;
pub mod tables;
pub mod units;
