//! Mobility analytics over call-detail-record (CDR) streams.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] parses the 4-column CDR CSV and projects coordinates onto a
//!    local kilometre plane.
//! 2. [`trajectory`] groups records into per-user, time-ordered trajectories.
//! 3. [`kernel`] derives per-user characteristics: center of mass, radius of
//!    gyration, inertia tensor, principal axes and the intrinsic frame.
//! 4. [`distribution`] aggregates population distributions (jump sizes,
//!    waiting times, `P(r_g)`), fits a truncated power law and classifies
//!    users into radius-of-gyration bands.
//!
//! [`synth`] generates seeded populations with known ground truth together
//! with brute-force reference implementations of every kernel metric.
//! Per-user work is data-parallel through [`par`]; disabling the default
//! `parallel` feature yields a fully sequential build with identical output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distribution;
pub mod ingest;
pub mod kernel;
pub mod numfmt;
pub mod par;
pub mod selftest;
pub mod synth;
pub mod trajectory;

pub use distribution::{Histogram, PowerLawFit, RgBand};
pub use ingest::{CdrRecord, GeoPoint, IngestStats, Position, Timestamp};
pub use kernel::{InertiaTensor, IntrinsicTrajectory, MobilitySummary};
pub use trajectory::{TrackPoint, Trajectory};
