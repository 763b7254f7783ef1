//! Numerical kernels for certifying persistency of excitation of signals and
//! state-dependent functions, and for probing uniform stability of
//! nonlinear time-varying systems.
//!
//! The crate is `no_std` (with `alloc`): every operation is a pure function
//! of its inputs, so results are reproducible bit for bit. File formats, the
//! command line and parallel sweeps live in the companion `pelab` crate.
//!
//! Module map:
//!
//! * [`signal`]: time signals, state functions and windowed quadrature.
//! * [`pe`]: classical and uδ-PE certificates, certificate maps and the
//!   derived facts (power, filtering, linear running-integral test).
//! * [`ode`]: fixed-step RK4 trajectories.
//! * [`catalog`]: closed-loop systems with matching nonlinearities,
//!   bounded feedforward control and adaptive Euler–Lagrange tracking.
//! * [`probe`]: settling-time uniformity, stability envelopes, exponential
//!   fits and the auxiliary-function checks.

#![no_std]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod pe;
pub mod probe;
pub mod signal;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use ode::{OdeSystem, Trajectory};
pub use signal::{Interval, Partition, QuadratureSpec, Rule, StateFunction, TimeSignal};
