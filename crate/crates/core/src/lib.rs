//! Non-Markovian qubit dephasing from undersampled classical noise.
//!
//! A qubit dephased by a classical stochastic field evolves under the
//! ensemble-averaged channel only when infinitely many noise realizations are
//! averaged. With a finite number `N` of realizations the channel is a
//! mixture of `N` unitaries, and its trace-distance curve can show revivals
//! even when the ensemble channel is Markovian. This crate simulates that
//! setting end to end:
//!
//! - [`noise`]: random telegraph noise and Ornstein-Uhlenbeck samplers with
//!   counter-based seeding ([`seed`]).
//! - [`decoherence`]: accumulated phases, undersampled and analytic
//!   decoherence functions.
//! - [`state`]: qubit states and the dephasing channel.
//! - [`measures`]: trace distance and the BLP non-Markovianity measure.
//! - [`choi`]: Choi states and the channel infidelity, with an independent
//!   eigendecomposition-based oracle.
//! - [`harness`]: repetitions, sweeps over `N`, and aggregate statistics.
//! - [`export`], [`manifest`], [`commands`]: CSV output, run manifests and
//!   the batch front end used by the `undersampling` binary.
//!
//! Units are adimensional: times are measured in units of `1/nu` and rates in
//! units of `nu`, where `nu` is the noise coupling.

pub mod choi;
pub mod commands;
pub mod decoherence;
pub mod error;
pub mod export;
pub mod grid;
pub mod harness;
pub mod manifest;
pub mod measures;
pub mod noise;
pub mod seed;
pub mod state;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use noise::{NoiseKind, NoiseParams, OuInit};
pub use seed::SeedSpec;
