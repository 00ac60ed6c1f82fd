//! Quantized-measurement control of a bistable chemostat.
//!
//! The plant is a two-state chemostat with Haldane kinetics; only the
//! region holding the growth proxy `y = alpha mu(s) x` is measured, and a
//! constant dilution rate is applied per region. The crate covers the plant
//! analysis, the stabilization conditions and the synthesis of rates,
//! Filippov/randomized simulation, and transition-graph abstraction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod controller;
pub mod error;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod quantizer;
pub mod scalar;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type State64 = model::State<f64>;
pub type State32 = model::State<f32>;
pub type RegionSet64 = quantizer::RegionSet<f64>;
pub type RegionSet32 = quantizer::RegionSet<f32>;
pub type DilutionSchedule64 = controller::DilutionSchedule<f64>;
pub type DilutionSchedule32 = controller::DilutionSchedule<f32>;
pub type SimConfig64 = simulator::SimConfig<f64>;
pub type SimConfig32 = simulator::SimConfig<f32>;
pub type Trajectory64 = simulator::Trajectory<f64>;
pub type SimOutcome64 = simulator::SimOutcome<f64>;
