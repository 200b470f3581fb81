//! Flexible job-shop scheduling compiled to binary quadratic models and
//! solved with annealing-family samplers under an emulated quantum-hardware
//! capacity model.
//!
//! Pipeline: [`instance`] builds or loads a problem, [`qubo`] compiles it to
//! a [`qubo::Bqm`], [`samplers`] minimize the model, [`topology`] maps it
//! onto a hardware graph, and [`solvers`] combine these into the direct,
//! hybrid-portfolio and iterative solver configurations. [`oracle`] supplies
//! exact answers for small cases.

pub mod instance;
pub mod oracle;
pub mod qubo;
pub mod registry;
pub mod samplers;
pub mod solvers;
pub mod topology;

pub use instance::{FjsspInstance, SetupParams};
pub use qubo::{Bqm, Schedule};
pub use registry::Registry;
