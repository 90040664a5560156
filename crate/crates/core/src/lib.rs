//! Hybrid stochastic planning for dynamic multimodal stochastic shortest-path problems.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dreamr;
pub mod error;
pub mod executive;
pub mod global;
pub mod grid;
pub mod horizon;
pub mod local;
pub mod model;
pub mod oracle;

pub use error::{ExecError, LocalError, ModelError, PlanError};
pub use grid::Grid;
pub use horizon::HorizonDist;
pub use local::{CostToGoTable, LocalModel};
pub use model::{Action, ContextSet, ContinuousState, Dmssp, EpisodeResult, GoalSpace, HybridState, ModeId};
