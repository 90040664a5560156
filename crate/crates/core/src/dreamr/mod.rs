//! Drone routing over a fleet of ground vehicles that can carry it.
//!
//! Two modes: `MOVE` (the agent flies under double-integrator dynamics) and
//! `RIDE` (the agent sits on a car and follows its route). Cars drive along
//! waypoint routes whose ETAs drift randomly each epoch.

pub mod arrival;
pub mod dynamics;
pub mod hooks;
pub mod local;
pub mod params;
pub mod routes;
pub mod scenario;
pub mod world;

use crate::model::ModeId;

pub const MOVE: ModeId = ModeId(0);
pub const RIDE: ModeId = ModeId(1);

pub use arrival::{ArrivalModel, ArrivalTable};
pub use dynamics::{DreamrProblem, DreamrSwitch, SwitchKind};
pub use hooks::DreamrHooks;
pub use local::{build_move_table, DoubleIntegratorModel, GridSpec, TableSpec};
pub use params::DreamrParams;
pub use routes::{DreamrContext, Snapshot};
pub use scenario::{generate_scenario, Scenario, ScenarioConfig};
pub use world::{goal_space, DreamrWorld};
