//! Comparison planners: UCT with double progressive widening, and a
//! deterministic route planner tracked by receding-horizon control.

pub mod dpw;
pub mod rhc;
pub mod runner;
pub mod uct;

pub use dpw::{uct_search, DpwTree, GenerativeModel, UctParams, WideningReport};
pub use rhc::{rhc_control, rhc_plan, NominalWeights, RhcParams};
pub use runner::{run_controller, Controller, Decision, RhcController, UctController};
pub use uct::uct_action;
