//! Domain-independent counterplanning.
//!
//! A *seeker* pursues one of several candidate goals; a *preventer* observes
//! the seeker's actions, infers its likely goals, and tries to make them
//! unreachable. The crate covers the full stack: a typed-STRIPS PDDL frontend
//! and grounder, an optimal planner, fact landmarks, plan-based goal
//! recognition, planning centroids, the reactive and anticipatory
//! counterplanning loops, and a two-agent concurrent simulator.

pub mod bundle;
pub mod centroids;
pub mod counterplanning;
pub mod error;
pub mod ground;
pub mod heuristic;
pub mod landmarks;
pub mod par;
pub mod pddl;
pub mod planner;
pub mod recognition;
pub mod simulator;
pub mod strips;

pub use error::{Error, Result};
pub use par::Execution;
pub use strips::{Action, FactId, FactTable, Literal, Plan, PlanningTask, State};
