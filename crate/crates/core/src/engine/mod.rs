//! Episode configuration, state, policies and the step loop.

pub mod action;
pub mod agent;
pub mod config;
pub mod env;
pub mod episode;
pub mod log;
pub mod observation;
pub mod policy;

pub use action::{Action, ActionMask, N_ACTIONS};
pub use agent::{utility, AgentState};
pub use config::EpisodeConfig;
pub use env::{Env, JointAction, StepError, StepReport};
pub use episode::{replay, run_configured, run_episode};
pub use log::EpisodeLog;
pub use policy::{AgentPolicy, PlannerAction, PlannerPolicy};
