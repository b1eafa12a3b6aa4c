//! Agent-based simulation of a gather-trade-build economy with a tax
//! planner, resource voting and emergent communication.

pub mod engine;
pub mod error;
pub mod fiscal;
pub mod iafit;
pub mod language;
pub mod market;
pub mod metrics;
pub mod runner;
pub mod seed;
pub mod types;
pub mod world;

pub use error::{ConfigError, Error, Result};
pub use types::{AgentId, Coins, HouseType, Inventory, Material};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/world.md")]
    mod world {}
    #[doc = include_str!("../../../book/src/market.md")]
    mod market {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/fiscal.md")]
    mod fiscal {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/iafit.md")]
    mod iafit {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
