use crate::error::ConfigError;
use crate::fiscal::{GoverningSystem, RevenueMode, TaxSchedule, DEFAULT_CUTOFFS};
use crate::language::Variant;
use crate::market::{CapMode, MarketConfig};
use crate::metrics::{MaximinBasis, Objective};
use crate::world::WorldConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// How a successful joint build pays its two participants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointPayout {
    /// Each participant receives its own together-skill.
    #[default]
    Each,
    /// The initiator's together-skill is split evenly between the two.
    Split,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentPolicyKind {
    #[default]
    Random,
    Noop,
    /// Initiates joint builds with misaligned partners whenever possible.
    AlwaysTeach,
    Softmax,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerPolicyKind {
    /// Every bracket at `planner_flat_rate`.
    #[default]
    Flat,
    /// Cycles through `planner_schedules`, one per tax period.
    Periodic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    /// Always `planner_ranking_index`.
    #[default]
    Fixed,
    /// Steps through the 24 rankings, one per tax period.
    RoundRobin,
}

/// Every knob of an episode, as one flat key-value table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub variant: Variant,
    pub system: GoverningSystem,
    pub objective: Objective,
    pub seed: u64,
    pub horizon: u64,
    pub tax_period: u64,
    pub n_agents: usize,
    /// Utility curvature; must be positive and not 1.
    pub eta: f64,

    pub world_width: usize,
    pub world_height: usize,
    pub deposit_density: [f64; 4],
    pub regen_init: [f64; 4],
    pub obstacle_density: f64,
    pub gather_skill: f64,

    pub labor_move: f64,
    pub labor_gather: f64,
    pub labor_trade: f64,
    pub labor_build_alone: f64,
    pub labor_build_together: f64,
    pub labor_vote: f64,

    pub skill_min: f64,
    pub skill_max: f64,
    pub skill_pareto_shape: f64,
    pub together_multiplier: f64,
    pub together_cap: f64,
    pub joint_payout: JointPayout,
    /// Coins paid to each side of a corrective (failed) joint build.
    pub small_reward: f64,
    pub initial_coin: f64,

    pub max_open_orders: usize,
    pub order_expiry: u64,
    pub order_cap_mode: CapMode,

    /// Finite bracket lower bounds; the last bracket is open-ended.
    pub tax_cutoffs: Vec<f64>,
    pub rate_grid_size: usize,
    pub revenue_mode: RevenueMode,
    pub kappa: f64,
    pub regen_max: f64,
    pub maximin: MaximinBasis,

    pub agent_policy: AgentPolicyKind,
    pub planner_policy: PlannerPolicyKind,
    pub planner_flat_rate: f64,
    pub planner_schedules: Vec<Vec<f64>>,
    pub planner_ranking: RankingMode,
    pub planner_ranking_index: usize,
    pub softmax_learning_rate: f64,
    pub softmax_temperature: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            variant: Variant::Communication,
            system: GoverningSystem::SemiLibertarianUtilitarian,
            objective: Objective::InverseIncome,
            seed: 0,
            horizon: 1000,
            tax_period: 100,
            n_agents: 6,
            eta: 0.5,
            world_width: 25,
            world_height: 25,
            deposit_density: [0.05; 4],
            regen_init: [0.02; 4],
            obstacle_density: 0.0,
            gather_skill: 0.2,
            labor_move: 0.21,
            labor_gather: 0.21,
            labor_trade: 0.05,
            labor_build_alone: 2.1,
            labor_build_together: 3.15,
            labor_vote: 0.0,
            skill_min: 10.0,
            skill_max: 30.0,
            skill_pareto_shape: 1.16,
            together_multiplier: 1.5,
            together_cap: 45.0,
            joint_payout: JointPayout::Each,
            small_reward: 1.0,
            initial_coin: 0.0,
            max_open_orders: 5,
            order_expiry: 50,
            order_cap_mode: CapMode::PerSide,
            tax_cutoffs: DEFAULT_CUTOFFS.to_vec(),
            rate_grid_size: 21,
            revenue_mode: RevenueMode::Redistribute,
            kappa: 0.005,
            regen_max: 0.2,
            maximin: MaximinBasis::Coin,
            agent_policy: AgentPolicyKind::Random,
            planner_policy: PlannerPolicyKind::Flat,
            planner_flat_rate: 0.1,
            planner_schedules: Vec::new(),
            planner_ranking: RankingMode::Fixed,
            planner_ranking_index: 0,
            softmax_learning_rate: 0.1,
            softmax_temperature: 1.0,
        }
    }
}

fn field(key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::new(format!("{key}: {msg}"))
}

fn unit_interval(key: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(field(key, format!("{v} is outside [0, 1]")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(key, format!("{v} must be finite and non-negative")))
    }
}

impl EpisodeConfig {
    /// The key named by a validation error, if any.
    pub fn error_key(err: &ConfigError) -> Option<&str> {
        err.0.split_once(':').map(|(k, _)| k)
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            width: self.world_width,
            height: self.world_height,
            n_agents: self.n_agents,
            deposit_density: self.deposit_density,
            regen_init: self.regen_init,
            obstacle_density: self.obstacle_density,
        }
    }

    pub fn market_config(&self) -> MarketConfig {
        MarketConfig {
            max_open: self.max_open_orders,
            expiry: self.order_expiry,
            max_price: 10,
            cap_mode: self.order_cap_mode,
        }
    }

    pub fn schedule(&self, rates: Vec<f64>) -> Result<TaxSchedule, ConfigError> {
        TaxSchedule::new(self.tax_cutoffs.clone(), rates)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tax_period == 0 {
            return Err(field("tax_period", "must be positive"));
        }
        if self.horizon < self.tax_period {
            return Err(field("horizon", "must cover at least one tax period"));
        }
        if !self.horizon.is_multiple_of(self.tax_period) {
            return Err(field("horizon", format!("{} is not a multiple of tax_period {}", self.horizon, self.tax_period)));
        }
        if self.n_agents != 6 {
            return Err(field("n_agents", format!("both variants are defined for 6 agents, got {}", self.n_agents)));
        }
        if !(self.eta > 0.0) || self.eta == 1.0 || !self.eta.is_finite() {
            return Err(field("eta", format!("{} must be positive and not 1", self.eta)));
        }
        if self.world_width == 0 || self.world_height == 0 {
            return Err(field("world_width", "grid dimensions must be positive"));
        }
        for (k, v) in self.deposit_density.iter().enumerate() {
            unit_interval("deposit_density", *v).map_err(|e| field("deposit_density", format!("entry {k}: {e}")))?;
        }
        for v in self.regen_init {
            unit_interval("regen_init", v)?;
        }
        unit_interval("obstacle_density", self.obstacle_density)?;
        unit_interval("gather_skill", self.gather_skill)?;
        self.world_config().validate().map_err(|e| field("deposit_density", e))?;
        for (k, v) in [
            ("labor_move", self.labor_move),
            ("labor_gather", self.labor_gather),
            ("labor_trade", self.labor_trade),
            ("labor_build_alone", self.labor_build_alone),
            ("labor_build_together", self.labor_build_together),
            ("labor_vote", self.labor_vote),
            ("small_reward", self.small_reward),
            ("initial_coin", self.initial_coin),
            ("kappa", self.kappa),
        ] {
            non_negative(k, v)?;
        }
        if !(self.skill_min > 0.0 && self.skill_min <= self.skill_max) {
            return Err(field("skill_min", "need 0 < skill_min <= skill_max"));
        }
        if !(self.skill_pareto_shape > 0.0) {
            return Err(field("skill_pareto_shape", "must be positive"));
        }
        if !(self.together_multiplier > 1.0) {
            return Err(field("together_multiplier", "must exceed 1 so building together pays more"));
        }
        if !(self.together_cap > self.skill_max) {
            return Err(field("together_cap", "must exceed skill_max"));
        }
        if self.max_open_orders == 0 {
            return Err(field("max_open_orders", "must be positive"));
        }
        if self.order_expiry == 0 {
            return Err(field("order_expiry", "must be positive"));
        }
        TaxSchedule::new(self.tax_cutoffs.clone(), vec![0.0; self.tax_cutoffs.len()]).map_err(|e| field("tax_cutoffs", e))?;
        if self.rate_grid_size < 2 {
            return Err(field("rate_grid_size", "must be at least 2"));
        }
        unit_interval("regen_max", self.regen_max)?;
        unit_interval("planner_flat_rate", self.planner_flat_rate)?;
        if self.planner_policy == PlannerPolicyKind::Periodic && self.planner_schedules.is_empty() {
            return Err(field("planner_schedules", "the periodic planner needs at least one schedule"));
        }
        for s in &self.planner_schedules {
            if s.len() != self.tax_cutoffs.len() {
                return Err(field("planner_schedules", format!("each schedule needs {} rates", self.tax_cutoffs.len())));
            }
            for &r in s {
                unit_interval("planner_schedules", r)?;
            }
        }
        if self.planner_ranking_index >= 24 {
            return Err(field("planner_ranking_index", "must be below 24"));
        }
        non_negative("softmax_learning_rate", self.softmax_learning_rate)?;
        if !(self.softmax_temperature > 0.0) {
            return Err(field("softmax_temperature", "must be positive"));
        }
        Ok(())
    }

    /// Parses a TOML key-value file. Unknown keys are rejected; absent keys
    /// take their defaults.
    pub fn from_toml(text: &str) -> Result<EpisodeConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn periods(&self) -> u64 {
        self.horizon / self.tax_period
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        EpisodeConfig::default().validate().unwrap();
    }

    #[test]
    fn horizon_must_cover_a_period() {
        let c = EpisodeConfig { horizon: 0, ..Default::default() };
        let err = c.validate().unwrap_err();
        assert_eq!(EpisodeConfig::error_key(&err), Some("horizon"));
        let c = EpisodeConfig { horizon: 150, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn eta_one_rejected() {
        let c = EpisodeConfig { eta: 1.0, ..Default::default() };
        assert_eq!(EpisodeConfig::error_key(&c.validate().unwrap_err()), Some("eta"));
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let c = EpisodeConfig { variant: Variant::Teaching, horizon: 200, ..Default::default() };
        let back = EpisodeConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert!(EpisodeConfig::from_toml("horizn = 10\n").is_err());
        let partial = EpisodeConfig::from_toml("variant = \"teaching\"\nsystem = \"full_utilitarian\"\n").unwrap();
        assert_eq!(partial.system, GoverningSystem::FullUtilitarian);
        assert_eq!(partial.horizon, 1000);
    }

    #[test]
    fn digest_tracks_every_field() {
        let a = EpisodeConfig::default();
        let b = EpisodeConfig { labor_vote: 0.01, ..Default::default() };
        assert_eq!(a.digest(), EpisodeConfig::default().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
