//! The episode state machine.
//!
//! One call to [`Env::step`] runs these phases, each in ascending agent id:
//!
//! 0. At the start of a tax period, the planner's rates (and ranking) take effect.
//! 1. Moves; a successful move onto a stocked deposit gathers from it.
//! 2. Order submission and matching, then expiry of stale orders.
//! 3. Solo builds and joint-build attempts.
//! 4. Votes are recorded.
//! 5. Deposits regenerate.
//! 6. At the end of a tax period: taxes, redistribution and investment.
//!
//! Rewards are the change in each agent's utility (and in the planner's
//! welfare objective) over the step.

use super::action::{Action, ActionMask};
use super::agent::{sample_build_skills, utility, AgentState};
use super::config::{EpisodeConfig, JointPayout};
use super::observation::{spatial_view, AgentObservation, MarketView, PlannerObservation, TaxInfo};
use super::policy::PlannerAction;
use crate::error::ConfigError;
use crate::fiscal::{borda_count, invest, settle_period, Ballot, InvestParams, RevenueMode, TaxSchedule};
use crate::language::{attempt_joint_build, init_languages, population_alignment, select_partner, LanguageMap, Role, SignalOutcome, Variant};
use crate::market::{OrderBook, Rejection, Side, Trade};
use crate::seed::{derive_seed, rng_for};
use crate::types::{AgentId, Coins, HouseType, Inventory, Material};
use crate::world::{Gathered, GridWorld};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum StepError {
    #[error("expected {expected} agent actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("a planner action is required at step {0} (start of a tax period)")]
    PlannerMissing(u64),
    #[error("unexpected planner action at step {0} (not a tax-period start)")]
    PlannerUnexpected(u64),
    #[error("planner action rejected: {0}")]
    PlannerRates(ConfigError),
    #[error("agent {agent} chose masked action {action}")]
    Masked { agent: AgentId, action: usize },
    #[error("episode is over")]
    Done,
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointAction {
    pub agents: Vec<Action>,
    pub planner: Option<PlannerAction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointOutcome {
    Built,
    Corrected { position: usize },
    NoPartner,
    /// Languages agreed but the pair lacked a recipe material.
    MissingResources,
    /// Languages agreed but the initiator's cell cannot hold a house.
    Unbuildable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointBuildEvent {
    pub initiator: AgentId,
    pub partner: Option<AgentId>,
    pub house: HouseType,
    pub outcome: JointOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildEvent {
    pub agent: AgentId,
    pub house: HouseType,
    /// Coins earned; zero when the build could not happen.
    pub income: Coins,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: u64,
    pub rates: Vec<f64>,
    pub incomes: Vec<Coins>,
    pub taxes: Vec<Coins>,
    pub shares: Vec<Coins>,
    pub deltas: Vec<Coins>,
    pub coin_before: Coins,
    pub coin_after: Coins,
    pub votes: Vec<Option<usize>>,
    pub borda_scores: [u32; 4],
    pub planner_ranking: Option<usize>,
    pub invested_coins: [f64; 4],
    pub regen_deltas: [f64; 4],
    pub regen_rates: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub t: u64,
    pub rewards: Vec<f64>,
    pub planner_reward: f64,
    pub utilities: Vec<f64>,
    pub swf: f64,
    pub moved: Vec<bool>,
    pub gathered: Vec<Gathered>,
    pub trades: Vec<Trade>,
    pub rejected: Vec<(AgentId, Rejection)>,
    pub builds: Vec<BuildEvent>,
    pub joint_builds: Vec<JointBuildEvent>,
    pub regen: [u32; 4],
    pub period: Option<PeriodRecord>,
    pub done: bool,
}

pub struct Env {
    pub config: EpisodeConfig,
    pub world: GridWorld,
    pub agents: Vec<AgentState>,
    pub book: OrderBook,
    pub schedule: TaxSchedule,
    pub planner_ranking: Option<Ballot>,
    /// Each agent's latest vote in the current tax period.
    pub ballots: Vec<Option<Ballot>>,
    pub t: u64,
    pub seed: u64,
    rng: ChaCha8Rng,
    period_start_coin: Vec<Coins>,
    prev_incomes: Vec<Coins>,
    utilities: Vec<f64>,
    swf: f64,
}

impl Env {
    pub fn new(config: EpisodeConfig, seed: u64) -> Result<Env, ConfigError> {
        config.validate()?;
        let world = GridWorld::init(&config.world_config(), derive_seed(seed, "world", 0))?;
        let langs = init_languages(config.variant, config.n_agents)?;
        let mut skill_rng = rng_for(seed, "skills", 0);
        let start_coin = Coins::from_f64(config.initial_coin);
        let agents: Vec<AgentState> = langs
            .into_iter()
            .enumerate()
            .map(|(id, (language, role))| {
                let (alone, together) = sample_build_skills(
                    &mut skill_rng,
                    config.skill_min,
                    config.skill_max,
                    config.skill_pareto_shape,
                    config.together_multiplier,
                    config.together_cap,
                );
                AgentState {
                    id,
                    inventory: Inventory::with_coin(start_coin),
                    labor: 0.0,
                    build_skill_alone: alone,
                    build_skill_together: together,
                    gather_skill: config.gather_skill,
                    language,
                    role,
                }
            })
            .collect();
        let n = agents.len();
        let schedule = config.schedule(vec![0.0; config.tax_cutoffs.len()])?;
        let mut env = Env {
            book: OrderBook::new(config.market_config()),
            world,
            agents,
            schedule,
            planner_ranking: None,
            ballots: vec![None; n],
            t: 0,
            seed,
            rng: rng_for(seed, "env", 0),
            period_start_coin: vec![start_coin; n],
            prev_incomes: vec![Coins::ZERO; n],
            utilities: Vec::new(),
            swf: 0.0,
            config,
        };
        env.utilities = env.current_utilities();
        env.swf = env.current_swf(&env.utilities);
        Ok(env)
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn done(&self) -> bool {
        self.t >= self.config.horizon
    }

    pub fn planner_due(&self) -> bool {
        self.t.is_multiple_of(self.config.tax_period) && !self.done()
    }

    pub fn coins(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.inventory.total_coin().to_f64()).collect()
    }

    pub fn total_coin(&self) -> Coins {
        self.agents.iter().map(|a| a.inventory.total_coin()).sum()
    }

    pub fn languages(&self) -> Vec<LanguageMap> {
        self.agents.iter().map(|a| a.language).collect()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.agents.iter().map(|a| a.role).collect()
    }

    pub fn alignment(&self) -> f64 {
        population_alignment(&self.languages())
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn swf(&self) -> f64 {
        self.swf
    }

    fn current_utilities(&self) -> Vec<f64> {
        self.agents
            .iter()
            .map(|a| utility(a.inventory.total_coin().to_f64(), a.labor, self.config.eta).expect("validated eta"))
            .collect()
    }

    fn current_swf(&self, utilities: &[f64]) -> f64 {
        self.config.objective.swf(utilities, &self.coins())
    }

    fn can_build_alone(&self, i: AgentId) -> bool {
        !(self.config.variant == Variant::Teaching && self.agents[i].role == Role::Teacher)
    }

    pub fn joint_partner(&self, i: AgentId) -> Option<AgentId> {
        select_partner(self.config.variant, i, &self.languages(), &self.roles())
    }

    /// Actions agent `i` may take now.
    pub fn mask(&self, i: AgentId) -> ActionMask {
        let mut mask = ActionMask::all();
        let inv = &self.agents[i].inventory;
        for material in Material::ALL {
            for side in [Side::Bid, Side::Ask] {
                for price in 0..=self.book.config.max_price {
                    if self.book.check(i, side, material, price, inv).is_some() {
                        mask.set(&Action::Trade { side, material, price }, false);
                    }
                }
            }
        }
        let buildable = self.world.can_build_at(i);
        for h in HouseType::ALL {
            let has = h.recipe().iter().all(|&m| inv.units_of(m) > 0);
            mask.set(&Action::BuildAlone(h), self.can_build_alone(i) && has && buildable);
        }
        let partner = self.joint_partner(i).is_some();
        for h in HouseType::ALL {
            mask.set(&Action::BuildTogether(h), partner);
        }
        mask
    }

    fn tax_info(&self, income: Option<Coins>) -> TaxInfo {
        let mut prev: Vec<f64> = self.prev_incomes.iter().map(|c| c.to_f64()).collect();
        prev.sort_by(f64::total_cmp);
        TaxInfo {
            cutoffs: self.schedule.cutoffs.clone(),
            rates: self.schedule.rates.clone(),
            period_progress: (self.t % self.config.tax_period) as f64 / self.config.tax_period as f64,
            prev_incomes_sorted: prev,
            own_marginal_rate: income.map_or(0.0, |z| self.schedule.marginal_rate(z.to_f64())),
        }
    }

    pub fn observe_agent(&self, i: AgentId) -> AgentObservation {
        let a = &self.agents[i];
        let income = a.inventory.total_coin() - self.period_start_coin[i];
        AgentObservation {
            agent: i,
            step: self.t,
            spatial: spatial_view(&self.world, i),
            inventory: a.inventory.clone(),
            labor: a.labor,
            build_skill_alone: a.build_skill_alone,
            build_skill_together: a.build_skill_together,
            gather_skill: a.gather_skill,
            role: a.role,
            languages: self.languages(),
            joint_partner: self.joint_partner(i),
            own_vote: self.ballots[i],
            market: MarketView::for_agent(&self.book, i),
            tax: self.tax_info(Some(income)),
            mask: self.mask(i),
        }
    }

    pub fn observe_planner(&self) -> PlannerObservation {
        PlannerObservation {
            step: self.t,
            period: self.t / self.config.tax_period,
            world: self.world.snapshot(),
            inventories: self.agents.iter().map(|a| a.inventory.clone()).collect(),
            market: MarketView::public(&self.book),
            tax: self.tax_info(None),
            prev_incomes: self.prev_incomes.iter().map(|c| c.to_f64()).collect(),
            prev_marginal_rates: self.prev_incomes.iter().map(|z| self.schedule.marginal_rate(z.to_f64())).collect(),
            votes: self.ballots.clone(),
            languages: self.languages(),
            brackets: self.schedule.brackets(),
            rate_grid_size: self.config.rate_grid_size,
        }
    }

    /// Lends the market every agent's inventory for the duration of `f`.
    fn with_inventories<T>(&mut self, f: impl FnOnce(&mut OrderBook, &mut [Inventory], &mut ChaCha8Rng) -> T) -> T {
        let mut invs: Vec<Inventory> = self.agents.iter_mut().map(|a| std::mem::take(&mut a.inventory)).collect();
        let out = f(&mut self.book, &mut invs, &mut self.rng);
        for (a, inv) in self.agents.iter_mut().zip(invs) {
            a.inventory = inv;
        }
        out
    }

    fn apply_planner(&mut self, action: &PlannerAction) -> Result<(), StepError> {
        let schedule = self.config.schedule(action.rates.clone()).map_err(StepError::PlannerRates)?;
        self.schedule = schedule;
        self.planner_ranking = action.ranking;
        Ok(())
    }

    pub fn step(&mut self, joint: &JointAction) -> Result<StepReport, StepError> {
        if self.done() {
            return Err(StepError::Done);
        }
        let n = self.n_agents();
        if joint.agents.len() != n {
            return Err(StepError::ActionCount { expected: n, got: joint.agents.len() });
        }
        match (self.planner_due(), &joint.planner) {
            (true, None) => return Err(StepError::PlannerMissing(self.t)),
            (false, Some(_)) => return Err(StepError::PlannerUnexpected(self.t)),
            _ => {}
        }
        for (i, a) in joint.agents.iter().enumerate() {
            if !self.mask(i).allows(a) {
                return Err(StepError::Masked { agent: i, action: a.index() });
            }
        }
        if let Some(p) = &joint.planner {
            self.apply_planner(p)?;
        }

        let now = self.t;
        let cfg = self.config.clone();
        let mut moved = vec![false; n];
        let mut gathered = vec![Gathered::default(); n];

        // 1. Moves and gathering.
        for (i, a) in joint.agents.iter().enumerate() {
            if let Action::Move(dir) = *a {
                self.agents[i].labor += cfg.labor_move;
                moved[i] = self.world.move_agent(i, dir);
                if moved[i] {
                    let g = self.world.gather(i, self.agents[i].gather_skill, &mut self.rng);
                    if let Some(m) = g.material {
                        self.agents[i].inventory.units[m.index()] += g.units();
                        self.agents[i].labor += cfg.labor_gather;
                    }
                    gathered[i] = g;
                }
            }
        }

        // 2. Market.
        let mut trades = Vec::new();
        let mut rejected = Vec::new();
        for (i, a) in joint.agents.iter().enumerate() {
            if let Action::Trade { side, material, price } = *a {
                self.agents[i].labor += cfg.labor_trade;
                match self.with_inventories(|book, invs, rng| book.place(i, side, material, price, now, invs, rng)) {
                    Ok(Some(t)) => trades.push(t),
                    Ok(None) => {}
                    Err(r) => rejected.push((i, r)),
                }
            }
        }
        self.with_inventories(|book, invs, _| book.expire(now, invs));

        // 3. Builds.
        let mut builds = Vec::new();
        let mut joint_builds = Vec::new();
        for (i, a) in joint.agents.iter().enumerate() {
            match *a {
                Action::BuildAlone(h) => builds.push(self.build_alone(i, h)),
                Action::BuildTogether(h) => joint_builds.push(self.build_together(i, h)),
                _ => {}
            }
        }

        // 4. Votes.
        for (i, a) in joint.agents.iter().enumerate() {
            if let Action::Vote(b) = *a {
                self.ballots[i] = Some(b);
                self.agents[i].labor += cfg.labor_vote;
            }
        }

        // 5. Regeneration.
        let rates = self.world.regen_rates;
        let regen = self.world.step_regen(rates, &mut self.rng);

        // 6. Tax period settlement.
        let period = if (now + 1).is_multiple_of(cfg.tax_period) { Some(self.settle()?) } else { None };

        self.t += 1;
        let utilities = self.current_utilities();
        let swf = self.current_swf(&utilities);
        let rewards = utilities.iter().zip(&self.utilities).map(|(u, p)| u - p).collect();
        let planner_reward = swf - self.swf;
        self.utilities = utilities.clone();
        self.swf = swf;

        Ok(StepReport {
            t: now,
            rewards,
            planner_reward,
            utilities,
            swf,
            moved,
            gathered,
            trades,
            rejected,
            builds,
            joint_builds,
            regen,
            period,
            done: self.done(),
        })
    }

    fn build_alone(&mut self, i: AgentId, house: HouseType) -> BuildEvent {
        self.agents[i].labor += self.config.labor_build_alone;
        let recipe = house.recipe();
        let inv = &self.agents[i].inventory;
        let ok = self.can_build_alone(i) && recipe.iter().all(|&m| inv.units_of(m) > 0) && self.world.can_build_at(i);
        if !ok {
            return BuildEvent { agent: i, house, income: Coins::ZERO };
        }
        let agent = &mut self.agents[i];
        for m in recipe {
            agent.inventory.units[m.index()] -= 1;
        }
        let income = agent.build_skill_alone;
        agent.inventory.coin += income;
        self.world.place_house(self.world.position(i), house, vec![i]);
        BuildEvent { agent: i, house, income }
    }

    /// Who supplies each recipe material: initiator first, then partner,
    /// then the initiator alone, then the partner alone.
    fn contributions(&self, i: AgentId, p: AgentId, house: HouseType) -> Option<[AgentId; 2]> {
        let [m1, m2] = house.recipe();
        let has = |a: AgentId, m: Material| self.agents[a].inventory.units_of(m) > 0;
        let holds_both = |a: AgentId| has(a, m1) && has(a, m2);
        if has(i, m1) && has(p, m2) {
            Some([i, p])
        } else if has(p, m1) && has(i, m2) {
            Some([p, i])
        } else if holds_both(i) {
            Some([i, i])
        } else if holds_both(p) {
            Some([p, p])
        } else {
            None
        }
    }

    fn build_together(&mut self, i: AgentId, house: HouseType) -> JointBuildEvent {
        self.agents[i].labor += self.config.labor_build_together;
        let Some(p) = self.joint_partner(i) else {
            return JointBuildEvent { initiator: i, partner: None, house, outcome: JointOutcome::NoPartner };
        };
        let initiator_lang = self.agents[i].language;
        let mut partner_lang = self.agents[p].language;
        let outcome = match attempt_joint_build(&initiator_lang, &mut partner_lang, house) {
            SignalOutcome::Corrected { position } => {
                self.agents[p].language = partner_lang;
                let small = Coins::from_f64(self.config.small_reward);
                self.agents[i].inventory.coin += small;
                self.agents[p].inventory.coin += small;
                JointOutcome::Corrected { position }
            }
            SignalOutcome::Success => match self.contributions(i, p, house) {
                None => JointOutcome::MissingResources,
                Some(_) if !self.world.can_build_at(i) => JointOutcome::Unbuildable,
                Some(suppliers) => {
                    for (who, m) in suppliers.into_iter().zip(house.recipe()) {
                        self.agents[who].inventory.units[m.index()] -= 1;
                    }
                    let (pay_i, pay_p) = match self.config.joint_payout {
                        JointPayout::Each => (self.agents[i].build_skill_together, self.agents[p].build_skill_together),
                        JointPayout::Split => {
                            let s = self.agents[i].build_skill_together;
                            (Coins(s.0 - s.0 / 2), Coins(s.0 / 2))
                        }
                    };
                    self.agents[i].inventory.coin += pay_i;
                    self.agents[p].inventory.coin += pay_p;
                    self.agents[p].labor += self.config.labor_build_together;
                    self.world.place_house(self.world.position(i), house, vec![i, p]);
                    JointOutcome::Built
                }
            },
        };
        JointBuildEvent { initiator: i, partner: Some(p), house, outcome }
    }

    fn settle(&mut self) -> Result<PeriodRecord, StepError> {
        let n = self.n_agents();
        let incomes: Vec<Coins> = (0..n).map(|i| self.agents[i].inventory.total_coin() - self.period_start_coin[i]).collect();
        let coin_before = self.total_coin();
        let out = settle_period(&incomes, &self.schedule, self.config.revenue_mode);
        for i in 0..n {
            let tax = out.taxes[i];
            if self.agents[i].inventory.coin < tax {
                self.with_inventories(|book, invs, _| book.release_bids(i, tax, invs));
            }
            let inv = &mut self.agents[i].inventory;
            if inv.coin < tax {
                return Err(StepError::Invariant(format!("agent {i} cannot cover tax {tax}")));
            }
            inv.coin -= tax;
            inv.coin += out.shares[i];
        }
        let coin_after = self.total_coin();
        if self.config.revenue_mode == RevenueMode::Redistribute && coin_before != coin_after {
            return Err(StepError::Invariant(format!("coin {coin_before} became {coin_after} across settlement")));
        }

        let params = InvestParams { kappa: self.config.kappa, regen_max: self.config.regen_max };
        let investment = invest(&out.taxes, self.config.system, &self.ballots, self.planner_ranking, self.world.regen_rates, params);
        for m in 0..4 {
            self.world.regen_rates[m] += investment.deltas[m];
        }
        let cast: Vec<Ballot> = self.ballots.iter().flatten().copied().collect();
        let record = PeriodRecord {
            period: self.t / self.config.tax_period,
            rates: self.schedule.rates.clone(),
            incomes: out.incomes,
            taxes: out.taxes,
            shares: out.shares,
            deltas: out.deltas,
            coin_before,
            coin_after,
            votes: self.ballots.iter().map(|b| b.map(|b| b.index())).collect(),
            borda_scores: borda_count(&cast).scores,
            planner_ranking: self.planner_ranking.map(|b| b.index()),
            invested_coins: investment.coins,
            regen_deltas: investment.deltas,
            regen_rates: self.world.regen_rates,
        };
        self.period_start_coin = self.agents.iter().map(|a| a.inventory.total_coin()).collect();
        self.prev_incomes = incomes;
        self.ballots = vec![None; n];
        Ok(record)
    }
}
