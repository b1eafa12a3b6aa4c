//! Pluggable decision makers. Learned policies can implement the same traits.

use super::action::{Action, N_ACTIONS};
use super::config::{AgentPolicyKind, EpisodeConfig, PlannerPolicyKind, RankingMode};
use super::observation::{AgentObservation, PlannerObservation};
use crate::fiscal::Ballot;
use crate::language::pair_alignment;
use crate::types::HouseType;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub trait AgentPolicy: Send {
    /// Chooses an action; it should be allowed by `obs.mask`.
    fn act(&mut self, obs: &AgentObservation, rng: &mut ChaCha8Rng) -> Action;

    /// Reward earned by the last action.
    fn reward(&mut self, _reward: f64) {}
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerAction {
    /// One marginal rate per bracket.
    pub rates: Vec<f64>,
    /// Investment ranking, used under the full-utilitarian system.
    pub ranking: Option<Ballot>,
}

pub trait PlannerPolicy: Send {
    /// Called at the start of every tax period.
    fn act(&mut self, obs: &PlannerObservation, rng: &mut ChaCha8Rng) -> PlannerAction;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoopPolicy;

impl AgentPolicy for NoopPolicy {
    fn act(&mut self, _obs: &AgentObservation, _rng: &mut ChaCha8Rng) -> Action {
        Action::NoOp
    }
}

/// Uniform over allowed actions.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPolicy;

impl AgentPolicy for RandomPolicy {
    fn act(&mut self, obs: &AgentObservation, rng: &mut ChaCha8Rng) -> Action {
        let allowed: Vec<usize> = (0..N_ACTIONS).filter(|&i| obs.mask.0[i]).collect();
        Action::from_index(allowed[rng.random_range(0..allowed.len())]).expect("valid index")
    }
}

/// Starts a joint build whenever the would-be partner disagrees on a house
/// recipe, choosing that house type; otherwise acts uniformly at random
/// among the remaining allowed actions.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysTeachPolicy;

impl AlwaysTeachPolicy {
    pub fn teaching_move(obs: &AgentObservation) -> Option<Action> {
        let partner = obs.joint_partner?;
        let mine = obs.language();
        let theirs = &obs.languages[partner];
        if pair_alignment(mine, theirs) == 4 {
            return None;
        }
        HouseType::ALL
            .into_iter()
            .find(|h| h.recipe().iter().any(|m| mine.0[m.index()] != theirs.0[m.index()]))
            .map(Action::BuildTogether)
            .filter(|a| obs.mask.allows(a))
    }
}

impl AgentPolicy for AlwaysTeachPolicy {
    fn act(&mut self, obs: &AgentObservation, rng: &mut ChaCha8Rng) -> Action {
        if let Some(a) = Self::teaching_move(obs) {
            return a;
        }
        let allowed: Vec<Action> = obs.mask.allowed().filter(|a| !matches!(a, Action::BuildTogether(_))).collect();
        allowed[rng.random_range(0..allowed.len())]
    }
}

/// Stateless softmax over per-action preferences, nudged by how each
/// action's reward compares with a running average. A lightweight baseline
/// for exercising the interface, not a trained policy.
#[derive(Clone, Debug)]
pub struct SoftmaxPolicy {
    pub preferences: Vec<f64>,
    pub learning_rate: f64,
    pub temperature: f64,
    baseline: f64,
    seen: u64,
    last: Option<usize>,
}

impl SoftmaxPolicy {
    pub fn new(learning_rate: f64, temperature: f64) -> Self {
        SoftmaxPolicy { preferences: vec![0.0; N_ACTIONS], learning_rate, temperature, baseline: 0.0, seen: 0, last: None }
    }
}

impl AgentPolicy for SoftmaxPolicy {
    fn act(&mut self, obs: &AgentObservation, rng: &mut ChaCha8Rng) -> Action {
        let allowed: Vec<usize> = (0..N_ACTIONS).filter(|&i| obs.mask.0[i]).collect();
        let top = allowed.iter().map(|&i| self.preferences[i]).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = allowed.iter().map(|&i| ((self.preferences[i] - top) / self.temperature).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = *allowed.last().expect("no-op is always allowed");
        for (&i, w) in allowed.iter().zip(&weights) {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        self.last = Some(chosen);
        Action::from_index(chosen).expect("valid index")
    }

    fn reward(&mut self, reward: f64) {
        if let Some(a) = self.last.take() {
            self.preferences[a] += self.learning_rate * (reward - self.baseline);
            self.seen += 1;
            self.baseline += (reward - self.baseline) / self.seen as f64;
        }
    }
}

/// Scripted planner: cycles through fixed schedules and picks rankings
/// either fixed or round-robin, one step per tax period.
#[derive(Clone, Debug)]
pub struct ScriptedPlanner {
    pub schedules: Vec<Vec<f64>>,
    pub ranking: RankingMode,
    pub ranking_index: usize,
}

impl ScriptedPlanner {
    pub fn flat(rate: f64, brackets: usize) -> Self {
        ScriptedPlanner { schedules: vec![vec![rate; brackets]], ranking: RankingMode::Fixed, ranking_index: 0 }
    }
}

impl PlannerPolicy for ScriptedPlanner {
    fn act(&mut self, obs: &PlannerObservation, _rng: &mut ChaCha8Rng) -> PlannerAction {
        let p = obs.period as usize;
        let rates = self.schedules[p % self.schedules.len()].clone();
        let idx = match self.ranking {
            RankingMode::Fixed => self.ranking_index,
            RankingMode::RoundRobin => (self.ranking_index + p) % Ballot::COUNT,
        };
        PlannerAction { rates, ranking: Ballot::from_index(idx) }
    }
}

/// The policies a config names, one per agent.
pub fn agent_policies(cfg: &EpisodeConfig) -> Vec<Box<dyn AgentPolicy>> {
    (0..cfg.n_agents)
        .map(|_| -> Box<dyn AgentPolicy> {
            match cfg.agent_policy {
                AgentPolicyKind::Random => Box::new(RandomPolicy),
                AgentPolicyKind::Noop => Box::new(NoopPolicy),
                AgentPolicyKind::AlwaysTeach => Box::new(AlwaysTeachPolicy),
                AgentPolicyKind::Softmax => Box::new(SoftmaxPolicy::new(cfg.softmax_learning_rate, cfg.softmax_temperature)),
            }
        })
        .collect()
}

pub fn planner_policy(cfg: &EpisodeConfig) -> Box<dyn PlannerPolicy> {
    let schedules = match cfg.planner_policy {
        PlannerPolicyKind::Flat => vec![vec![cfg.planner_flat_rate; cfg.tax_cutoffs.len()]],
        PlannerPolicyKind::Periodic => cfg.planner_schedules.clone(),
    };
    Box::new(ScriptedPlanner { schedules, ranking: cfg.planner_ranking, ranking_index: cfg.planner_ranking_index })
}
