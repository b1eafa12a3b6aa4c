//! Running whole episodes, and re-running them from a log.

use super::action::Action;
use super::config::EpisodeConfig;
use super::env::{Env, JointAction, StepError};
use super::log::{EpisodeLog, FinalRecord, Header, StepRecord};
use super::policy::{AgentPolicy, PlannerAction, PlannerPolicy};
use crate::error::{ConfigError, Error, Result};
use crate::seed::rng_for;
use crate::types::AgentId;
use serde::Serialize;

impl From<StepError> for Error {
    fn from(e: StepError) -> Self {
        match e {
            StepError::PlannerRates(c) => Error::Config(c),
            other => Error::Invariant(other.to_string()),
        }
    }
}

/// What to execute at one step.
pub struct Choice {
    pub actions: Vec<Action>,
    pub replaced: Vec<AgentId>,
    pub planner: Option<PlannerAction>,
}

/// Steps `env` to the horizon, asking `choose` for each step's actions.
pub fn drive(mut env: Env, mut choose: impl FnMut(&Env, &[f64]) -> Result<Choice>) -> Result<EpisodeLog> {
    let header = Header::new(&env);
    let mut steps = Vec::with_capacity(env.config.horizon as usize);
    let mut periods = Vec::with_capacity(env.config.periods() as usize);
    let mut masked = 0u64;
    let mut last_rewards = vec![0.0; env.n_agents()];
    while !env.done() {
        let choice = choose(&env, &last_rewards)?;
        masked += choice.replaced.len() as u64;
        let joint = JointAction { agents: choice.actions, planner: choice.planner };
        let report = env.step(&joint)?;
        last_rewards.clone_from(&report.rewards);
        steps.push(StepRecord::new(&env, &joint, choice.replaced, &report));
        periods.extend(report.period);
    }
    let summary = FinalRecord::new(&env, masked);
    Ok(EpisodeLog { header, steps, periods, summary })
}

/// Runs one episode. Masked actions chosen by a policy are replaced by
/// no-ops and counted in the final record.
pub fn run_episode(
    config: &EpisodeConfig,
    agents: &mut [Box<dyn AgentPolicy>],
    planner: &mut dyn PlannerPolicy,
    seed: u64,
) -> Result<EpisodeLog> {
    if agents.len() != config.n_agents {
        return Err(ConfigError::new(format!("n_agents: {} policies supplied for {} agents", agents.len(), config.n_agents)).into());
    }
    let env = Env::new(config.clone(), seed)?;
    let mut agent_rngs: Vec<_> = (0..agents.len()).map(|i| rng_for(seed, "policy", i as u64)).collect();
    let mut planner_rng = rng_for(seed, "planner", 0);
    let mut first = true;
    drive(env, |env, rewards| {
        if !first {
            for (p, &r) in agents.iter_mut().zip(rewards) {
                p.reward(r);
            }
        }
        first = false;
        let mut replaced = Vec::new();
        let actions = (0..env.n_agents())
            .map(|i| {
                let obs = env.observe_agent(i);
                let a = agents[i].act(&obs, &mut agent_rngs[i]);
                if obs.mask.allows(&a) {
                    a
                } else {
                    replaced.push(i);
                    Action::NoOp
                }
            })
            .collect();
        let planner = env.planner_due().then(|| planner.act(&env.observe_planner(), &mut planner_rng));
        Ok(Choice { actions, replaced, planner })
    })
}

/// Runs an episode with the policies its config names.
pub fn run_configured(config: &EpisodeConfig, seed: u64) -> Result<EpisodeLog> {
    let mut agents = super::policy::agent_policies(config);
    let mut planner = super::policy::planner_policy(config);
    run_episode(config, &mut agents, planner.as_mut(), seed)
}

/// First field where two records differ, compared through their JSON form
/// so floats are checked bit for bit.
fn first_difference<T: Serialize>(logged: &T, derived: &T) -> Option<String> {
    let a = serde_json::to_value(logged).expect("serializable");
    let b = serde_json::to_value(derived).expect("serializable");
    match (&a, &b) {
        (serde_json::Value::Object(x), serde_json::Value::Object(y)) => {
            for (k, v) in y {
                if x.get(k) != Some(v) {
                    return Some(k.clone());
                }
            }
            x.keys().find(|k| !y.contains_key(*k)).cloned()
        }
        _ => (a != b).then(|| "record".to_string()),
    }
}

/// Re-executes a logged episode from its config, seed and actions and checks
/// that every recorded quantity is reproduced exactly.
pub fn replay(log: &EpisodeLog) -> Result<()> {
    let env = Env::new(log.header.config.clone(), log.header.seed)?;
    let header = Header::new(&env);
    if let Some(field) = first_difference(&log.header, &header) {
        return Err(Error::ReplayMismatch { step: 0, field: format!("header.{field}") });
    }
    let mut cursor = 0usize;
    let derived = drive(env, |_, _| {
        let s = log.steps.get(cursor).ok_or_else(|| Error::ReplayMismatch {
            step: cursor as u64,
            field: "log ends before the horizon".into(),
        })?;
        cursor += 1;
        let joint = s.joint_action()?;
        Ok(Choice { actions: joint.agents, replaced: s.replaced.clone(), planner: joint.planner })
    })
    .map_err(|e| match e {
        Error::Invariant(msg) => Error::ReplayMismatch { step: cursor.saturating_sub(1) as u64, field: msg },
        other => other,
    })?;
    if log.steps.len() != derived.steps.len() {
        return Err(Error::ReplayMismatch {
            step: derived.steps.len() as u64,
            field: format!("log has {} steps, horizon is {}", log.steps.len(), derived.steps.len()),
        });
    }
    for (a, b) in log.steps.iter().zip(&derived.steps) {
        if let Some(field) = first_difference(a, b) {
            return Err(Error::ReplayMismatch { step: b.t, field });
        }
    }
    if log.periods.len() != derived.periods.len() {
        return Err(Error::ReplayMismatch { step: log.header.config.horizon, field: "period record count".into() });
    }
    for (a, b) in log.periods.iter().zip(&derived.periods) {
        if let Some(field) = first_difference(a, b) {
            let step = (b.period + 1) * log.header.config.tax_period - 1;
            return Err(Error::ReplayMismatch { step, field: format!("period.{field}") });
        }
    }
    if let Some(field) = first_difference(&log.summary, &derived.summary) {
        return Err(Error::ReplayMismatch { step: log.header.config.horizon, field: format!("final.{field}") });
    }
    Ok(())
}
