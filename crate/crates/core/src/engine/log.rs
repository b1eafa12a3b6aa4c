//! Episode logs as JSON Lines: a header, one record per step (followed by a
//! period record whenever a tax period closes), and a final summary.

use super::action::Action;
use super::config::EpisodeConfig;
use super::env::{BuildEvent, Env, JointAction, JointBuildEvent, PeriodRecord, StepReport};
use super::policy::PlannerAction;
use crate::error::{Error, Result};
use crate::language::Role;
use crate::market::Trade;
use crate::metrics::MetricsSnapshot;
use crate::types::{AgentId, Coins, Inventory};
use crate::world::WorldSnapshot;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

pub const LOG_FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: u32,
    pub config: EpisodeConfig,
    pub config_digest: String,
    pub seed: u64,
    /// Coin amounts are stored as integers in units of `1 / coin_scale`.
    pub coin_scale: i64,
    pub build_skill_alone: Vec<Coins>,
    pub build_skill_together: Vec<Coins>,
    pub roles: Vec<Role>,
    pub languages: Vec<String>,
    pub alignment: f64,
    pub utilities: Vec<f64>,
    pub swf: f64,
    pub coin: Vec<Coins>,
    pub world: WorldSnapshot,
}

impl Header {
    pub fn new(env: &Env) -> Self {
        Header {
            format: LOG_FORMAT,
            config: env.config.clone(),
            config_digest: env.config.digest(),
            seed: env.seed,
            coin_scale: Coins::SCALE,
            build_skill_alone: env.agents.iter().map(|a| a.build_skill_alone).collect(),
            build_skill_together: env.agents.iter().map(|a| a.build_skill_together).collect(),
            roles: env.roles(),
            languages: env.languages().iter().map(|l| l.to_string()).collect(),
            alignment: env.alignment(),
            utilities: env.utilities().to_vec(),
            swf: env.swf(),
            coin: env.agents.iter().map(|a| a.inventory.total_coin()).collect(),
            world: env.world.snapshot(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    /// Executed action index per agent.
    pub actions: Vec<usize>,
    /// Agents whose chosen action was masked and replaced by a no-op.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replaced: Vec<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<PlannerAction>,
    pub rewards: Vec<f64>,
    pub planner_reward: f64,
    pub utilities: Vec<f64>,
    pub swf: f64,
    pub alignment: f64,
    pub languages: Vec<String>,
    /// Total coin (free plus escrowed) per agent.
    pub coin: Vec<Coins>,
    pub labor: Vec<f64>,
    pub inventories: Vec<Inventory>,
    pub trades: Vec<Trade>,
    pub builds: Vec<BuildEvent>,
    pub joint_builds: Vec<JointBuildEvent>,
    pub metrics: MetricsSnapshot,
}

impl StepRecord {
    /// Record of a step just taken by `env`.
    pub fn new(env: &Env, joint: &JointAction, replaced: Vec<AgentId>, report: &StepReport) -> Self {
        let coins = env.coins();
        StepRecord {
            t: report.t,
            actions: joint.agents.iter().map(Action::index).collect(),
            replaced,
            planner: joint.planner.clone(),
            rewards: report.rewards.clone(),
            planner_reward: report.planner_reward,
            utilities: report.utilities.clone(),
            swf: report.swf,
            alignment: env.alignment(),
            languages: env.languages().iter().map(|l| l.to_string()).collect(),
            coin: env.agents.iter().map(|a| a.inventory.total_coin()).collect(),
            labor: env.agents.iter().map(|a| a.labor).collect(),
            inventories: env.agents.iter().map(|a| a.inventory.clone()).collect(),
            trades: report.trades.clone(),
            builds: report.builds.clone(),
            joint_builds: report.joint_builds.clone(),
            metrics: MetricsSnapshot::compute(report.t, &coins, &report.utilities, env.config.maximin),
        }
    }

    pub fn joint_action(&self) -> Result<JointAction> {
        let agents = self
            .actions
            .iter()
            .map(|&a| Action::from_index(a).ok_or_else(|| Error::Data(format!("step {}: action index {a} out of range", self.t))))
            .collect::<Result<_>>()?;
        Ok(JointAction { agents, planner: self.planner.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalRecord {
    pub steps: u64,
    /// Masked actions replaced by no-ops over the episode.
    pub masked_replaced: u64,
    pub alignment: f64,
    pub utilities: Vec<f64>,
    pub swf: f64,
    pub total_coin: Coins,
    pub metrics: MetricsSnapshot,
}

impl FinalRecord {
    pub fn new(env: &Env, masked_replaced: u64) -> Self {
        FinalRecord {
            steps: env.t,
            masked_replaced,
            alignment: env.alignment(),
            utilities: env.utilities().to_vec(),
            swf: env.swf(),
            total_coin: env.total_coin(),
            metrics: MetricsSnapshot::compute(env.t, &env.coins(), env.utilities(), env.config.maximin),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord {
    Header(Box<Header>),
    Step(Box<StepRecord>),
    Period(Box<PeriodRecord>),
    Final(Box<FinalRecord>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    pub periods: Vec<PeriodRecord>,
    pub summary: FinalRecord,
}

impl EpisodeLog {
    /// Records in file order: each period record follows the step that closed it.
    pub fn records(&self) -> Vec<LogRecord> {
        let period_len = self.header.config.tax_period;
        let mut periods = self.periods.iter();
        let mut out = vec![LogRecord::Header(Box::new(self.header.clone()))];
        for s in &self.steps {
            out.push(LogRecord::Step(Box::new(s.clone())));
            if (s.t + 1) % period_len == 0 {
                if let Some(p) = periods.next() {
                    out.push(LogRecord::Period(Box::new(p.clone())));
                }
            }
        }
        out.push(LogRecord::Final(Box::new(self.summary.clone())));
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in self.records() {
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        buf
    }

    /// Parses a log; `path` only labels errors.
    pub fn read_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<EpisodeLog> {
        let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut header = None;
        let mut steps = Vec::new();
        let mut periods = Vec::new();
        let mut summary = None;
        let mut last_line = 0;
        for (i, line) in reader.lines().enumerate() {
            let n = i + 1;
            last_line = n;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if summary.is_some() {
                return Err(parse_err(n, "content after the final record".into()));
            }
            let record: LogRecord = serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))?;
            match record {
                LogRecord::Header(h) if header.is_none() && n == 1 => header = Some(*h),
                LogRecord::Header(_) => return Err(parse_err(n, "unexpected header record".into())),
                _ if header.is_none() => return Err(parse_err(n, "log must start with a header record".into())),
                LogRecord::Step(s) => {
                    if s.t != steps.len() as u64 {
                        return Err(parse_err(n, format!("expected step {}, found step {}", steps.len(), s.t)));
                    }
                    steps.push(*s);
                }
                LogRecord::Period(p) => periods.push(*p),
                LogRecord::Final(f) => summary = Some(*f),
            }
        }
        let header = header.ok_or_else(|| parse_err(1, "empty log".into()))?;
        let summary = summary.ok_or_else(|| parse_err(last_line, "log is truncated: no final record".into()))?;
        Ok(EpisodeLog { header, steps, periods, summary })
    }

    /// Per-agent reward series, `[agent][t]`.
    pub fn reward_traces(&self) -> Vec<Vec<f64>> {
        let n = self.header.config.n_agents;
        (0..n).map(|i| self.steps.iter().map(|s| s.rewards[i]).collect()).collect()
    }
}
