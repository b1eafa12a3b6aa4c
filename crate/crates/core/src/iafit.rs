//! Inequity-aversion coefficient fitting from reward traces.
//!
//! Rewards are smoothed per agent with `e^t = γλ·e^{t−1} + r^t` (`e^0 = r^0`).
//! For agent `i` the disadvantage and advantage regressors are
//!
//! ```text
//! D_i^t = 1/(N−1) Σ_{j≠i} max(e_j^t − e_i^t, 0)
//! A_i^t = 1/(N−1) Σ_{j≠i} max(e_i^t − e_j^t, 0)
//! ```
//!
//! and [`fit`] searches a grid of `(α, β)` for the least-squares fit of
//! `r_i^t ≈ own_i^t − α·D_i^t − β·A_i^t`, where the own term is `e_i^t` by
//! default ([`OwnTerm::Smoothed`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("need at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("need at least 2 time steps, got {0}")]
    TooShort(usize),
    #[error("agent {agent} has {len} rewards, expected {expected}")]
    Ragged { agent: usize, len: usize, expected: usize },
    #[error("agent {0} is not in the traces")]
    NoSuchAgent(usize),
    #[error("invalid window: {0}")]
    Window(String),
}

/// Exponentially decayed reward trace.
pub fn smooth(rewards: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
    let decay = gamma * lambda;
    let mut out = Vec::with_capacity(rewards.len());
    let mut prev = None;
    for &r in rewards {
        let e = match prev {
            None => r,
            Some(p) => decay * p + r,
        };
        out.push(e);
        prev = Some(e);
    }
    out
}

pub fn smooth_all(traces: &[Vec<f64>], gamma: f64, lambda: f64) -> Vec<Vec<f64>> {
    traces.iter().map(|r| smooth(r, gamma, lambda)).collect()
}

/// Disadvantage and advantage series `(D_i, A_i)` of agent `i` given smoothed traces.
pub fn inequity_terms(smoothed: &[Vec<f64>], i: usize) -> (Vec<f64>, Vec<f64>) {
    let n = smoothed.len();
    let len = smoothed[i].len();
    let norm = 1.0 / (n as f64 - 1.0);
    let mut dis = vec![0.0; len];
    let mut adv = vec![0.0; len];
    for t in 0..len {
        let ei = smoothed[i][t];
        let (mut d, mut a) = (0.0, 0.0);
        for (j, ej) in smoothed.iter().enumerate() {
            if j != i {
                d += (ej[t] - ei).max(0.0);
                a += (ei - ej[t]).max(0.0);
            }
        }
        dis[t] = norm * d;
        adv[t] = norm * a;
    }
    (dis, adv)
}

fn check_traces(traces: &[Vec<f64>]) -> Result<usize, FitError> {
    if traces.len() < 2 {
        return Err(FitError::TooFewAgents(traces.len()));
    }
    let expected = traces[0].len();
    if let Some((agent, r)) = traces.iter().enumerate().find(|(_, r)| r.len() != expected) {
        return Err(FitError::Ragged { agent, len: r.len(), expected });
    }
    Ok(expected)
}

/// Subjective rewards `u_i^t = r_i^t − α·D_i^t − β·A_i^t` for every agent,
/// with the regressors built from the smoothed base traces.
pub fn synth_subjective(base: &[Vec<f64>], alpha: f64, beta: f64, gamma: f64, lambda: f64) -> Result<Vec<Vec<f64>>, FitError> {
    check_traces(base)?;
    let e = smooth_all(base, gamma, lambda);
    Ok((0..base.len())
        .map(|i| {
            let (d, a) = inequity_terms(&e, i);
            (0..base[i].len()).map(|t| base[i][t] - alpha * d[t] - beta * a[t]).collect()
        })
        .collect())
}

/// The fitted model's prediction `e_i^t − α·D_i^t − β·A_i^t` for every agent.
pub fn predicted_rewards(base: &[Vec<f64>], alpha: f64, beta: f64, gamma: f64, lambda: f64) -> Result<Vec<Vec<f64>>, FitError> {
    check_traces(base)?;
    let e = smooth_all(base, gamma, lambda);
    Ok((0..base.len())
        .map(|i| {
            let (d, a) = inequity_terms(&e, i);
            (0..e[i].len()).map(|t| e[i][t] - alpha * d[t] - beta * a[t]).collect()
        })
        .collect())
}

/// Search grid for `(α, β)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl FitGrid {
    /// Open intervals `0 < α < 5` in steps of 0.5 and `0 < β < 1` in steps of 0.1.
    pub fn exclusive() -> Self {
        FitGrid {
            alphas: (1..10).map(|k| k as f64 * 0.5).collect(),
            betas: (1..10).map(|k| k as f64 / 10.0).collect(),
        }
    }

    /// Same steps with both endpoints included.
    pub fn inclusive() -> Self {
        FitGrid {
            alphas: (0..=10).map(|k| k as f64 * 0.5).collect(),
            betas: (0..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

impl Default for FitGrid {
    fn default() -> Self {
        FitGrid::exclusive()
    }
}

/// The model's own-reward term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OwnTerm {
    /// The agent's smoothed trace `e_i^t`.
    #[default]
    Smoothed,
    /// The agent's unsmoothed base reward `r_i^t`; the exact inverse of [`synth_subjective`].
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub grid: FitGrid,
    pub own_term: OwnTerm,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { gamma: 1.0, lambda: 0.5, grid: FitGrid::default(), own_term: OwnTerm::Smoothed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IAFitResult {
    pub agent: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Sum of squared errors at the chosen grid point.
    pub residual: f64,
    /// False when a regressor is identically zero over the window, so its
    /// coefficient is set by the tie-break rather than the data.
    pub identifiable: bool,
    pub window_start: usize,
    pub window_len: usize,
}

/// Fits agent `i`'s recorded rewards against the smoothed traces of the same rewards.
pub fn fit(rewards: &[Vec<f64>], agent: usize, cfg: &FitConfig) -> Result<IAFitResult, FitError> {
    let len = check_traces(rewards)?;
    let target = rewards.get(agent).ok_or(FitError::NoSuchAgent(agent))?;
    fit_range(target, rewards, agent, cfg, 0, len)
}

/// Fits an arbitrary target series against regressors built from `base`.
pub fn fit_target(target: &[f64], base: &[Vec<f64>], agent: usize, cfg: &FitConfig) -> Result<IAFitResult, FitError> {
    let len = check_traces(base)?;
    if target.len() != len {
        return Err(FitError::Ragged { agent, len: target.len(), expected: len });
    }
    fit_range(target, base, agent, cfg, 0, len)
}

/// Fits over sliding windows of `window` steps every `stride` steps. The
/// traces are smoothed over the whole episode first.
pub fn fit_windows(
    rewards: &[Vec<f64>],
    agent: usize,
    cfg: &FitConfig,
    window: usize,
    stride: usize,
) -> Result<Vec<IAFitResult>, FitError> {
    let len = check_traces(rewards)?;
    if window < 2 || stride == 0 || window > len {
        return Err(FitError::Window(format!("window {window}, stride {stride}, length {len}")));
    }
    let target = rewards.get(agent).ok_or(FitError::NoSuchAgent(agent))?;
    (0..=len - window)
        .step_by(stride)
        .map(|start| fit_range(target, rewards, agent, cfg, start, window))
        .collect()
}

/// Fits every agent, over the whole series or over `(window, stride)` windows.
pub fn fit_all(rewards: &[Vec<f64>], cfg: &FitConfig, window: Option<(usize, usize)>) -> Result<Vec<IAFitResult>, FitError> {
    check_traces(rewards)?;
    let mut out = Vec::new();
    for agent in 0..rewards.len() {
        match window {
            None => out.push(fit(rewards, agent, cfg)?),
            Some((w, s)) => out.extend(fit_windows(rewards, agent, cfg, w, s)?),
        }
    }
    Ok(out)
}

fn fit_range(
    target: &[f64],
    base: &[Vec<f64>],
    agent: usize,
    cfg: &FitConfig,
    start: usize,
    len: usize,
) -> Result<IAFitResult, FitError> {
    if len < 2 {
        return Err(FitError::TooShort(len));
    }
    if agent >= base.len() {
        return Err(FitError::NoSuchAgent(agent));
    }
    let e = smooth_all(base, cfg.gamma, cfg.lambda);
    let (dis, adv) = inequity_terms(&e, agent);
    let own = match cfg.own_term {
        OwnTerm::Smoothed => &e[agent],
        OwnTerm::Raw => &base[agent],
    };
    let range = start..start + len;

    let sse = |alpha: f64, beta: f64| -> f64 {
        range
            .clone()
            .map(|t| {
                let err = target[t] - (own[t] - alpha * dis[t] - beta * adv[t]);
                err * err
            })
            .sum()
    };

    // Ascending enumeration with a strict improvement test keeps the
    // smallest α, then smallest β, among exact ties.
    let mut best: Option<(f64, f64, f64)> = None;
    for &alpha in &cfg.grid.alphas {
        for &beta in &cfg.grid.betas {
            let r = sse(alpha, beta);
            if best.is_none_or(|(_, _, b)| r < b) {
                best = Some((alpha, beta, r));
            }
        }
    }
    let (alpha, beta, residual) = best.expect("grid is non-empty");
    let identifiable = range.clone().any(|t| dis[t] != 0.0) && range.clone().any(|t| adv[t] != 0.0);
    Ok(IAFitResult { agent, alpha, beta, residual, identifiable, window_start: start, window_len: len })
}
