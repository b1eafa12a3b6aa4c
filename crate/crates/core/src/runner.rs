//! Batch commands behind the `econsim` binary: single runs, sweeps, fitting
//! and replay, with their file formats.

use crate::engine::config::EpisodeConfig;
use crate::engine::episode::{replay, run_configured};
use crate::engine::log::EpisodeLog;
use crate::error::{ConfigError, Error, Result};
use crate::fiscal::GoverningSystem;
use crate::iafit::{fit_all, FitConfig, IAFitResult};
use crate::language::{pair_alignment, LanguageMap, Variant};
use crate::metrics::{correlate, CorrelationError, Objective};
use crate::seed::run_seed;
use crate::types::Material;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Writes `bytes` to `path` through a temporary file and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned, if it is.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Turns a validation failure into a file diagnostic pointing at the
/// offending key when the file sets it.
fn config_diagnostic(path: &Path, text: &str, err: ConfigError) -> Error {
    let line = EpisodeConfig::error_key(&err).and_then(|k| line_of_key(text, k));
    Error::ConfigFile { path: path.to_path_buf(), line, msg: err.0 }
}

/// Parses a config file without validating it.
pub fn parse_config(path: &Path) -> Result<(EpisodeConfig, String)> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigFile {
        path: path.to_path_buf(),
        line: None,
        msg: format!("cannot read config: {e}"),
    })?;
    let cfg = EpisodeConfig::from_toml(&text).map_err(|e| Error::ConfigFile {
        path: path.to_path_buf(),
        line: e.span().map(|s| line_of_offset(&text, s.start)),
        msg: e.message().to_string(),
    })?;
    Ok((cfg, text))
}

pub fn parse_variant(s: &str) -> Result<Variant, ConfigError> {
    match s {
        "communication" => Ok(Variant::Communication),
        "teaching" => Ok(Variant::Teaching),
        _ => Err(ConfigError::new(format!("variant: unknown variant {s:?} (communication, teaching)"))),
    }
}

pub fn parse_system(s: &str) -> Result<GoverningSystem, ConfigError> {
    match s {
        "full_libertarian" | "libertarian" => Ok(GoverningSystem::FullLibertarian),
        "semi_libertarian_utilitarian" | "semi" => Ok(GoverningSystem::SemiLibertarianUtilitarian),
        "full_utilitarian" | "utilitarian" => Ok(GoverningSystem::FullUtilitarian),
        _ => Err(ConfigError::new(format!(
            "system: unknown governing system {s:?} (full_libertarian, semi_libertarian_utilitarian, full_utilitarian)"
        ))),
    }
}

pub fn parse_objective(s: &str) -> Result<Objective, ConfigError> {
    match s {
        "inverse_income" => Ok(Objective::InverseIncome),
        "eq_times_prod" => Ok(Objective::EqTimesProd),
        _ => Err(ConfigError::new(format!("objective: unknown objective {s:?} (inverse_income, eq_times_prod)"))),
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub variant: Option<String>,
    pub system: Option<String>,
    pub objective: Option<String>,
}

/// Loads the config a run will use: file (or defaults), then flag overrides,
/// then validation.
pub fn effective_config(opts: &RunOptions) -> Result<EpisodeConfig> {
    let (mut cfg, text) = match &opts.config {
        Some(p) => parse_config(p)?,
        None => (EpisodeConfig::default(), String::new()),
    };
    if let Some(v) = &opts.variant {
        cfg.variant = parse_variant(v)?;
    }
    if let Some(s) = &opts.system {
        cfg.system = parse_system(s)?;
    }
    if let Some(o) = &opts.objective {
        cfg.objective = parse_objective(o)?;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| match &opts.config {
        Some(p) => config_diagnostic(p, &text, e),
        None => Error::Config(e),
    })?;
    Ok(cfg)
}

fn csv_bytes<F>(header: &[String], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    fill(&mut w).expect("in-memory csv");
    w.into_inner().expect("in-memory csv")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn material_columns(prefix: &str) -> Vec<String> {
    Material::ALL.iter().map(|m| format!("{prefix}_{}", m.name())).collect()
}

fn agent_columns(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn metrics_csv(log: &EpisodeLog) -> Vec<u8> {
    let header = strings(&["t", "eq", "gini", "prod", "maximin", "swf_inverse_income", "swf_eq_times_prod", "swf", "alignment"]);
    csv_bytes(&header, |w| {
        for s in &log.steps {
            let m = &s.metrics;
            let values = [m.eq, m.gini, m.prod, m.maximin, m.swf_inverse_income, m.swf_eq_times_prod, s.swf, s.alignment];
            w.write_record(std::iter::once(s.t.to_string()).chain(values.iter().map(f64::to_string)))?;
        }
        Ok(())
    })
}

pub fn alignment_csv(log: &EpisodeLog) -> Result<Vec<u8>> {
    let n = log.header.config.n_agents;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut header = strings(&["t", "population_alignment"]);
    header.extend(pairs.iter().map(|(i, j)| format!("pair_{i}_{j}")));
    let mut rows = Vec::with_capacity(log.steps.len());
    for s in &log.steps {
        let langs: Vec<LanguageMap> = s
            .languages
            .iter()
            .map(|l| LanguageMap::parse(l).ok_or_else(|| Error::Data(format!("step {}: bad language map {l:?}", s.t))))
            .collect::<Result<_>>()?;
        let mut row = vec![s.t.to_string(), s.alignment.to_string()];
        row.extend(pairs.iter().map(|&(i, j)| pair_alignment(&langs[i], &langs[j]).to_string()));
        rows.push(row);
    }
    Ok(csv_bytes(&header, |w| rows.iter().try_for_each(|r| w.write_record(r))))
}

pub fn trades_csv(log: &EpisodeLog) -> Vec<u8> {
    csv_bytes(&strings(&["step", "material", "price", "buyer", "seller"]), |w| {
        for t in log.steps.iter().flat_map(|s| &s.trades) {
            w.write_record([t.step.to_string(), t.material.name().to_string(), t.price.to_string(), t.buyer.to_string(), t.seller.to_string()])?;
        }
        Ok(())
    })
}

pub fn taxes_csv(log: &EpisodeLog) -> Vec<u8> {
    let n = log.header.config.n_agents;
    let mut header = strings(&["period"]);
    header.extend(agent_columns("income", n));
    header.extend(agent_columns("tax", n));
    header.extend(agent_columns("delta", n));
    header.extend(material_columns("borda"));
    header.extend(material_columns("regen_delta"));
    header.extend(material_columns("regen_rate"));
    csv_bytes(&header, |w| {
        for p in &log.periods {
            let mut row = vec![p.period.to_string()];
            for series in [&p.incomes, &p.taxes, &p.deltas] {
                row.extend(series.iter().map(|c| c.to_f64().to_string()));
            }
            row.extend(p.borda_scores.iter().map(|s| s.to_string()));
            row.extend(p.regen_deltas.iter().map(|d| d.to_string()));
            row.extend(p.regen_rates.iter().map(|d| d.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Writes a log and its CSV exports into `dir`.
pub fn write_run_outputs(dir: &Path, log: &EpisodeLog) -> Result<()> {
    create_dir(dir)?;
    write_atomic(&dir.join("episode.jsonl"), &log.to_jsonl())?;
    write_atomic(&dir.join("metrics.csv"), &metrics_csv(log))?;
    write_atomic(&dir.join("alignment.csv"), &alignment_csv(log)?)?;
    write_atomic(&dir.join("trades.csv"), &trades_csv(log))?;
    write_atomic(&dir.join("taxes.csv"), &taxes_csv(log))
}

pub fn cmd_run(opts: &RunOptions) -> Result<EpisodeLog> {
    let cfg = effective_config(opts)?;
    let log = run_configured(&cfg, cfg.seed)?;
    write_run_outputs(&opts.out, &log)?;
    Ok(log)
}

/// A sweep over variants × governing systems × planner objectives.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub experiment_id: String,
    pub master_seed: u64,
    pub seeds_per_condition: u64,
    pub variants: Vec<String>,
    pub systems: Vec<String>,
    pub objectives: Vec<String>,
    /// Base config file, relative to the manifest.
    pub base_config: Option<PathBuf>,
    /// Inline base config, an alternative to `base_config`.
    pub base: Option<toml::Table>,
}

/// One run of a sweep, as recorded in `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub index: usize,
    pub experiment_id: String,
    pub variant: Variant,
    pub system: GoverningSystem,
    pub objective: Objective,
    pub replicate: u64,
    pub seed: u64,
    pub config_digest: String,
    pub dir: String,
}

#[derive(Clone, Debug, Serialize)]
struct SweepManifestFile<'a> {
    experiment_id: &'a str,
    master_seed: u64,
    seeds_per_condition: u64,
    seed_rule: &'static str,
    runs: &'a [RunManifest],
}

const SEED_RULE: &str =
    "seed = first 8 bytes (little endian) of SHA-256(master_seed as u64 LE || \"run\" || replicate as u64 LE); replicates share seeds across conditions";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub runs: Vec<RunManifest>,
    pub failures: Vec<(usize, String, i32)>,
}

/// Final-state figures of a run, plus its per-step series for correlation.
struct RunResult {
    finals: [f64; 7],
    series: Vec<[f64; 7]>,
}

const SUMMARY_METRICS: [&str; 7] = ["alignment", "eq", "gini", "prod", "maximin", "swf_inverse_income", "swf_eq_times_prod"];

fn run_result(log: &EpisodeLog) -> RunResult {
    let row = |a: f64, m: &crate::metrics::MetricsSnapshot| [a, m.eq, m.gini, m.prod, m.maximin, m.swf_inverse_income, m.swf_eq_times_prod];
    RunResult {
        finals: row(log.summary.alignment, &log.summary.metrics),
        series: log.steps.iter().map(|s| row(s.alignment, &s.metrics)).collect(),
    }
}

pub fn load_manifest(path: &Path) -> Result<(Manifest, EpisodeConfig)> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigFile {
        path: path.to_path_buf(),
        line: None,
        msg: format!("cannot read manifest: {e}"),
    })?;
    let file_err = |line: Option<usize>, msg: String| Error::ConfigFile { path: path.to_path_buf(), line, msg };
    let m: Manifest = toml::from_str(&text).map_err(|e| file_err(e.span().map(|s| line_of_offset(&text, s.start)), e.message().to_string()))?;
    let base = match (&m.base_config, &m.base) {
        (Some(_), Some(_)) => return Err(file_err(line_of_key(&text, "base_config"), "set base_config or [base], not both".into())),
        (Some(p), None) => {
            let full = path.parent().unwrap_or(Path::new(".")).join(p);
            parse_config(&full)?.0
        }
        (None, Some(t)) => t.clone().try_into().map_err(|e: toml::de::Error| file_err(None, format!("[base]: {}", e.message())))?,
        (None, None) => EpisodeConfig::default(),
    };
    Ok((m, base))
}

/// Runs every condition of a manifest on a pool of `jobs` threads. Results
/// are independent of `jobs`.
pub fn cmd_sweep(manifest_path: &Path, out: &Path, jobs: usize) -> Result<SweepOutcome> {
    let (m, base) = load_manifest(manifest_path)?;
    let diag = |e: ConfigError| Error::ConfigFile { path: manifest_path.to_path_buf(), line: None, msg: e.0 };
    let variants = m.variants.iter().map(|s| parse_variant(s)).collect::<Result<Vec<_>, _>>().map_err(diag)?;
    let systems = m.systems.iter().map(|s| parse_system(s)).collect::<Result<Vec<_>, _>>().map_err(diag)?;
    let objectives = m.objectives.iter().map(|s| parse_objective(s)).collect::<Result<Vec<_>, _>>().map_err(diag)?;

    let mut plan: Vec<(RunManifest, EpisodeConfig)> = Vec::new();
    for &variant in &variants {
        for &system in &systems {
            for &objective in &objectives {
                for replicate in 0..m.seeds_per_condition {
                    let seed = run_seed(m.master_seed, replicate);
                    let cfg = EpisodeConfig { variant, system, objective, seed, ..base.clone() };
                    cfg.validate().map_err(diag)?;
                    let index = plan.len();
                    let dir = format!("{index:03}-{}-{}-{}-r{replicate}", variant.name(), system.name(), objective.name());
                    let run = RunManifest {
                        index,
                        experiment_id: m.experiment_id.clone(),
                        variant,
                        system,
                        objective,
                        replicate,
                        seed,
                        config_digest: cfg.digest(),
                        dir,
                    };
                    plan.push((run, cfg));
                }
            }
        }
    }
    if plan.is_empty() {
        eprintln!("warning: manifest {} describes no runs; nothing to do", manifest_path.display());
        return Ok(SweepOutcome { runs: Vec::new(), failures: Vec::new() });
    }

    create_dir(out)?;
    let runs_dir = out.join("runs");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Data(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunResult>> = pool.install(|| {
        plan.par_iter()
            .map(|(run, cfg)| {
                let log = run_configured(cfg, cfg.seed)?;
                write_run_outputs(&runs_dir.join(&run.dir), &log)?;
                Ok(run_result(&log))
            })
            .collect()
    });

    let runs: Vec<RunManifest> = plan.into_iter().map(|(r, _)| r).collect();
    let manifest = SweepManifestFile {
        experiment_id: &m.experiment_id,
        master_seed: m.master_seed,
        seeds_per_condition: m.seeds_per_condition,
        seed_rule: SEED_RULE,
        runs: &runs,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    json.push(b'\n');
    write_atomic(&out.join("manifest.json"), &json)?;

    let mut failures = Vec::new();
    let mut ok: Vec<(&RunManifest, RunResult)> = Vec::new();
    for (run, r) in runs.iter().zip(results) {
        match r {
            Ok(r) => ok.push((run, r)),
            Err(e) => failures.push((run.index, e.to_string(), e.exit_code())),
        }
    }
    write_atomic(&out.join("summary.csv"), &summary_csv(&ok))?;
    write_atomic(&out.join("pooled.csv"), &pooled_csv(&ok))?;
    write_atomic(&out.join("correlations.csv"), &correlations_csv(&ok))?;
    write_atomic(
        &out.join("failures.csv"),
        &csv_bytes(&strings(&["run", "exit_code", "error"]), |w| {
            failures.iter().try_for_each(|(i, msg, code)| w.write_record([i.to_string(), code.to_string(), msg.clone()]))
        }),
    )?;
    for (i, msg, _) in &failures {
        eprintln!("run {i} failed: {msg}");
    }
    Ok(SweepOutcome { runs, failures })
}

fn condition_columns() -> Vec<String> {
    strings(&["variant", "system", "objective"])
}

fn summary_csv(ok: &[(&RunManifest, RunResult)]) -> Vec<u8> {
    let mut header = strings(&["run"]);
    header.extend(condition_columns());
    header.extend(strings(&["replicate", "seed", "config_digest"]));
    header.extend(SUMMARY_METRICS.iter().map(|s| s.to_string()));
    csv_bytes(&header, |w| {
        for (run, r) in ok {
            let mut row = vec![run.index.to_string(), run.variant.name().into(), run.system.name().into(), run.objective.name().into()];
            row.extend([run.replicate.to_string(), run.seed.to_string(), run.config_digest.clone()]);
            row.extend(r.finals.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Per-condition means of the final figures over replicates.
fn pooled_csv(ok: &[(&RunManifest, RunResult)]) -> Vec<u8> {
    let mut groups: BTreeMap<(&str, &str, &str), Vec<&RunResult>> = BTreeMap::new();
    let mut order = Vec::new();
    for (run, r) in ok {
        let key = (run.variant.name(), run.system.name(), run.objective.name());
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(r);
    }
    let mut header = condition_columns();
    header.push("runs".into());
    header.extend(SUMMARY_METRICS.iter().map(|s| format!("mean_{s}")));
    csv_bytes(&header, |w| {
        for key in order {
            let rs = &groups[&key];
            let mut row = vec![key.0.to_string(), key.1.to_string(), key.2.to_string(), rs.len().to_string()];
            for k in 0..SUMMARY_METRICS.len() {
                row.push((rs.iter().map(|r| r.finals[k]).sum::<f64>() / rs.len() as f64).to_string());
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

fn correlation_cell(x: &[f64], y: &[f64]) -> String {
    match correlate(x, y) {
        Ok(r) => r.to_string(),
        Err(CorrelationError::ZeroVariance) => "undefined".into(),
        Err(CorrelationError::TooShort(_)) => "insufficient".into(),
        Err(e) => e.to_string(),
    }
}

/// Alignment against each metric, over run endpoints and over pooled
/// per-step series, for all runs and per variant.
fn correlations_csv(ok: &[(&RunManifest, RunResult)]) -> Vec<u8> {
    let mut scopes: Vec<(String, Vec<&RunResult>)> = vec![("all".into(), ok.iter().map(|(_, r)| r).collect())];
    for v in [Variant::Communication, Variant::Teaching] {
        let rs: Vec<&RunResult> = ok.iter().filter(|(m, _)| m.variant == v).map(|(_, r)| r).collect();
        if !rs.is_empty() {
            scopes.push((v.name().into(), rs));
        }
    }
    csv_bytes(&strings(&["scope", "mode", "metric", "n", "pearson_r"]), |w| {
        for (scope, rs) in &scopes {
            for k in 1..SUMMARY_METRICS.len() {
                let x: Vec<f64> = rs.iter().map(|r| r.finals[0]).collect();
                let y: Vec<f64> = rs.iter().map(|r| r.finals[k]).collect();
                w.write_record([scope.clone(), "endpoint".into(), SUMMARY_METRICS[k].into(), x.len().to_string(), correlation_cell(&x, &y)])?;
                let x: Vec<f64> = rs.iter().flat_map(|r| r.series.iter().map(|s| s[0])).collect();
                let y: Vec<f64> = rs.iter().flat_map(|r| r.series.iter().map(|s| s[k])).collect();
                w.write_record([scope.clone(), "per_step".into(), SUMMARY_METRICS[k].into(), x.len().to_string(), correlation_cell(&x, &y)])?;
            }
        }
        Ok(())
    })
}

/// Fitting window, `LEN` or `LEN:STRIDE`; the stride defaults to the length.
pub fn parse_window(s: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError::new(format!("window: expected LEN or LEN:STRIDE, got {s:?}"));
    let (len, stride) = match s.split_once(':') {
        Some((l, st)) => (l.parse().map_err(|_| bad())?, st.parse().map_err(|_| bad())?),
        None => {
            let l: usize = s.parse().map_err(|_| bad())?;
            (l, l)
        }
    };
    if len < 2 || stride == 0 {
        return Err(bad());
    }
    Ok((len, stride))
}

/// Reads `t,agent_id,reward` rows into per-agent series. Every agent must
/// report every step `0..T` exactly once.
pub fn read_reward_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    #[derive(Deserialize)]
    struct Row {
        t: usize,
        agent_id: usize,
        reward: f64,
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(BufReader::new(file));
    let mut by_agent: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        if by_agent.entry(row.agent_id).or_default().insert(row.t, row.reward).is_some() {
            return Err(Error::Data(format!("{}: agent {} reports step {} twice", path.display(), row.agent_id, row.t)));
        }
    }
    let n = by_agent.len();
    if by_agent.keys().copied().ne(0..n) {
        let missing = (0..).find(|i| !by_agent.contains_key(i)).unwrap_or(0);
        return Err(Error::Data(format!("{}: agent ids must run 0..{n}; agent {missing} is missing", path.display())));
    }
    let expected = by_agent.values().map(BTreeMap::len).max().unwrap_or(0);
    let mut traces = Vec::with_capacity(n);
    for (agent, steps) in by_agent {
        if steps.len() != expected || steps.keys().copied().ne(0..expected) {
            return Err(Error::Data(format!(
                "{}: ragged rewards: agent {agent} has {} of {expected} steps",
                path.display(),
                steps.len()
            )));
        }
        traces.push(steps.into_values().collect());
    }
    Ok(traces)
}

/// Loads reward traces from an episode log or a reward CSV, telling them
/// apart by content.
pub fn read_rewards(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
        Ok(EpisodeLog::read_jsonl(&bytes[..], path)?.reward_traces())
    } else {
        read_reward_csv(path)
    }
}

pub fn fits_csv(fits: &[IAFitResult]) -> Vec<u8> {
    let header = strings(&["agent", "window_start", "window_len", "alpha", "beta", "residual", "identifiable"]);
    csv_bytes(&header, |w| {
        for f in fits {
            w.write_record([
                f.agent.to_string(),
                f.window_start.to_string(),
                f.window_len.to_string(),
                f.alpha.to_string(),
                f.beta.to_string(),
                f.residual.to_string(),
                f.identifiable.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Fits inequity-aversion parameters for every agent, over the whole
/// episode or over sliding windows.
pub fn cmd_fit(input: &Path, cfg: &FitConfig, window: Option<(usize, usize)>) -> Result<Vec<IAFitResult>> {
    let traces = read_rewards(input)?;
    fit_all(&traces, cfg, window).map_err(|e| Error::Data(format!("{}: {e}", input.display())))
}

pub fn cmd_replay(path: &Path) -> Result<EpisodeLog> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let log = EpisodeLog::read_jsonl(BufReader::new(file), path)?;
    replay(&log)?;
    Ok(log)
}
