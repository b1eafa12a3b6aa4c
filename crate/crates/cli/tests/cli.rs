use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn econsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_econsim")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SHORT: &str = "horizon = 200\n";

#[test]
fn run_then_replay_verifies() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SHORT).unwrap();
    let o = econsim(&["run", "--config", "c.toml", "--seed", "4", "--out", "a"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["episode.jsonl", "metrics.csv", "alignment.csv", "trades.csv", "taxes.csv"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let o = econsim(&["replay", "a/episode.jsonl"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verified 200 steps"));
}

#[test]
fn same_config_and_seed_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SHORT).unwrap();
    for out in ["a", "b"] {
        assert!(econsim(&["run", "--config", "c.toml", "--seed", "9", "--out", out], dir.path()).status.success());
    }
    for f in ["episode.jsonl", "metrics.csv", "alignment.csv", "trades.csv", "taxes.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn corrupted_reward_is_reported_at_its_step() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SHORT).unwrap();
    assert!(econsim(&["run", "--config", "c.toml", "--out", "a"], dir.path()).status.success());
    let path = dir.path().join("a/episode.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let corrupted: Vec<String> = text
        .lines()
        .map(|l| {
            if !l.contains("\"kind\":\"step\",\"t\":57,") {
                return l.to_string();
            }
            let start = l.find("\"rewards\":[").unwrap() + "\"rewards\":[".len();
            let end = start + l[start..].find(',').unwrap();
            format!("{}12345.5{}", &l[..start], &l[end..])
        })
        .collect();
    fs::write(&path, corrupted.join("\n") + "\n").unwrap();
    let o = econsim(&["replay", "a/episode.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("step 57: rewards"), "{}", stderr(&o));
}

#[test]
fn truncated_log_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SHORT).unwrap();
    assert!(econsim(&["run", "--config", "c.toml", "--out", "a"], dir.path()).status.success());
    let path = dir.path().join("a/episode.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() * 2 / 3]).unwrap();
    let o = econsim(&["replay", "a/episode.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("episode.jsonl:"), "{}", stderr(&o));
}

#[test]
fn invalid_config_points_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "# comment\nhorizon = 200\neta = 1.0\n").unwrap();
    let o = econsim(&["run", "--config", "c.toml", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c.toml:3: eta"), "{}", stderr(&o));
    assert!(!dir.path().join("a").exists());

    fs::write(dir.path().join("d.toml"), "horizon = 200\nhorizn = 5\n").unwrap();
    let o = econsim(&["run", "--config", "d.toml", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d.toml:2:"), "{}", stderr(&o));
}

#[test]
fn missing_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = econsim(&["run", "--config", "nope.toml", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("a").exists());
}

#[test]
fn teaching_run_ends_fully_aligned() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.toml"), "variant = \"teaching\"\nagent_policy = \"always_teach\"\nhorizon = 200\n").unwrap();
    assert!(econsim(&["run", "--config", "t.toml", "--out", "a"], dir.path()).status.success());
    let csv = fs::read_to_string(dir.path().join("a/alignment.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert_eq!(last.split(',').nth(1), Some("4"));
}

const MANIFEST: &str = r#"experiment_id = "grid"
master_seed = 3
seeds_per_condition = 1
variants = ["communication", "teaching"]
systems = ["full_libertarian", "semi_libertarian_utilitarian", "full_utilitarian"]
objectives = ["inverse_income", "eq_times_prod"]

[base]
horizon = 100
"#;

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_runs_the_grid_and_ignores_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), MANIFEST).unwrap();
    let o = econsim(&["sweep", "--config", "m.toml", "--out", "one", "--jobs", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("12 runs, 0 failed"));
    assert!(econsim(&["sweep", "--config", "m.toml", "--out", "eight", "--jobs", "8"], dir.path()).status.success());
    let (a, b) = (tree(&dir.path().join("one")), tree(&dir.path().join("eight")));
    assert_eq!(a.len(), 4 + 12 * 5 + 1);
    assert_eq!(a, b);
    let summary = fs::read_to_string(dir.path().join("one/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 13);
}

#[test]
fn empty_manifest_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), "experiment_id = \"nothing\"\n").unwrap();
    let o = econsim(&["sweep", "--config", "m.toml", "--out", "s"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn fit_reads_reward_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,agent_id,reward\n");
    for t in 0..50 {
        for i in 0..3 {
            csv += &format!("{t},{i},{}\n", ((t * 7 + i * 13) % 11) as f64 - 5.0);
        }
    }
    fs::write(dir.path().join("r.csv"), &csv).unwrap();
    let o = econsim(&["fit", "r.csv", "--gamma", "0.9", "--lambda", "0.5", "--out", "fits.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let fits = fs::read_to_string(dir.path().join("fits.csv")).unwrap();
    assert_eq!(fits.lines().count(), 4);
    assert!(fits.starts_with("agent,window_start,window_len,alpha,beta,residual,identifiable"));

    let o = econsim(&["fit", "r.csv", "--window", "20:10"], dir.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1 + 3 * 4);

    let ragged: String = csv.lines().filter(|l| !l.starts_with("49,2,")).map(|l| format!("{l}\n")).collect();
    assert_ne!(ragged, csv);
    fs::write(dir.path().join("ragged.csv"), ragged).unwrap();
    let o = econsim(&["fit", "ragged.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("agent 2"), "{}", stderr(&o));
}

#[test]
fn fit_reads_episode_logs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SHORT).unwrap();
    assert!(econsim(&["run", "--config", "c.toml", "--out", "a"], dir.path()).status.success());
    let o = econsim(&["fit", "a/episode.jsonl"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 7);
}
