use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use risnet_lab::experiment::{cases, run_experiment};
use risnet_lab::{Experiment, LabError, ScenarioConfig};

fn quick(experiment: Experiment, seeds: &[u64], episodes: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig { experiment, seeds: seeds.to_vec(), episodes, ..Default::default() };
    cfg.set("fp_max_iters", "3").unwrap();
    cfg.set("surrogate_budget", "8").unwrap();
    cfg
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push((p.strip_prefix(dir).unwrap_or(&p).display().to_string(), std::fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

fn data_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn one_episode_one_seed_gives_one_row_per_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(Experiment::Ablation4, &[1], 1);
    let out = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(out.summary.cases.len(), 4);
    for c in &out.summary.cases {
        assert_eq!(c.seeds.len(), 1);
        let rows = data_rows(&dir.path().join(&c.case).join("peak8_seed1_episodes.csv"));
        assert_eq!(rows.len(), 1, "{}", c.case);
        assert!(c.tail_hourly_on.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(c.mean_ee.mean.is_finite() && c.energy_j.mean > 0.0);
    }
}

#[test]
fn no_ris_cases_echo_zero_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&quick(Experiment::RisCompare, &[2], 1), dir.path()).unwrap();
    for (case, amp) in [("fp", "1"), ("surrogate", "1"), ("noris", "0")] {
        let echo = std::fs::read_to_string(dir.path().join(case).join("config.txt")).unwrap();
        assert!(echo.lines().any(|l| l == format!("ris_amplitude = {amp}")), "{case}");
        let parsed = ScenarioConfig::parse(&echo).unwrap();
        assert_eq!(parsed.sim.network.ris_amplitude, amp.parse::<f64>().unwrap());
    }
}

#[test]
fn every_row_carries_seed_and_episode() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Experiment::LearnerCompare, &[3, 4], 2);
    cfg.set("peak_load", "4,8").unwrap();
    run_experiment(&cfg, dir.path()).unwrap();
    for case in ["cohdrl", "hdrl"] {
        for peak in [4, 8] {
            for seed in [3u64, 4] {
                for kind in ["windows", "episodes"] {
                    let path = dir.path().join(case).join(format!("peak{peak}_seed{seed}_{kind}.csv"));
                    let mut r = csv::Reader::from_path(&path).unwrap();
                    let h = r.headers().unwrap().clone();
                    assert_eq!(&h.iter().take(4).collect::<Vec<_>>(), &["case", "peak_mbps", "seed", "episode"]);
                    for row in r.records().map(Result::unwrap) {
                        assert_eq!(&row[0], case);
                        assert_eq!(row[1].parse::<f64>().unwrap(), peak as f64);
                        assert_eq!(row[2].parse::<u64>().unwrap(), seed);
                        assert!(row[3].parse::<usize>().unwrap() < 2);
                        assert_eq!(row.len(), h.len());
                    }
                }
            }
        }
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = quick(Experiment::Ablation4, &[5, 6], 2);
    let sa = run_experiment(&cfg, a.path()).unwrap().summary;
    let sb = run_experiment(&cfg, b.path()).unwrap().summary;
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
    assert_eq!(sa.run_hash, sb.run_hash);
    assert_eq!(std::fs::read(a.path().join("summary.json")).unwrap(), std::fs::read(b.path().join("summary.json")).unwrap());
}

#[test]
fn summary_json_has_fixed_field_order() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&quick(Experiment::LearnerCompare, &[1], 1), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let keys = ["\"experiment\"", "\"run_hash\"", "\"interval_method\"", "\"episodes\"", "\"seeds\"", "\"cases\"", "\"config_echo\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["run_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn episode_time_cap_aborts_with_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Experiment::LearnerCompare, &[1], 3);
    cfg.set("episode_timeout", "0.000001").unwrap();
    let err = run_experiment(&cfg, dir.path()).unwrap_err();
    assert!(matches!(err, LabError::Runtime(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("wall-clock"));
}

#[test]
fn cases_follow_the_experiment_family() {
    let names = |e| cases(&ScenarioConfig { experiment: e, ..Default::default() }).into_iter().map(|c| c.name).collect::<Vec<_>>();
    assert_eq!(names(Experiment::Ablation4), ["sleep_ris", "sleep_noris", "nosleep_ris", "nosleep_noris"]);
    assert_eq!(names(Experiment::RisCompare), ["fp", "surrogate", "noris"]);
    assert_eq!(names(Experiment::LearnerCompare), ["cohdrl", "hdrl"]);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_risnet");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "gamma = 0.3\nfoo = 1\n").unwrap();
    let out = Command::new(bin).args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("`foo`") && msg.contains("line 2"), "{msg}");

    let out = Command::new(bin).args(["ablation4", "--episodes", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let slow = dir.path().join("slow.txt");
    std::fs::write(&slow, "episode_timeout = 0.000001\n").unwrap();
    let out = Command::new(bin)
        .args(["run", "--seeds", "1", "--episodes", "1", "--config"])
        .arg(&slow)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(bin)
        .args(["learner_compare", "--seeds", "1", "--episodes", "1", "--peak-load", "6", "--out"])
        .arg(dir.path().join("lc"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("lc/hdrl/peak6_seed1_episodes.csv").exists());

    let out = Command::new(bin).arg("echo-config").output().unwrap();
    let echo = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ScenarioConfig::parse(&echo).unwrap(), ScenarioConfig::default());
}

#[test]
fn trace_subcommands_write_csv() {
    let bin = env!("CARGO_BIN_EXE_risnet");
    let out = Command::new(bin).args(["fp-trace", "--seed", "2"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("iteration,f2,max_constraint_residual\n") && text.lines().count() > 2);
    let out = Command::new(bin).args(["surrogate-trace", "--seed", "2"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,value,best,kind\n"));
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn malformed_and_out_of_range_lines() {
    let e = ScenarioConfig::parse("gamma 0.3").unwrap_err().to_string();
    assert!(e.contains("line 1"), "{e}");
    let e = ScenarioConfig::parse("epsilon = 1.5").unwrap_err().to_string();
    assert!(e.contains("epsilon") && e.contains("[0, 1]"), "{e}");
    let e = ScenarioConfig::parse("minibatch = 700").unwrap_err().to_string();
    assert!(e.contains("minibatch"), "{e}");
    let e = ScenarioConfig::parse("sleep_mode = fixed:9").unwrap_err().to_string();
    assert!(e.contains("sleep"), "{e}");
    assert!(ScenarioConfig::parse("experiment = fig9").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn echo_round_trips(
        gamma in 0.0f64..0.99,
        eps in 0.0f64..=1.0,
        lr in 1e-6f64..1.0,
        amp in 0.0f64..=1.0,
        seeds in prop::collection::vec(0u64..1000, 1..6),
        peaks in prop::collection::vec(0.1f64..50.0, 1..4),
        goal in 0usize..8,
    ) {
        let mut cfg = ScenarioConfig::default();
        cfg.set("gamma", &gamma.to_string()).unwrap();
        cfg.set("epsilon", &eps.to_string()).unwrap();
        cfg.set("learning_rate", &lr.to_string()).unwrap();
        cfg.set("ris_amplitude", &amp.to_string()).unwrap();
        cfg.set("seeds", &seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")).unwrap();
        cfg.set("peak_load", &peaks.iter().map(f64::to_string).collect::<Vec<_>>().join(",")).unwrap();
        cfg.set("sleep_mode", &format!("fixed:{goal}")).unwrap();
        let again = ScenarioConfig::parse(&cfg.echo()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
