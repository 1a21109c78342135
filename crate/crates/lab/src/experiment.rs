//! Experiment families and seeded multi-run execution.

use std::ops::Range;
use std::path::Path;
use std::time::{Duration, Instant};

use risnet_core::cohdrl::{EpisodeMetrics, Learner, RisMethod, SimConfig, Simulator, SleepMode};
use risnet_core::{par, Error as CoreError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ScenarioConfig};
use crate::output::RunWriter;
use crate::stats::{mean, Interval};
use crate::LabError;

/// One arm of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub sim: SimConfig,
}

impl Case {
    pub fn new(name: &str, base: &SimConfig, sleep: SleepMode, ris: RisMethod, learner: Learner) -> Self {
        let mut sim = SimConfig { sleep, ris, learner, ..base.clone() };
        if ris == RisMethod::None {
            sim.network.ris_amplitude = 0.0;
        }
        Self { name: name.to_string(), sim }
    }
}

/// Arms of the configured experiment family.
pub fn cases(cfg: &ScenarioConfig) -> Vec<Case> {
    use {Learner as L, RisMethod as R, SleepMode as S};
    let base = &cfg.sim;
    match cfg.experiment {
        Experiment::Ablation4 => vec![
            Case::new("sleep_ris", base, S::Controlled, R::Fp, base.learner),
            Case::new("sleep_noris", base, S::Controlled, R::None, base.learner),
            Case::new("nosleep_ris", base, S::AlwaysOn, R::Fp, base.learner),
            Case::new("nosleep_noris", base, S::AlwaysOn, R::None, base.learner),
        ],
        Experiment::RisCompare => vec![
            Case::new("fp", base, S::Controlled, R::Fp, L::CoHdrl),
            Case::new("surrogate", base, S::Controlled, R::Surrogate, L::CoHdrl),
            Case::new("noris", base, S::Controlled, R::None, L::CoHdrl),
        ],
        Experiment::LearnerCompare => vec![
            Case::new("cohdrl", base, S::Controlled, R::Fp, L::CoHdrl),
            Case::new("hdrl", base, S::Controlled, R::Fp, L::Hdrl),
        ],
    }
}

/// Episodes 150-200 of a 200-episode run: the last quarter.
pub fn tail_range(episodes: usize) -> Range<usize> {
    episodes * 3 / 4..episodes
}

/// Episodes 90-100 of a 200-episode run: the tenth of the run ending at
/// its midpoint. Falls back to every episode for very short runs.
pub fn midpoint_range(episodes: usize) -> Range<usize> {
    let r = episodes * 9 / 20..episodes / 2;
    if r.is_empty() {
        0..episodes
    } else {
        r
    }
}

/// Completed run. Window rows live only in the CSV files; `episodes` keeps
/// the episode aggregates with their window lists emptied.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub case: String,
    pub peak_mbps: f64,
    pub seed: u64,
    pub episodes: Vec<EpisodeMetrics>,
}

impl RunRecord {
    fn over<F: Fn(&EpisodeMetrics) -> f64>(&self, range: Range<usize>, f: F) -> f64 {
        mean(&self.episodes[range].iter().map(f).collect::<Vec<_>>())
    }

    pub fn tail(&self) -> Range<usize> {
        tail_range(self.episodes.len())
    }

    pub fn mean_ee(&self) -> f64 {
        self.over(0..self.episodes.len(), |m| m.mean_ee)
    }

    pub fn tail_mean_ee(&self) -> f64 {
        self.over(self.tail(), |m| m.mean_ee)
    }

    pub fn mean_energy_j(&self) -> f64 {
        self.over(0..self.episodes.len(), |m| m.total_energy_j)
    }

    pub fn tail_energy_j(&self) -> f64 {
        self.over(self.tail(), |m| m.total_energy_j)
    }

    pub fn mean_served_bits(&self) -> f64 {
        self.over(0..self.episodes.len(), |m| m.total_served_bits)
    }

    /// Hourly SBS-on probability averaged over the tail episodes.
    pub fn tail_hourly_on(&self) -> Vec<f64> {
        let tail = &self.episodes[self.tail()];
        (0..24).map(|h| mean(&tail.iter().map(|m| m.hourly_on[h]).collect::<Vec<_>>())).collect()
    }

    /// Mean cross-entropy stationarity over [`midpoint_range`]; `None` when
    /// no episode there reports it.
    pub fn midpoint_stationarity(&self) -> Option<f64> {
        let xs: Vec<f64> = self.episodes[midpoint_range(self.episodes.len())].iter().filter_map(|m| m.stationarity).collect();
        (!xs.is_empty()).then(|| mean(&xs))
    }

    pub fn lp_max_violation(&self) -> f64 {
        self.episodes.iter().map(|m| m.lp_max_violation).fold(0.0, f64::max)
    }
}

fn stem(peak_mbps: f64, seed: u64) -> String {
    format!("peak{peak_mbps}_seed{seed}")
}

/// Train one seed for `episodes` days, streaming rows into `dir`.
pub fn run_single(case: &Case, peak_mbps: f64, seed: u64, episodes: usize, timeout: Duration, dir: &Path) -> Result<RunRecord, LabError> {
    let mut sim_cfg = case.sim.clone();
    sim_cfg.network.peak_load = peak_mbps * 1e6;
    let context = format!("case {} peak {peak_mbps} Mbps seed {seed}", case.name);
    let mut sim = Simulator::new(sim_cfg, seed).map_err(|e| LabError::Runtime(format!("{context}: {e}")))?;
    let mut writer = RunWriter::create(dir, &stem(peak_mbps, seed), &case.name, peak_mbps, seed)?;
    let mut kept = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let started = Instant::now();
        let mut m = sim.run_episode_until(Some(started + timeout)).map_err(|e| match e {
            CoreError::Timeout(detail) => LabError::Runtime(format!(
                "{context}: episode {ep} exceeded the {:.1} s wall-clock cap ({detail}); {ep} episodes were written",
                timeout.as_secs_f64()
            )),
            other => LabError::Runtime(format!("{context}: episode {ep}: {other}")),
        })?;
        writer.write_episode(&m)?;
        log::info!("{context}: episode {ep} EE {:.4} Mbit/J in {:.2} s", m.mean_ee * 1e-6, started.elapsed().as_secs_f64());
        m.windows = Vec::new();
        kept.push(m);
    }
    Ok(RunRecord { case: case.name.clone(), peak_mbps, seed, episodes: kept })
}

/// Seed-level view of one run.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub mean_ee: f64,
    pub tail_mean_ee: f64,
    pub mean_energy_j: f64,
    pub mean_served_bits: f64,
    pub midpoint_stationarity: Option<f64>,
    pub tail_hourly_on: Vec<f64>,
    /// Per-episode mean EE, bits/J.
    pub ee_trace: Vec<f64>,
}

/// Seed-averaged aggregates of one (case, peak) cell.
#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub case: String,
    pub peak_mbps: f64,
    /// Mean EE over all episodes, bits/J.
    pub mean_ee: Interval,
    /// Mean EE over the last quarter of episodes, bits/J.
    pub tail_mean_ee: Interval,
    /// Per-day BS energy, J.
    pub energy_j: Interval,
    pub tail_energy_j: Interval,
    /// Per-day served traffic, bits.
    pub throughput_bits: Interval,
    /// SBS-on probability per hour of day over the tail episodes.
    pub tail_hourly_on: Vec<f64>,
    pub midpoint_stationarity: Option<Interval>,
    pub lp_solves: usize,
    pub lp_fallbacks: usize,
    pub lp_max_violation: f64,
    pub seeds: Vec<SeedSummary>,
}

impl CaseSummary {
    pub fn of(case: &str, peak_mbps: f64, runs: &[&RunRecord]) -> Self {
        let col = |f: &dyn Fn(&RunRecord) -> f64| Interval::of(&runs.iter().map(|r| f(r)).collect::<Vec<_>>());
        let stat: Vec<f64> = runs.iter().filter_map(|r| r.midpoint_stationarity()).collect();
        let hourly: Vec<Vec<f64>> = runs.iter().map(|r| r.tail_hourly_on()).collect();
        Self {
            case: case.to_string(),
            peak_mbps,
            mean_ee: col(&RunRecord::mean_ee),
            tail_mean_ee: col(&RunRecord::tail_mean_ee),
            energy_j: col(&RunRecord::mean_energy_j),
            tail_energy_j: col(&RunRecord::tail_energy_j),
            throughput_bits: col(&RunRecord::mean_served_bits),
            tail_hourly_on: (0..24).map(|h| mean(&hourly.iter().map(|v| v[h]).collect::<Vec<_>>())).collect(),
            midpoint_stationarity: (!stat.is_empty()).then(|| Interval::of(&stat)),
            lp_solves: runs.iter().flat_map(|r| &r.episodes).map(|m| m.lp_solves).sum(),
            lp_fallbacks: runs.iter().flat_map(|r| &r.episodes).map(|m| m.lp_fallbacks).sum(),
            lp_max_violation: runs.iter().map(|r| r.lp_max_violation()).fold(0.0, f64::max),
            seeds: runs
                .iter()
                .zip(hourly)
                .map(|(r, h)| SeedSummary {
                    seed: r.seed,
                    mean_ee: r.mean_ee(),
                    tail_mean_ee: r.tail_mean_ee(),
                    mean_energy_j: r.mean_energy_j(),
                    mean_served_bits: r.mean_served_bits(),
                    midpoint_stationarity: r.midpoint_stationarity(),
                    tail_hourly_on: h,
                    ee_trace: r.episodes.iter().map(|m| m.mean_ee).collect(),
                })
                .collect(),
        }
    }
}

/// Contents of `summary.json`, in fixed field order.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    /// SHA-256 of the resolved config echo.
    pub run_hash: String,
    pub interval_method: String,
    pub episodes: usize,
    pub tail_episodes: [usize; 2],
    pub midpoint_episodes: [usize; 2],
    pub seeds: Vec<u64>,
    pub cases: Vec<CaseSummary>,
    pub config_echo: String,
}

/// Everything one invocation produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: Summary,
    pub runs: Vec<RunRecord>,
}

impl ExperimentOutput {
    pub fn run(&self, case: &str, peak_mbps: f64, seed: u64) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.case == case && r.peak_mbps == peak_mbps && r.seed == seed)
    }

    pub fn case_runs(&self, case: &str) -> Vec<&RunRecord> {
        self.runs.iter().filter(|r| r.case == case).collect()
    }
}

pub fn run_hash(echo: &str) -> String {
    Sha256::digest(echo.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run the configured experiment family under `out`.
pub fn run_experiment(cfg: &ScenarioConfig, out: &Path) -> Result<ExperimentOutput, LabError> {
    run_cases(cfg, &cases(cfg), out)
}

/// Run explicit cases: every (case, peak, seed) triple trains independently,
/// in parallel where the build allows. Layout under `out`:
/// `config.txt`, `summary.json` and `<case>/{config.txt, peak*_seed*_{windows,episodes}.csv}`.
pub fn run_cases(cfg: &ScenarioConfig, cases: &[Case], out: &Path) -> Result<ExperimentOutput, LabError> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let echo = cfg.echo();
    std::fs::write(out.join("config.txt"), &echo)?;
    for case in cases {
        let dir = out.join(&case.name);
        std::fs::create_dir_all(&dir)?;
        let resolved = ScenarioConfig { sim: case.sim.clone(), ..cfg.clone() };
        std::fs::write(dir.join("config.txt"), resolved.echo())?;
    }

    let jobs: Vec<(&Case, f64, u64)> = cases
        .iter()
        .flat_map(|c| cfg.peak_loads_mbps.iter().flat_map(move |&p| cfg.seeds.iter().map(move |&s| (c, p, s))))
        .collect();
    let timeout = Duration::from_secs_f64(cfg.episode_timeout_s);
    let results = par::map(&jobs, |&(case, peak, seed)| run_single(case, peak, seed, cfg.episodes, timeout, &out.join(&case.name)));
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::new();
    for case in cases {
        for &peak in &cfg.peak_loads_mbps {
            let group: Vec<&RunRecord> = runs.iter().filter(|r| r.case == case.name && r.peak_mbps == peak).collect();
            cells.push(CaseSummary::of(&case.name, peak, &group));
        }
    }
    let tail = tail_range(cfg.episodes);
    let mid = midpoint_range(cfg.episodes);
    let summary = Summary {
        experiment: cfg.experiment.as_str().to_string(),
        run_hash: run_hash(&echo),
        interval_method: "normal approximation over seeds: mean +/- 1.96 s / sqrt(n)".into(),
        episodes: cfg.episodes,
        tail_episodes: [tail.start, tail.end],
        midpoint_episodes: [mid.start, mid.end],
        seeds: cfg.seeds.clone(),
        cases: cells,
        config_echo: echo,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(out.join("summary.json"), json + "\n")?;
    Ok(ExperimentOutput { summary, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_for_two_hundred_episodes() {
        assert_eq!(tail_range(200), 150..200);
        assert_eq!(midpoint_range(200), 90..100);
        assert_eq!(midpoint_range(1), 0..1);
    }

    #[test]
    fn no_ris_cases_zero_the_amplitude() {
        for exp in [Experiment::Ablation4, Experiment::RisCompare, Experiment::LearnerCompare] {
            let cfg = ScenarioConfig { experiment: exp, ..Default::default() };
            for c in cases(&cfg) {
                assert_eq!(c.sim.ris == RisMethod::None, c.sim.network.ris_amplitude == 0.0, "{}", c.name);
            }
        }
    }
}
