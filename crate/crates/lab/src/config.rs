//! Flat `key = value` scenario files.
//!
//! Every key has a default, so an empty file is a complete scenario. Values
//! are range-checked as they are read; the resolved scenario can be echoed
//! back in the same format and re-parsed to an identical value.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use risnet_core::channel::InterferenceModel;
use risnet_core::cohdrl::{Learner, RisMethod, SimConfig, SleepMode};
use risnet_core::risfp::ThetaSolver;

use crate::LabError;

/// Experiment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// {sleep, no-sleep} × {RIS, no-RIS}.
    Ablation4,
    /// FP vs. surrogate vs. no RIS under Co-HDRL sleep control.
    RisCompare,
    /// Co-HDRL vs. HDRL with FP.
    LearnerCompare,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ablation4 => "ablation4",
            Self::RisCompare => "ris_compare",
            Self::LearnerCompare => "learner_compare",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ablation4" => Ok(Self::Ablation4),
            "ris_compare" => Ok(Self::RisCompare),
            "learner_compare" => Ok(Self::LearnerCompare),
            other => Err(format!("unknown experiment `{other}` (ablation4|ris_compare|learner_compare)")),
        }
    }
}

fn sleep_mode_str(mode: SleepMode) -> String {
    match mode {
        SleepMode::Controlled => "controlled".into(),
        SleepMode::AlwaysOn => "always_on".into(),
        SleepMode::Fixed(g) => format!("fixed:{g}"),
    }
}

fn parse_sleep_mode(s: &str) -> Result<SleepMode, String> {
    match s {
        "controlled" => Ok(SleepMode::Controlled),
        "always_on" => Ok(SleepMode::AlwaysOn),
        _ => match s.strip_prefix("fixed:").map(str::parse::<usize>) {
            Some(Ok(g)) => Ok(SleepMode::Fixed(g)),
            _ => Err(format!("unknown sleep mode `{s}` (controlled|always_on|fixed:N)")),
        },
    }
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    /// Per-UE peak demand sweep, Mbps.
    pub peak_loads_mbps: Vec<f64>,
    /// Wall-clock cap per episode, seconds.
    pub episode_timeout_s: f64,
    /// Simulator settings; the experiment family overrides the RIS method,
    /// learner and sleep mode per case.
    pub sim: SimConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            experiment: Experiment::Ablation4,
            seeds: (1..=10).collect(),
            episodes: 200,
            peak_loads_mbps: vec![sim.network.peak_load / 1e6],
            episode_timeout_s: 60.0,
            sim,
        }
    }
}

/// One configurable key.
struct Field {
    key: &'static str,
    get: fn(&ScenarioConfig) -> String,
    set: fn(&mut ScenarioConfig, &str) -> Result<(), String>,
}

fn bounded<T>(v: &str, lo: T, hi: T) -> Result<T, String>
where
    T: FromStr + PartialOrd + Copy + std::fmt::Display,
{
    let x: T = v.parse().map_err(|_| format!("cannot parse `{v}`; valid range [{lo}, {hi}]"))?;
    if x >= lo && x <= hi {
        Ok(x)
    } else {
        Err(format!("{x} out of range; valid range [{lo}, {hi}]"))
    }
}

fn positive(v: &str, hi: f64) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("cannot parse `{v}`; valid range (0, {hi}]"))?;
    if x > 0.0 && x <= hi {
        Ok(x)
    } else {
        Err(format!("{x} out of range; valid range (0, {hi}]"))
    }
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, _> = v.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(items) if !items.is_empty() => Ok(items),
        _ => Err(format!("expected a non-empty comma-separated list, got `{v}`")),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

macro_rules! field {
    ($key:literal, |$c:ident| $place:expr, |$v:ident| $parse:expr) => {
        Field {
            key: $key,
            get: |$c| $place.to_string(),
            set: |$c, $v| {
                $place = $parse?;
                Ok(())
            },
        }
    };
}

/// Both learning levels share one set of schedule values.
macro_rules! schedule_field {
    ($key:literal, $name:ident, |$v:ident| $parse:expr) => {
        Field {
            key: $key,
            get: |c| c.sim.meta_schedule.$name.to_string(),
            set: |c, $v| {
                let x = $parse?;
                c.sim.meta_schedule.$name = x;
                c.sim.sub_schedule.$name = x;
                Ok(())
            },
        }
    };
}

const FIELDS: &[Field] = &[
    Field {
        key: "experiment",
        get: |c| c.experiment.as_str().into(),
        set: |c, v| {
            c.experiment = v.parse()?;
            Ok(())
        },
    },
    Field {
        key: "seeds",
        get: |c| join(&c.seeds),
        set: |c, v| {
            c.seeds = list(v)?;
            Ok(())
        },
    },
    field!("episodes", |c| c.episodes, |v| bounded(v, 1usize, 100_000)),
    Field {
        key: "peak_load",
        get: |c| join(&c.peak_loads_mbps),
        set: |c, v| {
            let loads: Vec<f64> = list(v)?;
            if let Some(bad) = loads.iter().find(|x| !(**x > 0.0 && **x <= 1000.0)) {
                return Err(format!("{bad} out of range; valid range (0, 1000] Mbps"));
            }
            c.sim.network.peak_load = loads[0] * 1e6;
            c.peak_loads_mbps = loads;
            Ok(())
        },
    },
    field!("episode_timeout", |c| c.episode_timeout_s, |v| positive(v, 86_400.0)),
    // Learner, RIS and sleep selection (overridden per case by experiments).
    field!("learner", |c| c.sim.learner, |v| v.parse::<Learner>()),
    field!("ris_method", |c| c.sim.ris, |v| v.parse::<RisMethod>()),
    Field {
        key: "sleep_mode",
        get: |c| sleep_mode_str(c.sim.sleep),
        set: |c, v| {
            c.sim.sleep = parse_sleep_mode(v)?;
            Ok(())
        },
    },
    // Network.
    field!("n_sbs", |c| c.sim.network.n_sbs, |v| bounded(v, 1usize, 4)),
    field!("n_ues", |c| c.sim.network.n_ues, |v| bounded(v, 0usize, 500)),
    field!("n_ris", |c| c.sim.network.n_ris, |v| bounded(v, 1usize, 32)),
    field!("ris_elements", |c| c.sim.network.ris_elements, |v| bounded(v, 1usize, 256)),
    field!("ris_amplitude", |c| c.sim.network.ris_amplitude, |v| bounded(v, 0.0, 1.0)),
    field!("ris_bits", |c| c.sim.network.ris_resolution_bits, |v| bounded(v, 1u32, 8)),
    field!("mbs_radius", |c| c.sim.network.mbs_radius, |v| positive(v, 10_000.0)),
    field!("sbs_radius", |c| c.sim.network.sbs_radius, |v| positive(v, 10_000.0)),
    field!("sbs_ring_radius", |c| c.sim.network.sbs_ring_radius, |v| positive(v, 10_000.0)),
    field!("ris_ring_radius", |c| c.sim.network.ris_ring_radius, |v| positive(v, 10_000.0)),
    field!("mbs_height", |c| c.sim.network.mbs_height, |v| bounded(v, 0.0, 500.0)),
    field!("sbs_height", |c| c.sim.network.sbs_height, |v| bounded(v, 0.0, 500.0)),
    field!("ris_height", |c| c.sim.network.ris_height, |v| bounded(v, 0.0, 500.0)),
    field!("ue_height", |c| c.sim.network.ue_height, |v| bounded(v, 0.0, 500.0)),
    field!("mbs_p_max", |c| c.sim.network.mbs_p_max, |v| positive(v, 1000.0)),
    field!("sbs_p_max", |c| c.sim.network.sbs_p_max, |v| positive(v, 1000.0)),
    field!("mbs_p_active", |c| c.sim.network.mbs_p_active, |v| bounded(v, 0.0, 10_000.0)),
    field!("mbs_p_sleep", |c| c.sim.network.mbs_p_sleep, |v| bounded(v, 0.0, 10_000.0)),
    field!("sbs_p_active", |c| c.sim.network.sbs_p_active, |v| bounded(v, 0.0, 10_000.0)),
    field!("sbs_p_sleep", |c| c.sim.network.sbs_p_sleep, |v| bounded(v, 0.0, 10_000.0)),
    field!("mbs_delta", |c| c.sim.network.mbs_delta, |v| bounded(v, 0.0, 100.0)),
    field!("sbs_delta", |c| c.sim.network.sbs_delta, |v| bounded(v, 0.0, 100.0)),
    field!("carrier_freq", |c| c.sim.network.carrier_freq, |v| positive(v, 1e12)),
    field!("bandwidth", |c| c.sim.network.bandwidth, |v| positive(v, 1e10)),
    field!("poisson_fraction", |c| c.sim.network.poisson_fraction, |v| bounded(v, 0.0, 1.0)),
    // Channel.
    field!("pl0_db", |c| c.sim.channel.pl0_db, |v| bounded(v, 0.0, 200.0)),
    field!("exp_bs_ris", |c| c.sim.channel.exp_bs_ris, |v| bounded(v, 1.0, 6.0)),
    field!("exp_ris_ue", |c| c.sim.channel.exp_ris_ue, |v| bounded(v, 1.0, 6.0)),
    field!("rician_k_db", |c| c.sim.channel.rician_k_db, |v| bounded(v, -50.0, 50.0)),
    field!("noise_psd_dbm_hz", |c| c.sim.channel.noise_psd_dbm_hz, |v| bounded(v, -250.0, 0.0)),
    field!("noise_figure_db", |c| c.sim.channel.noise_figure_db, |v| bounded(v, 0.0, 50.0)),
    field!("interference", |c| c.sim.channel.interference, |v| v.parse::<InterferenceModel>()),
    // Learning schedule, shared by meta- and sub-controllers.
    schedule_field!("gamma", gamma, |v| bounded(v, 0.0, 0.999_999)),
    schedule_field!("epsilon", epsilon, |v| bounded(v, 0.0, 1.0)),
    schedule_field!("minibatch", minibatch, |v| bounded(v, 1usize, 100_000)),
    schedule_field!("pool_size", pool_capacity, |v| bounded(v, 1usize, 1_000_000)),
    schedule_field!("train_every", train_every, |v| bounded(v, 1usize, 1_000_000)),
    schedule_field!("copy_every", copy_every, |v| bounded(v, 1usize, 1_000_000)),
    schedule_field!("learning_rate", learning_rate, |v| positive(v, 10.0)),
    schedule_field!("lr_decay", lr_decay, |v| positive(v, 1.0)),
    // Simulation clock and rewards.
    field!("slots_per_day", |c| c.sim.slots_per_day, |v| bounded(v, 1usize, 100_000)),
    field!("n_t", |c| c.sim.n_t, |v| bounded(v, 1usize, 100_000)),
    field!("slot_seconds", |c| c.sim.slot_seconds, |v| positive(v, 86_400.0)),
    field!("overload_penalty", |c| c.sim.overload_penalty, |v| bounded(v, 0.0, 1.0)),
    field!("reward_scale", |c| c.sim.reward_scale, |v| positive(v, 1e6)),
    // RIS optimisers in the loop.
    field!("fp_max_iters", |c| c.sim.fp.max_iters, |v| bounded(v, 1usize, 10_000)),
    field!("fp_tol", |c| c.sim.fp.tol, |v| positive(v, 1.0)),
    field!("fp_solver", |c| c.sim.fp.solver, |v| v.parse::<ThetaSolver>()),
    field!("surrogate_budget", |c| c.sim.surrogate.budget, |v| bounded(v, 1usize, 100_000)),
];

/// Every accepted key, in echo order.
pub fn keys() -> impl Iterator<Item = &'static str> {
    FIELDS.iter().map(|f| f.key)
}

impl ScenarioConfig {
    /// Parse scenario text. Absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(LabError::Config { line: Some(line_no), message: format!("expected `key = value`, got `{line}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(field) = FIELDS.iter().find(|f| f.key == key) else {
                return Err(LabError::Config { line: Some(line_no), message: format!("unknown key `{key}`") });
            };
            if !seen.insert(key) {
                return Err(LabError::Config { line: Some(line_no), message: format!("duplicate key `{key}`") });
            }
            (field.set)(&mut cfg, value)
                .map_err(|m| LabError::Config { line: Some(line_no), message: format!("`{key}`: {m}") })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Override one key, as a command-line flag would.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        let field = FIELDS
            .iter()
            .find(|f| f.key == key)
            .ok_or_else(|| LabError::Config { line: None, message: format!("unknown key `{key}`") })?;
        (field.set)(self, value.trim()).map_err(|m| LabError::Config { line: None, message: format!("`{key}`: {m}") })
    }

    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Cross-key checks that single-key ranges cannot express.
    pub fn validate(&self) -> Result<(), LabError> {
        self.sim.validate().map_err(|e| LabError::Config { line: None, message: e.to_string() })
    }

    /// Resolved scenario in parseable form, one key per line.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for f in FIELDS {
            let _ = writeln!(out, "{} = {}", f.key, (f.get)(self));
        }
        out
    }
}
