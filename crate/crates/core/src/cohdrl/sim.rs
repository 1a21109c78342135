//! Episode orchestration: one episode is one simulated day. The meta
//! controller picks a sleep goal every `n_t` slots; within the window the
//! sub-controllers pick power levels every slot, the RIS controller runs on
//! those powers, and rates, energies and rewards are accounted.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::controllers::{meta_state, sub_select_actions, CeCache, GoalExploration, MetaController, SubController, SubSelection, LOAD_LEVELS};
use super::entropy::{kl_divergence, smoothed};
use crate::channel::{sinr_and_rate, ChannelParams, Links, PhaseShiftConfig, PowerAllocation};
use crate::energy::{bs_energy, SleepStatus};
use crate::netmodel::{associate_users, build_topology, Association, NetworkParams, Topology};
use crate::risfp::{discrete_phases, fp_optimize, FpConfig, FpProblem, ThetaSolver};
use crate::rissurrogate::{surrogate_optimize, SurrogateConfig};
use crate::rlcore::{Experience, TargetRule, TrainSchedule};
use crate::traffic::{discretize, max_demand, normalized_load, DailyPattern, DemandSnapshot, SlotClock};
use crate::{Error, Result, SimRng};

/// RIS control in the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RisMethod {
    /// Every RIS amplitude forced to zero.
    None,
    Fp,
    Surrogate,
}

/// Two-level learner variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Learner {
    /// Cross-entropy goal exploration, CE joint power actions, double-DQN targets.
    CoHdrl,
    /// Uniform goal exploration, independent power actions, vanilla DQN targets.
    Hdrl,
}

/// Where sleep goals come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SleepMode {
    Controlled,
    /// Every SBS awake; the meta-controller is not consulted or trained.
    AlwaysOn,
    /// A fixed goal index every window.
    Fixed(usize),
}

macro_rules! text_enum {
    ($ty:ty, $what:literal, $($name:literal => $variant:expr),+) => {
        impl std::str::FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(concat!("unknown ", $what, " `{}`"), other)),
                }
            }
        }
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

text_enum!(RisMethod, "RIS method", "none" => RisMethod::None, "fp" => RisMethod::Fp, "surrogate" => RisMethod::Surrogate);
text_enum!(Learner, "learner", "cohdrl" => Learner::CoHdrl, "hdrl" => Learner::Hdrl);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub network: NetworkParams,
    pub channel: ChannelParams,
    /// Hourly demand multipliers; the peak comes from `network.peak_load`.
    pub multipliers: [f64; 24],
    pub slots_per_day: usize,
    /// Slots per meta window.
    pub n_t: usize,
    /// Slot length, seconds.
    pub slot_seconds: f64,
    /// Schedules in slots; the meta schedule is converted to windows.
    pub meta_schedule: TrainSchedule,
    pub sub_schedule: TrainSchedule,
    pub overload_penalty: f64,
    pub power_fractions: Vec<f64>,
    /// Multiplier applied to rewards (in Mbit/J) before they reach the learners.
    pub reward_scale: f64,
    pub ris: RisMethod,
    pub fp: FpConfig,
    pub surrogate: SurrogateConfig,
    pub learner: Learner,
    pub sleep: SleepMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            network: NetworkParams::default(),
            channel: ChannelParams::default(),
            multipliers: DailyPattern::residential(1.0).multipliers,
            slots_per_day: 240,
            n_t: 10,
            slot_seconds: 360.0,
            meta_schedule: TrainSchedule::default(),
            sub_schedule: TrainSchedule::default(),
            overload_penalty: 0.2,
            power_fractions: super::controllers::POWER_FRACTIONS.to_vec(),
            reward_scale: 1.0,
            ris: RisMethod::Fp,
            fp: FpConfig { max_iters: 10, tol: 1e-4, solver: ThetaSolver::Coordinate, polish_sweeps: 2, inner_rounds: 2, dual_sweeps: 0 },
            surrogate: SurrogateConfig { budget: 30, ..SurrogateConfig::default() },
            learner: Learner::CoHdrl,
            sleep: SleepMode::Controlled,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        self.network.validate()?;
        self.meta_schedule.validate()?;
        self.sub_schedule.validate()?;
        DailyPattern::new(self.multipliers, self.network.peak_load)?;
        if self.n_t == 0 || self.slots_per_day == 0 || self.slots_per_day % self.n_t != 0 {
            return bad("n_t", format!("must divide slots_per_day ({} / {})", self.slots_per_day, self.n_t));
        }
        if !(self.slot_seconds > 0.0) {
            return bad("slot_seconds", "must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.overload_penalty) {
            return bad("overload_penalty", "must lie in [0, 1]".into());
        }
        if self.power_fractions.is_empty() || self.power_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return bad("power_fractions", "each level must lie in (0, 1]".into());
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale", "must be positive".into());
        }
        if let SleepMode::Fixed(g) = self.sleep {
            if g >= SleepStatus::goal_count(self.network.n_sbs) {
                return bad("sleep", format!("goal {g} out of range"));
            }
        }
        if self.fp.max_iters == 0 {
            return bad("fp.max_iters", "must be >= 1".into());
        }
        Ok(())
    }

    pub fn windows_per_day(&self) -> usize {
        self.slots_per_day / self.n_t
    }

    fn meta_schedule_in_windows(&self) -> TrainSchedule {
        TrainSchedule {
            train_every: (self.meta_schedule.train_every / self.n_t).max(1),
            copy_every: (self.meta_schedule.copy_every / self.n_t).max(1),
            ..self.meta_schedule.clone()
        }
    }
}

/// Aggregates of one meta window (window means unless stated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub episode: usize,
    pub window: usize,
    /// First slot of the window within the day.
    pub slot: usize,
    pub goal: usize,
    /// Transmit power per BS, W.
    pub bs_power: Vec<f64>,
    /// Consumption per BS, W.
    pub bs_energy: Vec<f64>,
    /// Sum of achievable rates, bits/s.
    pub capacity: f64,
    /// Sum of delivered rates `min(C_k, W_k)`, bits/s.
    pub served: f64,
    pub demand: f64,
    /// Delivered bits per joule.
    pub ee: f64,
    pub overload_fraction: f64,
    /// Meta reward before scaling, Mbit/J.
    pub meta_reward: f64,
    /// Sub rewards before scaling, Mbit/J.
    pub sub_reward: Vec<f64>,
    /// Summed cross-entropy per goal after the window.
    pub cross_entropy: Vec<f64>,
    /// Cumulative CE-LP fallbacks.
    pub ce_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub windows: Vec<WindowRecord>,
    /// Mean over slots of delivered bits per joule.
    pub mean_ee: f64,
    pub total_energy_j: f64,
    pub total_served_bits: f64,
    /// Fraction of SBS-slots awake, per hour of day.
    pub hourly_on: Vec<f64>,
    /// Mean KL between consecutive awake-window action distributions.
    pub stationarity: Option<f64>,
    pub lp_solves: usize,
    pub lp_fallbacks: usize,
    pub lp_max_violation: f64,
    pub meta_loss: Option<f64>,
    pub mean_fp_iterations: f64,
}

/// Independent RNG streams so that traffic and fading do not depend on the
/// controllers' random choices.
#[derive(Debug, Clone)]
struct Streams {
    traffic: SimRng,
    channel: SimRng,
    policy: SimRng,
    ris: SimRng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = SimRng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Self { traffic: stream(1), channel: stream(2), policy: stream(3), ris: stream(4) }
    }
}

/// Outcome of one slot.
struct SlotOutcome {
    tx_power: Vec<f64>,
    energy: Vec<f64>,
    capacity: f64,
    served: f64,
    demand: f64,
    ee: f64,
    overload_fraction: f64,
    sub_reward: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Simulator {
    pub config: SimConfig,
    pub seed: u64,
    pub topology: Topology,
    pub links: Links,
    pub meta: MetaController,
    pub subs: Vec<SubController>,
    pub ce_cache: CeCache,
    pub episodes_run: usize,
    pattern: DailyPattern,
    w_max: Vec<f64>,
    associations: Vec<Association>,
    warm: Option<Vec<Complex64>>,
    streams: Streams,
    last_window_counts: Vec<Option<Vec<f64>>>,
    previous_actions: Vec<Option<usize>>,
    /// Sub transitions waiting for their next state.
    pending_sub: Vec<Option<(Vec<f64>, usize, f64)>>,
}

impl Simulator {
    pub fn new(config: SimConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut topology = build_topology(&config.network, seed)?;
        if config.ris == RisMethod::None {
            topology = topology.with_ris_amplitude(0.0);
        }
        let mut streams = Streams::new(seed);
        let links = Links::build(&topology, &config.channel, &mut streams.channel)?;
        let n_sbs = topology.sbs_list.len();
        let n_actions = config.power_fractions.len();
        let rule = match config.learner {
            Learner::CoHdrl => TargetRule::Double,
            Learner::Hdrl => TargetRule::Vanilla,
        };
        // Shared init stream: both learners start from identical networks.
        let mut init = SimRng::seed_from_u64(seed);
        init.set_stream(5);
        let meta = MetaController::new(n_sbs, n_actions, config.meta_schedule_in_windows(), rule, &mut init);
        let subs = (0..n_sbs).map(|b| SubController::new(b, n_sbs, n_actions, config.sub_schedule.clone(), rule, &mut init)).collect();
        let pattern = DailyPattern::new(config.multipliers, config.network.peak_load)?;
        let w_max = (0..topology.n_bs()).map(|b| max_demand(&topology, b, config.network.peak_load)).collect();
        let associations = (0..SleepStatus::goal_count(n_sbs))
            .map(|g| associate_users(&topology, &SleepStatus::from_index(g, n_sbs)))
            .collect();
        Ok(Self {
            config,
            seed,
            topology,
            links,
            meta,
            subs,
            ce_cache: CeCache::default(),
            episodes_run: 0,
            pattern,
            w_max,
            associations,
            warm: None,
            streams,
            last_window_counts: vec![None; n_sbs],
            previous_actions: vec![None; n_sbs],
            pending_sub: vec![None; n_sbs],
        })
    }

    pub fn n_sbs(&self) -> usize {
        self.topology.sbs_list.len()
    }

    fn levels(&self, demands: &[f64], association: &Association) -> Vec<usize> {
        (0..self.topology.n_bs())
            .map(|b| discretize(normalized_load(demands, association, b, self.w_max[b]), LOAD_LEVELS))
            .collect()
    }

    /// Per-UE achievable rates for the given powers; updates the warm start.
    fn ris_rates(&mut self, association: &Association, powers: &PowerAllocation) -> Result<(Vec<f64>, usize)> {
        let cfg = &self.config;
        match cfg.ris {
            RisMethod::None => {
                let phases = PhaseShiftConfig::zero_phase(&self.topology);
                let q = sinr_and_rate(&self.topology, association, powers, &phases, &self.links, &cfg.channel)?;
                Ok((q.into_iter().map(|l| l.rate).collect(), 0))
            }
            RisMethod::Fp => {
                let out = fp_optimize(&self.topology, &self.links, association, powers, &cfg.channel, &cfg.fp, self.warm.as_deref())?;
                let iters = out.solution.iterations;
                self.warm = Some(out.solution.theta);
                Ok((out.quantized_rates, iters))
            }
            RisMethod::Surrogate => {
                let problem = FpProblem::from_network(&self.topology, &self.links, association, powers, &cfg.channel)?;
                let mu = self.topology.ris_list.first().map_or(1, |r| r.resolution_bits);
                let objective = |z: &[u32]| problem.rates(&discrete_phases(z, mu)).iter().sum::<f64>();
                let res = surrogate_optimize(objective, problem.dim, 1 << mu, &cfg.surrogate, &mut self.streams.ris)?;
                Ok((problem.rates(&discrete_phases(&res.best, mu)), res.trace.len()))
            }
        }
    }

    fn simulate_slot(
        &mut self,
        status: &SleepStatus,
        association: &Association,
        actions: &[Option<usize>],
        demands: &[f64],
    ) -> Result<(SlotOutcome, usize)> {
        let n_bs = self.topology.n_bs();
        let mut totals = vec![0.0; n_bs];
        totals[0] = self.topology.mbs.p_max;
        for (b, a) in actions.iter().enumerate() {
            if let Some(a) = a {
                totals[b + 1] = self.config.power_fractions[*a] * self.topology.sbs_list[b].p_max;
            }
        }
        let powers = PowerAllocation::equal_split(&totals, association);
        powers.validate(&self.topology)?;
        let (rates, iters) = self.ris_rates(association, &powers)?;
        let mut energy = vec![0.0; n_bs];
        let mut cap_bs = vec![0.0; n_bs];
        let mut served_bs = vec![0.0; n_bs];
        let mut demand_bs = vec![0.0; n_bs];
        for (k, &b) in association.serving.iter().enumerate() {
            cap_bs[b] += rates[k];
            served_bs[b] += rates[k].min(demands[k]);
            demand_bs[b] += demands[k];
        }
        let tx_power: Vec<f64> = (0..n_bs).map(|b| powers.bs_total(b)).collect();
        for b in 0..n_bs {
            energy[b] = bs_energy(self.topology.bs(b), status.bs_on(b), tx_power[b])?;
        }
        // BSs carrying traffic; awake SBSs without UEs do not dilute the fraction.
        let serving: Vec<usize> = (0..n_bs).filter(|&b| status.bs_on(b) && association.count(b) > 0).collect();
        let overloaded = serving.iter().filter(|&&b| demand_bs[b] > cap_bs[b]).count();
        let served: f64 = served_bs.iter().sum();
        let total_energy: f64 = energy.iter().sum();
        let sub_reward = (0..self.n_sbs())
            .map(|s| if status.is_awake(s) { served_bs[s + 1] / energy[s + 1] * 1e-6 } else { 0.0 })
            .collect();
        Ok((
            SlotOutcome {
                tx_power,
                capacity: cap_bs.iter().sum(),
                served,
                demand: demand_bs.iter().sum(),
                ee: served / total_energy,
                overload_fraction: if serving.is_empty() { 0.0 } else { overloaded as f64 / serving.len() as f64 },
                energy,
                sub_reward,
            },
            iters,
        ))
    }

    fn goal_for_window(&mut self, state: &[f64]) -> Result<usize> {
        let n_sbs = self.n_sbs();
        match self.config.sleep {
            SleepMode::AlwaysOn => Ok(SleepStatus::goal_count(n_sbs) - 1),
            SleepMode::Fixed(g) => Ok(g),
            SleepMode::Controlled => {
                let exploration = match self.config.learner {
                    Learner::CoHdrl => GoalExploration::CrossEntropy,
                    Learner::Hdrl => GoalExploration::Uniform,
                };
                self.meta.select_goal(state, exploration, &mut self.streams.policy)
            }
        }
    }

    fn flush_sub(&mut self, b: usize, next_state: Vec<f64>, done: bool) -> Result<()> {
        if let Some((state, action, reward)) = self.pending_sub[b].take() {
            let e = Experience { state, action, reward, next_state, done };
            self.subs[b].agent.observe(e, &mut self.streams.policy)?;
        }
        Ok(())
    }

    /// Run one day.
    pub fn run_episode(&mut self) -> Result<EpisodeMetrics> {
        self.run_episode_until(None)
    }

    /// Run one day, aborting with [`Error::Timeout`] once `deadline` passes.
    pub fn run_episode_until(&mut self, deadline: Option<Instant>) -> Result<EpisodeMetrics> {
        let n_sbs = self.n_sbs();
        let n_bs = self.topology.n_bs();
        let n_t = self.config.n_t;
        let clock = SlotClock { slots_per_day: self.config.slots_per_day };
        let episode = self.episodes_run;
        let selection = match self.config.learner {
            Learner::CoHdrl => SubSelection::Correlated,
            Learner::Hdrl => SubSelection::Independent,
        };
        let controlled = self.config.sleep == SleepMode::Controlled;
        let scale = self.config.reward_scale;
        let (solves0, fallbacks0) = (self.ce_cache.solves, self.ce_cache.fallbacks);
        let violation0 = self.ce_cache.max_violation;
        self.ce_cache.max_violation = 0.0;

        let mut windows = Vec::with_capacity(self.config.windows_per_day());
        let mut hourly = vec![(0.0, 0usize); 24];
        let mut ee_sum = 0.0;
        let mut energy_j = 0.0;
        let mut served_bits = 0.0;
        let mut kl_values = Vec::new();
        let mut fp_iters = 0usize;
        let mut pending_meta: Option<(Vec<f64>, usize, f64)> = None;
        let meta_in = self.meta.agent.main.in_dim();

        for w in 0..self.config.windows_per_day() {
            if deadline.is_some_and(|d| Instant::now() > d) {
                return Err(Error::Timeout(format!("episode {episode} stopped at window {w}")));
            }
            let slot0 = w * n_t;
            let mut demand = DemandSnapshot::draw(&self.topology, slot0, clock.hour(slot0), &self.pattern, &mut self.streams.traffic);
            let s_meta = meta_state(&self.levels(&demand.demands, &self.topology.association));
            if let Some((s, g, r)) = pending_meta.take() {
                let e = Experience { state: s, action: g, reward: r, next_state: s_meta.clone(), done: false };
                self.meta.agent.observe(e, &mut self.streams.policy)?;
            }
            let goal = self.goal_for_window(&s_meta)?;
            let status = SleepStatus::from_index(goal, n_sbs);
            let association = self.associations[goal].clone();
            for b in (0..n_sbs).filter(|&b| !status.is_awake(b)) {
                self.flush_sub(b, vec![0.0; self.subs[b].agent.main.in_dim()], true)?;
            }

            let mut acc_power = vec![0.0; n_bs];
            let mut acc_energy = vec![0.0; n_bs];
            let mut acc_sub = vec![0.0; n_sbs];
            let (mut acc_cap, mut acc_served, mut acc_demand, mut acc_ee, mut acc_over) = (0.0, 0.0, 0.0, 0.0, 0.0);
            let mut counts = vec![vec![0.0; self.config.power_fractions.len()]; n_sbs];

            for t in 0..n_t {
                let slot = slot0 + t;
                if t > 0 {
                    demand = DemandSnapshot::draw(&self.topology, slot, clock.hour(slot), &self.pattern, &mut self.streams.traffic);
                }
                self.links.redraw_nlos(&mut self.streams.channel);
                let levels_bs = self.levels(&demand.demands, &association);
                let levels: Vec<usize> = levels_bs[1..].to_vec();
                let actions = sub_select_actions(
                    &self.subs,
                    &status,
                    &levels,
                    &self.previous_actions,
                    selection,
                    self.config.sub_schedule.epsilon,
                    &mut self.ce_cache,
                    &mut self.streams.policy,
                )?;
                // What each SBS's network saw when deciding.
                let seen: Vec<Option<usize>> = match selection {
                    SubSelection::Correlated => actions.clone(),
                    SubSelection::Independent => {
                        (0..n_sbs).map(|b| if status.is_awake(b) { self.previous_actions[b] } else { None }).collect()
                    }
                };
                let (out, iters) = self.simulate_slot(&status, &association, &actions, &demand.demands)?;
                fp_iters += iters;
                for b in 0..n_sbs {
                    if let Some(a) = actions[b] {
                        let input = self.subs[b].input(levels[b], &seen);
                        self.flush_sub(b, input.clone(), false)?;
                        self.pending_sub[b] = Some((input, a, out.sub_reward[b] * scale));
                        counts[b][a] += 1.0;
                        if controlled {
                            self.meta.record_action(goal, b, a);
                        }
                    }
                }
                self.previous_actions = actions;

                let hour = clock.hour(slot);
                hourly[hour].0 += status.awake_count() as f64 / n_sbs.max(1) as f64;
                hourly[hour].1 += 1;
                for b in 0..n_bs {
                    acc_power[b] += out.tx_power[b];
                    acc_energy[b] += out.energy[b];
                }
                for b in 0..n_sbs {
                    acc_sub[b] += out.sub_reward[b];
                }
                acc_cap += out.capacity;
                acc_served += out.served;
                acc_demand += out.demand;
                acc_ee += out.ee;
                acc_over += out.overload_fraction;
                ee_sum += out.ee;
                energy_j += out.energy.iter().sum::<f64>() * self.config.slot_seconds;
                served_bits += out.served * self.config.slot_seconds;
            }

            let m = n_t as f64;
            let mean_ee = acc_ee / m;
            let overload = acc_over / m;
            let meta_reward = mean_ee * 1e-6 * (1.0 - self.config.overload_penalty * overload);
            if controlled {
                self.meta.close_window(goal);
            }
            for b in 0..n_sbs {
                if counts[b].iter().any(|&c| c > 0.0) {
                    if let Some(prev) = &self.last_window_counts[b] {
                        kl_values.push(kl_divergence(&smoothed(prev), &smoothed(&counts[b]))?);
                    }
                    self.last_window_counts[b] = Some(counts[b].clone());
                }
            }
            if controlled {
                pending_meta = Some((s_meta, goal, meta_reward * scale));
            }
            windows.push(WindowRecord {
                episode,
                window: w,
                slot: slot0,
                goal,
                bs_power: acc_power.iter().map(|v| v / m).collect(),
                bs_energy: acc_energy.iter().map(|v| v / m).collect(),
                capacity: acc_cap / m,
                served: acc_served / m,
                demand: acc_demand / m,
                ee: mean_ee,
                overload_fraction: overload,
                meta_reward,
                sub_reward: acc_sub.iter().map(|v| v / m).collect(),
                cross_entropy: self.meta.goal_scores(),
                ce_fallbacks: self.ce_cache.fallbacks,
            });
        }
        if let Some((s, g, r)) = pending_meta.take() {
            let e = Experience { state: s, action: g, reward: r, next_state: vec![0.0; meta_in], done: true };
            self.meta.agent.observe(e, &mut self.streams.policy)?;
        }
        for b in 0..n_sbs {
            self.flush_sub(b, vec![0.0; self.subs[b].agent.main.in_dim()], true)?;
        }
        self.previous_actions = vec![None; n_sbs];
        self.episodes_run += 1;

        let slots = self.config.slots_per_day as f64;
        let lp_max_violation = self.ce_cache.max_violation;
        self.ce_cache.max_violation = violation0.max(lp_max_violation);
        Ok(EpisodeMetrics {
            episode,
            windows,
            mean_ee: ee_sum / slots,
            total_energy_j: energy_j,
            total_served_bits: served_bits,
            hourly_on: hourly.iter().map(|&(s, n)| if n > 0 { s / n as f64 } else { 0.0 }).collect(),
            stationarity: (!kl_values.is_empty()).then(|| kl_values.iter().sum::<f64>() / kl_values.len() as f64),
            lp_solves: self.ce_cache.solves - solves0,
            lp_fallbacks: self.ce_cache.fallbacks - fallbacks0,
            lp_max_violation,
            meta_loss: self.meta.agent.last_loss,
            mean_fp_iterations: fp_iters as f64 / slots,
        })
    }
}

/// Run `episodes` days of one learner on one seed.
pub fn run_training(config: &SimConfig, seed: u64, episodes: usize) -> Result<Vec<EpisodeMetrics>> {
    let mut sim = Simulator::new(config.clone(), seed)?;
    (0..episodes).map(|_| sim.run_episode()).collect()
}
