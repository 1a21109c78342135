//! Meta-controller (sleep goals) and sub-controllers (power levels).

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ce::{sample_index, solve_correlated_equilibrium, CeDistribution, CeGame};
use super::entropy::{goal_probability, ActionHistogram};
use crate::energy::SleepStatus;
use crate::rlcore::{argmax, one_hot, DqnAgent, QNetwork, TargetRule, TrainSchedule};
use crate::{Error, Result};

/// Load grid `{0, 0.1, …, 1.0}`.
pub const LOAD_LEVELS: usize = 11;

/// Per-SBS transmit power levels as fractions of `p_max`.
pub const POWER_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// How exploratory goals are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalExploration {
    /// Tanh-normalised cross-entropy distribution.
    CrossEntropy,
    Uniform,
}

/// How awake sub-controllers pick their joint power action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubSelection {
    Correlated,
    Independent,
}

/// One-hot concatenation of per-BS load levels.
pub fn meta_state(levels: &[usize]) -> Vec<f64> {
    levels.iter().flat_map(|&l| one_hot(l, LOAD_LEVELS)).collect()
}

#[derive(Debug, Clone)]
pub struct MetaController {
    pub agent: DqnAgent,
    pub n_sbs: usize,
    pub n_sub_actions: usize,
    /// `histograms[goal][sbs]`.
    pub histograms: Vec<Vec<ActionHistogram>>,
    /// Latest cross-entropy per goal and SBS; `None` until measured.
    pub cross_entropy: Vec<Vec<Option<f64>>>,
}

impl MetaController {
    pub fn new<R: Rng + ?Sized>(
        n_sbs: usize,
        n_sub_actions: usize,
        schedule: TrainSchedule,
        rule: TargetRule,
        rng: &mut R,
    ) -> Self {
        let goals = SleepStatus::goal_count(n_sbs);
        Self {
            agent: DqnAgent::new((n_sbs + 1) * LOAD_LEVELS, goals, schedule, rule, rng),
            n_sbs,
            n_sub_actions,
            histograms: vec![vec![ActionHistogram::new(n_sub_actions); n_sbs]; goals],
            cross_entropy: vec![vec![None; n_sbs]; goals],
        }
    }

    pub fn n_goals(&self) -> usize {
        self.histograms.len()
    }

    /// Per-goal cross-entropy summed over the SBSs awake under that goal.
    /// Unmeasured entries count as `ln |A|`.
    pub fn goal_scores(&self) -> Vec<f64> {
        let prior = (self.n_sub_actions as f64).ln();
        (0..self.n_goals())
            .map(|g| {
                let status = SleepStatus::from_index(g, self.n_sbs);
                (0..self.n_sbs).filter(|&b| status.is_awake(b)).map(|b| self.cross_entropy[g][b].unwrap_or(prior)).sum()
            })
            .collect()
    }

    pub fn goal_probabilities(&self) -> Result<Vec<f64>> {
        goal_probability(&self.goal_scores())
    }

    /// ε-greedy goal: exploratory draws follow `exploration`, greedy picks the
    /// lowest-index argmax of the main network.
    pub fn select_goal<R: Rng + ?Sized>(&self, state: &[f64], exploration: GoalExploration, rng: &mut R) -> Result<usize> {
        if rng.gen::<f64>() < self.agent.schedule.epsilon {
            return Ok(match exploration {
                GoalExploration::Uniform => rng.gen_range(0..self.n_goals()),
                GoalExploration::CrossEntropy => sample_index(&self.goal_probabilities()?, rng),
            });
        }
        self.agent.greedy(state)
    }

    pub fn record_action(&mut self, goal: usize, sbs: usize, action: usize) {
        self.histograms[goal][sbs].record(action);
    }

    /// Refresh the cross-entropy of every SBS awake under `goal` against its
    /// history, then fold the window into the history.
    pub fn close_window(&mut self, goal: usize) {
        let status = SleepStatus::from_index(goal, self.n_sbs);
        for b in (0..self.n_sbs).filter(|&b| status.is_awake(b)) {
            let h = &mut self.histograms[goal][b];
            if h.window.iter().all(|&c| c == 0.0) {
                continue;
            }
            if h.has_history() {
                self.cross_entropy[goal][b] = Some(h.cross_entropy());
            }
            h.close_window();
        }
    }
}

/// Power-level agent of one SBS. Its network sees its own load level and the
/// power levels of the other SBSs (zeros for asleep ones), and outputs one
/// Q-value per own power level.
#[derive(Debug, Clone)]
pub struct SubController {
    /// SBS index (0-based among SBSs).
    pub sbs: usize,
    pub agent: DqnAgent,
}

impl SubController {
    pub fn input_dim(n_sbs: usize, n_actions: usize) -> usize {
        LOAD_LEVELS + n_actions * n_sbs.saturating_sub(1)
    }

    pub fn new<R: Rng + ?Sized>(
        sbs: usize,
        n_sbs: usize,
        n_actions: usize,
        schedule: TrainSchedule,
        rule: TargetRule,
        rng: &mut R,
    ) -> Self {
        Self { sbs, agent: DqnAgent::new(Self::input_dim(n_sbs, n_actions), n_actions, schedule, rule, rng) }
    }

    pub fn n_actions(&self) -> usize {
        self.agent.main.out_dim()
    }

    /// Network input for own level and every SBS's action (own entry ignored).
    pub fn input(&self, level: usize, actions: &[Option<usize>]) -> Vec<f64> {
        let n = self.n_actions();
        let mut x = one_hot(level, LOAD_LEVELS);
        for (b, a) in actions.iter().enumerate() {
            if b == self.sbs {
                continue;
            }
            match a {
                Some(a) => x.extend(one_hot(*a, n)),
                None => x.extend(std::iter::repeat(0.0).take(n)),
            }
        }
        x
    }

    pub fn q_values(&self, level: usize, actions: &[Option<usize>]) -> Result<Vec<f64>> {
        self.agent.q_values(&self.input(level, actions))
    }
}

/// Joint-action game among the awake SBSs: agent `i` is `awake[i]`, and its
/// payoff at a joint action is its Q-value with the others' actions plugged in.
pub fn joint_game(subs: &[SubController], awake: &[usize], levels: &[usize]) -> Result<CeGame> {
    let n_actions: Vec<usize> = awake.iter().map(|&b| subs[b].n_actions()).collect();
    let shell = CeGame { n_actions: n_actions.clone(), payoffs: Vec::new() };
    let size = shell.joint_size();
    let mut payoffs = Vec::with_capacity(awake.len());
    for (i, &b) in awake.iter().enumerate() {
        let mut row = vec![0.0; size];
        for j in (0..size).filter(|&j| shell.decode(j)[i] == 0) {
            let acts = shell.decode(j);
            let mut full = vec![None; subs.len()];
            for (k, &bk) in awake.iter().enumerate() {
                full[bk] = Some(acts[k]);
            }
            let q = subs[b].q_values(levels[b], &full)?;
            for (a, qa) in q.iter().enumerate() {
                row[shell.deviate(j, i, a)] = *qa;
            }
        }
        payoffs.push(row);
    }
    CeGame::new(n_actions, payoffs)
}

/// Memoised CE solutions. Networks only change at training events, so a
/// solution stays valid for a given awake set and load levels until any
/// sub-controller trains.
#[derive(Debug, Clone, Default)]
pub struct CeCache {
    version: Vec<usize>,
    entries: HashMap<(Vec<usize>, Vec<usize>), CeDistribution>,
    pub solves: usize,
    pub fallbacks: usize,
    pub max_violation: f64,
}

impl CeCache {
    pub fn get_or_solve(&mut self, subs: &[SubController], awake: &[usize], levels: &[usize]) -> Result<&CeDistribution> {
        let version: Vec<usize> = subs.iter().map(|s| s.agent.train_events).collect();
        if version != self.version {
            self.entries.clear();
            self.version = version;
        }
        let key = (awake.to_vec(), awake.iter().map(|&b| levels[b]).collect::<Vec<_>>());
        if !self.entries.contains_key(&key) {
            let game = joint_game(subs, awake, levels)?;
            let d = solve_correlated_equilibrium(&game);
            self.solves += 1;
            self.fallbacks += usize::from(d.fallback);
            self.max_violation = self.max_violation.max(d.violation);
            self.entries.insert(key.clone(), d);
        }
        Ok(&self.entries[&key])
    }
}

/// Pick power levels for every SBS (`None` when asleep).
///
/// Correlated: with probability ε the awake SBSs act uniformly at random,
/// otherwise a joint action is drawn from the CE distribution. Independent:
/// each awake SBS is ε-greedy on its own network given the others' previous
/// actions.
#[allow(clippy::too_many_arguments)]
pub fn sub_select_actions<R: Rng + ?Sized>(
    subs: &[SubController],
    status: &SleepStatus,
    levels: &[usize],
    previous: &[Option<usize>],
    mode: SubSelection,
    epsilon: f64,
    cache: &mut CeCache,
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    if status.len() != subs.len() || levels.len() != subs.len() || previous.len() != subs.len() {
        return Err(Error::DimensionMismatch { expected: subs.len(), actual: status.len() });
    }
    let awake: Vec<usize> = (0..subs.len()).filter(|&b| status.is_awake(b)).collect();
    let mut out = vec![None; subs.len()];
    if awake.is_empty() {
        return Ok(out);
    }
    match mode {
        SubSelection::Correlated => {
            if rng.gen::<f64>() < epsilon {
                for &b in &awake {
                    out[b] = Some(rng.gen_range(0..subs[b].n_actions()));
                }
            } else {
                let d = cache.get_or_solve(subs, &awake, levels)?;
                let j = d.sample(rng);
                let shell = CeGame { n_actions: awake.iter().map(|&b| subs[b].n_actions()).collect(), payoffs: Vec::new() };
                for (i, a) in shell.decode(j).into_iter().enumerate() {
                    out[awake[i]] = Some(a);
                }
            }
        }
        SubSelection::Independent => {
            let seen: Vec<Option<usize>> = (0..subs.len()).map(|b| if status.is_awake(b) { previous[b] } else { None }).collect();
            for &b in &awake {
                out[b] = Some(if rng.gen::<f64>() < epsilon {
                    rng.gen_range(0..subs[b].n_actions())
                } else {
                    argmax(&subs[b].q_values(levels[b], &seen)?)
                });
            }
        }
    }
    Ok(out)
}

/// Deterministic greedy goal of a bare network (lowest index on ties).
pub fn greedy_goal(net: &QNetwork, state: &[f64]) -> Result<usize> {
    Ok(argmax(&net.forward(state)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    #[test]
    fn state_encoding() {
        let s = meta_state(&[0, 10, 3, 5]);
        assert_eq!(s.len(), 44);
        assert_eq!(s.iter().sum::<f64>(), 4.0);
        assert_eq!(s[11 + 10], 1.0);
    }

    #[test]
    fn sub_input_layout() {
        let mut rng = rng_from_seed(1);
        let s = SubController::new(1, 3, 4, TrainSchedule::default(), TargetRule::Double, &mut rng);
        let x = s.input(2, &[Some(3), Some(0), None]);
        assert_eq!(x.len(), 19);
        assert_eq!(x[2], 1.0);
        assert_eq!(&x[11..15], &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(&x[15..19], &[0.0; 4]);
    }

    #[test]
    fn unvisited_goal_scores() {
        let mut rng = rng_from_seed(2);
        let m = MetaController::new(3, 4, TrainSchedule::default(), TargetRule::Double, &mut rng);
        let s = m.goal_scores();
        let l = 4f64.ln();
        assert_eq!(s[0], 0.0);
        assert!((s[7] - 3.0 * l).abs() < 1e-15);
        assert!((s[5] - 2.0 * l).abs() < 1e-15);
    }

    #[test]
    fn all_asleep_gives_no_actions() {
        let mut rng = rng_from_seed(3);
        let subs: Vec<_> = (0..3).map(|b| SubController::new(b, 3, 4, TrainSchedule::default(), TargetRule::Double, &mut rng)).collect();
        let mut cache = CeCache::default();
        let a = sub_select_actions(&subs, &SleepStatus::all_asleep(3), &[0; 3], &[None; 3], SubSelection::Correlated, 0.5, &mut cache, &mut rng)
            .unwrap();
        assert_eq!(a, vec![None; 3]);
        assert_eq!(cache.solves, 0);
    }
}
