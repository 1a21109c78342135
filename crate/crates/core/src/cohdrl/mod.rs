//! Two-level sleep and power control.
//!
//! The MBS meta-controller picks a sleep goal (one on/off bit per SBS) every
//! `n_t` slots; each awake SBS sub-controller picks a transmit power level
//! every slot. The cooperative variant explores goals by the tanh-normalised
//! cross-entropy of the sub-controllers' action histograms and draws joint
//! power actions from a correlated equilibrium solved by a dense simplex.

pub mod ce;
pub mod controllers;
pub mod entropy;
pub mod lp;
pub mod sim;

pub use ce::{sample_index, solve_correlated_equilibrium, CeDistribution, CeGame, CE_TOL};
pub use controllers::{
    greedy_goal, joint_game, meta_state, sub_select_actions, CeCache, GoalExploration, MetaController, SubController,
    SubSelection, LOAD_LEVELS, POWER_FRACTIONS,
};
pub use entropy::{cross_entropy, entropy, goal_probability, kl_divergence, smoothed, ActionHistogram, SMOOTHING};
pub use lp::{LinearProgram, LpSolution, LpStatus};
pub use sim::{run_training, EpisodeMetrics, Learner, RisMethod, SimConfig, Simulator, SleepMode, WindowRecord};
