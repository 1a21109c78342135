//! Base-station power consumption and the network energy-efficiency objective.

use serde::{Deserialize, Serialize};

use crate::netmodel::{BaseStation, BsKind};
use crate::{Error, Result};

/// Per-SBS on/off bits ordered by SBS id; the MBS is implicitly always on.
///
/// Doubles as the meta-controller goal: goal index `g` has SBS `i` awake iff
/// bit `i` of `g` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SleepStatus {
    awake: Vec<bool>,
}

pub type GoalVector = SleepStatus;

impl SleepStatus {
    pub fn new(awake: Vec<bool>) -> Self {
        Self { awake }
    }

    pub fn all_awake(n_sbs: usize) -> Self {
        Self { awake: vec![true; n_sbs] }
    }

    pub fn all_asleep(n_sbs: usize) -> Self {
        Self { awake: vec![false; n_sbs] }
    }

    pub fn from_index(index: usize, n_sbs: usize) -> Self {
        Self { awake: (0..n_sbs).map(|i| index >> i & 1 == 1).collect() }
    }

    pub fn index(&self) -> usize {
        self.awake.iter().enumerate().fold(0, |acc, (i, &on)| acc | (usize::from(on) << i))
    }

    pub fn len(&self) -> usize {
        self.awake.len()
    }

    pub fn is_empty(&self) -> bool {
        self.awake.is_empty()
    }

    /// Whether SBS `i` (0-based among SBSs) is awake.
    pub fn is_awake(&self, sbs: usize) -> bool {
        self.awake[sbs]
    }

    pub fn awake_count(&self) -> usize {
        self.awake.iter().filter(|&&a| a).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.awake
    }

    /// Whether BS `bs` (0 = MBS) is on.
    pub fn bs_on(&self, bs: usize) -> bool {
        bs == 0 || self.awake[bs - 1]
    }

    /// Compact `0/1` string, SBS 1 first.
    pub fn to_bit_string(&self) -> String {
        self.awake.iter().map(|&a| if a { '1' } else { '0' }).collect()
    }

    /// Number of distinct goals for `n_sbs` sub-controllers.
    pub fn goal_count(n_sbs: usize) -> usize {
        1 << n_sbs
    }
}

/// Power drawn by one BS: `p_active + δ·P` when on, `p_sleep` when asleep.
pub fn bs_energy(bs: &BaseStation, awake: bool, total_tx_power: f64) -> Result<f64> {
    if !awake {
        if bs.kind == BsKind::Macro {
            return Err(Error::MacroSleep);
        }
        return Ok(bs.p_sleep);
    }
    if total_tx_power < 0.0 || total_tx_power > bs.p_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "total_tx_power",
            reason: format!("{total_tx_power} W outside [0, {}]", bs.p_max),
        });
    }
    Ok(bs.p_active + bs.delta_slope * total_tx_power)
}

/// Delivered bits per joule: total rate over total consumed power.
pub fn energy_efficiency(rates: &[f64], energies: &[f64]) -> Result<f64> {
    let denom: f64 = energies.iter().sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroEnergy(denom));
    }
    Ok(rates.iter().sum::<f64>() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_topology, NetworkParams};

    fn sbs() -> BaseStation {
        build_topology(&NetworkParams::default(), 1).unwrap().sbs_list[0].clone()
    }

    #[test]
    fn sleep_draws_p_sleep() {
        let b = sbs();
        assert_eq!(bs_energy(&b, false, 0.0).unwrap(), b.p_sleep);
    }

    #[test]
    fn idle_active_draws_p_active() {
        let b = sbs();
        assert_eq!(bs_energy(&b, true, 0.0).unwrap(), 6.8);
    }

    #[test]
    fn full_load_substitution() {
        let b = sbs();
        assert!((bs_energy(&b, true, 6.3).unwrap() - 23.18).abs() < 1e-12);
    }

    #[test]
    fn macro_cannot_sleep() {
        let t = build_topology(&NetworkParams::default(), 1).unwrap();
        assert_eq!(bs_energy(&t.mbs, false, 0.0).unwrap_err(), Error::MacroSleep);
    }

    #[test]
    fn affine_in_power() {
        let b = sbs();
        let e0 = bs_energy(&b, true, 1.0).unwrap();
        let e1 = bs_energy(&b, true, 3.0).unwrap();
        assert!(((e1 - e0) / 2.0 - b.delta_slope).abs() < 1e-12);
    }

    #[test]
    fn efficiency_arithmetic() {
        assert_eq!(energy_efficiency(&[0.0, 0.0], &[130.0, 20.0]).unwrap(), 0.0);
        let ee = energy_efficiency(&[10e6, 20e6], &[130.0, 20.0]).unwrap();
        assert!((ee - 0.2e6).abs() < 1e-6);
        assert!(energy_efficiency(&[1.0], &[0.0]).is_err());
        // Degree -1 homogeneity in energies.
        let scaled = energy_efficiency(&[10e6, 20e6], &[260.0, 40.0]).unwrap();
        assert!((scaled - ee / 2.0).abs() < 1e-6);
    }

    #[test]
    fn single_link_collapses() {
        let b = sbs();
        let e = bs_energy(&b, true, 2.0).unwrap();
        assert_eq!(energy_efficiency(&[5e6], &[e]).unwrap(), 5e6 / e);
    }

    #[test]
    fn goal_index_roundtrip() {
        for g in 0..8 {
            assert_eq!(SleepStatus::from_index(g, 3).index(), g);
        }
        assert_eq!(SleepStatus::from_index(5, 3).bits(), &[true, false, true]);
        assert_eq!(SleepStatus::from_index(0, 3), SleepStatus::all_asleep(3));
    }

    #[test]
    fn sleeping_any_sbs_lowers_total() {
        let t = build_topology(&NetworkParams::default(), 1).unwrap();
        for b in &t.sbs_list {
            for p in [0.0, 1.0, b.p_max] {
                assert!(bs_energy(b, false, 0.0).unwrap() < bs_energy(b, true, p).unwrap());
            }
        }
    }
}
