//! Daily demand process and per-BS load normalisation.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::netmodel::{Association, Topology, TrafficKind, UserEquipment};
use crate::{Error, Result};

/// Mean count of the scaled Poisson draw; demand = count · mean / this.
pub const POISSON_GRANULARITY: f64 = 100.0;

/// Hourly demand multipliers and the per-UE peak load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPattern {
    pub multipliers: [f64; 24],
    /// Peak per-UE demand, bits/s.
    pub peak_load: f64,
}

impl DailyPattern {
    pub fn new(multipliers: [f64; 24], peak_load: f64) -> Result<Self> {
        let p = Self { multipliers, peak_load };
        p.validate()?;
        Ok(p)
    }

    /// Residential-style day: quiet night, low trough 03:00-07:00, busy
    /// afternoon and a peak 17:00-23:00.
    pub fn residential(peak_load: f64) -> Self {
        let mut m = [0.0; 24];
        for (h, v) in m.iter_mut().enumerate() {
            *v = match h {
                0..=2 => 0.2,
                3..=6 => 0.1,
                7..=11 => 0.5,
                12..=16 => 0.7,
                17..=22 => 1.0,
                _ => 0.4,
            };
        }
        Self { multipliers: m, peak_load }
    }

    /// Same multiplier every hour (1.0 gives constant peak load).
    pub fn flat(level: f64, peak_load: f64) -> Self {
        Self { multipliers: [level; 24], peak_load }
    }

    pub fn validate(&self) -> Result<()> {
        if self.multipliers.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::InvalidParameter { name: "multipliers", reason: "must lie in [0, 1]".into() });
        }
        if !(self.peak_load >= 0.0) || !self.peak_load.is_finite() {
            return Err(Error::InvalidParameter { name: "peak_load", reason: format!("{}", self.peak_load) });
        }
        Ok(())
    }

    pub fn multiplier(&self, hour: usize) -> f64 {
        self.multipliers[hour % 24]
    }
}

/// Maps simulator slots to hours of day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotClock {
    pub slots_per_day: usize,
}

impl SlotClock {
    pub fn hour(&self, slot: usize) -> usize {
        (slot % self.slots_per_day) * 24 / self.slots_per_day
    }
}

/// Demand of one UE in one slot, bits/s.
pub fn demand_at<R: Rng + ?Sized>(ue: &UserEquipment, hour: usize, pattern: &DailyPattern, rng: &mut R) -> f64 {
    let mean = ue.base_demand * pattern.multiplier(hour);
    match ue.traffic_kind {
        TrafficKind::ConstantBitRate => mean,
        TrafficKind::Poisson if mean <= 0.0 => 0.0,
        TrafficKind::Poisson => {
            let count = Poisson::new(POISSON_GRANULARITY).expect("positive rate").sample(rng);
            count * mean / POISSON_GRANULARITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSnapshot {
    pub slot: usize,
    /// Per-UE demand, bits/s.
    pub demands: Vec<f64>,
}

impl DemandSnapshot {
    pub fn draw<R: Rng + ?Sized>(topology: &Topology, slot: usize, hour: usize, pattern: &DailyPattern, rng: &mut R) -> Self {
        Self { slot, demands: topology.ues.iter().map(|ue| demand_at(ue, hour, pattern, rng)).collect() }
    }

    /// Total demand of the UEs attached to `bs`.
    pub fn bs_demand(&self, association: &Association, bs: usize) -> f64 {
        association.attached(bs).iter().map(|&k| self.demands[k]).sum()
    }
}

/// Normalising constant `W_b^max`: coverable UEs times the peak load.
pub fn max_demand(topology: &Topology, bs: usize, peak_load: f64) -> f64 {
    topology.coverable_ues(bs).len() as f64 * peak_load
}

/// Raw normalised load `Σ_{k∈K_b} W_k / W_b^max`.
pub fn normalized_load(demands: &[f64], association: &Association, bs: usize, w_max: f64) -> f64 {
    if w_max <= 0.0 {
        return 0.0;
    }
    association.attached(bs).iter().map(|&k| demands[k]).sum::<f64>() / w_max
}

/// Discretise a load onto `{0, 1/(levels-1), …, 1}`, clamping overloads to the top level.
pub fn discretize(load: f64, levels: usize) -> usize {
    let top = (levels - 1) as f64;
    (load.clamp(0.0, 1.0) * top).round() as usize
}
