//! Static network description: base stations, users, RIS panels, placement
//! and user association.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::SleepStatus;
use crate::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    /// Height above ground.
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Self { x, y, z };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::Geometry(format!("non-finite position {self:?}")));
        }
        if self.z < 0.0 {
            return Err(Error::Geometry(format!("negative height {}", self.z)));
        }
        Ok(())
    }

    pub fn distance(&self, other: &Position) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    /// Distance projected on the ground plane.
    pub fn ground_distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BsKind {
    Macro,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    /// Index into [`Topology::base_stations`]; the MBS is always 0.
    pub id: usize,
    pub kind: BsKind,
    pub position: Position,
    pub coverage_radius: f64,
    pub p_max: f64,
    pub p_active: f64,
    pub p_sleep: f64,
    /// Load-dependent slope of the consumption model.
    pub delta_slope: f64,
    pub carrier_freq: f64,
}

impl BaseStation {
    fn validate(&self) -> Result<()> {
        self.position.validate()?;
        if !(self.p_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "p_max",
                reason: format!("must be positive, got {}", self.p_max),
            });
        }
        if !(self.p_sleep < self.p_active) {
            return Err(Error::InvalidParameter {
                name: "p_sleep",
                reason: format!("must be below p_active ({} >= {})", self.p_sleep, self.p_active),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrafficKind {
    Poisson,
    ConstantBitRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEquipment {
    pub id: usize,
    pub position: Position,
    pub traffic_kind: TrafficKind,
    /// Demand at a multiplier of 1, bits/s.
    pub base_demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub id: usize,
    /// Panel centre.
    pub position: Position,
    pub n_elements: usize,
    /// Amplitude reflection coefficient in `[0, 1]`.
    pub amplitude: f64,
    /// Phase-shifter resolution in bits.
    pub resolution_bits: u32,
    /// Unit vector along which the elements are laid out (uniform linear array).
    pub axis: [f64; 3],
}

impl RisPanel {
    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        if self.n_elements == 0 {
            return Err(Error::InvalidParameter { name: "n_elements", reason: "must be >= 1".into() });
        }
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("must lie in [0, 1], got {}", self.amplitude),
            });
        }
        if self.resolution_bits == 0 {
            return Err(Error::InvalidParameter { name: "resolution_bits", reason: "must be >= 1".into() });
        }
        Ok(())
    }

    /// Element centres for an element spacing in metres, centred on the panel.
    pub fn element_positions(&self, spacing: f64) -> Vec<Position> {
        let mid = (self.n_elements as f64 - 1.0) / 2.0;
        (0..self.n_elements)
            .map(|n| {
                let off = (n as f64 - mid) * spacing;
                Position {
                    x: self.position.x + off * self.axis[0],
                    y: self.position.y + off * self.axis[1],
                    z: self.position.z + off * self.axis[2],
                }
            })
            .collect()
    }
}

/// Geometry, power and radio parameters needed to build a [`Topology`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n_sbs: usize,
    pub n_ues: usize,
    pub n_ris: usize,
    pub ris_elements: usize,
    pub ris_amplitude: f64,
    pub ris_resolution_bits: u32,
    pub mbs_radius: f64,
    pub sbs_radius: f64,
    pub sbs_ring_radius: f64,
    pub ris_ring_radius: f64,
    pub mbs_height: f64,
    pub sbs_height: f64,
    pub ris_height: f64,
    pub ue_height: f64,
    pub mbs_p_max: f64,
    pub sbs_p_max: f64,
    pub mbs_p_active: f64,
    pub mbs_p_sleep: f64,
    pub sbs_p_active: f64,
    pub sbs_p_sleep: f64,
    pub mbs_delta: f64,
    pub sbs_delta: f64,
    pub carrier_freq: f64,
    pub bandwidth: f64,
    pub n_rbs: usize,
    pub subcarriers_per_rb: usize,
    pub subcarrier_bw: f64,
    pub poisson_fraction: f64,
    /// Per-UE demand at the peak hour, bits/s.
    pub peak_load: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            n_sbs: 3,
            n_ues: 20,
            n_ris: 6,
            ris_elements: 10,
            ris_amplitude: 1.0,
            ris_resolution_bits: 2,
            mbs_radius: 400.0,
            sbs_radius: 100.0,
            sbs_ring_radius: 250.0,
            ris_ring_radius: 150.0,
            mbs_height: 25.0,
            sbs_height: 10.0,
            ris_height: 10.0,
            ue_height: 1.5,
            mbs_p_max: 20.0,
            sbs_p_max: 6.3,
            mbs_p_active: 130.0,
            mbs_p_sleep: 75.0,
            sbs_p_active: 6.8,
            sbs_p_sleep: 1.0,
            mbs_delta: 4.7,
            sbs_delta: 2.6,
            carrier_freq: 4.0e9,
            bandwidth: 20.0e6,
            n_rbs: 100,
            subcarriers_per_rb: 12,
            subcarrier_bw: 15.0e3,
            poisson_fraction: 0.2,
            peak_load: 8.0e6,
        }
    }
}

impl NetworkParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mbs_radius", self.mbs_radius),
            ("sbs_radius", self.sbs_radius),
            ("carrier_freq", self.carrier_freq),
            ("bandwidth", self.bandwidth),
            ("subcarrier_bw", self.subcarrier_bw),
            ("peak_load", self.peak_load),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
            }
        }
        if !(0.0..=1.0).contains(&self.poisson_fraction) {
            return Err(Error::InvalidParameter {
                name: "poisson_fraction",
                reason: format!("must lie in [0, 1], got {}", self.poisson_fraction),
            });
        }
        if self.n_sbs > 0 && self.sbs_ring_radius + self.sbs_radius > self.mbs_radius {
            return Err(Error::Geometry(format!(
                "SBS disc (ring {} m + radius {} m) extends outside the MBS disc ({} m)",
                self.sbs_ring_radius, self.sbs_radius, self.mbs_radius
            )));
        }
        if self.ris_ring_radius > self.mbs_radius || self.ris_ring_radius < 0.0 {
            return Err(Error::Geometry(format!(
                "RIS ring radius {} m outside [0, {}]",
                self.ris_ring_radius, self.mbs_radius
            )));
        }
        Ok(())
    }
}

/// UE → serving BS map, indexed by UE id. BS index 0 is the MBS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub serving: Vec<usize>,
}

impl Association {
    pub fn attached(&self, bs: usize) -> Vec<usize> {
        self.serving.iter().enumerate().filter(|(_, &b)| b == bs).map(|(k, _)| k).collect()
    }

    pub fn count(&self, bs: usize) -> usize {
        self.serving.iter().filter(|&&b| b == bs).count()
    }

    /// Equal split of each serving BS's band across its attached UEs.
    pub fn bandwidths(&self, total_bandwidth: f64) -> Vec<f64> {
        self.serving.iter().map(|&b| total_bandwidth / self.count(b) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub mbs: BaseStation,
    pub sbs_list: Vec<BaseStation>,
    pub ues: Vec<UserEquipment>,
    pub ris_list: Vec<RisPanel>,
    /// Association with every SBS awake.
    pub association: Association,
    pub bandwidth_total: f64,
    pub n_rbs: usize,
    pub subcarriers_per_rb: usize,
    pub subcarrier_bw: f64,
    pub wavelength: f64,
}

impl Topology {
    pub fn n_bs(&self) -> usize {
        1 + self.sbs_list.len()
    }

    pub fn bs(&self, id: usize) -> &BaseStation {
        if id == 0 {
            &self.mbs
        } else {
            &self.sbs_list[id - 1]
        }
    }

    pub fn base_stations(&self) -> impl Iterator<Item = &BaseStation> {
        std::iter::once(&self.mbs).chain(self.sbs_list.iter())
    }

    pub fn total_elements(&self) -> usize {
        self.ris_list.iter().map(|r| r.n_elements).sum()
    }

    /// UEs inside a BS's coverage disc (every UE for the MBS).
    pub fn coverable_ues(&self, bs: usize) -> Vec<usize> {
        let b = self.bs(bs);
        match b.kind {
            BsKind::Macro => (0..self.ues.len()).collect(),
            BsKind::Small => (0..self.ues.len())
                .filter(|&k| self.ues[k].position.ground_distance(&b.position) <= b.coverage_radius)
                .collect(),
        }
    }

    /// Force every RIS amplitude to `amplitude` (0 disables RIS).
    pub fn with_ris_amplitude(mut self, amplitude: f64) -> Self {
        for r in &mut self.ris_list {
            r.amplitude = amplitude;
        }
        self
    }
}

/// Build the deterministic topology for `seed`.
pub fn build_topology(params: &NetworkParams, seed: u64) -> Result<Topology> {
    params.validate()?;
    let mut rng = crate::rng_from_seed(seed ^ 0x7090_1065_u64);

    let mbs = BaseStation {
        id: 0,
        kind: BsKind::Macro,
        position: Position::new(0.0, 0.0, params.mbs_height)?,
        coverage_radius: params.mbs_radius,
        p_max: params.mbs_p_max,
        p_active: params.mbs_p_active,
        p_sleep: params.mbs_p_sleep,
        delta_slope: params.mbs_delta,
        carrier_freq: params.carrier_freq,
    };
    mbs.validate()?;

    let mut sbs_list = Vec::with_capacity(params.n_sbs);
    for i in 0..params.n_sbs {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / params.n_sbs as f64;
        let bs = BaseStation {
            id: i + 1,
            kind: BsKind::Small,
            position: Position::new(
                params.sbs_ring_radius * angle.cos(),
                params.sbs_ring_radius * angle.sin(),
                params.sbs_height,
            )?,
            coverage_radius: params.sbs_radius,
            p_max: params.sbs_p_max,
            p_active: params.sbs_p_active,
            p_sleep: params.sbs_p_sleep,
            delta_slope: params.sbs_delta,
            carrier_freq: params.carrier_freq,
        };
        bs.validate()?;
        sbs_list.push(bs);
    }

    let ris_list = (0..params.n_ris)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / params.n_ris as f64;
            let panel = RisPanel {
                id: j,
                position: Position::new(
                    params.ris_ring_radius * angle.cos(),
                    params.ris_ring_radius * angle.sin(),
                    params.ris_height,
                )?,
                n_elements: params.ris_elements,
                amplitude: params.ris_amplitude,
                resolution_bits: params.ris_resolution_bits,
                axis: [-angle.sin(), angle.cos(), 0.0],
            };
            panel.validate()?;
            Ok(panel)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ues = Vec::with_capacity(params.n_ues);
    for k in 0..params.n_ues {
        let r = params.mbs_radius * rng.gen::<f64>().sqrt();
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        ues.push(UserEquipment {
            id: k,
            position: Position::new(r * phi.cos(), r * phi.sin(), params.ue_height)?,
            traffic_kind: TrafficKind::ConstantBitRate,
            base_demand: params.peak_load,
        });
    }
    let n_poisson = (params.poisson_fraction * params.n_ues as f64).round() as usize;
    let mut order: Vec<usize> = (0..params.n_ues).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(n_poisson) {
        ues[k].traffic_kind = TrafficKind::Poisson;
    }

    let mut topo = Topology {
        mbs,
        sbs_list,
        ues,
        ris_list,
        association: Association { serving: Vec::new() },
        bandwidth_total: params.bandwidth,
        n_rbs: params.n_rbs,
        subcarriers_per_rb: params.subcarriers_per_rb,
        subcarrier_bw: params.subcarrier_bw,
        wavelength: params.wavelength(),
    };
    topo.association = associate_users(&topo, &SleepStatus::all_awake(params.n_sbs));
    Ok(topo)
}

/// Serving BS for every UE under a sleep pattern: nearest awake SBS whose disc
/// contains the UE (ties to the lowest id), otherwise the MBS.
pub fn associate_users(topology: &Topology, sleep_status: &SleepStatus) -> Association {
    assert_eq!(sleep_status.len(), topology.sbs_list.len(), "sleep status length");
    let serving = topology
        .ues
        .iter()
        .map(|ue| {
            let mut best: Option<(usize, f64)> = None;
            for sbs in &topology.sbs_list {
                if !sleep_status.is_awake(sbs.id - 1) {
                    continue;
                }
                let d = ue.position.ground_distance(&sbs.position);
                if d > sbs.coverage_radius {
                    continue;
                }
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((sbs.id, d));
                }
            }
            best.map_or(0, |(id, _)| id)
        })
        .collect();
    Association { serving }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ue_at(id: usize, x: f64, y: f64) -> UserEquipment {
        UserEquipment {
            id,
            position: Position { x, y, z: 1.5 },
            traffic_kind: TrafficKind::ConstantBitRate,
            base_demand: 1e6,
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = NetworkParams::default();
        assert_eq!(build_topology(&p, 7).unwrap(), build_topology(&p, 7).unwrap());
        assert_ne!(build_topology(&p, 7).unwrap().ues, build_topology(&p, 8).unwrap().ues);
    }

    #[test]
    fn default_counts() {
        let t = build_topology(&NetworkParams::default(), 1).unwrap();
        assert_eq!(t.n_bs(), 4);
        assert_eq!(t.sbs_list.len(), 3);
        assert_eq!(t.ues.len(), 20);
        assert_eq!(t.ris_list.len(), 6);
        assert!(t.ris_list.iter().all(|r| r.n_elements == 10 && r.resolution_bits == 2));
        assert_eq!(t.ues.iter().filter(|u| u.traffic_kind == TrafficKind::Poisson).count(), 4);
        for ue in &t.ues {
            assert!(ue.position.ground_distance(&t.mbs.position) <= 400.0);
        }
    }

    #[test]
    fn zero_ues_is_valid() {
        let p = NetworkParams { n_ues: 0, ..Default::default() };
        let t = build_topology(&p, 3).unwrap();
        assert!(t.association.serving.is_empty());
    }

    #[test]
    fn sbs_outside_macro_rejected() {
        let p = NetworkParams { sbs_ring_radius: 350.0, ..Default::default() };
        assert!(matches!(build_topology(&p, 1), Err(Error::Geometry(_))));
    }

    #[test]
    fn association_rules() {
        let mut t = build_topology(&NetworkParams { n_ues: 0, ..Default::default() }, 1).unwrap();
        let s1 = t.sbs_list[0].position;
        let s2 = t.sbs_list[1].position;
        // 50 m from SBS-1.
        t.ues.push(ue_at(0, s1.x - 50.0, s1.y));
        // Far from every SBS.
        t.ues.push(ue_at(1, 0.0, 0.0));
        let a = associate_users(&t, &SleepStatus::all_awake(3));
        assert_eq!(a.serving, vec![1, 0]);
        let asleep = associate_users(&t, &SleepStatus::all_asleep(3));
        assert_eq!(asleep.serving, vec![0, 0]);
        let _ = s2;
    }

    #[test]
    fn equidistant_tie_goes_to_lower_id() {
        // Two SBSs 120 m apart; a UE on the bisector 80 m from both.
        let mut t = build_topology(&NetworkParams { n_ues: 0, ..Default::default() }, 1).unwrap();
        t.sbs_list[0].position = Position { x: -60.0, y: 0.0, z: 10.0 };
        t.sbs_list[1].position = Position { x: 60.0, y: 0.0, z: 10.0 };
        let h = (80.0f64 * 80.0 - 60.0 * 60.0).sqrt();
        t.ues.push(ue_at(0, 0.0, h));
        let a = associate_users(&t, &SleepStatus::all_awake(3));
        assert_eq!(a.serving, vec![1]);
        // Exhaustive placement check: along the bisector, every point covered
        // by both discs goes to SBS-1.
        for step in 0..200 {
            let y = -99.0 + step as f64;
            t.ues[0].position = Position { x: 0.0, y, z: 1.5 };
            let a = associate_users(&t, &SleepStatus::all_awake(3));
            let d = (60.0f64 * 60.0 + y * y).sqrt();
            let expect = if d <= 100.0 { 1 } else { 0 };
            assert_eq!(a.serving[0], expect, "y = {y}");
        }
    }

    #[test]
    fn bandwidth_split() {
        let a = Association { serving: vec![0, 0, 1, 0] };
        let bw = a.bandwidths(20e6);
        assert_eq!(bw, vec![20e6 / 3.0, 20e6 / 3.0, 20e6, 20e6 / 3.0]);
    }
}
