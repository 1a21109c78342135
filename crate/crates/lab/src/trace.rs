//! Single-slot RIS optimiser traces.
//!
//! A seeded slot puts every SBS awake at full equal-split power, then runs
//! the FP scheme or the surrogate search on the resulting phase problem.

use risnet_core::channel::{Links, PowerAllocation};
use risnet_core::cohdrl::SimConfig;
use risnet_core::energy::SleepStatus;
use risnet_core::netmodel::{associate_users, build_topology, Association, Topology};
use risnet_core::risfp::{discrete_phases, fp_optimize, FpConfig, FpOutcome, FpProblem};
use risnet_core::rissurrogate::{surrogate_optimize, SurrogateConfig, SurrogateResult};
use risnet_core::{rng_from_seed, Result};

/// One frozen slot of the network.
pub struct SlotInstance {
    pub topology: Topology,
    pub links: Links,
    pub association: Association,
    pub powers: PowerAllocation,
    pub sim: SimConfig,
}

impl SlotInstance {
    pub fn draw(sim: &SimConfig, seed: u64) -> Result<Self> {
        let topology = build_topology(&sim.network, seed)?;
        let mut rng = rng_from_seed(seed);
        let links = Links::build(&topology, &sim.channel, &mut rng)?;
        let association = associate_users(&topology, &SleepStatus::all_awake(topology.sbs_list.len()));
        let totals: Vec<f64> = (0..topology.n_bs()).map(|b| topology.bs(b).p_max).collect();
        let powers = PowerAllocation::equal_split(&totals, &association);
        Ok(Self { topology, links, association, powers, sim: sim.clone() })
    }

    pub fn problem(&self) -> Result<FpProblem> {
        FpProblem::from_network(&self.topology, &self.links, &self.association, &self.powers, &self.sim.channel)
    }

    pub fn resolution_bits(&self) -> u32 {
        self.topology.ris_list.first().map_or(1, |r| r.resolution_bits)
    }

    pub fn fp(&self, config: &FpConfig) -> Result<FpOutcome> {
        fp_optimize(&self.topology, &self.links, &self.association, &self.powers, &self.sim.channel, config, None)
    }

    /// Surrogate search over the discrete phase indices, maximising the sum
    /// rate of the quantised configuration.
    pub fn surrogate(&self, config: &SurrogateConfig, seed: u64) -> Result<SurrogateResult> {
        let problem = self.problem()?;
        let mu = self.resolution_bits();
        let objective = |z: &[u32]| problem.rates(&discrete_phases(z, mu)).iter().sum::<f64>();
        surrogate_optimize(objective, problem.dim, 1 << mu, config, &mut rng_from_seed(seed))
    }
}
