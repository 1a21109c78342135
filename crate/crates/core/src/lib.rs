//! System-level simulator and decision stack for RIS-aided heterogeneous RANs.
//!
//! The crate is organised bottom-up:
//!
//! * [`netmodel`], [`channel`], [`energy`] and [`traffic`] describe the radio
//!   network: placement, cascaded BS→RIS→UE links, power consumption and the
//!   daily demand process.
//! * [`risfp`] optimises RIS phase shifts with a fractional-programming
//!   alternating scheme; [`rissurrogate`] is the derivative-free RBF baseline.
//! * [`rlcore`] provides the recurrent Q-network, replay pool and double-DQN
//!   training; [`cohdrl`] builds the two-level sleep/power controllers on top,
//!   including the correlated-equilibrium LP and cross-entropy exploration.
//!
//! Data-parallel batch work (independent seeds, Monte-Carlo draws, FP
//! instances) goes through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise.

pub mod channel;
pub mod cohdrl;
pub mod energy;
mod error;
pub mod linalg;
pub mod netmodel;
pub mod par;
pub mod risfp;
pub mod rissurrogate;
pub mod rlcore;
pub mod traffic;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Deterministic RNG used throughout the simulator.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Build the simulator RNG from a seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
