//! Learning substrate: recurrent Q-network, replay pool, double-DQN training
//! and weight checkpoints.

mod checkpoint;
mod ddqn;
mod network;
mod replay;

pub use checkpoint::{read_checkpoint, write_checkpoint, MAGIC};
pub use ddqn::{ddqn_loss, loss_and_grad, targets, DqnAgent, TargetRule, TrainSchedule};
pub use network::{argmax, ForwardCache, Linear, LstmCache, LstmCell, QNetwork};
pub use replay::{Experience, ExperiencePool};

/// One-hot encoding of `index` in `len` slots.
pub fn one_hot(index: usize, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    v
}
