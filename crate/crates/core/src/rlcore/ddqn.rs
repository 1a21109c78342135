//! Bootstrap targets, squared-error loss and the training schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::{argmax, QNetwork};
use super::replay::{Experience, ExperiencePool};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    /// Environment steps between gradient steps.
    pub train_every: usize,
    pub minibatch: usize,
    /// Environment steps between target-network copies.
    pub copy_every: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    /// Multiplicative learning-rate decay per gradient step.
    pub lr_decay: f64,
    pub pool_capacity: usize,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            train_every: 240,
            minibatch: 180,
            copy_every: 600,
            gamma: 0.3,
            epsilon: 0.05,
            learning_rate: 0.005,
            lr_decay: 0.999,
            pool_capacity: 600,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if self.train_every == 0 || self.copy_every == 0 {
            return bad("train_every/copy_every", "must be >= 1");
        }
        if self.minibatch == 0 || self.minibatch > self.pool_capacity {
            return bad("minibatch", "must be in 1..=pool_capacity");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", "must be in [0, 1]");
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("learning_rate", "rate > 0 and decay in (0, 1]");
        }
        Ok(())
    }
}

/// Bootstrap rule for non-terminal transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetRule {
    /// `r + γ Q_target(s', argmax_a Q_main(s', a))`.
    Double,
    /// `r + γ max_a Q_target(s', a)`.
    Vanilla,
}

/// Regression targets for a batch.
pub fn targets(main: &QNetwork, target: &QNetwork, batch: &[&Experience], gamma: f64, rule: TargetRule) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|e| {
            if e.done || gamma == 0.0 {
                return Ok(e.reward);
            }
            let qt = target.forward(&e.next_state)?;
            let next = match rule {
                TargetRule::Double => qt[argmax(&main.forward(&e.next_state)?)],
                TargetRule::Vanilla => qt[argmax(&qt)],
            };
            Ok(e.reward + gamma * next)
        })
        .collect()
}

/// Mean squared error of `Q_main(s, a)` against fixed targets, and its
/// gradient with respect to the main network.
pub fn loss_and_grad(main: &QNetwork, batch: &[&Experience], targets: &[f64]) -> Result<(f64, QNetwork)> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter { name: "batch", reason: "empty".into() });
    }
    let n = batch.len() as f64;
    let mut grad = main.zeros_like();
    let mut loss = 0.0;
    for (e, &y) in batch.iter().zip(targets) {
        let cache = main.forward_cached(&e.state)?;
        let err = cache.q[e.action] - y;
        loss += err * err / n;
        let mut dq = vec![0.0; main.out_dim()];
        dq[e.action] = 2.0 * err / n;
        main.backward(&cache, &dq, &mut grad);
    }
    Ok((loss, grad))
}

/// DDQN loss: targets from `target`/`main`, then [`loss_and_grad`].
pub fn ddqn_loss(main: &QNetwork, target: &QNetwork, batch: &[&Experience], gamma: f64) -> Result<(f64, QNetwork)> {
    let y = targets(main, target, batch, gamma, TargetRule::Double)?;
    loss_and_grad(main, batch, &y)
}

/// Network pair, experience pool and schedule of one learning agent.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub main: QNetwork,
    pub target: QNetwork,
    pub pool: ExperiencePool,
    pub schedule: TrainSchedule,
    pub rule: TargetRule,
    pub learning_rate: f64,
    pub env_steps: usize,
    pub train_events: usize,
    pub last_loss: Option<f64>,
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, schedule: TrainSchedule, rule: TargetRule, rng: &mut R) -> Self {
        let main = QNetwork::new(in_dim, out_dim, rng);
        Self {
            target: main.clone(),
            main,
            pool: ExperiencePool::new(schedule.pool_capacity),
            learning_rate: schedule.learning_rate,
            schedule,
            rule,
            env_steps: 0,
            train_events: 0,
            last_loss: None,
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.main.forward(state)
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    pub fn epsilon_greedy<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> Result<usize> {
        if rng.gen::<f64>() < self.schedule.epsilon {
            Ok(rng.gen_range(0..self.main.out_dim()))
        } else {
            self.greedy(state)
        }
    }

    /// One gradient step on a uniform minibatch; no-op if the pool is too small.
    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<f64>> {
        let Some(batch) = self.pool.sample(self.schedule.minibatch, rng) else {
            return Ok(None);
        };
        let y = targets(&self.main, &self.target, &batch, self.schedule.gamma, self.rule)?;
        let (loss, grad) = loss_and_grad(&self.main, &batch, &y)?;
        self.main.sgd_step(&grad, self.learning_rate);
        if !self.main.is_finite() {
            return Err(Error::NonFinite("network weights after training step".into()));
        }
        self.learning_rate *= self.schedule.lr_decay;
        self.train_events += 1;
        self.last_loss = Some(loss);
        Ok(Some(loss))
    }

    pub fn sync_target(&mut self) {
        self.target = self.main.clone();
    }

    /// Store a transition and advance the schedule.
    pub fn observe<R: Rng + ?Sized>(&mut self, e: Experience, rng: &mut R) -> Result<Option<f64>> {
        self.pool.push(e);
        self.env_steps += 1;
        let mut loss = None;
        if self.env_steps % self.schedule.train_every == 0 {
            loss = self.train_step(rng)?;
        }
        if self.env_steps % self.schedule.copy_every == 0 {
            self.sync_target();
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(s: f64, a: usize, r: f64, done: bool) -> Experience {
        Experience { state: vec![s, 1.0 - s], action: a, reward: r, next_state: vec![1.0 - s, s], done }
    }

    #[test]
    fn terminal_and_zero_gamma_targets() {
        let mut rng = crate::rng_from_seed(1);
        let net = QNetwork::new(2, 2, &mut rng);
        let b = [exp(1.0, 0, 0.7, true), exp(0.0, 1, -0.3, false)];
        let refs: Vec<&Experience> = b.iter().collect();
        let y = targets(&net, &net, &refs, 0.9, TargetRule::Double).unwrap();
        assert_eq!(y[0], 0.7);
        let y0 = targets(&net, &net, &refs, 0.0, TargetRule::Double).unwrap();
        assert_eq!(y0, vec![0.7, -0.3]);
    }

    #[test]
    fn schedule_copies_and_trains() {
        let mut rng = crate::rng_from_seed(2);
        let sched = TrainSchedule { train_every: 2, minibatch: 2, copy_every: 4, learning_rate: 0.1, ..Default::default() };
        let mut agent = DqnAgent::new(2, 2, sched, TargetRule::Double, &mut rng);
        for i in 0..4 {
            agent.observe(exp((i % 2) as f64, i % 2, 1.0, false), &mut rng).unwrap();
            if i == 1 {
                assert_eq!(agent.train_events, 1);
                assert_ne!(agent.main, agent.target);
            }
        }
        assert_eq!(agent.train_events, 2);
        assert_eq!(agent.main, agent.target);
        assert!((agent.learning_rate - 0.1 * 0.999 * 0.999).abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        assert!(TrainSchedule::default().validate().is_ok());
        assert!(TrainSchedule { gamma: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainSchedule { minibatch: 700, ..Default::default() }.validate().is_err());
    }
}
