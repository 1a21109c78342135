//! Fixed-capacity FIFO experience pool.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperiencePool {
    capacity: usize,
    items: VecDeque<Experience>,
}

impl ExperiencePool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pool capacity must be positive");
        Self { capacity, items: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Append, evicting the oldest entry when full.
    pub fn push(&mut self, e: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.items.iter()
    }

    /// Uniform sample of `n` distinct entries, or `None` if the pool is smaller.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<&Experience>> {
        if n > self.items.len() || n == 0 {
            return None;
        }
        Some(index::sample(rng, self.items.len(), n).into_iter().map(|i| &self.items[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(r: f64) -> Experience {
        Experience { state: vec![], action: 0, reward: r, next_state: vec![], done: false }
    }

    #[test]
    fn fifo_eviction() {
        let mut p = ExperiencePool::new(3);
        for i in 0..5 {
            p.push(exp(i as f64));
        }
        let r: Vec<f64> = p.iter().map(|e| e.reward).collect();
        assert_eq!(r, vec![2.0, 3.0, 4.0]);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn sample_requires_enough() {
        let mut p = ExperiencePool::new(10);
        p.push(exp(1.0));
        let mut rng = crate::rng_from_seed(0);
        assert!(p.sample(2, &mut rng).is_none());
        assert_eq!(p.sample(1, &mut rng).unwrap().len(), 1);
    }
}
