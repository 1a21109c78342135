use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;
use risnet_core::rissurrogate::*;
use risnet_core::rng_from_seed;

fn table_objective(table: Vec<f64>, levels: u32) -> impl FnMut(&[u32]) -> f64 {
    move |z: &[u32]| {
        let idx = z.iter().rev().fold(0usize, |acc, &v| acc * levels as usize + v as usize);
        table[idx]
    }
}

proptest! {
    #[test]
    fn full_budget_equals_exhaustive_optimum(values in prop::collection::vec(-10.0f64..10.0, 16), seed in 0u64..10_000) {
        let best = values.iter().copied().fold(f64::MIN, f64::max);
        let cfg = SurrogateConfig { budget: 16, ..Default::default() };
        let mut rng = rng_from_seed(seed);
        let res = surrogate_optimize(table_objective(values, 4), 2, 4, &cfg, &mut rng).unwrap();
        prop_assert_eq!(res.best_value, best);
        prop_assert_eq!(res.trace.len(), 16);
    }

    #[test]
    fn trace_best_is_running_maximum(seed in 0u64..10_000, budget in 1usize..60) {
        let mut rng = rng_from_seed(seed);
        let table: Vec<f64> = (0..4096).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cfg = SurrogateConfig { budget, ..Default::default() };
        let res = surrogate_optimize(table_objective(table, 4), 6, 4, &cfg, &mut rng).unwrap();
        prop_assert!(res.trace.len() <= budget);
        let mut running = f64::NEG_INFINITY;
        for e in &res.trace {
            running = running.max(e.value);
            prop_assert_eq!(e.best, running);
        }
        prop_assert_eq!(res.best_value, running);
    }

    #[test]
    fn rbf_reproduces_its_samples(seed in 0u64..10_000, n in 4usize..20) {
        let mut rng = rng_from_seed(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
        let mut unique = Vec::new();
        let mut seen = HashSet::new();
        for p in points {
            if seen.insert(p.iter().map(|v| *v as i64).collect::<Vec<_>>()) {
                unique.push(p);
            }
        }
        let values: Vec<f64> = unique.iter().map(|p| p.iter().sum::<f64>().sin()).collect();
        let model = RbfModel::fit(&unique, &values).unwrap();
        for (p, v) in unique.iter().zip(&values) {
            prop_assert!((model.predict(p) - v).abs() < 1e-6);
        }
    }
}

#[test]
fn no_point_is_evaluated_twice() {
    let mut rng = rng_from_seed(3);
    let mut seen = HashSet::new();
    let objective = |z: &[u32]| {
        assert!(seen.insert(z.to_vec()), "repeat evaluation of {z:?}");
        -(z.iter().map(|&v| (v as f64 - 1.5).powi(2)).sum::<f64>())
    };
    let cfg = SurrogateConfig { budget: 64, ..Default::default() };
    let res = surrogate_optimize(objective, 3, 4, &cfg, &mut rng).unwrap();
    assert_eq!(res.trace.len(), 64);
}

#[test]
fn smooth_objective_reaches_optimum() {
    // Separable bowl on {0..3}^4 peaking at (1, 2, 1, 2).
    let target = [1.0, 2.0, 1.0, 2.0];
    let f = |z: &[u32]| -z.iter().zip(&target).map(|(&v, t)| (v as f64 - t).powi(2)).sum::<f64>();
    let mut hits = 0;
    for seed in 0..10 {
        let mut rng = rng_from_seed(seed);
        let cfg = SurrogateConfig { budget: 100, ..Default::default() };
        let res = surrogate_optimize(f, 4, 4, &cfg, &mut rng).unwrap();
        hits += usize::from(res.best_value == 0.0);
    }
    assert!(hits >= 8, "optimum found on {hits}/10 seeds");
}

#[test]
fn same_seed_same_trace() {
    let run = || {
        let mut rng = rng_from_seed(44);
        let f = |z: &[u32]| z.iter().enumerate().map(|(i, &v)| ((i + 1) as f64 * v as f64).cos()).sum::<f64>();
        surrogate_optimize(f, 5, 4, &SurrogateConfig { budget: 40, ..Default::default() }, &mut rng).unwrap()
    };
    assert_eq!(run().trace, run().trace);
}

#[test]
fn invalid_arguments_rejected() {
    let mut rng = rng_from_seed(1);
    let f = |_: &[u32]| 0.0;
    assert!(surrogate_optimize(f, 0, 4, &SurrogateConfig::default(), &mut rng).is_err());
    assert!(surrogate_optimize(f, 2, 1, &SurrogateConfig::default(), &mut rng).is_err());
    assert!(surrogate_optimize(f, 2, 4, &SurrogateConfig { budget: 0, ..Default::default() }, &mut rng).is_err());
}
