use proptest::prelude::*;
use rand::Rng;
use risnet_core::rlcore::*;
use risnet_core::{rng_from_seed, SimRng};

fn random_batch(rng: &mut SimRng, n: usize, in_dim: usize, out_dim: usize) -> Vec<Experience> {
    (0..n)
        .map(|_| Experience {
            state: (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: rng.gen_range(0..out_dim),
            reward: rng.gen_range(-1.0..1.0),
            next_state: (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            done: rng.gen_bool(0.2),
        })
        .collect()
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..3 {
        let mut rng = rng_from_seed(seed);
        let net = QNetwork::new(5, 3, &mut rng);
        let batch = random_batch(&mut rng, 8, 5, 3);
        let refs: Vec<&Experience> = batch.iter().collect();
        let y: Vec<f64> = (0..refs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, grad) = loss_and_grad(&net, &refs, &y).unwrap();
        let analytic = grad.params();
        let base = net.params();
        let h = 1e-6;
        let mut probe = net.clone();
        let mut worst: f64 = 0.0;
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_params(&p).unwrap();
            let up = loss_and_grad(&probe, &refs, &y).unwrap().0;
            p[i] = base[i] - h;
            probe.set_params(&p).unwrap();
            let down = loss_and_grad(&probe, &refs, &y).unwrap().0;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - analytic[i]).abs() / fd.abs().max(1.0));
        }
        assert!(worst < 1e-4, "seed {seed}: worst gradient error {worst}");
    }
}

#[test]
fn loss_decreases_on_frozen_batch() {
    let mut rng = rng_from_seed(21);
    let mut net = QNetwork::new(6, 4, &mut rng);
    let batch = random_batch(&mut rng, 32, 6, 4);
    let refs: Vec<&Experience> = batch.iter().collect();
    let y: Vec<f64> = refs.iter().map(|e| e.reward).collect();
    let first = loss_and_grad(&net, &refs, &y).unwrap().0;
    let mut prev = first;
    for step in 0..100 {
        let (loss, grad) = loss_and_grad(&net, &refs, &y).unwrap();
        assert!(loss <= prev + 1e-12, "step {step}: {loss} > {prev}");
        prev = loss;
        net.sgd_step(&grad, 0.005);
    }
    assert!(prev < first);
}

/// Two states, two actions (stay / switch).
const REWARD: [[f64; 2]; 2] = [[0.2, 0.0], [1.0, 0.5]];
const GAMMA: f64 = 0.3;

fn next_state(s: usize, a: usize) -> usize {
    if a == 0 {
        s
    } else {
        1 - s
    }
}

fn value_iteration_policy() -> [usize; 2] {
    let mut v = [0.0; 2];
    for _ in 0..500 {
        v = [0, 1].map(|s| (0..2).map(|a| REWARD[s][a] + GAMMA * v[next_state(s, a)]).fold(f64::MIN, f64::max));
    }
    [0, 1].map(|s| argmax(&(0..2).map(|a| REWARD[s][a] + GAMMA * v[next_state(s, a)]).collect::<Vec<_>>()))
}

#[test]
fn two_state_mdp_learns_optimal_policy() {
    let optimal = value_iteration_policy();
    assert_eq!(optimal, [1, 0]);
    for seed in 0..10 {
        let mut rng = rng_from_seed(100 + seed);
        let schedule = TrainSchedule {
            train_every: 1,
            minibatch: 32,
            copy_every: 50,
            gamma: GAMMA,
            epsilon: 0.3,
            learning_rate: 0.05,
            lr_decay: 1.0,
            pool_capacity: 600,
        };
        let mut agent = DqnAgent::new(2, 2, schedule, TargetRule::Double, &mut rng);
        let mut s = 0;
        for _ in 0..5000 {
            let x = one_hot(s, 2);
            let a = agent.epsilon_greedy(&x, &mut rng).unwrap();
            let s2 = next_state(s, a);
            agent.observe(Experience { state: x, action: a, reward: REWARD[s][a], next_state: one_hot(s2, 2), done: false }, &mut rng).unwrap();
            s = s2;
        }
        let learned = [0, 1].map(|s| agent.greedy(&one_hot(s, 2)).unwrap());
        assert_eq!(learned, optimal, "seed {seed}");
    }
}

#[test]
fn double_and_vanilla_targets_differ_only_in_action_choice() {
    let mut rng = rng_from_seed(5);
    let main = QNetwork::new(3, 4, &mut rng);
    let target = QNetwork::new(3, 4, &mut rng);
    let batch = random_batch(&mut rng, 50, 3, 4);
    let refs: Vec<&Experience> = batch.iter().collect();
    let dbl = targets(&main, &target, &refs, 0.5, TargetRule::Double).unwrap();
    let van = targets(&main, &target, &refs, 0.5, TargetRule::Vanilla).unwrap();
    let mut differ = 0;
    for (i, e) in batch.iter().enumerate() {
        if e.done {
            assert_eq!(dbl[i], e.reward);
            assert_eq!(van[i], e.reward);
            continue;
        }
        let qt = target.forward(&e.next_state).unwrap();
        let qm = main.forward(&e.next_state).unwrap();
        assert_eq!(dbl[i], e.reward + 0.5 * qt[argmax(&qm)]);
        assert_eq!(van[i], e.reward + 0.5 * qt[argmax(&qt)]);
        // Vanilla picks the target maximum, so it never bootstraps lower.
        assert!(van[i] >= dbl[i]);
        differ += usize::from(van[i] != dbl[i]);
    }
    assert!(differ > 0);
    // With main == target both rules coincide.
    let same = targets(&main, &main, &refs, 0.5, TargetRule::Double).unwrap();
    assert_eq!(same, targets(&main, &main, &refs, 0.5, TargetRule::Vanilla).unwrap());
}

#[test]
fn target_copy_is_exact() {
    let mut rng = rng_from_seed(8);
    let schedule = TrainSchedule { train_every: 1, minibatch: 4, copy_every: 10, learning_rate: 0.1, ..Default::default() };
    let mut agent = DqnAgent::new(3, 2, schedule, TargetRule::Double, &mut rng);
    for e in random_batch(&mut rng, 10, 3, 2) {
        agent.observe(e, &mut rng).unwrap();
    }
    assert_eq!(agent.main, agent.target);
    assert_eq!(agent.main.params(), agent.target.params());
}

#[test]
fn checkpoint_file_roundtrip() {
    let mut rng = rng_from_seed(9);
    let net = QNetwork::new(19, 4, &mut rng);
    let mut file = tempfile::tempfile().unwrap();
    write_checkpoint(&mut file, &net).unwrap();
    use std::io::{Seek, SeekFrom};
    file.seek(SeekFrom::Start(0)).unwrap();
    let back = read_checkpoint(&mut file).unwrap();
    assert_eq!(back, net);
}

proptest! {
    #[test]
    fn pool_keeps_newest(capacity in 1usize..50, pushes in 0usize..200) {
        let mut pool = ExperiencePool::new(capacity);
        for i in 0..pushes {
            pool.push(Experience { state: vec![], action: 0, reward: i as f64, next_state: vec![], done: false });
        }
        prop_assert_eq!(pool.len(), pushes.min(capacity));
        let kept: Vec<f64> = pool.iter().map(|e| e.reward).collect();
        let expected: Vec<f64> = (pushes.saturating_sub(capacity)..pushes).map(|i| i as f64).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn forward_is_finite(seed in 0u64..500, scale in 0.0f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let net = QNetwork::new(7, 3, &mut rng);
        let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-scale..=scale)).collect();
        prop_assert!(net.forward(&x).unwrap().iter().all(|v| v.is_finite()));
    }
}
