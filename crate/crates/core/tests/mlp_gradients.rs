use fso_qos::mlp::{self, Activation, Batch, MlpNetwork, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central-difference derivative of the batch loss for every parameter.
fn numeric_gradient(net: &MlpNetwork, xs: &[Vec<f64>], ts: &[Vec<f64>], h: f64) -> Vec<f64> {
    (0..net.parameter_count())
        .map(|i| {
            let mut plus = net.clone();
            *plus.parameter_mut(i) += h;
            let mut minus = net.clone();
            *minus.parameter_mut(i) -= h;
            let lp = mlp::loss(&plus, xs, ts).unwrap();
            let lm = mlp::loss(&minus, xs, ts).unwrap();
            (lp - lm) / (2.0 * h)
        })
        .collect()
}

fn random_problem(seed: u64) -> (MlpNetwork, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=4);
    let m = rng.random_range(1..=5);
    let l = rng.random_range(1..=2);
    let acts = [Activation::Tanh, Activation::Logistic, Activation::Linear];
    let hidden = acts[rng.random_range(0..3)];
    let output = acts[rng.random_range(0..3)];
    let mut net = mlp::init_network_with([k, m, l], seed, hidden, output).unwrap();
    for i in 0..net.parameter_count() {
        *net.parameter_mut(i) = rng.random_range(-1.0..1.0);
    }
    let samples = rng.random_range(1..=6);
    let xs = (0..samples)
        .map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let ts = (0..samples)
        .map(|_| (0..l).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (net, xs, ts)
}

/// `|a - n| / max(|a|, |n|, 1e-4)`: relative, with an absolute floor for
/// near-zero derivatives where central differences only carry ~1e-10 accuracy.
fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-4)
}

#[test]
fn backprop_matches_central_differences() {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (net, xs, ts) = random_problem(seed);
        let (_, grads) = mlp::gradients(&net, &xs, &ts).unwrap();
        let numeric = numeric_gradient(&net, &xs, &ts, 1e-6);
        for (a, n) in grads.to_vec().iter().zip(&numeric) {
            worst = worst.max(relative_error(*a, *n));
        }
    }
    assert!(worst < 1e-6, "max relative error {worst:e}");
}

#[test]
fn gradient_returns_the_loss() {
    let (net, xs, ts) = random_problem(77);
    let (l, _) = mlp::gradients(&net, &xs, &ts).unwrap();
    assert_eq!(l, mlp::loss(&net, &xs, &ts).unwrap());
}

#[test]
fn sample_order_does_not_matter() {
    let (net, mut xs, mut ts) = random_problem(5);
    let (_, a) = mlp::gradients(&net, &xs, &ts).unwrap();
    xs.reverse();
    ts.reverse();
    let (_, b) = mlp::gradients(&net, &xs, &ts).unwrap();
    for (u, v) in a.to_vec().iter().zip(b.to_vec()) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn small_step_does_not_increase_quadratic_loss() {
    let mut net =
        mlp::init_network_with([2, 3, 1], 8, Activation::Linear, Activation::Linear).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xs: Vec<Vec<f64>> = (0..30)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let ts: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| vec![0.5 * x[0] - 2.0 * x[1] + 0.3])
        .collect();
    for i in 0..net.parameter_count() {
        *net.parameter_mut(i) *= 0.5;
    }
    let before = mlp::loss(&net, &xs, &ts).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 1,
        ..TrainConfig::default()
    };
    let (_, hist) = mlp::train(
        &net,
        Batch {
            inputs: &xs,
            targets: &ts,
        },
        None,
        &cfg,
    )
    .unwrap();
    assert!(hist.train_loss[0] <= before);
}

#[test]
fn learns_a_noisy_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let xs: Vec<Vec<f64>> = (0..200)
        .map(|_| vec![rng.random_range(-1.0..1.0)])
        .collect();
    let ts: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| vec![2.0 * x[0] + 0.01 * rng.random_range(-1.0..1.0)])
        .collect();
    let net = mlp::init_network([1, 5, 1], 3).unwrap();
    let initial = mlp::loss(&net, &xs, &ts).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.1,
        max_epochs: 200,
        ..TrainConfig::default()
    };
    let (trained, hist) = mlp::train(
        &net,
        Batch {
            inputs: &xs,
            targets: &ts,
        },
        Some(Batch {
            inputs: &xs,
            targets: &ts,
        }),
        &cfg,
    )
    .unwrap();
    assert_eq!(hist.epochs(), 200);
    assert_eq!(hist.val_loss.len(), 200);
    let last = *hist.train_loss.last().unwrap();
    assert!(last < 0.1 * initial, "{initial} -> {last}");
    assert_eq!(last, mlp::loss(&trained, &xs, &ts).unwrap());
}

#[test]
fn training_is_deterministic() {
    let (net, xs, ts) = random_problem(3);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        max_epochs: 10,
        ..TrainConfig::default()
    };
    let a = mlp::train(
        &net,
        Batch {
            inputs: &xs,
            targets: &ts,
        },
        None,
        &cfg,
    )
    .unwrap();
    let b = mlp::train(
        &net,
        Batch {
            inputs: &xs,
            targets: &ts,
        },
        None,
        &cfg,
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a.0).unwrap(),
        serde_json::to_string(&b.0).unwrap()
    );
}
