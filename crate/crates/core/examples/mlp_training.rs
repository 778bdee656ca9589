// A one-hidden-layer network fitted to a sine curve by full-batch gradient descent.
//
// Run with `cargo run --example mlp_training`.

use fso_qos::mlp::{self, Batch, TrainConfig, TrainHistory};

pub fn run_example() -> fso_qos::Result<TrainHistory> {
    let xs: Vec<Vec<f64>> = (0..64)
        .map(|i| vec![-2.0 + 4.0 * i as f64 / 63.0])
        .collect();
    let ts: Vec<Vec<f64>> = xs.iter().map(|x| vec![0.8 * x[0].sin()]).collect();

    let config = TrainConfig {
        learning_rate: 0.2,
        max_epochs: 2000,
        mse_stop: 1e-4,
        hidden_width: 8,
        seed: 1,
        ..TrainConfig::default()
    };
    let net = mlp::init_network([1, config.hidden_width, 1], config.seed)?;
    let (net, history) = mlp::train(
        &net,
        Batch {
            inputs: &xs,
            targets: &ts,
        },
        None,
        &config,
    )?;

    for (epoch, loss) in history.train_loss.iter().enumerate().step_by(250) {
        println!("epoch {:5}  loss {loss:.6}", epoch + 1);
    }
    println!(
        "stopped after {} epochs, sin(1) ~ {:.4} (target {:.4})",
        history.epochs(),
        net.predict(&[1.0])?[0] / 0.8,
        1f64.sin()
    );
    Ok(history)
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
