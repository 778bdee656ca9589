// End to end: synthetic weather, SNR targets, PCA + network fit, held-out
// evaluation and a saved model.
//
// Run with `cargo run --release --example hybrid_pipeline`.

use fso_qos::atmos::SizeModel;
use fso_qos::dataset::{self, LinkGeometry, SplitFractions, SynthConfig};
use fso_qos::link::LinkParams;
use fso_qos::metrics::MetricsReport;
use fso_qos::mlp::TrainConfig;
use fso_qos::pipeline::{self, HybridConfig, HybridModel};

pub fn run_example() -> fso_qos::Result<(HybridModel, MetricsReport)> {
    let weather = dataset::synthesize_weather(&SynthConfig {
        m_observations: 2000,
        noise_std: 0.1,
        visibility_range_km: (1.0, 20.0),
        seed: 11,
        ..SynthConfig::default()
    })?;
    let data = dataset::attach_snr_target(
        &weather,
        &LinkParams::default(),
        LinkGeometry::default(),
        SizeModel::Kruse,
        1.0,
        12,
    )?;
    let parts = dataset::split(&data, SplitFractions::default(), 13)?;

    let config = HybridConfig {
        train: TrainConfig {
            learning_rate: 0.3,
            max_epochs: 50,
            seed: 14,
            ..TrainConfig::default()
        },
        ..HybridConfig::default()
    };
    let (model, history) = pipeline::fit_hybrid(&parts.train, Some(&parts.val), &config)?;
    let report = pipeline::evaluate_hybrid(&model, &parts.test)?;

    println!("components kept: {}", model.k_selected);
    println!(
        "loss {:.4} -> {:.4} over {} epochs",
        history.train_loss[0],
        history.train_loss[history.epochs() - 1],
        history.epochs()
    );
    println!(
        "test: RMSE {:.3} dB  MAE {:.3} dB  MAPE {:.2}%",
        report.rmse,
        report.mae,
        100.0 * report.mape
    );

    let path = std::env::temp_dir().join("fso_qos_hybrid_example.json");
    std::fs::write(&path, model.to_json()?)?;
    let reloaded = HybridModel::from_json(&std::fs::read_to_string(&path)?)?;
    assert_eq!(
        pipeline::predict(&reloaded, &parts.test)?,
        pipeline::predict(&model, &parts.test)?
    );
    println!("model saved to {}", path.display());
    Ok((model, report))
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
