// PCA of a synthetic nine-variable weather record and its scree table.
//
// Run with `cargo run --example pca_scree`.

use fso_qos::dataset::{self, SynthConfig};
use fso_qos::pca::{self, PcaMode, SelectionRule};

pub fn run_example() -> fso_qos::Result<(Vec<f64>, usize)> {
    let table = dataset::synthesize_weather(&SynthConfig {
        m_observations: 1500,
        seed: 7,
        ..SynthConfig::default()
    })?;
    let model = pca::fit_pca(&table.features, PcaMode::Correlation)?;

    for row in pca::scree(&model)? {
        println!(
            "PC{}  eigenvalue {:6.3}  share {:5.1}%  cumulative {:5.1}%",
            row.component,
            row.eigenvalue,
            100.0 * row.variance_ratio,
            100.0 * row.cumulative_ratio
        );
    }
    let k = pca::select_components(&model, SelectionRule::Kaiser)?;
    let k90 = pca::select_components(&model, SelectionRule::Cumulative(0.9))?;
    println!("kaiser keeps {k}, 90% of variance needs {k90}");
    print!("PC1 loadings:");
    for (name, w) in model.variable_names.iter().zip(model.loadings.row(0)) {
        print!(" {name}={w:.3}");
    }
    println!();
    Ok((model.eigenvalues, k))
}

fn main() -> fso_qos::Result<()> {
    run_example().map(|_| ())
}
