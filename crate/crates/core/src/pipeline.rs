//! Two-level SNR predictor: PCA reduces the weather variables to a few
//! component scores, and a one-hidden-layer network regresses SNR on them.
//!
//! Everything fitted (standardization, components, target scaling) comes
//! from the training partition only.

use serde::{Deserialize, Serialize};

use crate::dataset::ObservationTable;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{self, MetricsReport};
use crate::mlp::{self, Batch, MlpNetwork, TrainConfig, TrainHistory};
use crate::pca::{self, PcaMode, PcaModel, SelectionRule};

/// Min-max map of SNR targets onto `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub min: f64,
    pub max: f64,
}

impl TargetScaling {
    pub fn fit(targets: &[f64]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Usage("no targets to scale".into()));
        }
        let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
        let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { min, max })
    }

    /// A constant target maps to 0.
    pub fn scale(&self, y: f64) -> f64 {
        let range = self.max - self.min;
        if range > 0.0 {
            2.0 * (y - self.min) / range - 1.0
        } else {
            0.0
        }
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + 0.5 * (s + 1.0) * (self.max - self.min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the training partition in CSV form.
    pub dataset_hash: String,
    pub station: String,
    pub train_observations: usize,
    pub val_observations: usize,
    pub pca_mode: PcaMode,
    pub selection_rule: SelectionRule,
    pub train_config: TrainConfig,
    pub seeds: Vec<u64>,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub pca: PcaModel,
    pub k_selected: usize,
    pub net: MlpNetwork,
    pub target_scaling: TargetScaling,
    pub provenance: Provenance,
}

impl HybridModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.pca.n_variables();
        if self.k_selected == 0 || self.k_selected > n {
            return Err(Error::Shape(format!(
                "k_selected {} outside 1..={n}",
                self.k_selected
            )));
        }
        if self.net.n_inputs() != self.k_selected || self.net.n_outputs() != 1 {
            return Err(Error::Shape(format!(
                "network shape {:?} does not match {} components",
                self.net.layer_sizes, self.k_selected
            )));
        }
        self.net.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: HybridModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Retained component scores, one input vector per observation.
    pub fn inputs(&self, table: &ObservationTable) -> Result<Vec<Vec<f64>>> {
        let scores = pca::project(&self.pca, &table.features, self.k_selected)?;
        Ok(observations_of(&scores))
    }
}

fn observations_of(scores: &Matrix) -> Vec<Vec<f64>> {
    (0..scores.cols()).map(|j| scores.column(j)).collect()
}

/// Settings for [`fit_hybrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub pca_mode: PcaMode,
    pub selection_rule: SelectionRule,
    pub train: TrainConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            pca_mode: PcaMode::Correlation,
            selection_rule: SelectionRule::Kaiser,
            train: TrainConfig::default(),
        }
    }
}

/// Fits PCA on `train`, keeps `k` components, and trains the network on
/// their scores. `val` only contributes a validation-loss curve.
pub fn fit_hybrid(
    train: &ObservationTable,
    val: Option<&ObservationTable>,
    config: &HybridConfig,
) -> Result<(HybridModel, TrainHistory)> {
    config.train.validate()?;
    let train_targets = train.targets()?;
    let pca = pca::fit_pca(&train.features, config.pca_mode)?;
    let k = pca::select_components(&pca, config.selection_rule)?;
    let target_scaling = TargetScaling::fit(train_targets)?;

    let net = mlp::init_network_with(
        [k, config.train.hidden_width, 1],
        config.train.seed,
        config.train.activation_hidden,
        config.train.activation_output,
    )?;
    let mut model = HybridModel {
        pca,
        k_selected: k,
        net,
        target_scaling,
        provenance: Provenance {
            dataset_hash: train.fingerprint()?,
            station: train.station.clone(),
            train_observations: train.n_observations(),
            val_observations: val.map_or(0, ObservationTable::n_observations),
            pca_mode: config.pca_mode,
            selection_rule: config.selection_rule,
            train_config: config.train.clone(),
            seeds: vec![config.train.seed],
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };

    let scaled =
        |t: &[f64]| -> Vec<Vec<f64>> { t.iter().map(|&y| vec![target_scaling.scale(y)]).collect() };
    let train_inputs = model.inputs(train)?;
    let train_scaled = scaled(train_targets);
    let val_data = match val {
        Some(v) => Some((model.inputs(v)?, scaled(v.targets()?))),
        None => None,
    };
    let val_batch = val_data
        .as_ref()
        .map(|(inputs, targets)| Batch { inputs, targets });

    let (net, history) = mlp::train(
        &model.net,
        Batch {
            inputs: &train_inputs,
            targets: &train_scaled,
        },
        val_batch,
        &config.train,
    )?;
    model.net = net;
    Ok((model, history))
}

/// Standardize with stored statistics, project, run the network, unscale.
pub fn predict(model: &HybridModel, table: &ObservationTable) -> Result<Vec<f64>> {
    model
        .inputs(table)?
        .iter()
        .map(|x| Ok(model.target_scaling.unscale(model.net.predict(x)?[0])))
        .collect()
}

pub fn evaluate_hybrid(model: &HybridModel, test: &ObservationTable) -> Result<MetricsReport> {
    let predicted = predict(model, test)?;
    metrics::evaluate(test.targets()?, &predicted)
}
