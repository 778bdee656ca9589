//! Batch command line: `attenuation`, `snr`, `fit` and `predict`.
//!
//! Every command writes plot-ready CSV plus a `manifest.json` into its output
//! directory. Exit codes: 0 success, 1 data or model error, 2 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::atmos::{self, SizeModel, DEFAULT_REFERENCE_WAVELENGTH_NM};
use crate::dataset::{
    self, LinkGeometry, LoadSchema, ObservationTable, SplitFractions, SynthConfig,
};
use crate::error::Error;
use crate::link::{self, LinkParams};
use crate::metrics::{self, MetricsReport};
use crate::mlp::{self, TrainConfig};
use crate::pca::{self, PcaMode, SelectionRule};
use crate::pipeline::{self, HybridConfig, HybridModel};

/// Default output directory when `--out` / `--out-report` is not given.
pub const OUT_DIR_ENV: &str = "FSO_QOS_OUT_DIR";

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "fso-qos",
    version,
    about = "FSO link attenuation, SNR and PCA-ANN SNR prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extinction coefficient and attenuation over visibility x wavelength.
    Attenuation(AttenuationArgs),
    /// Link SNR over a list of attenuations or a visibility sweep.
    Snr(SnrArgs),
    /// Fit the PCA + network SNR predictor and evaluate it on a held-out split.
    Fit(FitArgs),
    /// Predict SNR for observations with a fitted model.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated wavelengths in nm.
    #[arg(long, value_delimiter = ',')]
    wavelengths: Vec<f64>,
    #[arg(long)]
    visibility_min: Option<f64>,
    #[arg(long)]
    visibility_max: Option<f64>,
    /// Number of evenly spaced visibilities, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
    /// Path length in km.
    #[arg(long, default_value_t = 1.0)]
    length_km: f64,
    #[arg(long, default_value_t = DEFAULT_REFERENCE_WAVELENGTH_NM)]
    reference_wavelength: f64,
    /// Particle-size model: kruse or kim.
    #[arg(long, default_value = "kruse")]
    model: String,
}

impl SweepArgs {
    fn visibilities(&self) -> Result<Vec<f64>, Error> {
        match (self.visibility_min, self.visibility_max, self.steps) {
            (Some(lo), Some(hi), Some(steps)) => {
                if !(lo > 0.0) {
                    return Err(Error::Usage("--visibility-min must be positive".into()));
                }
                atmos::linear_grid(lo, hi, steps)
            }
            _ => Err(Error::Usage(
                "--visibility-min, --visibility-max and --steps are required".into(),
            )),
        }
    }

    fn model(&self) -> Result<SizeModel, Error> {
        self.model.parse()
    }

    fn is_used(&self) -> bool {
        self.visibility_min.is_some() || self.visibility_max.is_some() || self.steps.is_some()
    }
}

#[derive(Debug, Args)]
struct AttenuationArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SnrArgs {
    /// Link parameters as a flat JSON object; defaults apply to missing keys.
    #[arg(long)]
    link_config: Option<PathBuf>,
    /// Comma-separated total attenuations in dB.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, env = OUT_DIR_ENV)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Observation CSV with an snr_db column.
    #[arg(long, conflicts_with = "synth_config")]
    data: Option<PathBuf>,
    /// Synthetic-data run configuration (JSON).
    #[arg(long)]
    synth_config: Option<PathBuf>,
    /// Station to keep when the data file holds several.
    #[arg(long)]
    station: Option<String>,
    #[arg(long, default_value = "correlation")]
    pca_mode: String,
    /// kaiser, cumulative:<threshold> or fixed:<k>.
    #[arg(long, default_value = "kaiser")]
    select: String,
    /// Training configuration (JSON).
    #[arg(long)]
    train_config: Option<PathBuf>,
    /// Train, validation and test fractions.
    #[arg(long, default_value = "0.7,0.15,0.15")]
    split: String,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long)]
    out_model: PathBuf,
    /// Directory for scree, loss, metrics, split and manifest files.
    #[arg(long, env = OUT_DIR_ENV)]
    out_report: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, env = OUT_DIR_ENV)]
    out: PathBuf,
}

/// Written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_paths: Vec<String>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    pub tool_version: String,
    /// Files written; report files are relative to `output_dir`.
    pub outputs: Vec<String>,
}

/// Synthetic dataset recipe for `fit --synth-config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthRunConfig {
    pub synth: SynthConfig,
    #[serde(skip)]
    pub link: LinkParams,
    pub geometry: LinkGeometry,
    pub size_model: SizeModel,
    /// Standard deviation of the Gaussian noise added to SNR targets, in dB.
    pub target_noise_std: f64,
    pub target_seed: u64,
}

impl Default for SynthRunConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            link: LinkParams::default(),
            geometry: LinkGeometry::default(),
            size_model: SizeModel::Kruse,
            target_noise_std: 1.0,
            target_seed: 1,
        }
    }
}

impl SynthRunConfig {
    /// The `link` member goes through [`LinkParams::from_json_str`] so that
    /// bad keys are reported by name.
    pub fn from_json_str(text: &str) -> Result<Self, Error> {
        let mut value: Value = serde_json::from_str(text)?;
        let link = match value.as_object_mut() {
            Some(map) => map.remove("link"),
            None => {
                return Err(Error::Usage(
                    "synthetic run config must be a JSON object".into(),
                ))
            }
        };
        let mut config: SynthRunConfig = serde_json::from_value(value)?;
        if let Some(link) = link {
            config.link = LinkParams::from_json_str(&link.to_string())?;
        }
        config.synth.validate()?;
        Ok(config)
    }

    pub fn build(&self) -> Result<ObservationTable, Error> {
        let table = dataset::synthesize_weather(&self.synth)?;
        dataset::attach_snr_target(
            &table,
            &self.link,
            self.geometry,
            self.size_model,
            self.target_noise_std,
            self.target_seed,
        )
    }
}

/// Train, validation and test metrics of a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub train: MetricsReport,
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

/// Errors that stop a command, split by exit code.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::ConfigKey { .. } => Failure::Usage(e.to_string()),
            other => Failure::Data(other),
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (program name first), runs the command, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Attenuation(a) => cmd_attenuation(a),
        Command::Snr(a) => cmd_snr(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(Error::Io(e)))
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(Error::Io(e)))
}

fn write_manifest(dir: &Path, manifest: RunManifest) -> Result<(), Failure> {
    let mut out = create(&dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut out, &manifest).map_err(Error::from)?;
    writeln!(out).map_err(Error::from)?;
    out.flush().map_err(Error::from)?;
    Ok(())
}

fn manifest(
    command: &str,
    configs: &[&Option<PathBuf>],
    seeds: Vec<u64>,
    dir: &Path,
    outputs: &[&str],
) -> RunManifest {
    RunManifest {
        command: command.into(),
        config_paths: configs
            .iter()
            .filter_map(|p| p.as_ref().map(|p| p.display().to_string()))
            .collect(),
        seeds,
        output_dir: dir.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    }
}

fn cmd_attenuation(args: AttenuationArgs) -> Result<(), Failure> {
    let s = &args.sweep;
    if s.wavelengths.is_empty() {
        return Err(Failure::Usage("--wavelengths is required".into()));
    }
    let model = s.model()?;
    let vis = s.visibilities()?;
    let rows = atmos::attenuation_sweep(
        &vis,
        &s.wavelengths,
        s.length_km,
        s.reference_wavelength,
        model,
    )
    .map_err(usage)?;
    prepare_dir(&args.out)?;
    let mut out = create(&args.out.join("attenuation.csv"))?;
    atmos::write_attenuation_csv(&rows, &mut out)?;
    out.flush().map_err(Error::from)?;
    write_manifest(
        &args.out,
        manifest("attenuation", &[], vec![], &args.out, &["attenuation.csv"]),
    )
}

fn cmd_snr(args: SnrArgs) -> Result<(), Failure> {
    let params = match &args.link_config {
        Some(path) => LinkParams::from_json_str(&read_config(path)?).map_err(usage)?,
        None => LinkParams::default(),
    };
    let rows = match (args.tau.is_empty(), args.sweep.is_used()) {
        (false, false) => link::snr_sweep(&params, &args.tau).map_err(usage)?,
        (true, true) => {
            let s = &args.sweep;
            let wavelengths = if s.wavelengths.is_empty() {
                vec![params.wavelength_nm()]
            } else {
                s.wavelengths.clone()
            };
            link::snr_sweep_visibility(
                &params,
                &s.visibilities()?,
                &wavelengths,
                s.length_km,
                s.reference_wavelength,
                s.model()?,
            )
            .map_err(usage)?
        }
        _ => return Err(Failure::Usage(
            "give either --tau or a visibility sweep (--visibility-min/--visibility-max/--steps)"
                .into(),
        )),
    };
    prepare_dir(&args.out)?;
    let mut out = create(&args.out.join("snr.csv"))?;
    link::write_snr_csv(&rows, &mut out)?;
    out.flush().map_err(Error::from)?;
    write_manifest(
        &args.out,
        manifest("snr", &[&args.link_config], vec![], &args.out, &["snr.csv"]),
    )
}

fn write_table(path: &Path, table: &ObservationTable) -> Result<(), Failure> {
    let mut out = create(path)?;
    dataset::save_observations(table, &mut out)?;
    out.flush().map_err(Error::from)?;
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    let pca_mode: PcaMode = args.pca_mode.parse()?;
    let selection_rule: SelectionRule = args.select.parse()?;
    let fractions: SplitFractions = args.split.parse()?;
    let train_config = match &args.train_config {
        Some(path) => {
            let cfg: TrainConfig = serde_json::from_str(&read_config(path)?).map_err(|e| {
                Failure::Usage(format!("invalid training config {}: {e}", path.display()))
            })?;
            cfg.validate()?;
            cfg
        }
        None => TrainConfig::default(),
    };

    let mut seeds = vec![args.split_seed, train_config.seed];
    let table = match (&args.data, &args.synth_config) {
        (Some(path), None) => {
            let schema = LoadSchema {
                station: args.station.clone(),
                ..LoadSchema::default()
            };
            let file = File::open(path).map_err(|e| Failure::Data(Error::Io(e)))?;
            dataset::load_observations(file, &schema).map_err(Failure::Data)?
        }
        (None, Some(path)) => {
            let cfg = SynthRunConfig::from_json_str(&read_config(path)?).map_err(|e| match e {
                Error::Json(j) => {
                    Failure::Usage(format!("invalid synthetic config {}: {j}", path.display()))
                }
                other => other.into(),
            })?;
            seeds.extend([cfg.synth.seed, cfg.target_seed]);
            cfg.build()?
        }
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --data or --synth-config".into(),
            ))
        }
    };
    if table.target_snr_db.is_none() {
        return Err(Failure::Data(Error::Schema(
            "training data has no snr_db column".into(),
        )));
    }

    let parts = dataset::split(&table, fractions, args.split_seed).map_err(Failure::Data)?;
    let config = HybridConfig {
        pca_mode,
        selection_rule,
        train: train_config,
    };
    let (model, history) =
        pipeline::fit_hybrid(&parts.train, Some(&parts.val), &config).map_err(Failure::Data)?;
    let report = FitMetrics {
        train: pipeline::evaluate_hybrid(&model, &parts.train).map_err(Failure::Data)?,
        validation: pipeline::evaluate_hybrid(&model, &parts.val).map_err(Failure::Data)?,
        test: pipeline::evaluate_hybrid(&model, &parts.test).map_err(Failure::Data)?,
    };

    if let Some(parent) = args
        .out_model
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        prepare_dir(parent)?;
    }
    let mut out = create(&args.out_model)?;
    out.write_all(model.to_json()?.as_bytes())
        .map_err(Error::from)?;
    writeln!(out).map_err(Error::from)?;
    out.flush().map_err(Error::from)?;

    let dir = &args.out_report;
    prepare_dir(dir)?;
    let mut out = create(&dir.join("scree.csv"))?;
    pca::write_scree_csv(&pca::scree(&model.pca)?, &mut out)?;
    out.flush().map_err(Error::from)?;

    let mut out = create(&dir.join("loss.csv"))?;
    mlp::write_loss_csv(&history, &mut out)?;
    out.flush().map_err(Error::from)?;

    let line = serde_json::to_string(&report).map_err(Error::from)?;
    let mut out = create(&dir.join("metrics.json"))?;
    writeln!(out, "{line}").map_err(Error::from)?;
    out.flush().map_err(Error::from)?;
    let mut out = create(&dir.join("metrics.csv"))?;
    report.test.write_csv(&mut out)?;
    out.flush().map_err(Error::from)?;

    write_table(&dir.join("train.csv"), &parts.train)?;
    write_table(&dir.join("val.csv"), &parts.val)?;
    write_table(&dir.join("test.csv"), &parts.test)?;

    let mut run = manifest(
        "fit",
        &[&args.data, &args.synth_config, &args.train_config],
        seeds,
        dir,
        &[
            "scree.csv",
            "loss.csv",
            "metrics.json",
            "metrics.csv",
            "train.csv",
            "val.csv",
            "test.csv",
        ],
    );
    run.outputs.push(args.out_model.display().to_string());
    write_manifest(dir, run)?;
    println!("{line}");
    Ok(())
}

pub const PREDICTIONS_CSV_HEADER: &str = "timestamp,predicted_snr_db";

fn cmd_predict(args: PredictArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.model).map_err(|e| Failure::Data(Error::Io(e)))?;
    let model = HybridModel::from_json(&text).map_err(Failure::Data)?;
    let file = File::open(&args.data).map_err(|e| Failure::Data(Error::Io(e)))?;
    let schema = LoadSchema {
        station: None,
        ..LoadSchema::default()
    };
    let table = dataset::load_observations(file, &schema).map_err(Failure::Data)?;
    let predicted = pipeline::predict(&model, &table).map_err(Failure::Data)?;

    prepare_dir(&args.out)?;
    let mut out = create(&args.out.join("predictions.csv"))?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        match &table.target_snr_db {
            Some(actual) => {
                writeln!(out, "{PREDICTIONS_CSV_HEADER},actual_snr_db,abs_error")?;
                for ((ts, p), a) in table.timestamps.iter().zip(&predicted).zip(actual) {
                    writeln!(out, "{ts},{p},{a},{}", (a - p).abs())?;
                }
            }
            None => {
                writeln!(out, "{PREDICTIONS_CSV_HEADER}")?;
                for (ts, p) in table.timestamps.iter().zip(&predicted) {
                    writeln!(out, "{ts},{p}")?;
                }
            }
        }
        out.flush()
    };
    write(&mut out).map_err(Error::from)?;
    write_manifest(
        &args.out,
        manifest(
            "predict",
            &[&Some(args.model.clone()), &Some(args.data.clone())],
            model.provenance.seeds.clone(),
            &args.out,
            &["predictions.csv"],
        ),
    )?;
    if let Some(actual) = &table.target_snr_db {
        let report = metrics::evaluate(actual, &predicted).map_err(Failure::Data)?;
        println!("{}", report.to_json_line()?);
    }
    Ok(())
}
