//! Weather observation tables: CSV ingestion, a seeded synthetic generator,
//! link-budget SNR targets and train/validation/test splits.
//!
//! CSV layout:
//!
//! ```text
//! station,date,slot,visibility_km,<feature...>[,snr_db]
//! George,2015-03-02,08h00,12.5,3.1,...
//! ```
//!
//! Dates are `YYYY-MM-DD`; slots are the three daily synoptic readings
//! `08h00`, `14h00` and `20h00`.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atmos::{self, OpticalPath, SizeModel, DEFAULT_REFERENCE_WAVELENGTH_NM};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::link::{self, LinkParams};
use crate::pca::DataMatrix;

pub const VISIBILITY_COLUMN: &str = "visibility_km";
pub const TARGET_COLUMN: &str = "snr_db";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "08h00")]
    Morning,
    #[serde(rename = "14h00")]
    Afternoon,
    #[serde(rename = "20h00")]
    Evening,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Morning, Slot::Afternoon, Slot::Evening];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Morning => "08h00",
            Slot::Afternoon => "14h00",
            Slot::Evening => "20h00",
        }
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.as_str() == s)
            .ok_or_else(|| format!("slot `{s}` is not one of 08h00, 14h00, 20h00"))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Timestamp {
    pub date: NaiveDate,
    pub slot: Slot,
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.date.format("%Y-%m-%d"), self.slot)
    }
}

/// Observations of one station.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationTable {
    pub station: String,
    pub timestamps: Vec<Timestamp>,
    /// Variables by observations; includes the visibility row.
    pub features: DataMatrix,
    pub target_snr_db: Option<Vec<f64>>,
    pub visibility_variable: String,
    /// Rows skipped at load time because a field was missing.
    #[serde(default)]
    pub dropped_rows: usize,
}

impl ObservationTable {
    pub fn new(
        station: String,
        timestamps: Vec<Timestamp>,
        features: DataMatrix,
        target_snr_db: Option<Vec<f64>>,
        visibility_variable: &str,
    ) -> Result<Self> {
        let m = features.n_observations();
        if timestamps.len() != m {
            return Err(Error::Shape(format!(
                "{} timestamps for {m} observations",
                timestamps.len()
            )));
        }
        if let Some(t) = &target_snr_db {
            if t.len() != m {
                return Err(Error::Shape(format!(
                    "{} targets for {m} observations",
                    t.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("non-finite SNR target".into()));
            }
        }
        let vis = features.variable(visibility_variable).ok_or_else(|| {
            Error::Schema(format!(
                "visibility variable `{visibility_variable}` is missing"
            ))
        })?;
        if let Some(j) = vis.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "visibility must be positive, observation {j} has {}",
                vis[j]
            )));
        }
        Ok(Self {
            station,
            timestamps,
            features,
            target_snr_db,
            visibility_variable: visibility_variable.to_string(),
            dropped_rows: 0,
        })
    }

    pub fn n_observations(&self) -> usize {
        self.timestamps.len()
    }

    pub fn visibility(&self) -> &[f64] {
        self.features
            .variable(&self.visibility_variable)
            .expect("visibility row checked at construction")
    }

    /// Sub-table with the given observations, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            station: self.station.clone(),
            timestamps: indices.iter().map(|&j| self.timestamps[j]).collect(),
            features: self.features.select_observations(indices)?,
            target_snr_db: self
                .target_snr_db
                .as_ref()
                .map(|t| indices.iter().map(|&j| t[j]).collect()),
            visibility_variable: self.visibility_variable.clone(),
            dropped_rows: 0,
        })
    }

    pub fn targets(&self) -> Result<&[f64]> {
        self.target_snr_db
            .as_deref()
            .ok_or_else(|| Error::Schema(format!("table has no `{TARGET_COLUMN}` column")))
    }

    /// SHA-256 of the table's CSV serialization, hex encoded.
    pub fn fingerprint(&self) -> Result<String> {
        let mut buf = Vec::new();
        save_observations(self, &mut buf)?;
        Ok(Sha256::digest(&buf)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }
}

/// Column roles for [`load_observations`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadSchema {
    pub visibility_column: String,
    pub target_column: String,
    /// Keep only this station's rows. Without it the file must hold one station.
    pub station: Option<String>,
}

impl Default for LoadSchema {
    fn default() -> Self {
        Self {
            visibility_column: VISIBILITY_COLUMN.into(),
            target_column: TARGET_COLUMN.into(),
            station: None,
        }
    }
}

/// Parses a station CSV. Rows with an empty or missing field are dropped and
/// counted in `dropped_rows`; row numbers in errors are file line numbers.
pub fn load_observations<R: Read>(source: R, schema: &LoadSchema) -> Result<ObservationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 4 || header[0] != "station" || header[1] != "date" || header[2] != "slot" {
        return Err(Error::Schema(
            "header must start with station,date,slot followed by feature columns".into(),
        ));
    }
    let mut seen = HashSet::new();
    for name in &header {
        if name.is_empty() || !seen.insert(name.as_str()) {
            return Err(Error::Schema(format!("empty or duplicate column `{name}`")));
        }
    }
    let target_idx = header.iter().position(|h| *h == schema.target_column);
    let feature_idx: Vec<usize> = (3..header.len())
        .filter(|&i| Some(i) != target_idx)
        .collect();
    let feature_names: Vec<String> = feature_idx.iter().map(|&i| header[i].clone()).collect();
    let vis_pos = feature_names
        .iter()
        .position(|n| *n == schema.visibility_column)
        .ok_or_else(|| {
            Error::Schema(format!(
                "visibility column `{}` not found",
                schema.visibility_column
            ))
        })?;

    let mut station: Option<String> = schema.station.clone();
    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_idx.len()];
    let mut targets = Vec::new();
    let mut dropped = 0;

    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() > header.len() {
            return Err(Error::Parse {
                row,
                message: format!("{} fields, header has {}", record.len(), header.len()),
            });
        }
        if record.len() < header.len() || record.iter().any(str::is_empty) {
            dropped += 1;
            continue;
        }
        let name = &record[0];
        match &station {
            Some(s) if s != name => {
                if schema.station.is_some() {
                    continue;
                }
                return Err(Error::Schema(format!(
                    "file mixes stations `{s}` and `{name}`; select one"
                )));
            }
            Some(_) => {}
            None => station = Some(name.to_string()),
        }
        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|e| Error::Parse {
            row,
            message: format!("date `{}`: {e}", &record[1]),
        })?;
        let slot: Slot = record[2]
            .parse()
            .map_err(|message| Error::Parse { row, message })?;
        let number = |i: usize| -> Result<f64> {
            let cell = &record[i];
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("column `{}` has non-numeric value `{cell}`", header[i]),
                })
        };
        let values: Vec<f64> = feature_idx
            .iter()
            .map(|&i| number(i))
            .collect::<Result<_>>()?;
        if !(values[vis_pos] > 0.0) {
            return Err(Error::Parse {
                row,
                message: format!("visibility must be positive, got {}", values[vis_pos]),
            });
        }
        if let Some(t) = target_idx {
            targets.push(number(t)?);
        }
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
        timestamps.push(Timestamp { date, slot });
    }

    if timestamps.is_empty() {
        return Err(Error::Schema("no complete observations in input".into()));
    }
    let features = DataMatrix::from_rows(columns, feature_names)?;
    let mut table = ObservationTable::new(
        station.unwrap_or_default(),
        timestamps,
        features,
        target_idx.map(|_| targets),
        &schema.visibility_column,
    )?;
    table.dropped_rows = dropped;
    Ok(table)
}

/// Writes the table in the layout read by [`load_observations`]. Floats use
/// the shortest representation that parses back to the same value.
pub fn save_observations<W: Write>(table: &ObservationTable, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let names = table.features.variable_names();
    let mut header = vec!["station".to_string(), "date".into(), "slot".into()];
    header.extend(names.iter().cloned());
    if table.target_snr_db.is_some() {
        header.push(TARGET_COLUMN.into());
    }
    writer.write_record(&header)?;
    for (j, ts) in table.timestamps.iter().enumerate() {
        let mut row = vec![
            table.station.clone(),
            ts.date.format("%Y-%m-%d").to_string(),
            ts.slot.to_string(),
        ];
        row.extend(table.features.observation(j).iter().map(f64::to_string));
        if let Some(t) = &table.target_snr_db {
            row.push(t[j].to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// One-factor weather generator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_features: usize,
    pub m_observations: usize,
    /// One loading per feature; the first feature becomes visibility.
    pub factor_loadings: Vec<f64>,
    /// Standard deviation of each feature's idiosyncratic noise.
    pub noise_std: f64,
    pub visibility_range_km: (f64, f64),
    pub seed: u64,
    pub station: String,
    pub start_date: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_features: 9,
            m_observations: 2000,
            factor_loadings: vec![0.9; 9],
            noise_std: 0.3,
            visibility_range_km: (0.5, 20.0),
            seed: 0,
            station: "synthetic".into(),
            start_date: NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid date"),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_features < 2 {
            return Err(Error::Usage("n_features must be at least 2".into()));
        }
        if self.m_observations == 0 {
            return Err(Error::Usage("m_observations must be at least 1".into()));
        }
        if self.factor_loadings.len() != self.n_features {
            return Err(Error::Usage(format!(
                "{} factor loadings for {} features",
                self.factor_loadings.len(),
                self.n_features
            )));
        }
        if self.factor_loadings.iter().any(|l| !l.is_finite()) {
            return Err(Error::Usage("factor loadings must be finite".into()));
        }
        if !(self.noise_std.is_finite() && self.noise_std > 0.0) {
            return Err(Error::Usage("noise_std must be positive".into()));
        }
        let (lo, hi) = self.visibility_range_km;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::Usage(format!(
                "visibility range must satisfy 0 < min < max, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Feature names: visibility first, then `feature_1`, `feature_2`, ...
    pub fn feature_names(&self) -> Vec<String> {
        std::iter::once(VISIBILITY_COLUMN.to_string())
            .chain((1..self.n_features).map(|i| format!("feature_{i}")))
            .collect()
    }

    /// Correlation matrix of the latent features `z_i = l_i f + e_i`.
    pub fn analytic_correlation(&self) -> Matrix {
        let l = &self.factor_loadings;
        let var: Vec<f64> = l
            .iter()
            .map(|x| x * x + self.noise_std * self.noise_std)
            .collect();
        Matrix::from_fn(self.n_features, self.n_features, |i, j| {
            if i == j {
                1.0
            } else {
                l[i] * l[j] / (var[i] * var[j]).sqrt()
            }
        })
    }
}

/// Generates `z_i = loading_i * f + noise_std * e_i` with `f, e_i ~ N(0, 1)`.
///
/// Feature 0 is turned into visibility by a monotone squash of its
/// standardized value onto a log scale between the range bounds. Timestamps
/// run through the three daily slots from `start_date`.
pub fn synthesize_weather(config: &SynthConfig) -> Result<ObservationTable> {
    config.validate()?;
    let (n, m) = (config.n_features, config.m_observations);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut values = Matrix::zeros(n, m);
    for j in 0..m {
        let f: f64 = StandardNormal.sample(&mut rng);
        for i in 0..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            values[(i, j)] = config.factor_loadings[i] * f + config.noise_std * e;
        }
    }

    let (lo, hi) = config.visibility_range_km;
    let l0 = config.factor_loadings[0];
    let sd0 = (l0 * l0 + config.noise_std * config.noise_std).sqrt();
    for v in values.row_mut(0) {
        let u = 1.0 / (1.0 + (-1.702 * *v / sd0).exp());
        *v = lo * (hi / lo).powf(u);
    }

    let timestamps = (0..m)
        .map(|j| {
            let date = config
                .start_date
                .checked_add_days(Days::new((j / 3) as u64))
                .ok_or_else(|| Error::Usage("synthetic dates overflow the calendar".into()))?;
            Ok(Timestamp {
                date,
                slot: Slot::ALL[j % 3],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    ObservationTable::new(
        config.station.clone(),
        timestamps,
        DataMatrix::new(values, config.feature_names())?,
        None,
        VISIBILITY_COLUMN,
    )
}

/// Path geometry for SNR targets; the wavelength comes from the link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkGeometry {
    pub length_km: f64,
    pub reference_wavelength_nm: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self {
            length_km: 1.0,
            reference_wavelength_nm: DEFAULT_REFERENCE_WAVELENGTH_NM,
        }
    }
}

/// Sets each target to the link SNR at that observation's visibility, plus
/// seeded Gaussian noise of standard deviation `noise_std`.
pub fn attach_snr_target(
    table: &ObservationTable,
    link_params: &LinkParams,
    geometry: LinkGeometry,
    model: SizeModel,
    noise_std: f64,
    seed: u64,
) -> Result<ObservationTable> {
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::Usage(format!(
            "noise_std must be non-negative, got {noise_std}"
        )));
    }
    link_params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = table
        .visibility()
        .iter()
        .map(|&v| {
            let path = OpticalPath::new(link_params.wavelength_nm(), v, geometry.length_km)?
                .with_reference_wavelength(geometry.reference_wavelength_nm)?;
            let tau = atmos::attenuation_db(&path, model)?;
            let noise: f64 = StandardNormal.sample(&mut rng);
            Ok(link::snr_db(link_params, tau)? + noise_std * noise)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = table.clone();
    out.target_snr_db = Some(targets);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitFractions {
    /// `(n_train, n_val, n_test)` for `m` observations. Validation and test
    /// sizes are rounded down; the remainder goes to training.
    pub fn sizes(&self, m: usize) -> Result<(usize, usize, usize)> {
        let fr = [self.train, self.val, self.test];
        if fr.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Usage(format!(
                "split fractions must be positive, got {fr:?}"
            )));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Usage(format!(
                "split fractions must sum to 1, got {fr:?}"
            )));
        }
        let part = |f: f64| (m as f64 * f + 1e-9).floor() as usize;
        let (val, test) = (part(self.val), part(self.test));
        let train = m.saturating_sub(val + test);
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::Usage(format!(
                "{m} observations give an empty partition ({train}/{val}/{test})"
            )));
        }
        Ok((train, val, test))
    }
}

impl FromStr for SplitFractions {
    type Err = Error;

    /// `train,val,test`, e.g. `0.7,0.15,0.15`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Usage(format!("invalid split `{s}`")))?;
        match parts[..] {
            [train, val, test] => Ok(Self { train, val, test }),
            _ => Err(Error::Usage(format!("split `{s}` needs three fractions"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: ObservationTable,
    pub val: ObservationTable,
    pub test: ObservationTable,
}

/// Seeded shuffle, then contiguous partition. Each part keeps the original
/// observation order.
pub fn split(table: &ObservationTable, fractions: SplitFractions, seed: u64) -> Result<Split> {
    let (n_train, n_val, _) = fractions.sizes(table.n_observations())?;
    let mut order: Vec<usize> = (0..table.n_observations()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let part = |range: &[usize]| {
        let mut idx = range.to_vec();
        idx.sort_unstable();
        table.select(&idx)
    };
    Ok(Split {
        train: part(&order[..n_train])?,
        val: part(&order[n_train..n_train + n_val])?,
        test: part(&order[n_train + n_val..])?,
    })
}
