//! Visibility-driven atmospheric extinction for optical links.
//!
//! The extinction coefficient follows the Kruse form
//!
//! ```text
//! beta(V, lambda) = (-ln T_th / V) * (lambda / lambda_0)^(-q(V))
//! ```
//!
//! with `T_th = 2%` and `q` the particle-size exponent from either the Kruse
//! or the Kim table. `beta` is expressed in Np/km (natural-log form); the dB
//! conversion happens only in [`attenuation_db`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmittance that defines meteorological visibility.
pub const VISIBILITY_THRESHOLD: f64 = 0.02;

/// Reference wavelength `lambda_0` in nm.
pub const DEFAULT_REFERENCE_WAVELENGTH_NM: f64 = 550.0;

/// `10 * log10(e)`: Np to dB.
pub const DB_PER_NEPER: f64 = 4.342_944_819_032_518;

/// Wavelength, visibility and path length of one optical link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalPath {
    pub wavelength_nm: f64,
    pub visibility_km: f64,
    pub length_km: f64,
    #[serde(default = "default_reference_wavelength")]
    pub reference_wavelength_nm: f64,
}

fn default_reference_wavelength() -> f64 {
    DEFAULT_REFERENCE_WAVELENGTH_NM
}

impl OpticalPath {
    /// Path with the default 550 nm reference wavelength.
    pub fn new(wavelength_nm: f64, visibility_km: f64, length_km: f64) -> Result<Self> {
        let path = Self {
            wavelength_nm,
            visibility_km,
            length_km,
            reference_wavelength_nm: DEFAULT_REFERENCE_WAVELENGTH_NM,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn with_reference_wavelength(mut self, reference_wavelength_nm: f64) -> Result<Self> {
        self.reference_wavelength_nm = reference_wavelength_nm;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("wavelength_nm", self.wavelength_nm)?;
        positive("visibility_km", self.visibility_km)?;
        positive("reference_wavelength_nm", self.reference_wavelength_nm)?;
        if !(self.length_km.is_finite() && self.length_km >= 0.0) {
            return Err(Error::Domain(format!(
                "length_km must be finite and non-negative, got {}",
                self.length_km
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be finite and positive, got {value}"
        )))
    }
}

/// Particle-size exponent table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeModel {
    #[default]
    Kruse,
    Kim,
}

impl SizeModel {
    pub fn q(self, visibility_km: f64) -> Result<f64> {
        match self {
            SizeModel::Kruse => kruse_q(visibility_km),
            SizeModel::Kim => kim_q(visibility_km),
        }
    }
}

impl std::str::FromStr for SizeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kruse" => Ok(SizeModel::Kruse),
            "kim" => Ok(SizeModel::Kim),
            other => Err(Error::Usage(format!(
                "unknown size model `{other}` (expected kruse or kim)"
            ))),
        }
    }
}

impl std::fmt::Display for SizeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SizeModel::Kruse => "kruse",
            SizeModel::Kim => "kim",
        })
    }
}

/// Kruse exponent. Branch upper bounds are inclusive.
pub fn kruse_q(visibility_km: f64) -> Result<f64> {
    positive("visibility_km", visibility_km)?;
    let v = visibility_km;
    Ok(if v > 50.0 {
        1.6
    } else if v > 6.0 {
        1.3
    } else {
        0.585 * v.cbrt()
    })
}

/// Kim exponent. Continuous at 0.5, 1 and 6 km; jumps from 1.3 to 1.6 past 50 km.
pub fn kim_q(visibility_km: f64) -> Result<f64> {
    positive("visibility_km", visibility_km)?;
    let v = visibility_km;
    Ok(if v > 50.0 {
        1.6
    } else if v > 6.0 {
        1.3
    } else if v > 1.0 {
        0.16 * v + 0.34
    } else if v > 0.5 {
        v - 0.5
    } else {
        0.0
    })
}

/// Extinction coefficient in Np/km.
pub fn extinction_coefficient(path: &OpticalPath, model: SizeModel) -> Result<f64> {
    path.validate()?;
    let q = model.q(path.visibility_km)?;
    let ratio = path.wavelength_nm / path.reference_wavelength_nm;
    Ok(-VISIBILITY_THRESHOLD.ln() / path.visibility_km * ratio.powf(-q))
}

/// Beer-Lambert transmittance `exp(-beta * L)`.
pub fn transmittance(path: &OpticalPath, model: SizeModel) -> Result<f64> {
    let beta = extinction_coefficient(path, model)?;
    Ok((-beta * path.length_km).exp())
}

/// Path attenuation in dB.
pub fn attenuation_db(path: &OpticalPath, model: SizeModel) -> Result<f64> {
    let beta = extinction_coefficient(path, model)?;
    Ok(DB_PER_NEPER * beta * path.length_km)
}

/// One row of an attenuation sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttenuationRow {
    pub visibility_km: f64,
    pub wavelength_nm: f64,
    pub beta_np_per_km: f64,
    pub atten_db: f64,
}

pub const ATTENUATION_CSV_HEADER: &str = "visibility_km,wavelength_nm,beta_np_per_km,atten_db";

/// Evaluates every (visibility, wavelength) pair, visibility-major.
///
/// `atten_db` is the attenuation over `length_km`; with a 1 km path it reads
/// as dB/km.
pub fn attenuation_sweep(
    visibilities_km: &[f64],
    wavelengths_nm: &[f64],
    length_km: f64,
    reference_wavelength_nm: f64,
    model: SizeModel,
) -> Result<Vec<AttenuationRow>> {
    if visibilities_km.is_empty() || wavelengths_nm.is_empty() {
        return Err(Error::Usage(
            "attenuation sweep needs at least one visibility and one wavelength".into(),
        ));
    }
    let mut rows = Vec::with_capacity(visibilities_km.len() * wavelengths_nm.len());
    for &v in visibilities_km {
        for &lambda in wavelengths_nm {
            let path = OpticalPath {
                wavelength_nm: lambda,
                visibility_km: v,
                length_km,
                reference_wavelength_nm,
            };
            let beta = extinction_coefficient(&path, model)?;
            rows.push(AttenuationRow {
                visibility_km: v,
                wavelength_nm: lambda,
                beta_np_per_km: beta,
                atten_db: DB_PER_NEPER * beta * length_km,
            });
        }
    }
    Ok(rows)
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Usage("steps must be at least 1".into()));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::Usage(format!("invalid range [{min}, {max}]")));
    }
    if steps == 1 {
        if min != max {
            return Err(Error::Usage("a single step requires min == max".into()));
        }
        return Ok(vec![min]);
    }
    let step = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

/// Writes sweep rows as CSV with six fixed decimals.
pub fn write_attenuation_csv<W: Write>(rows: &[AttenuationRow], mut out: W) -> Result<()> {
    writeln!(out, "{ATTENUATION_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6}",
            r.visibility_km, r.wavelength_nm, r.beta_np_per_km, r.atten_db
        )?;
    }
    Ok(())
}
