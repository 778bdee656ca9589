//! Link-budget SNR of an FSO terminal pair.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::atmos::{self, OpticalPath, SizeModel};
use crate::error::{Error, Result};

/// Sign applied to the transmit-gain term of the budget.
///
/// The budget formula as published subtracts `10 log10(G_tx)`; flip this to
/// `1.0` for the conventional additive transmit gain.
pub const TRANSMIT_GAIN_SIGN: f64 = -1.0;

pub const BOLTZMANN_J_PER_K: f64 = 1.380649e-23;

/// Terminal and receiver parameters carried with a link configuration but not
/// used by [`snr_db`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuxParams {
    pub divergence_mrad: f64,
    pub tx_efficiency: f64,
    pub rx_efficiency: f64,
    pub rx_sensitivity_dbm: f64,
    pub data_rate: f64,
    pub load_ohm: f64,
    pub dark_current_na: f64,
    pub responsivity_a_per_w: f64,
    pub elec_bandwidth_ghz: f64,
    pub photodiode_temp_k: f64,
}

impl Default for AuxParams {
    fn default() -> Self {
        Self {
            divergence_mrad: 3.0,
            tx_efficiency: 0.8,
            rx_efficiency: 0.8,
            rx_sensitivity_dbm: -40.0,
            data_rate: 1e9,
            load_ohm: 1000.0,
            dark_current_na: 10.0,
            responsivity_a_per_w: 0.7,
            elec_bandwidth_ghz: 0.5,
            photodiode_temp_k: 298.0,
        }
    }
}

/// Link budget inputs. Serialized as one flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkParams {
    pub power_tx_dbm: f64,
    pub gain_tx_db: f64,
    pub gain_rx_db: f64,
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub ambient_temp_k: f64,
    pub boltzmann_j_per_k: f64,
    pub noise_figure_db: f64,
    pub fade_margin_db: f64,
    #[serde(flatten)]
    pub aux: AuxParams,
}

impl Default for LinkParams {
    /// 100 mW at 1550 nm, 1 MHz, 298 K, unity gains and no margins.
    fn default() -> Self {
        Self {
            power_tx_dbm: 20.0,
            gain_tx_db: 0.0,
            gain_rx_db: 0.0,
            wavelength_m: 1550e-9,
            bandwidth_hz: 1e6,
            ambient_temp_k: 298.0,
            boltzmann_j_per_k: BOLTZMANN_J_PER_K,
            noise_figure_db: 0.0,
            fade_margin_db: 0.0,
            aux: AuxParams::default(),
        }
    }
}

const KEYS: [&str; 19] = [
    "power_tx_dbm",
    "gain_tx_db",
    "gain_rx_db",
    "wavelength_m",
    "bandwidth_hz",
    "ambient_temp_k",
    "boltzmann_j_per_k",
    "noise_figure_db",
    "fade_margin_db",
    "divergence_mrad",
    "tx_efficiency",
    "rx_efficiency",
    "rx_sensitivity_dbm",
    "data_rate",
    "load_ohm",
    "dark_current_na",
    "responsivity_a_per_w",
    "elec_bandwidth_ghz",
    "photodiode_temp_k",
];

impl LinkParams {
    /// Parses a flat JSON object. Missing keys take their defaults; unknown
    /// keys and non-numeric or out-of-range values are reported by name.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(map) = &value else {
            return Err(Error::Usage(
                "link configuration must be a JSON object".into(),
            ));
        };
        for (key, v) in map {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::ConfigKey {
                    key: key.clone(),
                    reason: "unknown key".into(),
                });
            }
            if !v.is_number() {
                return Err(Error::ConfigKey {
                    key: key.clone(),
                    reason: format!("expected a number, got {v}"),
                });
            }
        }
        let params: LinkParams = serde_json::from_value(value)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::ConfigKey {
                key: key.into(),
                reason: reason.into(),
            })
        };
        let finite = [
            ("power_tx_dbm", self.power_tx_dbm),
            ("gain_tx_db", self.gain_tx_db),
            ("gain_rx_db", self.gain_rx_db),
            ("rx_sensitivity_dbm", self.aux.rx_sensitivity_dbm),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return bad(key, "must be finite");
            }
        }
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("ambient_temp_k", self.ambient_temp_k),
            ("boltzmann_j_per_k", self.boltzmann_j_per_k),
            ("divergence_mrad", self.aux.divergence_mrad),
            ("data_rate", self.aux.data_rate),
            ("load_ohm", self.aux.load_ohm),
            ("dark_current_na", self.aux.dark_current_na),
            ("responsivity_a_per_w", self.aux.responsivity_a_per_w),
            ("elec_bandwidth_ghz", self.aux.elec_bandwidth_ghz),
            ("photodiode_temp_k", self.aux.photodiode_temp_k),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, "must be positive");
            }
        }
        for (key, v) in [
            ("noise_figure_db", self.noise_figure_db),
            ("fade_margin_db", self.fade_margin_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(key, "must be non-negative");
            }
        }
        for (key, v) in [
            ("tx_efficiency", self.aux.tx_efficiency),
            ("rx_efficiency", self.aux.rx_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(key, "must lie in (0, 1]");
            }
        }
        if !(self.wavelength_m > 1e-7 && self.wavelength_m < 1e-5) {
            return bad("wavelength_m", "must lie in (1e-7, 1e-5) m");
        }
        Ok(())
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_m * 1e9
    }
}

/// SNR in dB for a total path attenuation `tau_db`.
///
/// `P - 30 - 10log(G_tx) + 10log(G_rx) - 20log(4 pi / lambda) - 10log(B T k) - tau - NF - FM`
/// with `P` in dBm, gains converted to linear before the log terms, and the
/// transmit-gain sign taken from [`TRANSMIT_GAIN_SIGN`].
pub fn snr_db(params: &LinkParams, tau_db: f64) -> Result<f64> {
    params.validate()?;
    if !(tau_db.is_finite() && tau_db >= 0.0) {
        return Err(Error::Domain(format!(
            "total attenuation must be finite and non-negative, got {tau_db}"
        )));
    }
    let g_tx = 10f64.powf(params.gain_tx_db / 10.0);
    let g_rx = 10f64.powf(params.gain_rx_db / 10.0);
    let spreading = 20.0 * (4.0 * PI / params.wavelength_m).log10();
    let thermal =
        10.0 * (params.bandwidth_hz * params.ambient_temp_k * params.boltzmann_j_per_k).log10();
    let q =
        params.power_tx_dbm - 30.0 + TRANSMIT_GAIN_SIGN * 10.0 * g_tx.log10() + 10.0 * g_rx.log10()
            - spreading
            - thermal
            - tau_db
            - params.noise_figure_db
            - params.fade_margin_db;
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::Numeric(format!("SNR evaluated to {q}")))
    }
}

/// Milliwatts to dBm.
pub fn mw_to_dbm(power_mw: f64) -> f64 {
    10.0 * power_mw.log10()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub tau_db: f64,
    pub snr_db: f64,
}

pub const SNR_CSV_HEADER: &str = "tau_db,snr_db";

/// SNR for each attenuation in `taus_db`.
pub fn snr_sweep(params: &LinkParams, taus_db: &[f64]) -> Result<Vec<SnrRow>> {
    if taus_db.is_empty() {
        return Err(Error::Usage(
            "SNR sweep needs at least one attenuation value".into(),
        ));
    }
    taus_db
        .iter()
        .map(|&tau| {
            Ok(SnrRow {
                tau_db: tau,
                snr_db: snr_db(params, tau)?,
            })
        })
        .collect()
}

/// SNR over a visibility x wavelength grid, visibility-major.
///
/// Each row uses its own wavelength for both the atmospheric term and the
/// spreading term of the budget.
pub fn snr_sweep_visibility(
    params: &LinkParams,
    visibilities_km: &[f64],
    wavelengths_nm: &[f64],
    length_km: f64,
    reference_wavelength_nm: f64,
    model: SizeModel,
) -> Result<Vec<SnrRow>> {
    if visibilities_km.is_empty() || wavelengths_nm.is_empty() {
        return Err(Error::Usage(
            "SNR sweep needs at least one visibility and one wavelength".into(),
        ));
    }
    let mut rows = Vec::with_capacity(visibilities_km.len() * wavelengths_nm.len());
    for &v in visibilities_km {
        for &lambda in wavelengths_nm {
            let path = OpticalPath::new(lambda, v, length_km)?
                .with_reference_wavelength(reference_wavelength_nm)?;
            let tau = atmos::attenuation_db(&path, model)?;
            let p = LinkParams {
                wavelength_m: lambda * 1e-9,
                ..params.clone()
            };
            rows.push(SnrRow {
                tau_db: tau,
                snr_db: snr_db(&p, tau)?,
            });
        }
    }
    Ok(rows)
}

/// Writes rows with shortest round-trip float formatting.
pub fn write_snr_csv<W: Write>(rows: &[SnrRow], mut out: W) -> Result<()> {
    writeln!(out, "{SNR_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{}", r.tau_db, r.snr_db)?;
    }
    Ok(())
}
