//! Regression error metrics over measured (`actual`) and predicted values.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MAPE is a fraction, not a percentage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mape: f64,
    pub mae: f64,
    pub rmse: f64,
    pub mse: f64,
    pub sample_count: usize,
}

pub const METRICS_CSV_HEADER: &str = "mape,mae,rmse,mse,sample_count";

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Shape("no samples to evaluate".into()));
    }
    Ok(())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum();
    Ok(sum / actual.len() as f64)
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok(sum / actual.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    Ok(mse(actual, predicted)?.sqrt())
}

/// Fails on the first zero actual value instead of skipping it.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let mut sum = 0.0;
    for (index, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual { index });
        }
        sum += ((a - p) / a).abs();
    }
    Ok(sum / actual.len() as f64)
}

pub fn evaluate(actual: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    let mse = mse(actual, predicted)?;
    Ok(MetricsReport {
        mape: mape(actual, predicted)?,
        mae: mae(actual, predicted)?,
        rmse: mse.sqrt(),
        mse,
        sample_count: actual.len(),
    })
}

impl MetricsReport {
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{METRICS_CSV_HEADER}")?;
        writeln!(
            out,
            "{},{},{},{},{}",
            self.mape, self.mae, self.rmse, self.mse, self.sample_count
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let r = evaluate(&[1.0, -2.0, 3.5], &[1.0, -2.0, 3.5]).unwrap();
        assert_eq!((r.mape, r.mae, r.rmse, r.mse), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.sample_count, 3);
    }

    #[test]
    fn hand_example() {
        let r = evaluate(&[1.0, 2.0], &[2.0, 4.0]).unwrap();
        assert_eq!(r.mae, 1.5);
        assert_eq!(r.mse, 2.5);
        assert_eq!(r.rmse, 2.5f64.sqrt());
        assert!((r.rmse - 1.5811).abs() < 1e-4);
        assert_eq!(r.mape, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            evaluate(&[1.0], &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(evaluate(&[], &[]), Err(Error::Shape(_))));
        match evaluate(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]) {
            Err(Error::ZeroActual { index }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        // the other metrics stay available on their own
        assert_eq!(mae(&[0.0], &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn csv_and_json() {
        let r = evaluate(&[1.0, 2.0], &[2.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(METRICS_CSV_HEADER));
        let json = r.to_json_line().unwrap();
        assert!(!json.contains('\n'));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![-100.0f64..-0.1, 0.1f64..100.0], n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn rmse_squared_is_mse((a, p) in pairs()) {
            let r = evaluate(&a, &p).unwrap();
            prop_assert!((r.rmse * r.rmse - r.mse).abs() <= 1e-9 * r.mse.max(1e-300));
            prop_assert!(r.mae <= r.rmse * (1.0 + 1e-12));
            prop_assert!(r.mape >= 0.0 && r.mae >= 0.0 && r.mse >= 0.0);
        }

        #[test]
        fn scale_behaviour((a, p) in pairs(), c in 0.01f64..50.0) {
            let r = evaluate(&a, &p).unwrap();
            let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
            let sp: Vec<f64> = p.iter().map(|v| v * c).collect();
            let s = evaluate(&sa, &sp).unwrap();
            prop_assert!((s.mape - r.mape).abs() <= 1e-9 * r.mape.max(1.0));
            prop_assert!((s.mae - c * r.mae).abs() <= 1e-9 * (c * r.mae).max(1.0));
            prop_assert!((s.rmse - c * r.rmse).abs() <= 1e-9 * (c * r.rmse).max(1.0));
            prop_assert!((s.mse - c * c * r.mse).abs() <= 1e-9 * (c * c * r.mse).max(1.0));
        }
    }
}
