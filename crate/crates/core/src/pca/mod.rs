//! Principal component analysis by direct diagonalization of the
//! covariance (or correlation) matrix.
//!
//! Data are laid out variables-by-observations: an `n x m` matrix whose rows
//! are variables and whose columns are observations.

pub mod jacobi;

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use jacobi::{eigh_symmetric, SymmetricEigen, MAX_SWEEPS, OFF_DIAGONAL_TOLERANCE};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Row means must be within this of zero for [`covariance`].
pub const CENTERED_TOLERANCE: f64 = 1e-9;

/// Eigenvalues in `[-EIGENVALUE_CLAMP, 0)` are reported as zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

/// Labelled `n x m` data matrix: rows are variables, columns observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Matrix,
    variable_names: Vec<String>,
}

impl DataMatrix {
    /// Requires at least one variable and one observation, finite entries, and
    /// one name per row. Fitting additionally needs two observations.
    pub fn new(values: Matrix, variable_names: Vec<String>) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::Shape("data matrix has no variables".into()));
        }
        if values.cols() == 0 {
            return Err(Error::Shape("data matrix has no observations".into()));
        }
        if variable_names.len() != values.rows() {
            return Err(Error::Shape(format!(
                "{} variable names for {} rows",
                variable_names.len(),
                values.rows()
            )));
        }
        if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos / values.cols(), pos % values.cols());
            return Err(Error::Numeric(format!(
                "non-finite value for `{}` at observation {j}",
                variable_names[i]
            )));
        }
        Ok(Self {
            values,
            variable_names,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, variable_names: Vec<String>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, variable_names)
    }

    /// Variable count `n`.
    pub fn n_variables(&self) -> usize {
        self.values.rows()
    }

    /// Observation count `m`.
    pub fn n_observations(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn variable(&self, name: &str) -> Option<&[f64]> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values.row(i))
    }

    /// Observation `j` as an `n`-vector.
    pub fn observation(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }

    /// Keeps the given observation columns, in order.
    pub fn select_observations(&self, columns: &[usize]) -> Result<Self> {
        Self::new(
            self.values.select_columns(columns),
            self.variable_names.clone(),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaMode {
    /// Center and scale each variable to unit sample variance.
    #[default]
    Correlation,
    /// Center only.
    Covariance,
}

impl FromStr for PcaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "correlation" => Ok(PcaMode::Correlation),
            "covariance" => Ok(PcaMode::Covariance),
            other => Err(Error::Usage(format!(
                "unknown PCA mode `{other}` (expected correlation or covariance)"
            ))),
        }
    }
}

/// Centered (and in correlation mode, unit-variance) data with the statistics used.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    pub data: DataMatrix,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Centers each variable and, in correlation mode, divides it by its sample
/// standard deviation (divisor `m - 1`).
pub fn standardize(x: &DataMatrix, mode: PcaMode) -> Result<Standardized> {
    let m = x.n_observations();
    if m < 2 {
        return Err(Error::Shape(format!(
            "standardization needs at least 2 observations, got {m}"
        )));
    }
    let n = x.n_variables();
    let mut out = x.values().clone();
    let mut means = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for i in 0..n {
        let row = out.row_mut(i);
        let mut mean = row.iter().sum::<f64>() / m as f64;
        row.iter_mut().for_each(|v| *v -= mean);
        // second pass removes the rounding residue of the first
        let residue = row.iter().sum::<f64>() / m as f64;
        row.iter_mut().for_each(|v| *v -= residue);
        mean += residue;
        means.push(mean);

        let scale = match mode {
            PcaMode::Covariance => 1.0,
            PcaMode::Correlation => {
                let var = row.iter().map(|v| v * v).sum::<f64>() / (m - 1) as f64;
                let sd = var.sqrt();
                let magnitude = x.values().row(i).iter().fold(1.0f64, |a, v| a.max(v.abs()));
                if sd <= 1e-12 * magnitude {
                    return Err(Error::DegenerateVariable(x.variable_names()[i].clone()));
                }
                row.iter_mut().for_each(|v| *v /= sd);
                sd
            }
        };
        scales.push(scale);
    }
    Ok(Standardized {
        data: DataMatrix::new(out, x.variable_names().to_vec())?,
        means,
        scales,
    })
}

/// Sample covariance `X X^T / (m - 1)` of row-centered data.
pub fn covariance(x: &DataMatrix) -> Result<Matrix> {
    let m = x.n_observations();
    if m < 2 {
        return Err(Error::Shape(format!(
            "covariance needs at least 2 observations, got {m}"
        )));
    }
    let n = x.n_variables();
    let v = x.values();
    for i in 0..n {
        let mean = v.row(i).iter().sum::<f64>() / m as f64;
        if mean.abs() > CENTERED_TOLERANCE {
            return Err(Error::Precondition(format!(
                "variable `{}` is not centered (mean {mean})",
                x.variable_names()[i]
            )));
        }
    }
    let denom = (m - 1) as f64;
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = v.row(i).iter().zip(v.row(j)).map(|(a, b)| a * b).sum();
            c[(i, j)] = dot / denom;
            c[(j, i)] = c[(i, j)];
        }
    }
    Ok(c)
}

/// Fitted principal-component model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mode: PcaMode,
    pub variable_names: Vec<String>,
    pub means: Vec<f64>,
    /// Unit-variance divisors, or all ones in covariance mode.
    pub scales: Vec<f64>,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// `n x n`, column `i` is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Matrix,
    /// `n x n`, row `i` holds the coefficients of component `i` over the
    /// standardized variables, so `PC_i = sum_v loadings[i][v] * x_v`.
    pub loadings: Matrix,
}

impl PcaModel {
    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }

    /// Applies the stored centering and scaling to new data.
    pub fn standardize(&self, x: &DataMatrix) -> Result<Matrix> {
        self.check_schema(x)?;
        let mut out = x.values().clone();
        for i in 0..out.rows() {
            let (mean, scale) = (self.means[i], self.scales[i]);
            out.row_mut(i)
                .iter_mut()
                .for_each(|v| *v = (*v - mean) / scale);
        }
        Ok(out)
    }

    fn check_schema(&self, x: &DataMatrix) -> Result<()> {
        if x.variable_names() != self.variable_names.as_slice() {
            return Err(Error::Shape(format!(
                "data variables {:?} do not match fitted variables {:?}",
                x.variable_names(),
                self.variable_names
            )));
        }
        Ok(())
    }
}

/// Standardizes `x`, diagonalizes its covariance and packages the result.
pub fn fit_pca(x: &DataMatrix, mode: PcaMode) -> Result<PcaModel> {
    let st = standardize(x, mode)?;
    let c = covariance(&st.data)?;
    let eig = eigh_symmetric(&c)?;
    let eigenvalues = eig
        .values
        .iter()
        .map(|&v| {
            if (-EIGENVALUE_CLAMP..0.0).contains(&v) {
                0.0
            } else {
                v
            }
        })
        .collect();
    Ok(PcaModel {
        mode,
        variable_names: x.variable_names().to_vec(),
        means: st.means,
        scales: st.scales,
        eigenvalues,
        loadings: eig.vectors.transpose(),
        eigenvectors: eig.vectors,
    })
}

/// Rule for the number of retained components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "value")]
pub enum SelectionRule {
    /// Eigenvalues strictly above 1, at least one component.
    Kaiser,
    /// Smallest `k` whose cumulative variance ratio reaches the threshold.
    Cumulative(f64),
    Fixed(usize),
}

impl SelectionRule {
    /// Applies the rule to a descending eigenvalue list.
    pub fn select(&self, eigenvalues: &[f64]) -> Result<usize> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::Usage("no eigenvalues to select from".into()));
        }
        match *self {
            SelectionRule::Kaiser => Ok(eigenvalues.iter().filter(|&&v| v > 1.0).count().max(1)),
            SelectionRule::Cumulative(threshold) => {
                if !(threshold > 0.0 && threshold <= 1.0) {
                    return Err(Error::Usage(format!(
                        "cumulative threshold must lie in (0, 1], got {threshold}"
                    )));
                }
                let (_, cumulative) = variance_ratios(eigenvalues)?;
                Ok(cumulative
                    .iter()
                    .position(|&c| c >= threshold - 1e-12)
                    .map_or(n, |i| i + 1))
            }
            SelectionRule::Fixed(k) => {
                if k == 0 || k > n {
                    return Err(Error::Usage(format!(
                        "fixed component count {k} outside 1..={n}"
                    )));
                }
                Ok(k)
            }
        }
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    /// `kaiser`, `cumulative:<threshold>` or `fixed:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::Usage(format!("invalid selection rule `{s}`"));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("kaiser", None) => Ok(SelectionRule::Kaiser),
            ("cumulative", Some(a)) => {
                let t: f64 = a.parse().map_err(|_| bad())?;
                if !(t > 0.0 && t <= 1.0) {
                    return Err(bad());
                }
                Ok(SelectionRule::Cumulative(t))
            }
            ("fixed", Some(a)) => {
                let k: usize = a.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(SelectionRule::Fixed(k))
            }
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionRule::Kaiser => f.write_str("kaiser"),
            SelectionRule::Cumulative(t) => write!(f, "cumulative:{t}"),
            SelectionRule::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

pub fn select_components(model: &PcaModel, rule: SelectionRule) -> Result<usize> {
    rule.select(&model.eigenvalues)
}

/// Scores of the first `k` components: `E_k^T z`, one column per observation.
pub fn project(model: &PcaModel, x: &DataMatrix, k: usize) -> Result<Matrix> {
    let n = model.n_variables();
    if k == 0 || k > n {
        return Err(Error::Shape(format!("component count {k} outside 1..={n}")));
    }
    let z = model.standardize(x)?;
    let basis = Matrix::from_fn(k, n, |i, j| model.loadings[(i, j)]);
    basis.matmul(&z)
}

/// Per-component variance ratios and their running sum.
pub fn explained_variance(model: &PcaModel) -> Result<(Vec<f64>, Vec<f64>)> {
    variance_ratios(&model.eigenvalues)
}

fn variance_ratios(eigenvalues: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let total: f64 = eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("eigenvalues sum to zero".into()));
    }
    let ratios = eigenvalues.iter().map(|v| v / total).collect();
    let mut running = 0.0;
    let cumulative = eigenvalues
        .iter()
        .map(|v| {
            running += v;
            running / total
        })
        .collect();
    Ok((ratios, cumulative))
}

/// One scree-plot row; `component` counts from 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeRow {
    pub component: usize,
    pub eigenvalue: f64,
    pub variance_ratio: f64,
    pub cumulative_ratio: f64,
}

pub const SCREE_CSV_HEADER: &str = "component,eigenvalue,variance_ratio,cumulative_ratio";

pub fn scree(model: &PcaModel) -> Result<Vec<ScreeRow>> {
    let (ratios, cumulative) = explained_variance(model)?;
    Ok(model
        .eigenvalues
        .iter()
        .zip(ratios)
        .zip(cumulative)
        .enumerate()
        .map(
            |(i, ((&eigenvalue, variance_ratio), cumulative_ratio))| ScreeRow {
                component: i + 1,
                eigenvalue,
                variance_ratio,
                cumulative_ratio,
            },
        )
        .collect())
}

pub fn write_scree_csv<W: Write>(rows: &[ScreeRow], mut out: W) -> Result<()> {
    writeln!(out, "{SCREE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.component, r.eigenvalue, r.variance_ratio, r.cumulative_ratio
        )?;
    }
    Ok(())
}
