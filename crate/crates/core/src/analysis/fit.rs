use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AttenuationMode, RateTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Linear,
    Quadratic,
}

impl FitModel {
    pub fn degree(self) -> usize {
        match self {
            FitModel::Linear => 1,
            FitModel::Quadratic => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Ascending powers: c0 + c1·x (+ c2·x²).
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub reduced_chi2: f64,
    /// y − fit, in the units of y.
    pub residuals: Vec<f64>,
    /// False when some uncertainty was zero and unit weights were used.
    pub weighted: bool,
}

impl FitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Polynomial least squares with free intercept.
///
/// With all `sigma` positive the fit is weighted by 1/σ² and the covariance
/// is (AᵀWA)⁻¹. Otherwise unit weights are used and the covariance is scaled
/// by the residual variance; χ² is then the plain residual sum of squares.
pub fn fit_polynomial(x: &[f64], y: &[f64], sigma: Option<&[f64]>, model: FitModel) -> Result<FitResult> {
    let n = x.len();
    let p = model.degree() + 1;
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::InvalidParameter {
            name: "data",
            reason: "x, y and sigma lengths differ".into(),
        });
    }
    if n < p + 1 {
        return Err(Error::InvalidParameter {
            name: "data",
            reason: format!("{n} points are too few for a {model:?} fit (need {})", p + 1),
        });
    }
    let weighted = sigma.is_some_and(|s| s.iter().all(|&v| v > 0.0 && v.is_finite()));
    let w: Vec<f64> = match sigma {
        Some(s) if weighted => s.iter().map(|v| 1.0 / v).collect(),
        _ => vec![1.0; n],
    };
    let a = DMatrix::from_fn(n, p, |i, j| w[i] * x[i].powi(j as i32));
    let b = DVector::from_fn(n, |i, _| w[i] * y[i]);

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        let mut distinct: Vec<f64> = x.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        return Err(Error::RankDeficient(format!(
            "{} distinct x values cannot determine {p} coefficients (condition {:.3e})",
            distinct.len(),
            smax / smin
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let v_t = svd.v_t.as_ref().expect("computed");
    let inv_s2 = svd.singular_values.map(|s| 1.0 / (s * s));
    let cov = v_t.transpose() * DMatrix::from_diagonal(&inv_s2) * v_t;

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..p).map(|j| coef[j] * x[i].powi(j as i32)).sum::<f64>())
        .collect();
    let chi2: f64 = residuals.iter().zip(&w).map(|(r, w)| (r * w).powi(2)).sum();
    let dof = n - p;
    let reduced = chi2 / dof as f64;
    let scale = if weighted { 1.0 } else { reduced };
    Ok(FitResult {
        model,
        coefficients: coef.iter().copied().collect(),
        std_errors: (0..p).map(|j| (cov[(j, j)] * scale).sqrt()).collect(),
        chi2,
        dof,
        reduced_chi2: reduced,
        residuals,
        weighted,
    })
}

/// Fit the transmitted coincidence rate against P_SPDC for one attenuation
/// mode.
pub fn fit_rate_curve(tbl: &RateTable, mode: AttenuationMode, model: FitModel) -> Result<FitResult> {
    let rows: Vec<_> = tbl.rows_in(mode).collect();
    let x: Vec<f64> = rows.iter().map(|r| r.p_spdc_pw).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.r_coin).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.r_coin_err).collect();
    fit_polynomial(&x, &y, Some(&s), model)
}
