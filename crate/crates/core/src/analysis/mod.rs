//! Transmitted-rate tables for a solvent and a sample: per-mode regressions,
//! pair absorption rate and the biphoton absorption ratio Γ.

mod fit;
mod ratio;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use fit::{fit_polynomial, fit_rate_curve, FitModel, FitResult};
pub use ratio::{
    absorption_rate, align, biphoton_ratio, gamma_monte_carlo, gamma_row, AbsorptionPoint, GammaPoint,
};
pub use table::{AttenuationMode, RateRow, RateTable, RATE_TABLE_HEADER};

/// Rows at or above this relative singles uncertainty are flagged.
pub const DEFAULT_FLAG_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub flag_threshold: f64,
    pub drop_flagged: bool,
    /// Draws per row for the Monte Carlo Γ cross-check; `None` skips it.
    pub monte_carlo_draws: Option<usize>,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            flag_threshold: DEFAULT_FLAG_THRESHOLD,
            drop_flagged: false,
            monte_carlo_draws: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedRow {
    pub table: String,
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    pub mode: AttenuationMode,
    pub label: String,
    pub singles_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub table: String,
    pub mode: AttenuationMode,
    pub linear: Option<FitResult>,
    pub quadratic: Option<FitResult>,
    /// Model with the smaller reduced χ².
    pub preferred: Option<FitModel>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloGamma {
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    pub mode: AttenuationMode,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    pub mode: AttenuationMode,
    pub r_trans_solv_per_s: f64,
    pub r_trans_solv_err_per_s: f64,
    pub r_trans_samp_per_s: f64,
    pub r_trans_samp_err_per_s: f64,
    pub r_abs_per_s: f64,
    pub r_abs_err_per_s: f64,
    pub gamma: Option<f64>,
    pub gamma_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub options: AnalysisOptions,
    pub flagged: Vec<FlaggedRow>,
    pub fits: Vec<ModeFit>,
    pub absorption: Vec<AbsorptionPoint>,
    pub gamma: Vec<GammaPoint>,
    pub gamma_monte_carlo: Vec<MonteCarloGamma>,
    pub plot: Vec<PlotRow>,
}

pub fn flagged_rows(name: &str, tbl: &RateTable, threshold: f64) -> Vec<FlaggedRow> {
    tbl.rows
        .iter()
        .filter(|r| r.singles_relative_error() >= threshold)
        .map(|r| FlaggedRow {
            table: name.to_string(),
            p_spdc_pw: r.p_spdc_pw,
            mode: r.mode,
            label: r.label.clone(),
            singles_relative_error: r.singles_relative_error(),
        })
        .collect()
}

fn mode_fits(name: &str, tbl: &RateTable) -> Vec<ModeFit> {
    tbl.modes()
        .into_iter()
        .map(|mode| {
            let mut errors = Vec::new();
            let mut run = |model| {
                fit_rate_curve(tbl, mode, model)
                    .map_err(|e| errors.push(format!("{model:?}: {e}")))
                    .ok()
            };
            let linear = run(FitModel::Linear);
            let quadratic = run(FitModel::Quadratic);
            let preferred = [&linear, &quadratic]
                .into_iter()
                .flatten()
                .min_by(|a, b| a.reduced_chi2.total_cmp(&b.reduced_chi2))
                .map(|f| f.model);
            ModeFit {
                table: name.to_string(),
                mode,
                linear,
                quadratic,
                preferred,
                errors,
            }
        })
        .collect()
}

/// Full solvent/sample comparison. Flagged rows are reported and, with
/// `drop_flagged`, removed from both tables before anything is computed.
pub fn analyze(solv: &RateTable, samp: &RateTable, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let mut flagged = flagged_rows("solv", solv, options.flag_threshold);
    flagged.extend(flagged_rows("samp", samp, options.flag_threshold));
    let (solv, samp) = if options.drop_flagged {
        // Drop a flagged point from both tables so rows stay aligned.
        let hit = |r: &RateRow| {
            flagged
                .iter()
                .any(|f| f.mode == r.mode && f.p_spdc_pw == r.p_spdc_pw)
        };
        let keep = |t: &RateTable| RateTable {
            rows: t.rows.iter().filter(|r| !hit(r)).cloned().collect(),
        };
        (keep(solv), keep(samp))
    } else {
        (solv.clone(), samp.clone())
    };
    let pairs = align(&solv, &samp)?;
    let absorption = absorption_rate(&solv, &samp)?;
    let gamma = biphoton_ratio(&solv, &samp)?;
    let mut fits = mode_fits("solv", &solv);
    fits.extend(mode_fits("samp", &samp));

    let mut mc = Vec::new();
    if let Some(draws) = options.monte_carlo_draws {
        for (k, (a, b)) in pairs.iter().enumerate() {
            if let Ok((mean, std)) = gamma_monte_carlo(a, b, draws, options.seed.wrapping_add(k as u64)) {
                mc.push(MonteCarloGamma {
                    p_spdc_pw: a.p_spdc_pw,
                    mode: a.mode,
                    mean,
                    std,
                });
            }
        }
    }
    let plot = pairs
        .iter()
        .zip(absorption.iter().zip(&gamma))
        .map(|((a, b), (abs, g))| PlotRow {
            p_spdc_pw: a.p_spdc_pw,
            mode: a.mode,
            r_trans_solv_per_s: a.r_coin,
            r_trans_solv_err_per_s: a.r_coin_err,
            r_trans_samp_per_s: b.r_coin,
            r_trans_samp_err_per_s: b.r_coin_err,
            r_abs_per_s: abs.r_abs_per_s,
            r_abs_err_per_s: abs.r_abs_err_per_s,
            gamma: g.gamma,
            gamma_err: g.gamma_err,
        })
        .collect();
    Ok(AnalysisReport {
        options: options.clone(),
        flagged,
        fits,
        absorption,
        gamma,
        gamma_monte_carlo: mc,
        plot,
    })
}

impl AnalysisReport {
    /// Plot data as CSV; empty cells where Γ was skipped.
    pub fn plot_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.plot {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}
