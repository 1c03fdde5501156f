use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AttenuationMode, RateRow, RateTable};
use crate::error::{Error, Result};

fn same_power(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn describe(table: &str, r: &RateRow) -> String {
    format!("{table}: P_SPDC={} pW mode={}", r.p_spdc_pw, r.mode)
}

/// Pair rows of two tables on (P_SPDC, mode), in the order of `solv`.
pub fn align<'a>(solv: &'a RateTable, samp: &'a RateTable) -> Result<Vec<(&'a RateRow, &'a RateRow)>> {
    let key_eq = |a: &RateRow, b: &RateRow| a.mode == b.mode && same_power(a.p_spdc_pw, b.p_spdc_pw);
    let mut unmatched = Vec::new();
    for (name, t) in [("solv", solv), ("samp", samp)] {
        for (i, r) in t.rows.iter().enumerate() {
            if t.rows[..i].iter().any(|o| key_eq(o, r)) {
                unmatched.push(format!("{} (duplicate)", describe(name, r)));
            }
        }
    }
    let mut pairs = Vec::new();
    for r in &solv.rows {
        match samp.rows.iter().find(|s| key_eq(r, s)) {
            Some(s) => pairs.push((r, s)),
            None => unmatched.push(describe("solv", r)),
        }
    }
    for s in &samp.rows {
        if !solv.rows.iter().any(|r| key_eq(r, s)) {
            unmatched.push(describe("samp", s));
        }
    }
    if unmatched.is_empty() {
        Ok(pairs)
    } else {
        Err(Error::Alignment(unmatched))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionPoint {
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    pub mode: AttenuationMode,
    pub r_abs_per_s: f64,
    pub r_abs_err_per_s: f64,
}

/// R_abs = R_coin(solv) − R_coin(samp) per aligned row.
pub fn absorption_rate(solv: &RateTable, samp: &RateTable) -> Result<Vec<AbsorptionPoint>> {
    Ok(align(solv, samp)?
        .into_iter()
        .map(|(a, b)| AbsorptionPoint {
            p_spdc_pw: a.p_spdc_pw,
            mode: a.mode,
            r_abs_per_s: a.r_coin - b.r_coin,
            r_abs_err_per_s: a.r_coin_err.hypot(b.r_coin_err),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    pub mode: AttenuationMode,
    pub gamma: Option<f64>,
    pub gamma_err: Option<f64>,
    /// Why the row was not evaluated.
    pub skipped: Option<String>,
}

fn rates(r: &RateRow) -> [(f64, f64); 3] {
    [
        (r.r_s1, r.r_s1_err),
        (r.r_s2, r.r_s2_err),
        (r.r_coin, r.r_coin_err),
    ]
}

/// Γ = 1 − (S1·S2/C)_samp / (S1·S2/C)_solv with its first-order
/// uncertainty, or the reason the row cannot be evaluated.
pub fn gamma_row(solv: &RateRow, samp: &RateRow) -> std::result::Result<(f64, f64), String> {
    let names = ["R_s1", "R_s2", "R_coin"];
    for (table, row) in [("solv", solv), ("samp", samp)] {
        for (name, (v, _)) in names.iter().zip(rates(row)) {
            if !(v > 0.0) {
                return Err(format!("{table} {name} = {v} is not strictly positive"));
            }
        }
    }
    let d = |r: &RateRow| r.r_s1 * r.r_s2 / r.r_coin;
    let q = d(samp) / d(solv);
    let rel2: f64 = rates(solv)
        .iter()
        .chain(rates(samp).iter())
        .map(|(v, e)| (e / v).powi(2))
        .sum();
    Ok((1.0 - q, q * rel2.sqrt()))
}

pub fn biphoton_ratio(solv: &RateTable, samp: &RateTable) -> Result<Vec<GammaPoint>> {
    Ok(align(solv, samp)?
        .into_iter()
        .map(|(a, b)| {
            let (gamma, gamma_err, skipped) = match gamma_row(a, b) {
                Ok((g, e)) => (Some(g), Some(e), None),
                Err(reason) => (None, None, Some(reason)),
            };
            GammaPoint {
                p_spdc_pw: a.p_spdc_pw,
                mode: a.mode,
                gamma,
                gamma_err,
                skipped,
            }
        })
        .collect())
}

/// Monte Carlo cross-check of one Γ value: draw all six rates from
/// independent normals and return the sample mean and standard deviation.
/// Draws with a nonpositive rate are rejected.
pub fn gamma_monte_carlo(solv: &RateRow, samp: &RateRow, draws: usize, seed: u64) -> Result<(f64, f64)> {
    gamma_row(solv, samp).map_err(|reason| Error::InvalidParameter { name: "rows", reason })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Normal<f64>> = rates(solv)
        .iter()
        .chain(rates(samp).iter())
        .map(|&(v, e)| Normal::new(v, e).expect("finite uncertainty"))
        .collect();
    let mut values = Vec::with_capacity(draws);
    let mut attempts = 0;
    while values.len() < draws && attempts < 10 * draws {
        attempts += 1;
        let x: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
        if x.iter().any(|v| *v <= 0.0) {
            continue;
        }
        values.push(1.0 - (x[3] * x[4] / x[5]) / (x[0] * x[1] / x[2]));
    }
    if values.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "draws",
            reason: "too few valid Monte Carlo draws".into(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}
