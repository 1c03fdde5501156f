//! Text export/import of joint spectral and temporal intensities.
//!
//! Matrix CSV layout:
//!
//! ```text
//! # quantity: JSI
//! # domain: spectral
//! # axis_s [rad/s]: 2.31e15,2.32e15,...
//! # axis_i [rad/s]: 2.31e15,2.32e15,...
//! 0.0,1.2e-3,...        <- one row per axis_s sample
//! ```
//!
//! Spectral axes may be given in `rad/s` or `nm`; temporal axes are in `fs`.
//! A JSON sidecar with the same stem records units and grid metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Axis, Domain, JointSpectrum};
use crate::constants::FS_PER_S;
use crate::dispersion::omega_from_nm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixQuantity {
    #[serde(rename = "JSI")]
    Jsi,
    #[serde(rename = "JTI")]
    Jti,
}

impl MatrixQuantity {
    fn as_str(self) -> &'static str {
        match self {
            MatrixQuantity::Jsi => "JSI",
            MatrixQuantity::Jti => "JTI",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub quantity: MatrixQuantity,
    pub domain: Domain,
    pub rows: usize,
    pub cols: usize,
    pub axis_unit: String,
    pub value_unit: String,
    pub normalized: bool,
    pub measured: bool,
    pub carrier_s_rad_per_s: f64,
    pub carrier_i_rad_per_s: f64,
    pub stride: usize,
}

fn join(values: impl Iterator<Item = f64>) -> String {
    let mut s = String::new();
    for (k, v) in values.enumerate() {
        if k > 0 {
            s.push(',');
        }
        write!(s, "{v:e}").unwrap();
    }
    s
}

/// Writes |f|² of `js` every `stride` samples, plus a `.json` sidecar.
/// Returns the sidecar path.
pub fn write_matrix_csv(path: &Path, js: &JointSpectrum, stride: usize) -> Result<PathBuf> {
    let stride = stride.max(1);
    let (quantity, unit, scale) = match js.domain {
        Domain::Spectral => (MatrixQuantity::Jsi, "rad/s", 1.0),
        Domain::Temporal => (MatrixQuantity::Jti, "fs", FS_PER_S),
    };
    let (ns, ni) = js.shape();
    let rows: Vec<usize> = (0..ns).step_by(stride).collect();
    let cols: Vec<usize> = (0..ni).step_by(stride).collect();
    let mut out = String::new();
    writeln!(out, "# quantity: {}", quantity.as_str()).unwrap();
    writeln!(out, "# domain: {}", js.domain.as_str()).unwrap();
    writeln!(
        out,
        "# axis_s [{unit}]: {}",
        join(rows.iter().map(|&r| js.axis_s.values[r] * scale))
    )
    .unwrap();
    writeln!(
        out,
        "# axis_i [{unit}]: {}",
        join(cols.iter().map(|&c| js.axis_i.values[c] * scale))
    )
    .unwrap();
    for &r in &rows {
        out.push_str(&join(cols.iter().map(|&c| js.get(r, c).norm_sqr())));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let sidecar = Sidecar {
        quantity,
        domain: js.domain,
        rows: rows.len(),
        cols: cols.len(),
        axis_unit: unit.to_string(),
        value_unit: match js.domain {
            Domain::Spectral => "s^2 (|f|^2, normalized to unit mass in rad/s)",
            Domain::Temporal => "1/s^2 (|JTA|^2, normalized to unit mass in s)",
        }
        .to_string(),
        normalized: js.normalized,
        measured: js.measured,
        carrier_s_rad_per_s: js.carrier_s,
        carrier_i_rad_per_s: js.carrier_i,
        stride,
    };
    let side_path = path.with_extension("json");
    let text = serde_json::to_string_pretty(&sidecar)?;
    fs::write(&side_path, text + "\n").map_err(|e| Error::io(&side_path, e))?;
    Ok(side_path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub quantity: Option<String>,
    pub domain: Domain,
    pub axis_s: Vec<f64>,
    pub unit_s: String,
    pub axis_i: Vec<f64>,
    pub unit_i: String,
    /// Row-major intensities.
    pub values: Vec<f64>,
}

fn parse_axis(path: &str, line_no: usize, rest: &str) -> Result<(String, Vec<f64>)> {
    let err = |message: String| Error::Parse {
        path: path.to_string(),
        line: line_no,
        message,
    };
    let open = rest
        .find('[')
        .ok_or_else(|| err("axis header lacks `[unit]`".into()))?;
    let close = rest
        .find(']')
        .ok_or_else(|| err("axis header lacks `]`".into()))?;
    let unit = rest[open + 1..close].trim().to_string();
    let values = rest[close + 1..]
        .trim_start_matches(':')
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| err(format!("bad axis value `{}`: {e}", v.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((unit, values))
}

pub fn read_matrix_csv(path: &Path) -> Result<MatrixFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let p = path.display().to_string();
    let mut quantity = None;
    let mut domain = Domain::Spectral;
    let mut axis_s = None;
    let mut axis_i = None;
    let mut values = Vec::new();
    let mut width = None;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim();
            if let Some(rest) = header.strip_prefix("quantity:") {
                quantity = Some(rest.trim().to_string());
            } else if let Some(rest) = header.strip_prefix("domain:") {
                domain = match rest.trim() {
                    "spectral" => Domain::Spectral,
                    "temporal" => Domain::Temporal,
                    other => {
                        return Err(Error::Parse {
                            path: p,
                            line: line_no,
                            message: format!("unknown domain `{other}`"),
                        })
                    }
                };
            } else if let Some(rest) = header.strip_prefix("axis_s") {
                axis_s = Some(parse_axis(&p, line_no, rest)?);
            } else if let Some(rest) = header.strip_prefix("axis_i") {
                axis_i = Some(parse_axis(&p, line_no, rest)?);
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: p.clone(),
                    line: line_no,
                    message: format!("bad value `{}`: {e}", v.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    path: p,
                    line: line_no,
                    message: format!("row has {} values, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
    }
    let missing = |name: &str| Error::Parse {
        path: p.clone(),
        line: 0,
        message: format!("missing `# {name} [unit]: ...` header"),
    };
    let (unit_s, axis_s) = axis_s.ok_or_else(|| missing("axis_s"))?;
    let (unit_i, axis_i) = axis_i.ok_or_else(|| missing("axis_i"))?;
    if values.len() != axis_s.len() * axis_i.len() {
        return Err(Error::Parse {
            path: p,
            line: 0,
            message: format!(
                "matrix has {} values, axes imply {}x{}",
                values.len(),
                axis_s.len(),
                axis_i.len()
            ),
        });
    }
    Ok(MatrixFile {
        quantity,
        domain,
        axis_s,
        unit_s,
        axis_i,
        unit_i,
        values,
    })
}

impl MatrixFile {
    /// Axis in rad/s, ascending, plus the permutation applied to its samples.
    fn omega_axis(values: &[f64], unit: &str) -> Result<(Vec<f64>, Vec<usize>)> {
        let omega: Vec<f64> = match unit {
            "rad/s" => values.to_vec(),
            "nm" => values.iter().map(|&l| omega_from_nm(l)).collect(),
            other => return Err(Error::Schema(format!("unsupported spectral axis unit `{other}`"))),
        };
        let mut order: Vec<usize> = (0..omega.len()).collect();
        order.sort_by(|&a, &b| omega[a].total_cmp(&omega[b]));
        Ok((order.iter().map(|&k| omega[k]).collect(), order))
    }

    /// Measured JSA √F on uniform frequency axes. Wavelength axes are
    /// converted to angular frequency and, since that makes them non-uniform,
    /// bilinearly resampled onto `resample` points per axis (default: the
    /// original count).
    pub fn into_measured_spectrum(self, resample: Option<usize>) -> Result<JointSpectrum> {
        if self.domain != Domain::Spectral {
            return Err(Error::Domain {
                expected: "spectral",
                found: self.domain.as_str(),
            });
        }
        let (ws, order_s) = Self::omega_axis(&self.axis_s, &self.unit_s)?;
        let (wi, order_i) = Self::omega_axis(&self.axis_i, &self.unit_i)?;
        let ni = self.axis_i.len();
        let mut intensity = Vec::with_capacity(self.values.len());
        for &r in &order_s {
            for &c in &order_i {
                intensity.push(self.values[r * ni + c]);
            }
        }
        let n = resample.unwrap_or(ws.len().max(wi.len()));
        let js =
            JointSpectrum::from_measured_intensity(Axis { values: ws }, Axis { values: wi }, &intensity)?;
        let uniform = js.axis_s.uniform_step("omega_s").is_ok()
            && js.axis_i.uniform_step("omega_i").is_ok()
            && resample.is_none();
        let mut js = if uniform { js } else { js.resample_uniform(n)? };
        js.normalize()?;
        Ok(js)
    }
}
