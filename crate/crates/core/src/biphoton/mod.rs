//! Joint spectral amplitude of the photon pair and its joint temporal
//! counterpart.
//!
//! A [`JointSpectrum`] is a dense N×M complex grid over (signal, idler)
//! axes. In the spectral domain the axes are angular frequencies (rad/s);
//! after [`to_temporal`] they are arrival times (s) relative to the grid
//! centre, with the spectral carrier kept so the transform can be inverted.

mod io;
mod transform;

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{FS_PER_S, SPEED_OF_LIGHT};
use crate::dispersion::omega_from_nm;
use crate::error::{Error, Result};
use crate::phasematch::{delta_k_omega, CrystalConfig};

pub use io::{read_matrix_csv, write_matrix_csv, MatrixFile, MatrixQuantity, Sidecar};
pub use transform::{to_spectral, to_temporal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Spectral,
    Temporal,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Spectral => "spectral",
            Domain::Temporal => "temporal",
        }
    }
}

/// Sample positions along one grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub values: Vec<f64>,
}

impl Axis {
    /// `len` samples centred on `center`, index `len / 2` sitting exactly on it.
    pub fn centered(center: f64, step: f64, len: usize) -> Self {
        let half = (len / 2) as f64;
        Self {
            values: (0..len).map(|k| center + (k as f64 - half) * step).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self) -> f64 {
        self.values[self.len() / 2]
    }

    /// Common spacing, or an error if the axis is not strictly increasing and
    /// uniform to 1e-9 relative.
    pub fn uniform_step(&self, name: &'static str) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::NonUniformAxis {
                axis: name,
                deviation: f64::INFINITY,
            });
        }
        let step = (self.values[n - 1] - self.values[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(Error::NonUniformAxis {
                axis: name,
                deviation: f64::INFINITY,
            });
        }
        let deviation = self
            .values
            .windows(2)
            .map(|w| ((w[1] - w[0]) - step).abs() / step)
            .fold(0.0, f64::max);
        if deviation > 1e-9 {
            return Err(Error::NonUniformAxis {
                axis: name,
                deviation,
            });
        }
        Ok(step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectrum {
    /// Row-major samples; row index runs along `axis_s`.
    pub data: Vec<Complex64>,
    pub axis_s: Axis,
    pub axis_i: Axis,
    pub domain: Domain,
    pub normalized: bool,
    /// Built from a measured intensity rather than the model.
    pub measured: bool,
    /// Spectral-axis value at index len/2, rad/s.
    pub carrier_s: f64,
    pub carrier_i: f64,
}

impl JointSpectrum {
    pub fn new(axis_s: Axis, axis_i: Axis, data: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if axis_s.is_empty() || axis_i.is_empty() || data.len() != axis_s.len() * axis_i.len() {
            return Err(Error::InvalidParameter {
                name: "data",
                reason: format!(
                    "grid is {}x{} but {} samples were given",
                    axis_s.len(),
                    axis_i.len(),
                    data.len()
                ),
            });
        }
        let (carrier_s, carrier_i) = match domain {
            Domain::Spectral => (axis_s.center(), axis_i.center()),
            Domain::Temporal => (0.0, 0.0),
        };
        Ok(Self {
            data,
            axis_s,
            axis_i,
            domain,
            normalized: false,
            measured: false,
            carrier_s,
            carrier_i,
        })
    }

    /// Spectral grid from a sampled function of (ω_s, ω_i).
    pub fn from_fn<F>(axis_s: Axis, axis_i: Axis, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let ni = axis_i.len();
        let mut data = vec![Complex64::new(0.0, 0.0); axis_s.len() * ni];
        data.par_chunks_mut(ni).enumerate().for_each(|(r, row)| {
            let ws = axis_s.values[r];
            for (c, v) in row.iter_mut().enumerate() {
                *v = f(ws, axis_i.values[c]);
            }
        });
        Self::new(axis_s, axis_i, data, Domain::Spectral)
    }

    /// Amplitude √F from a measured joint spectral intensity on uniform
    /// frequency axes. Negative intensities (background-subtracted noise)
    /// are clipped to zero.
    pub fn from_measured_intensity(axis_s: Axis, axis_i: Axis, intensity: &[f64]) -> Result<Self> {
        let data = intensity
            .iter()
            .map(|&f| Complex64::new(f.max(0.0).sqrt(), 0.0))
            .collect();
        let mut js = Self::new(axis_s, axis_i, data, Domain::Spectral)?;
        js.measured = true;
        Ok(js)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis_s.len(), self.axis_i.len())
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.axis_i.len() + col]
    }

    /// |f|² on the grid (JSI in the spectral domain, JTI in the temporal one).
    pub fn intensity(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Σ|f|² Δ_s Δ_i.
    pub fn total_mass(&self) -> Result<f64> {
        let ds = self.axis_s.uniform_step("s")?;
        let di = self.axis_i.uniform_step("i")?;
        Ok(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * ds * di)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let mass = self.total_mass()?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::GridCoverage(format!(
                "cannot normalize a grid with total mass {mass}"
            )));
        }
        let scale = mass.sqrt().recip();
        for z in &mut self.data {
            *z *= scale;
        }
        self.normalized = true;
        Ok(())
    }

    /// Σ_i |f|² for every signal sample.
    pub fn marginal_s(&self) -> Vec<f64> {
        let ni = self.axis_i.len();
        self.data
            .chunks(ni)
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    pub fn marginal_i(&self) -> Vec<f64> {
        let ni = self.axis_i.len();
        let mut out = vec![0.0; ni];
        for row in self.data.chunks(ni) {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z.norm_sqr();
            }
        }
        out
    }

    /// Bilinear resampling of the intensity onto uniform axes with `n` points
    /// each, spanning the original axis extents.
    pub fn resample_uniform(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "need at least two samples per axis".into(),
            });
        }
        let span = |a: &Axis| -> Result<Axis> {
            let lo = a.values[0];
            let hi = a.values[a.len() - 1];
            if !(hi > lo) || a.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::NonUniformAxis {
                    axis: "measured",
                    deviation: f64::INFINITY,
                });
            }
            let step = (hi - lo) / (n - 1) as f64;
            Ok(Axis {
                values: (0..n).map(|k| lo + step * k as f64).collect(),
            })
        };
        let new_s = span(&self.axis_s)?;
        let new_i = span(&self.axis_i)?;
        let intensity = self.intensity();
        let ni_old = self.axis_i.len();
        let locate = |axis: &Axis, x: f64| -> (usize, f64) {
            let v = &axis.values;
            let k = v.partition_point(|&p| p <= x).clamp(1, v.len() - 1) - 1;
            let t = ((x - v[k]) / (v[k + 1] - v[k])).clamp(0.0, 1.0);
            (k, t)
        };
        let mut out = Vec::with_capacity(n * n);
        for &ws in &new_s.values {
            let (r, tr) = locate(&self.axis_s, ws);
            for &wi in &new_i.values {
                let (c, tc) = locate(&self.axis_i, wi);
                let at = |rr: usize, cc: usize| intensity[rr * ni_old + cc];
                let v = (1.0 - tr) * (1.0 - tc) * at(r, c)
                    + (1.0 - tr) * tc * at(r, c + 1)
                    + tr * (1.0 - tc) * at(r + 1, c)
                    + tr * tc * at(r + 1, c + 1);
                out.push(v);
            }
        }
        let mut js = Self::from_measured_intensity(new_s, new_i, &out)?;
        js.measured = self.measured;
        Ok(js)
    }

    fn require(&self, domain: Domain) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::Domain {
                expected: domain.as_str(),
                found: self.domain.as_str(),
            })
        }
    }
}

/// Gaussian pump envelope in the sum frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpEnvelope {
    pub omega_p: f64,
    /// Standard deviation of the amplitude envelope, rad/s.
    pub sigma_p: f64,
}

impl PumpEnvelope {
    pub fn new(omega_p: f64, sigma_p: f64) -> Result<Self> {
        if !(sigma_p > 0.0 && sigma_p.is_finite()) || !(omega_p > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_p",
                reason: format!("need positive omega_p and sigma_p, got {omega_p}, {sigma_p}"),
            });
        }
        Ok(Self { omega_p, sigma_p })
    }

    /// Envelope whose spectral intensity |α|² has the given FWHM in nm.
    pub fn from_linewidth(lambda_p_nm: f64, fwhm_nm: f64) -> Result<Self> {
        let d_omega = omega_from_nm(lambda_p_nm - 0.5 * fwhm_nm) - omega_from_nm(lambda_p_nm + 0.5 * fwhm_nm);
        Self::new(omega_from_nm(lambda_p_nm), d_omega / (2.0 * LN_2.sqrt()))
    }
}

/// α(ω_s, ω_i) = exp(−(ω_s + ω_i − ω_p)² / 2σ_p²).
pub fn pump_envelope(env: &PumpEnvelope, omega_s: f64, omega_i: f64) -> Complex64 {
    let x = (omega_s + omega_i - env.omega_p) / env.sigma_p;
    Complex64::new((-0.5 * x * x).exp(), 0.0)
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// φ(ω_s, ω_i) = sinc(Δk L / 2).
pub fn phase_matching_function(cfg: &CrystalConfig, omega_s: f64, omega_i: f64) -> Result<f64> {
    let dk = delta_k_omega(cfg, omega_s, omega_i)?;
    Ok(sinc(0.5 * dk * cfg.length_m()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Samples per axis.
    pub n: usize,
    /// Grid centre wavelength; defaults to the degenerate 2λ_p.
    pub center_nm: Option<f64>,
    pub half_span_nm: f64,
    /// Largest tolerated fraction of |f|² falling outside the grid.
    pub max_truncated_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 1024,
            center_nm: None,
            half_span_nm: 60.0,
            max_truncated_fraction: 1e-3,
        }
    }
}

impl GridSpec {
    /// Identical signal and idler frequency axes.
    pub fn axes(&self, lambda_p_nm: f64) -> Result<(Axis, Axis)> {
        let center = self.center_nm.unwrap_or(2.0 * lambda_p_nm);
        if self.n < 4 || !(self.half_span_nm > 0.0 && self.half_span_nm < center) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("invalid grid n={} half_span={} nm", self.n, self.half_span_nm),
            });
        }
        let half_omega =
            0.5 * (omega_from_nm(center - self.half_span_nm) - omega_from_nm(center + self.half_span_nm));
        let step = 2.0 * half_omega / self.n as f64;
        let axis = Axis::centered(omega_from_nm(center), step, self.n);
        Ok((axis.clone(), axis))
    }
}

/// Below this pump amplitude the phase-matching factor is not evaluated; the
/// product is negligible and corners of a wide grid may put the sum
/// frequency outside the material model's range.
const PUMP_CUTOFF: f64 = 1e-30;

/// Fraction of |φ|² along the ω_s + ω_i = ω_p line that lies outside a
/// half-width `half` around degeneracy, estimated on a 4× wider line.
fn truncated_line_fraction(cfg: &CrystalConfig, omega_p: f64, half: f64, step: f64) -> Result<f64> {
    let (wl_lo, wl_hi) = cfg.model.wavelength_range_nm();
    let limit = (0.5 * omega_p - omega_from_nm(wl_hi))
        .min(omega_from_nm(wl_lo) - 0.5 * omega_p)
        .min(4.0 * half);
    let count = (limit / step).floor() as i64;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for k in -count..=count {
        let d = k as f64 * step;
        let phi = phase_matching_function(cfg, 0.5 * omega_p + d, 0.5 * omega_p - d)?;
        if d.abs() <= half {
            inside += phi * phi;
        } else {
            outside += phi * phi;
        }
    }
    Ok(outside / (inside + outside))
}

/// f(ω_s, ω_i) = α(ω_s, ω_i) φ(ω_s, ω_i) on the requested grid, normalised.
pub fn build_jsa(cfg: &CrystalConfig, env: &PumpEnvelope, grid: &GridSpec) -> Result<JointSpectrum> {
    cfg.validate()?;
    let lambda_p = crate::dispersion::nm_from_omega(env.omega_p);
    let (axis_s, axis_i) = grid.axes(lambda_p)?;
    let step = axis_s.uniform_step("s")?;
    let half = 0.5 * step * grid.n as f64;

    let f_phi = truncated_line_fraction(cfg, env.omega_p, half, step)?;
    // Gaussian tail bound for |α|² beyond the grid half-width in the sum.
    let f_alpha = (-(half / env.sigma_p).powi(2)).exp();
    let truncated = 1.0 - (1.0 - f_phi) * (1.0 - f_alpha);
    if truncated > grid.max_truncated_fraction {
        return Err(Error::GridCoverage(format!(
            "grid truncates a fraction {truncated:.3e} of the joint spectral mass \
             (limit {:.1e}); widen half_span_nm",
            grid.max_truncated_fraction
        )));
    }

    let ni = axis_i.len();
    let mut data = vec![Complex64::new(0.0, 0.0); axis_s.len() * ni];
    data.par_chunks_mut(ni)
        .enumerate()
        .try_for_each(|(r, row)| -> Result<()> {
            let ws = axis_s.values[r];
            for (c, v) in row.iter_mut().enumerate() {
                let wi = axis_i.values[c];
                let alpha = pump_envelope(env, ws, wi);
                if alpha.re > PUMP_CUTOFF {
                    *v = alpha * phase_matching_function(cfg, ws, wi)?;
                }
            }
            Ok(())
        })?;
    let mut js = JointSpectrum::new(axis_s, axis_i, data, Domain::Spectral)?;
    js.normalize()?;
    Ok(js)
}

/// Quadratic spectral phase accumulated in fibers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberDispersion {
    pub beta_fs2: f64,
    /// Detuning reference, rad/s.
    pub reference_omega: f64,
}

impl FiberDispersion {
    pub fn new(beta_fs2: f64, reference_omega: f64) -> Result<Self> {
        if !beta_fs2.is_finite() || !(reference_omega > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta_fs2",
                reason: format!("need finite beta and positive reference, got {beta_fs2}"),
            });
        }
        Ok(Self {
            beta_fs2,
            reference_omega,
        })
    }

    /// Dispersion referenced to the degenerate photon frequency ω_p / 2.
    pub fn degenerate(beta_fs2: f64, lambda_p_nm: f64) -> Result<Self> {
        Self::new(beta_fs2, 0.5 * omega_from_nm(lambda_p_nm))
    }
}

/// f · exp(iβ/2 (ω_s − ω_r)²) · exp(iβ/2 (ω_i − ω_r)²).
pub fn apply_fiber_phase(js: &JointSpectrum, fd: &FiberDispersion) -> Result<JointSpectrum> {
    js.require(Domain::Spectral)?;
    let mut out = js.clone();
    if fd.beta_fs2 == 0.0 {
        return Ok(out);
    }
    let beta = fd.beta_fs2 / (FS_PER_S * FS_PER_S);
    let ni = js.axis_i.len();
    let phase_i: Vec<f64> = js
        .axis_i
        .values
        .iter()
        .map(|w| 0.5 * beta * (w - fd.reference_omega).powi(2))
        .collect();
    out.data
        .par_chunks_mut(ni)
        .zip(js.axis_s.values.par_iter())
        .for_each(|(row, ws)| {
            let phase_s = 0.5 * beta * (ws - fd.reference_omega).powi(2);
            for (v, pi) in row.iter_mut().zip(&phase_i) {
                *v *= Complex64::from_polar(1.0, phase_s + pi);
            }
        });
    Ok(out)
}

/// JTI samples along the anti-diagonal through the JTI maximum, as
/// (arc length in the (t_s, t_i) plane in fs, normalised intensity). The arc
/// length is (t_s − t_i)/√2 relative to the peak.
///
/// The anti-diagonal is taken half-way between two adjacent grid lines
/// t_s + t_i = const and sampled at the nearest grid points, which alternate
/// between the two lines. This resolves t_s − t_i at one cell instead of two.
/// The DFT grid is periodic, so indices wrap and the profile spans one period
/// of the difference coordinate.
pub fn difference_profile(jta: &JointSpectrum) -> Result<Vec<(f64, f64)>> {
    jta.require(Domain::Temporal)?;
    let ds = jta.axis_s.uniform_step("t_s")?;
    let di = jta.axis_i.uniform_step("t_i")?;
    let (n, ni) = jta.shape();
    if n != ni {
        return Err(Error::InvalidParameter {
            name: "jta",
            reason: format!("difference profile needs a square grid, got {n}x{ni}"),
        });
    }
    let jti = jta.intensity();
    // Sample at row r on the line r + c ≡ k (mod n).
    let at = |k: usize, r: usize| jti[r * n + (k + n - r) % n];
    let by_sum: Vec<f64> = (0..n).map(|k| (0..n).map(|r| at(k, r)).sum()).collect();
    let pair = |k: usize| by_sum[k] + by_sum[(k + 1) % n];
    let top = (0..n).map(pair).fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::GridCoverage("joint temporal intensity is zero".into()));
    }
    // A pump narrower than the grid leaves the sum marginal flat; near-ties
    // resolve towards the grid centre, in units of half a line.
    let mid2 = 2 * ((n / 2 + n / 2) % n);
    let dist = |k: usize| {
        let d = (2 * k + 1).abs_diff(mid2);
        d.min(2 * n - d)
    };
    let k = (0..n)
        .filter(|&k| pair(k) >= top * (1.0 - 1e-6))
        .min_by_key(|&k| dist(k))
        .unwrap_or(0);
    // Point with unwrapped difference index d = r − c on line k or k + 1.
    // Row and column wrap independently, so d over [−n, n) visits every
    // sample of both lines once.
    let point = |d: i64| {
        let s = k as i64 + (k as i64 + d).rem_euclid(2);
        let r = (s + d).div_euclid(2).rem_euclid(n as i64) as usize;
        at(s as usize % n, r)
    };
    let (d0, peak) = (-(n as i64)..n as i64)
        .map(|d| (d, point(d)))
        .fold((0, f64::MIN), |b, p| if p.1 > b.1 { p } else { b });
    let step_fs = 0.5 * (ds * ds + di * di).sqrt() * FS_PER_S;
    let half = (n / 2) as i64;
    Ok((-half..half)
        .map(|m| (m as f64 * step_fs, point(d0 + m) / peak))
        .collect())
}

/// Full width at half maximum of a sampled profile around its maximum, with
/// linear interpolation between samples.
pub fn fwhm(profile: &[(f64, f64)]) -> Result<f64> {
    let (k0, peak) = profile
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (k, p)| if p.1 > b.1 { (k, p.1) } else { b });
    let half = 0.5 * peak;
    let crossing = |a: (f64, f64), b: (f64, f64)| a.0 + (a.1 - half) / (a.1 - b.1) * (b.0 - a.0);
    let right = (k0..profile.len() - 1)
        .find(|&k| profile[k + 1].1 < half)
        .map(|k| crossing(profile[k], profile[k + 1]));
    let left = (1..=k0)
        .rev()
        .find(|&k| profile[k - 1].1 < half)
        .map(|k| crossing(profile[k], profile[k - 1]));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::GridCoverage(
            "profile does not fall below half maximum inside the grid".into(),
        )),
    }
}

/// Entanglement time (fs): FWHM of the JTI along the anti-diagonal of
/// strongest t_s + t_i, measured as arc length.
pub fn entanglement_time_from_jti(jta: &JointSpectrum) -> Result<f64> {
    fwhm(&difference_profile(jta)?)
}

/// T_e = L/2 · |1/v_g,s − 1/v_g,i| in fs.
pub fn entanglement_time_gvm(cfg: &CrystalConfig, lambda_s_nm: f64, lambda_i_nm: f64) -> Result<f64> {
    let t = cfg.effective_temperature();
    let ng_s = cfg.model.group_index(lambda_s_nm, t)?;
    let ng_i = cfg.model.group_index(lambda_i_nm, t)?;
    Ok(0.5 * cfg.length_m() * (ng_s - ng_i).abs() / SPEED_OF_LIGHT * FS_PER_S)
}

/// Envelope sampled at an arbitrary point, α·φ; exposed for diagnostics and
/// tests that need the unnormalised amplitude.
pub fn jsa_value(cfg: &CrystalConfig, env: &PumpEnvelope, omega_s: f64, omega_i: f64) -> Result<Complex64> {
    Ok(pump_envelope(env, omega_s, omega_i) * phase_matching_function(cfg, omega_s, omega_i)?)
}
