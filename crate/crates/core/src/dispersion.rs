//! Temperature-dependent refractive index of MgO-doped congruent lithium
//! niobate (extraordinary axis).
//!
//! Boundary functions take wavelengths in nm and temperatures in °C; internal
//! arithmetic uses µm for the Sellmeier polynomial and SI elsewhere.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{FS_PER_S, NM_PER_M, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Coefficient file shipped with the crate.
pub const BUILTIN_MGO_CLN_E: &str = include_str!("../data/mgo_cln_e.toml");

/// Angular optical frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OpticalFrequency(f64);

impl OpticalFrequency {
    pub fn new(omega: f64) -> Result<Self> {
        if omega.is_finite() && omega > 0.0 {
            Ok(Self(omega))
        } else {
            Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("angular frequency must be positive, got {omega}"),
            })
        }
    }

    pub fn from_wavelength_nm(lambda_nm: f64) -> Result<Self> {
        if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "wavelength",
                reason: format!("wavelength must be positive, got {lambda_nm} nm"),
            });
        }
        Ok(Self(omega_from_nm(lambda_nm)))
    }

    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn wavelength_nm(self) -> f64 {
        nm_from_omega(self.0)
    }
}

/// Vacuum wavelength (nm) to angular frequency (rad/s).
pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * NM_PER_M / lambda_nm
}

/// Angular frequency (rad/s) to vacuum wavelength (nm).
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * NM_PER_M / omega
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub t_ref: f64,
    pub t_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityWindow {
    /// Wavelength bounds in µm.
    pub wavelength_um: [f64; 2],
    /// Temperature bounds in °C.
    pub temperature_c: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialInfo {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationInfo {
    pub axis: String,
}

#[derive(Debug, Deserialize)]
struct MaterialFile {
    format_version: u32,
    material: MaterialInfo,
    polarization: PolarizationInfo,
    coefficients: SellmeierCoefficients,
    validity: ValidityWindow,
}

/// Sellmeier model in the temperature-dependent form used for MgO:LiNbO3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub material: MaterialInfo,
    pub polarization: PolarizationInfo,
    pub coefficients: SellmeierCoefficients,
    pub validity: ValidityWindow,
}

/// n² and its first two derivatives with respect to x = λ² (µm²).
struct SquaredIndex {
    value: f64,
    d_dx: f64,
    d2_dx2: f64,
}

impl SellmeierModel {
    /// Built-in extraordinary-axis model for 5 mol% MgO:CLN.
    pub fn mgo_cln() -> Self {
        Self::from_toml_str(BUILTIN_MGO_CLN_E).expect("builtin material file is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MaterialFile = toml::from_str(text)?;
        if file.format_version != 1 {
            return Err(Error::Schema(format!(
                "unsupported material format_version {}",
                file.format_version
            )));
        }
        if file.polarization.axis != "extraordinary" {
            return Err(Error::Schema(format!(
                "only extraordinary-axis coefficients are supported, got `{}`",
                file.polarization.axis
            )));
        }
        let [wl_lo, wl_hi] = file.validity.wavelength_um;
        let [t_lo, t_hi] = file.validity.temperature_c;
        if !(wl_lo > 0.0 && wl_lo < wl_hi && t_lo < t_hi) {
            return Err(Error::Schema("validity bounds must be increasing".into()));
        }
        Ok(Self {
            material: file.material,
            polarization: file.polarization,
            coefficients: file.coefficients,
            validity: file.validity,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn wavelength_range_nm(&self) -> (f64, f64) {
        let [lo, hi] = self.validity.wavelength_um;
        (lo * 1e3, hi * 1e3)
    }

    pub fn temperature_range_c(&self) -> (f64, f64) {
        let [lo, hi] = self.validity.temperature_c;
        (lo, hi)
    }

    pub fn check_wavelength(&self, lambda_nm: f64) -> Result<()> {
        let (lo, hi) = self.wavelength_range_nm();
        if lambda_nm.is_finite() && (lo..=hi).contains(&lambda_nm) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                quantity: "wavelength [nm]",
                value: lambda_nm,
                min: lo,
                max: hi,
            })
        }
    }

    pub fn check_temperature(&self, theta_c: f64) -> Result<()> {
        let (lo, hi) = self.temperature_range_c();
        if theta_c.is_finite() && (lo..=hi).contains(&theta_c) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                quantity: "temperature [degC]",
                value: theta_c,
                min: lo,
                max: hi,
            })
        }
    }

    fn check(&self, lambda_nm: f64, theta_c: f64) -> Result<()> {
        self.check_wavelength(lambda_nm)?;
        self.check_temperature(theta_c)
    }

    fn squared_index(&self, lambda_um: f64, theta_c: f64) -> SquaredIndex {
        let c = &self.coefficients;
        let f = (theta_c - c.t_ref) * (theta_c + c.t_shift);
        let x = lambda_um * lambda_um;
        let uv_num = c.a2 + c.b2 * f;
        let uv_pole = (c.a3 + c.b3 * f).powi(2);
        let ir_num = c.a4 + c.b4 * f;
        let ir_pole = c.a5 * c.a5;
        let du = x - uv_pole;
        let di = x - ir_pole;
        SquaredIndex {
            value: c.a1 + c.b1 * f + uv_num / du + ir_num / di - c.a6 * x,
            d_dx: -uv_num / (du * du) - ir_num / (di * di) - c.a6,
            d2_dx2: 2.0 * uv_num / (du * du * du) + 2.0 * ir_num / (di * di * di),
        }
    }

    /// n, dn/dλ and d²n/dλ² with λ in µm.
    fn index_derivatives(&self, lambda_um: f64, theta_c: f64) -> (f64, f64, f64) {
        let s = self.squared_index(lambda_um, theta_c);
        let n = s.value.sqrt();
        let m1 = 2.0 * lambda_um * s.d_dx;
        let m2 = 2.0 * s.d_dx + 4.0 * lambda_um * lambda_um * s.d2_dx2;
        let n1 = m1 / (2.0 * n);
        let n2 = m2 / (2.0 * n) - m1 * m1 / (4.0 * n * n * n);
        (n, n1, n2)
    }

    /// Extraordinary refractive index at vacuum wavelength `lambda_nm` and
    /// temperature `theta_c`.
    pub fn refractive_index(&self, lambda_nm: f64, theta_c: f64) -> Result<f64> {
        self.check(lambda_nm, theta_c)?;
        Ok(self.squared_index(lambda_nm * 1e-3, theta_c).value.sqrt())
    }

    /// Analytic dn/dλ in 1/nm.
    pub fn index_slope_per_nm(&self, lambda_nm: f64, theta_c: f64) -> Result<f64> {
        self.check(lambda_nm, theta_c)?;
        let (_, n1, _) = self.index_derivatives(lambda_nm * 1e-3, theta_c);
        Ok(n1 * 1e-3)
    }

    /// Group index n_g = n − λ dn/dλ.
    pub fn group_index(&self, lambda_nm: f64, theta_c: f64) -> Result<f64> {
        self.check(lambda_nm, theta_c)?;
        let lambda_um = lambda_nm * 1e-3;
        let (n, n1, _) = self.index_derivatives(lambda_um, theta_c);
        Ok(n - lambda_um * n1)
    }

    /// Group-velocity dispersion d²k/dω² in s²/m.
    pub fn group_velocity_dispersion(&self, lambda_nm: f64, theta_c: f64) -> Result<f64> {
        self.check(lambda_nm, theta_c)?;
        let lambda_um = lambda_nm * 1e-3;
        let (_, _, n2_um) = self.index_derivatives(lambda_um, theta_c);
        let lambda_m = lambda_nm / NM_PER_M;
        let n2_m = n2_um * 1e12;
        Ok(lambda_m.powi(3) / (2.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT) * n2_m)
    }

    /// Group delay dispersion of a crystal of `length_mm`, in fs².
    pub fn group_delay_dispersion(&self, lambda_nm: f64, theta_c: f64, length_mm: f64) -> Result<f64> {
        if !(length_mm.is_finite() && length_mm >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("crystal length must be non-negative, got {length_mm} mm"),
            });
        }
        let gvd = self.group_velocity_dispersion(lambda_nm, theta_c)?;
        Ok(gvd * length_mm * 1e-3 * FS_PER_S * FS_PER_S)
    }

    /// Wavenumber k = n ω / c in 1/m.
    pub fn wavenumber(&self, lambda_nm: f64, theta_c: f64) -> Result<f64> {
        let n = self.refractive_index(lambda_nm, theta_c)?;
        Ok(2.0 * PI * n * NM_PER_M / lambda_nm)
    }
}

impl Default for SellmeierModel {
    fn default() -> Self {
        Self::mgo_cln()
    }
}
