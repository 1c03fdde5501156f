//! Entangled two-photon absorption (eTPA) feasibility estimates.
//!
//! Every quantity passes through [`Quantity`], so a mismatched unit is a
//! dimension error rather than a silently wrong number.

mod scenario;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::AVOGADRO;
use crate::error::{Error, Result};
use crate::units::{Dimension, Quantity, Unit};

pub use scenario::{EtpaScenario, ScenarioField, SCENARIO_FIELDS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusConfig {
    pub wavelength_nm: f64,
    pub numerical_aperture: f64,
}

impl FocusConfig {
    pub fn new(wavelength_nm: f64, numerical_aperture: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "wavelength_nm",
                reason: format!("must be positive, got {wavelength_nm}"),
            });
        }
        if !(numerical_aperture > 0.0 && numerical_aperture < 1.5) {
            return Err(Error::OutOfRange {
                quantity: "numerical_aperture",
                value: numerical_aperture,
                min: 0.0,
                max: 1.5,
            });
        }
        Ok(Self {
            wavelength_nm,
            numerical_aperture,
        })
    }
}

fn positive(name: &'static str, q: Quantity, dim: Dimension) -> Result<f64> {
    q.expect(dim)?;
    let v = q.base_value();
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive, got {v} (base units)"),
        });
    }
    Ok(v)
}

fn nonnegative(name: &'static str, q: Quantity, dim: Dimension) -> Result<f64> {
    q.expect(dim)?;
    let v = q.base_value();
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("must be nonnegative, got {v} (base units)"),
        });
    }
    Ok(v)
}

/// Airy-disc area A_e = π/4 · (1.22 λ/NA)².
pub fn entanglement_area(fc: &FocusConfig) -> Quantity {
    let diameter = Quantity::new(1.22 * fc.wavelength_nm / fc.numerical_aperture, Unit::NM);
    diameter.powi(2).scale(PI / 4.0)
}

/// σ_e = K · δ_c / (T_e · A_e).
pub fn entangled_cross_section(
    delta_c: Quantity,
    t_e: Quantity,
    a_e: Quantity,
    constant: f64,
) -> Result<Quantity> {
    nonnegative("delta_c", delta_c, Dimension::TPA_CROSS_SECTION)?;
    positive("T_e", t_e, Dimension::TIME)?;
    positive("A_e", a_e, Dimension::AREA)?;
    let sigma = (delta_c / (t_e * a_e)).scale(constant);
    sigma.expect(Dimension::AREA)?;
    Ok(sigma)
}

/// φ = pair rate / area.
pub fn pair_flux(pair_rate: Quantity, area: Quantity) -> Result<Quantity> {
    nonnegative("pair_rate", pair_rate, Dimension::RATE)?;
    positive("area", area, Dimension::AREA)?;
    Ok(pair_rate / area)
}

/// Molecules per volume from mass concentration and molar mass.
pub fn molecule_density(mass_concentration: Quantity, molar_mass: Quantity) -> Result<Quantity> {
    nonnegative("mass_concentration", mass_concentration, Dimension::MASS_DENSITY)?;
    positive("molar_mass", molar_mass, Dimension::MOLAR_MASS)?;
    let avogadro = Quantity::from_base(AVOGADRO, Dimension::PER_AMOUNT);
    let n = mass_concentration / molar_mass * avogadro;
    n.expect(Dimension::NUMBER_DENSITY)?;
    Ok(n)
}

/// Sphere of the given diameter, (π/6)·d³.
pub fn illuminated_volume(diameter: Quantity) -> Result<Quantity> {
    positive("spot_diameter", diameter, Dimension::LENGTH)?;
    Ok(diameter.powi(3).scale(PI / 6.0))
}

/// Per-molecule rate × density × illuminated volume.
pub fn volume_rate(per_molecule: Quantity, density: Quantity, diameter: Quantity) -> Result<Quantity> {
    nonnegative("per_molecule_rate", per_molecule, Dimension::RATE)?;
    nonnegative("density", density, Dimension::NUMBER_DENSITY)?;
    let total = per_molecule * density * illuminated_volume(diameter)?;
    total.expect(Dimension::RATE)?;
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpaRates {
    pub entangled: Quantity,
    pub classical: Quantity,
    pub total: Quantity,
}

/// R_eTPA = σ_e·φ, R_cTPA = δ_c·φ², per molecule.
pub fn tpa_rate(sigma_e: Quantity, delta_c: Quantity, flux: Quantity) -> Result<TpaRates> {
    nonnegative("sigma_e", sigma_e, Dimension::AREA)?;
    nonnegative("delta_c", delta_c, Dimension::TPA_CROSS_SECTION)?;
    nonnegative("phi_pair", flux, Dimension::FLUX)?;
    let entangled = sigma_e * flux;
    let classical = delta_c * flux.powi(2);
    let total = entangled.try_add(classical)?;
    total.expect(Dimension::RATE)?;
    Ok(TpaRates {
        entangled,
        classical,
        total,
    })
}

/// The full estimate chain with every value in the unit named by its key.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtpaReport {
    pub A_e_um2: f64,
    /// "input" or "airy_disc".
    pub A_e_source: String,
    pub sigma_e_cm2: f64,
    pub phi_pair_per_cm2_s: f64,
    pub R_eTPA_per_s_per_molecule: f64,
    pub R_cTPA_per_s_per_molecule: f64,
    pub R_total_per_s_per_molecule: f64,
    pub density_per_mL: f64,
    pub illuminated_volume_mL: f64,
    pub R_eTPA_volume_per_s: f64,
    pub R_cTPA_volume_per_s: f64,
    pub R_total_volume_per_s: f64,
}

pub fn evaluate(scn: &EtpaScenario) -> Result<EtpaReport> {
    let (a_e, source) = match (scn.a_e, scn.focus) {
        (Some(a), _) => (a, "input"),
        (None, Some(fc)) => (entanglement_area(&fc), "airy_disc"),
        (None, None) => {
            return Err(Error::Schema(
                "need A_e or both wavelength and numerical_aperture".into(),
            ))
        }
    };
    let sigma_e = entangled_cross_section(scn.delta_c, scn.t_e, a_e, scn.cross_section_constant)?;
    let flux = match (scn.phi_pair, scn.pair_rate) {
        (Some(phi), _) => phi,
        (None, Some(rate)) => pair_flux(rate, a_e)?,
        (None, None) => return Err(Error::Schema("need phi_pair or pair_rate".into())),
    };
    let rates = tpa_rate(sigma_e, scn.delta_c, flux)?;
    let density = match (scn.density, scn.mass_concentration, scn.molar_mass) {
        (Some(n), _, _) => n,
        (None, Some(c), Some(m)) => molecule_density(c, m)?,
        _ => {
            return Err(Error::Schema(
                "need density or both mass_concentration and molar_mass".into(),
            ))
        }
    };
    let volume = illuminated_volume(scn.spot_diameter)?;
    let e_vol = volume_rate(rates.entangled, density, scn.spot_diameter)?;
    let c_vol = volume_rate(rates.classical, density, scn.spot_diameter)?;
    Ok(EtpaReport {
        A_e_um2: a_e.value_in(Unit::UM2)?,
        A_e_source: source.to_string(),
        sigma_e_cm2: sigma_e.value_in(Unit::CM2)?,
        phi_pair_per_cm2_s: flux.value_in(Unit::PER_CM2_S)?,
        R_eTPA_per_s_per_molecule: rates.entangled.value_in(Unit::PER_S)?,
        R_cTPA_per_s_per_molecule: rates.classical.value_in(Unit::PER_S)?,
        R_total_per_s_per_molecule: rates.total.value_in(Unit::PER_S)?,
        density_per_mL: density.value_in(Unit::PER_ML)?,
        illuminated_volume_mL: volume.value_in(Unit::ML)?,
        R_eTPA_volume_per_s: e_vol.value_in(Unit::PER_S)?,
        R_cTPA_volume_per_s: c_vol.value_in(Unit::PER_S)?,
        R_total_volume_per_s: e_vol.try_add(c_vol)?.value_in(Unit::PER_S)?,
    })
}

impl EtpaReport {
    /// Aligned text table of the estimate chain.
    pub fn to_table(&self) -> String {
        let rows = [
            ("entanglement area A_e", self.A_e_um2, "um^2"),
            ("entangled cross section sigma_e", self.sigma_e_cm2, "cm^2"),
            ("pair flux phi", self.phi_pair_per_cm2_s, "cm^-2 s^-1"),
            ("R_eTPA per molecule", self.R_eTPA_per_s_per_molecule, "s^-1"),
            ("R_cTPA per molecule", self.R_cTPA_per_s_per_molecule, "s^-1"),
            ("molecule density", self.density_per_mL, "mL^-1"),
            ("illuminated volume", self.illuminated_volume_mL, "mL"),
            ("R_eTPA in volume", self.R_eTPA_volume_per_s, "s^-1"),
            ("R_cTPA in volume", self.R_cTPA_volume_per_s, "s^-1"),
        ];
        let mut out = String::new();
        let _ = writeln!(out, "{:<34} {:>12}  unit", "quantity", "value");
        for (name, value, unit) in rows {
            let _ = writeln!(out, "{name:<34} {value:>12.4e}  {unit}");
        }
        let _ = writeln!(out, "A_e source: {}", self.A_e_source);
        out
    }
}

#[cfg(test)]
mod tests;
