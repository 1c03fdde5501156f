//! Physical constants and unit conversion factors.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Avogadro constant, 1/mol (SI 2019 exact value).
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// One Goeppert-Mayer unit in cm^4 s (per photon).
pub const GM_CM4_S: f64 = 1e-50;

pub const FS_PER_S: f64 = 1e15;
pub const NS_PER_S: f64 = 1e9;
pub const NM_PER_M: f64 = 1e9;
pub const UM_PER_M: f64 = 1e6;
pub const CM2_PER_UM2: f64 = 1e-8;
