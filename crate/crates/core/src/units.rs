//! Minimal unit-carrying values for the absorption-rate calculus.
//!
//! Values are stored in a cm/s/g/mol base. Multiplication and division
//! combine dimensions; addition and conversion check them.

use std::fmt;
use std::ops::{Div, Mul};

use crate::constants::GM_CM4_S;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dimension {
    pub length: i8,
    pub time: i8,
    pub mass: i8,
    pub amount: i8,
}

impl Dimension {
    pub const NONE: Dimension = Dimension::new(0, 0, 0, 0);
    pub const LENGTH: Dimension = Dimension::new(1, 0, 0, 0);
    pub const AREA: Dimension = Dimension::new(2, 0, 0, 0);
    pub const TIME: Dimension = Dimension::new(0, 1, 0, 0);
    pub const RATE: Dimension = Dimension::new(0, -1, 0, 0);
    pub const FLUX: Dimension = Dimension::new(-2, -1, 0, 0);
    pub const NUMBER_DENSITY: Dimension = Dimension::new(-3, 0, 0, 0);
    pub const MASS_DENSITY: Dimension = Dimension::new(-3, 0, 1, 0);
    pub const MOLAR_MASS: Dimension = Dimension::new(0, 0, 1, -1);
    pub const PER_AMOUNT: Dimension = Dimension::new(0, 0, 0, -1);
    /// Classical two-photon cross section, cm⁴·s.
    pub const TPA_CROSS_SECTION: Dimension = Dimension::new(4, 1, 0, 0);

    pub const fn new(length: i8, time: i8, mass: i8, amount: i8) -> Self {
        Self {
            length,
            time,
            mass,
            amount,
        }
    }

    fn combine(self, other: Self, sign: i8) -> Self {
        Self {
            length: self.length + sign * other.length,
            time: self.time + sign * other.time,
            mass: self.mass + sign * other.mass,
            amount: self.amount + sign * other.amount,
        }
    }

    pub fn powi(self, p: i8) -> Self {
        Self::new(self.length * p, self.time * p, self.mass * p, self.amount * p)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Dimension::NONE {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for (sym, e) in [
            ("cm", self.length),
            ("s", self.time),
            ("g", self.mass),
            ("mol", self.amount),
        ] {
            match e {
                0 => {}
                1 => parts.push(sym.to_string()),
                _ => parts.push(format!("{sym}^{e}")),
            }
        }
        write!(f, "{}", parts.join("·"))
    }
}

/// A named unit: scale to the cm/s/g/mol base plus its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub symbol: &'static str,
    pub scale: f64,
    pub dim: Dimension,
}

impl Unit {
    const fn new(symbol: &'static str, scale: f64, dim: Dimension) -> Self {
        Self { symbol, scale, dim }
    }

    pub const DIMENSIONLESS: Unit = Unit::new("dimensionless", 1.0, Dimension::NONE);
    pub const GM: Unit = Unit::new("GM", GM_CM4_S, Dimension::TPA_CROSS_SECTION);
    pub const CM4_S: Unit = Unit::new("cm4_s", 1.0, Dimension::TPA_CROSS_SECTION);
    pub const S: Unit = Unit::new("s", 1.0, Dimension::TIME);
    pub const PS: Unit = Unit::new("ps", 1e-12, Dimension::TIME);
    pub const FS: Unit = Unit::new("fs", 1e-15, Dimension::TIME);
    pub const CM: Unit = Unit::new("cm", 1.0, Dimension::LENGTH);
    pub const UM: Unit = Unit::new("um", 1e-4, Dimension::LENGTH);
    pub const NM: Unit = Unit::new("nm", 1e-7, Dimension::LENGTH);
    pub const CM2: Unit = Unit::new("cm2", 1.0, Dimension::AREA);
    pub const UM2: Unit = Unit::new("um2", 1e-8, Dimension::AREA);
    pub const PER_S: Unit = Unit::new("per_s", 1.0, Dimension::RATE);
    pub const PER_CM2_S: Unit = Unit::new("per_cm2_s", 1.0, Dimension::FLUX);
    /// 1/mL = 1/cm³.
    pub const PER_ML: Unit = Unit::new("per_mL", 1.0, Dimension::NUMBER_DENSITY);
    pub const PER_CM3: Unit = Unit::new("per_cm3", 1.0, Dimension::NUMBER_DENSITY);
    pub const MG_PER_ML: Unit = Unit::new("mg_per_mL", 1e-3, Dimension::MASS_DENSITY);
    pub const G_PER_ML: Unit = Unit::new("g_per_mL", 1.0, Dimension::MASS_DENSITY);
    pub const G_PER_MOL: Unit = Unit::new("g_per_mol", 1.0, Dimension::MOLAR_MASS);
    pub const ML: Unit = Unit::new("mL", 1.0, Dimension::new(3, 0, 0, 0));

    /// Units recognised as key suffixes in scenario files.
    pub const REGISTRY: &'static [Unit] = &[
        Unit::DIMENSIONLESS,
        Unit::GM,
        Unit::CM4_S,
        Unit::S,
        Unit::PS,
        Unit::FS,
        Unit::CM,
        Unit::UM,
        Unit::NM,
        Unit::CM2,
        Unit::UM2,
        Unit::PER_S,
        Unit::PER_CM2_S,
        Unit::PER_ML,
        Unit::PER_CM3,
        Unit::MG_PER_ML,
        Unit::G_PER_ML,
        Unit::G_PER_MOL,
    ];

    pub fn lookup(symbol: &str) -> Option<Unit> {
        Self::REGISTRY.iter().copied().find(|u| u.symbol == symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    base: f64,
    dim: Dimension,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self {
            base: value * unit.scale,
            dim: unit.dim,
        }
    }

    pub fn from_base(base: f64, dim: Dimension) -> Self {
        Self { base, dim }
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// Value in the cm/s/g/mol base.
    pub fn base_value(&self) -> f64 {
        self.base
    }

    pub fn value_in(&self, unit: Unit) -> Result<f64> {
        self.expect(unit.dim)?;
        Ok(self.base / unit.scale)
    }

    pub fn expect(&self, dim: Dimension) -> Result<()> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                left: self.dim.to_string(),
                right: dim.to_string(),
            })
        }
    }

    pub fn try_add(self, other: Quantity) -> Result<Quantity> {
        other.expect(self.dim)?;
        Ok(Quantity::from_base(self.base + other.base, self.dim))
    }

    pub fn powi(self, p: i8) -> Quantity {
        Quantity::from_base(self.base.powi(p as i32), self.dim.powi(p))
    }

    pub fn scale(self, factor: f64) -> Quantity {
        Quantity::from_base(self.base * factor, self.dim)
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::from_base(self.base * rhs.base, self.dim.combine(rhs.dim, 1))
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, rhs: Quantity) -> Quantity {
        Quantity::from_base(self.base / rhs.base, self.dim.combine(rhs.dim, -1))
    }
}
