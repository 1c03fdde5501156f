use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use super::FocusConfig;
use crate::error::{Error, Result};
use crate::units::{Quantity, Unit};

/// A scenario key: `<name>_<unit>` where the unit must carry the field's
/// dimension. `canonical` is the unit used when writing scenarios back out.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioField {
    pub name: &'static str,
    pub canonical: Unit,
    pub required: bool,
}

pub const SCENARIO_FIELDS: &[ScenarioField] = &[
    ScenarioField {
        name: "delta_c",
        canonical: Unit::GM,
        required: true,
    },
    ScenarioField {
        name: "T_e",
        canonical: Unit::FS,
        required: true,
    },
    ScenarioField {
        name: "spot_diameter",
        canonical: Unit::UM,
        required: true,
    },
    ScenarioField {
        name: "A_e",
        canonical: Unit::UM2,
        required: false,
    },
    ScenarioField {
        name: "wavelength",
        canonical: Unit::NM,
        required: false,
    },
    ScenarioField {
        name: "numerical_aperture",
        canonical: Unit::DIMENSIONLESS,
        required: false,
    },
    ScenarioField {
        name: "pair_rate",
        canonical: Unit::PER_S,
        required: false,
    },
    ScenarioField {
        name: "phi_pair",
        canonical: Unit::PER_CM2_S,
        required: false,
    },
    ScenarioField {
        name: "density",
        canonical: Unit::PER_ML,
        required: false,
    },
    ScenarioField {
        name: "mass_concentration",
        canonical: Unit::MG_PER_ML,
        required: false,
    },
    ScenarioField {
        name: "molar_mass",
        canonical: Unit::G_PER_MOL,
        required: false,
    },
    ScenarioField {
        name: "cross_section_constant",
        canonical: Unit::DIMENSIONLESS,
        required: false,
    },
];

const TEXT_KEYS: &[&str] = &["label", "description"];

#[derive(Debug, Clone, PartialEq)]
pub struct EtpaScenario {
    pub label: Option<String>,
    pub delta_c: Quantity,
    pub t_e: Quantity,
    pub spot_diameter: Quantity,
    pub a_e: Option<Quantity>,
    pub focus: Option<FocusConfig>,
    pub pair_rate: Option<Quantity>,
    pub phi_pair: Option<Quantity>,
    pub density: Option<Quantity>,
    pub mass_concentration: Option<Quantity>,
    pub molar_mass: Option<Quantity>,
    /// Proportionality constant between δ_c/(T_e·A_e) and σ_e.
    pub cross_section_constant: f64,
}

fn split_key(key: &str) -> Result<(&'static ScenarioField, Unit)> {
    let field = SCENARIO_FIELDS
        .iter()
        .filter(|f| key == f.name || key.starts_with(&format!("{}_", f.name)))
        .max_by_key(|f| f.name.len());
    let Some(field) = field else {
        return Err(Error::Schema(format!("unknown scenario key `{key}`")));
    };
    if key == field.name {
        return Err(Error::Schema(format!(
            "key `{key}` needs a unit suffix, e.g. `{key}_{}`",
            field.canonical.symbol
        )));
    }
    let suffix = &key[field.name.len() + 1..];
    let unit =
        Unit::lookup(suffix).ok_or_else(|| Error::Schema(format!("key `{key}`: unknown unit `{suffix}`")))?;
    if unit.dim != field.canonical.dim {
        return Err(Error::Schema(format!(
            "key `{key}`: unit `{suffix}` has dimension {}, expected {}",
            unit.dim, field.canonical.dim
        )));
    }
    Ok((field, unit))
}

impl EtpaScenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(map) = value else {
            return Err(Error::Schema("scenario must be a JSON object".into()));
        };
        Self::from_map(&map)
    }

    fn from_map(map: &Map<String, Value>) -> Result<Self> {
        let mut label = None;
        let mut values: BTreeMap<&'static str, (String, Quantity)> = BTreeMap::new();
        for (key, v) in map {
            if TEXT_KEYS.contains(&key.as_str()) {
                if key == "label" {
                    label = v.as_str().map(str::to_string);
                }
                continue;
            }
            let (field, unit) = split_key(key)?;
            let x = v
                .as_f64()
                .ok_or_else(|| Error::Schema(format!("key `{key}` must be a number, got {v}")))?;
            if let Some((other, _)) = values.insert(field.name, (key.clone(), Quantity::new(x, unit))) {
                return Err(Error::Schema(format!(
                    "keys `{other}` and `{key}` give the same quantity"
                )));
            }
        }
        for f in SCENARIO_FIELDS.iter().filter(|f| f.required) {
            if !values.contains_key(f.name) {
                return Err(Error::Schema(format!(
                    "missing required key `{}_{}`",
                    f.name, f.canonical.symbol
                )));
            }
        }
        let get = |name: &str| values.get(name).map(|(_, q)| *q);
        let focus = match (get("wavelength"), get("numerical_aperture")) {
            (Some(l), Some(na)) => Some(FocusConfig::new(l.value_in(Unit::NM)?, na.base_value())?),
            (None, None) => None,
            _ => {
                return Err(Error::Schema(
                    "wavelength and numerical_aperture must be given together".into(),
                ))
            }
        };
        let scn = Self {
            label,
            delta_c: get("delta_c").expect("required"),
            t_e: get("T_e").expect("required"),
            spot_diameter: get("spot_diameter").expect("required"),
            a_e: get("A_e"),
            focus,
            pair_rate: get("pair_rate"),
            phi_pair: get("phi_pair"),
            density: get("density"),
            mass_concentration: get("mass_concentration"),
            molar_mass: get("molar_mass"),
            cross_section_constant: get("cross_section_constant").map_or(1.0, |q| q.base_value()),
        };
        if scn.a_e.is_none() && scn.focus.is_none() {
            return Err(Error::Schema(
                "need `A_e_um2` or both `wavelength_nm` and `numerical_aperture_dimensionless`".into(),
            ));
        }
        if scn.pair_rate.is_none() && scn.phi_pair.is_none() {
            return Err(Error::Schema(
                "need `pair_rate_per_s` or `phi_pair_per_cm2_s`".into(),
            ));
        }
        if scn.density.is_none() && (scn.mass_concentration.is_none() || scn.molar_mass.is_none()) {
            return Err(Error::Schema(
                "need `density_per_mL` or both `mass_concentration_mg_per_mL` and `molar_mass_g_per_mol`"
                    .into(),
            ));
        }
        Ok(scn)
    }

    /// Scenario written back with canonical unit suffixes.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        if let Some(l) = &self.label {
            map.insert("label".into(), Value::from(l.clone()));
        }
        let mut put = |name: &str, q: Option<Quantity>| {
            if let Some(q) = q {
                let f = SCENARIO_FIELDS
                    .iter()
                    .find(|f| f.name == name)
                    .expect("known field");
                let v = q.value_in(f.canonical).expect("dimension checked at parse");
                map.insert(format!("{}_{}", f.name, f.canonical.symbol), Value::from(v));
            }
        };
        put("delta_c", Some(self.delta_c));
        put("T_e", Some(self.t_e));
        put("spot_diameter", Some(self.spot_diameter));
        put("A_e", self.a_e);
        put(
            "wavelength",
            self.focus.map(|f| Quantity::new(f.wavelength_nm, Unit::NM)),
        );
        put(
            "numerical_aperture",
            self.focus
                .map(|f| Quantity::new(f.numerical_aperture, Unit::DIMENSIONLESS)),
        );
        put("pair_rate", self.pair_rate);
        put("phi_pair", self.phi_pair);
        put("density", self.density);
        put("mass_concentration", self.mass_concentration);
        put("molar_mass", self.molar_mass);
        put(
            "cross_section_constant",
            Some(Quantity::new(self.cross_section_constant, Unit::DIMENSIONLESS)),
        );
        Value::Object(map)
    }
}
