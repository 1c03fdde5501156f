use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RATE_TABLE_HEADER: [&str; 9] = [
    "P_SPDC_pW",
    "R_s1",
    "R_s1_err",
    "R_s2",
    "R_s2_err",
    "R_coin",
    "R_coin_err",
    "mode",
    "label",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttenuationMode {
    Pump,
    Spdc,
}

impl fmt::Display for AttenuationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttenuationMode::Pump => "pump",
            AttenuationMode::Spdc => "spdc",
        })
    }
}

/// One measurement point. Rates and uncertainties in counts/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    #[serde(rename = "P_SPDC_pW")]
    pub p_spdc_pw: f64,
    #[serde(rename = "R_s1")]
    pub r_s1: f64,
    #[serde(rename = "R_s1_err")]
    pub r_s1_err: f64,
    #[serde(rename = "R_s2")]
    pub r_s2: f64,
    #[serde(rename = "R_s2_err")]
    pub r_s2_err: f64,
    #[serde(rename = "R_coin")]
    pub r_coin: f64,
    #[serde(rename = "R_coin_err")]
    pub r_coin_err: f64,
    pub mode: AttenuationMode,
    pub label: String,
}

impl RateRow {
    fn check(&self) -> std::result::Result<(), String> {
        let fields = [
            ("P_SPDC_pW", self.p_spdc_pw),
            ("R_s1", self.r_s1),
            ("R_s1_err", self.r_s1_err),
            ("R_s2", self.r_s2),
            ("R_s2_err", self.r_s2_err),
            ("R_coin", self.r_coin),
            ("R_coin_err", self.r_coin_err),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(format!("{name} must be finite and nonnegative, got {v}"));
        }
        if self.label.trim().is_empty() {
            return Err("label must be nonempty".into());
        }
        Ok(())
    }

    /// Largest relative uncertainty of the two singles rates.
    pub fn singles_relative_error(&self) -> f64 {
        let rel = |v: f64, e: f64| if v > 0.0 { e / v } else { f64::INFINITY };
        rel(self.r_s1, self.r_s1_err).max(rel(self.r_s2, self.r_s2_err))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    /// Parse the rate-table CSV. Lines starting with `#` are comments.
    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: origin.to_string(),
            line: line as usize,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::EmptyTable(origin.to_string()));
        }
        if headers.iter().ne(RATE_TABLE_HEADER) {
            let line = rdr.position().line();
            return Err(parse_err(
                line,
                format!(
                    "header must be `{}`, got `{}`",
                    RATE_TABLE_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let row: RateRow = rec
                .deserialize(Some(&headers))
                .map_err(|e| parse_err(line, e.to_string()))?;
            row.check().map_err(|m| parse_err(line, m))?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::EmptyTable(origin.to_string()));
        }
        Ok(Self { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    pub fn rows_in(&self, mode: AttenuationMode) -> impl Iterator<Item = &RateRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// Modes present, in a fixed order.
    pub fn modes(&self) -> Vec<AttenuationMode> {
        [AttenuationMode::Pump, AttenuationMode::Spdc]
            .into_iter()
            .filter(|m| self.rows.iter().any(|r| r.mode == *m))
            .collect()
    }

    /// Copy without the rows whose singles relative error reaches `threshold`.
    pub fn without_flagged(&self, threshold: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .filter(|r| r.singles_relative_error() < threshold)
                .cloned()
                .collect(),
        }
    }
}
