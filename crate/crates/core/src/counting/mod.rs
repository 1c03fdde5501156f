//! Detection chain, click-stream Monte Carlo and coincidence estimators.
//!
//! Channel conventions: the pair topology uses channels 0 and 1, one photon
//! of each pair per channel. The heralded topology uses channel 0 as the
//! herald H and channels 1, 2 as the two outputs of the second splitter.

mod estimate;
mod simulate;
mod tags;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimate::{
    correct_rates, count_coincidences, heralded_g2, match_pairs, Coincidence, CountSummary, G2Estimate, Rate,
};
pub use simulate::{simulate_tags, simulate_windows, SampleModel, MAX_EXPECTED_EVENTS};
pub use tags::TagStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Two channels, one per photon.
    Pair,
    /// Herald plus a 50:50 split of the partner photon.
    Heralded,
}

impl Topology {
    pub fn channels(self) -> usize {
        match self {
            Topology::Pair => 2,
            Topology::Heralded => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Pair => "pair",
            Topology::Heralded => "heralded",
        }
    }
}

fn default_jitter() -> f64 {
    0.35
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionChain {
    pub eta_coup: f64,
    pub eta_inser: f64,
    pub eta_det: f64,
    /// One entry per channel; empty means no dark counts.
    #[serde(default)]
    pub dark_rate_per_s: Vec<f64>,
    pub window_ns: f64,
    pub integration_ms: f64,
    pub topology: Topology,
    /// FWHM of the signal−idler arrival difference.
    #[serde(default = "default_jitter")]
    pub jitter_fwhm_ns: f64,
}

impl DetectionChain {
    /// Fiber-coupled chain: 90 % coupling, 43 % insertion, 60 % detection,
    /// 1 ns window and 100 ms integration.
    pub fn paper() -> Self {
        Self {
            eta_coup: 0.9,
            eta_inser: 0.43,
            eta_det: 0.6,
            dark_rate_per_s: Vec::new(),
            window_ns: 1.0,
            integration_ms: 100.0,
            topology: Topology::Pair,
            jitter_fwhm_ns: default_jitter(),
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn with_dark(mut self, dark_rate_per_s: Vec<f64>) -> Self {
        self.dark_rate_per_s = dark_rate_per_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_coup", self.eta_coup),
            ("eta_inser", self.eta_inser),
            ("eta_det", self.eta_det),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    quantity: name,
                    value: v,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        for (name, v) in [
            ("window_ns", self.window_ns),
            ("integration_ms", self.integration_ms),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        if !(self.jitter_fwhm_ns >= 0.0 && self.jitter_fwhm_ns.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "jitter_fwhm_ns",
                reason: format!("must be nonnegative, got {}", self.jitter_fwhm_ns),
            });
        }
        let n = self.topology.channels();
        if !self.dark_rate_per_s.is_empty() && self.dark_rate_per_s.len() != n {
            return Err(Error::InvalidParameter {
                name: "dark_rate_per_s",
                reason: format!(
                    "{} topology has {n} channels, got {} dark rates",
                    self.topology.as_str(),
                    self.dark_rate_per_s.len()
                ),
            });
        }
        if let Some(&d) = self.dark_rate_per_s.iter().find(|d| !(**d >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "dark_rate_per_s",
                reason: format!("must be nonnegative, got {d}"),
            });
        }
        Ok(())
    }

    /// Dark rate per channel, zero-filled.
    pub fn dark_rates(&self) -> Vec<f64> {
        if self.dark_rate_per_s.is_empty() {
            vec![0.0; self.topology.channels()]
        } else {
            self.dark_rate_per_s.clone()
        }
    }

    pub fn integration_s(&self) -> f64 {
        self.integration_ms * 1e-3
    }
}

/// (η_singles, η_coin) = (η_coup·η_inser·η_det, η_coup·η_inser²·η_det²).
pub fn chain_efficiencies(chain: &DetectionChain) -> (f64, f64) {
    let per_photon = chain.eta_inser * chain.eta_det;
    (
        chain.eta_coup * per_photon,
        chain.eta_coup * per_photon * per_photon,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRates {
    pub pair_rate_per_s_per_uw: f64,
    pub pump_uw: f64,
}

impl SourceRates {
    /// Free-space pair rate of 4.5e5 pairs/s/µW.
    pub fn paper(pump_uw: f64) -> Self {
        Self {
            pair_rate_per_s_per_uw: 4.5e5,
            pump_uw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pair_rate_per_s_per_uw", self.pair_rate_per_s_per_uw),
            ("pump_uw", self.pump_uw),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be nonnegative, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn pair_rate(&self) -> f64 {
        self.pair_rate_per_s_per_uw * self.pump_uw
    }
}

#[cfg(test)]
mod tests;
