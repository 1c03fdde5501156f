use serde::{Deserialize, Serialize};

use super::{TagStream, Topology};
use crate::error::{Error, Result};

/// A Poisson-counted rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub counts: u64,
    pub rate_per_s: f64,
    pub uncertainty_per_s: f64,
}

impl Rate {
    pub fn from_counts(counts: u64, integration_s: f64) -> Self {
        Self {
            counts,
            rate_per_s: counts as f64 / integration_s,
            uncertainty_per_s: (counts as f64).sqrt() / integration_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    pub channels: [usize; 2],
    pub rate: Rate,
    /// R_a·R_b·τ from the measured singles.
    pub accidental_per_s: f64,
    pub accidental_uncertainty_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub topology: Topology,
    pub integration_s: f64,
    pub window_ns: f64,
    pub windows: usize,
    pub singles: Vec<Rate>,
    pub coincidences: Vec<Coincidence>,
    /// H∧1∧2 for the heralded topology.
    pub triple: Option<Rate>,
    /// Dark and accidental counts subtracted.
    pub corrected: bool,
    /// Some corrected value went negative and was set to zero.
    pub clamped: bool,
}

impl CountSummary {
    /// Raw summary from counts over `integration_s` seconds.
    pub fn from_counts(
        topology: Topology,
        integration_s: f64,
        window_ns: f64,
        windows: usize,
        singles: &[u64],
        coincidences: &[([usize; 2], u64)],
        triple: Option<u64>,
    ) -> Self {
        let singles: Vec<Rate> = singles
            .iter()
            .map(|&n| Rate::from_counts(n, integration_s))
            .collect();
        let tau = window_ns * 1e-9;
        let coincidences = coincidences
            .iter()
            .map(|&([a, b], n)| {
                let (ra, rb) = (singles[a], singles[b]);
                Coincidence {
                    channels: [a, b],
                    rate: Rate::from_counts(n, integration_s),
                    accidental_per_s: ra.rate_per_s * rb.rate_per_s * tau,
                    accidental_uncertainty_per_s: tau
                        * (rb.rate_per_s * ra.uncertainty_per_s).hypot(ra.rate_per_s * rb.uncertainty_per_s),
                }
            })
            .collect();
        Self {
            topology,
            integration_s,
            window_ns,
            windows,
            singles,
            coincidences,
            triple: triple.map(|n| Rate::from_counts(n, integration_s)),
            corrected: false,
            clamped: false,
        }
    }

    pub fn coincidence(&self, a: usize, b: usize) -> Option<&Coincidence> {
        self.coincidences
            .iter()
            .find(|c| c.channels == [a, b] || c.channels == [b, a])
    }

    /// Merge raw summaries of equal topology and window into one over the
    /// combined integration time.
    pub fn pool(parts: &[CountSummary]) -> Result<CountSummary> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter {
            name: "parts",
            reason: "nothing to pool".into(),
        })?;
        if let Some(p) = parts.iter().find(|p| {
            p.corrected
                || p.topology != first.topology
                || p.window_ns != first.window_ns
                || p.singles.len() != first.singles.len()
        }) {
            return Err(Error::InvalidParameter {
                name: "parts",
                reason: format!(
                    "cannot pool a {} summary (window {} ns, corrected {}) with {} (window {} ns)",
                    p.topology.as_str(),
                    p.window_ns,
                    p.corrected,
                    first.topology.as_str(),
                    first.window_ns
                ),
            });
        }
        let integration_s = parts.iter().map(|p| p.integration_s).sum();
        let windows = parts.iter().map(|p| p.windows).sum();
        let singles: Vec<u64> = (0..first.singles.len())
            .map(|k| parts.iter().map(|p| p.singles[k].counts).sum())
            .collect();
        let coincidences: Vec<([usize; 2], u64)> = first
            .coincidences
            .iter()
            .enumerate()
            .map(|(k, c)| {
                (
                    c.channels,
                    parts.iter().map(|p| p.coincidences[k].rate.counts).sum(),
                )
            })
            .collect();
        let triple = first
            .triple
            .map(|_| parts.iter().filter_map(|p| p.triple).map(|t| t.counts).sum());
        Ok(Self::from_counts(
            first.topology,
            integration_s,
            first.window_ns,
            windows,
            &singles,
            &coincidences,
            triple,
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Greedy earliest-match pairing of two sorted streams: each click of `a`
/// in time order takes the earliest unused click of `b` with
/// |t_a − t_b| ≤ half_window. Returns matched index pairs.
pub fn match_pairs(a: &[f64], b: &[f64], half_window: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let d = a[i] - b[j];
        if d.abs() <= half_window {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if d < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Singles and coincidence counts of one tag stream. Two clicks coincide
/// when their separation is at most half the window `window_ns`.
pub fn count_coincidences(tags: &TagStream, window_ns: f64) -> Result<CountSummary> {
    tags.validate()?;
    if !(window_ns > 0.0 && window_ns.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "window_ns",
            reason: format!("must be positive, got {window_ns}"),
        });
    }
    let topology = match tags.channels.len() {
        2 => Topology::Pair,
        3 => Topology::Heralded,
        n => {
            return Err(Error::InvalidParameter {
                name: "channels",
                reason: format!("expected 2 or 3 channels, got {n}"),
            })
        }
    };
    let half = 0.5 * window_ns;
    let ch = &tags.channels;
    let singles: Vec<u64> = ch.iter().map(|c| c.len() as u64).collect();
    let h1 = match_pairs(&ch[0], &ch[1], half);
    let mut coincidences = vec![([0, 1], h1.len() as u64)];
    let mut triple = None;
    if topology == Topology::Heralded {
        coincidences.push(([0, 2], match_pairs(&ch[0], &ch[2], half).len() as u64));
        coincidences.push(([1, 2], match_pairs(&ch[1], &ch[2], half).len() as u64));
        let heralds: Vec<f64> = h1.iter().map(|&(i, _)| ch[0][i]).collect();
        triple = Some(match_pairs(&heralds, &ch[2], half).len() as u64);
    }
    Ok(CountSummary::from_counts(
        topology,
        tags.integration_s(),
        window_ns,
        1,
        &singles,
        &coincidences,
        triple,
    ))
}

/// Subtract dark rates from singles and accidentals from coincidences.
/// Singles uncertainty is √((R + R_dark)/T), treating the dark rate as a
/// Poisson measurement over the same time; coincidence uncertainty adds the
/// accidental estimate's propagated error in quadrature.
pub fn correct_rates(counts: &CountSummary, dark_per_s: &[f64]) -> Result<CountSummary> {
    if counts.corrected {
        return Err(Error::InvalidParameter {
            name: "counts",
            reason: "rates are already corrected".into(),
        });
    }
    if dark_per_s.len() != counts.singles.len() {
        return Err(Error::InvalidParameter {
            name: "dark_per_s",
            reason: format!(
                "{} channels but {} dark rates",
                counts.singles.len(),
                dark_per_s.len()
            ),
        });
    }
    let t = counts.integration_s;
    let mut out = counts.clone();
    out.corrected = true;
    for (s, &d) in out.singles.iter_mut().zip(dark_per_s) {
        let raw = s.rate_per_s;
        s.uncertainty_per_s = ((raw + d) / t).sqrt();
        s.rate_per_s = raw - d;
    }
    for c in &mut out.coincidences {
        c.rate.uncertainty_per_s = c.rate.uncertainty_per_s.hypot(c.accidental_uncertainty_per_s);
        c.rate.rate_per_s -= c.accidental_per_s;
    }
    let rates = out
        .singles
        .iter_mut()
        .chain(out.coincidences.iter_mut().map(|c| &mut c.rate));
    for r in rates {
        if r.rate_per_s < 0.0 {
            r.rate_per_s = 0.0;
            out.clamped = true;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

/// g²(0) = R_h · R_h12 / (R_h1 · R_h2) with first-order propagation of the
/// rate uncertainties.
pub fn heralded_g2(counts: &CountSummary) -> Result<G2Estimate> {
    if counts.topology != Topology::Heralded {
        return Err(Error::Topology(counts.topology.as_str()));
    }
    let h = counts.singles[0];
    let h12 = counts.triple.ok_or(Error::Topology("heralded without triples"))?;
    let h1 = counts.coincidence(0, 1).ok_or(Error::Topology("heralded"))?.rate;
    let h2 = counts.coincidence(0, 2).ok_or(Error::Topology("heralded"))?.rate;
    if !(h1.rate_per_s > 0.0 && h2.rate_per_s > 0.0) {
        return Err(Error::UndefinedEstimate {
            r_h: h.counts as f64,
            r_h12: h12.counts as f64,
            r_h1: h1.counts as f64,
            r_h2: h2.counts as f64,
        });
    }
    let den = h1.rate_per_s * h2.rate_per_s;
    let g = h.rate_per_s * h12.rate_per_s / den;
    let terms = [
        h12.rate_per_s / den * h.uncertainty_per_s,
        h.rate_per_s / den * h12.uncertainty_per_s,
        g / h1.rate_per_s * h1.uncertainty_per_s,
        g / h2.rate_per_s * h2.uncertainty_per_s,
    ];
    Ok(G2Estimate {
        value: g,
        uncertainty: terms.iter().map(|t| t * t).sum::<f64>().sqrt(),
    })
}
