use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Click timestamps (ns) per channel for one integration window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagStream {
    pub channels: Vec<Vec<f64>>,
    pub integration_ns: f64,
    pub seed: u64,
    pub window: u64,
}

impl TagStream {
    pub fn new(channels: Vec<Vec<f64>>, integration_ns: f64, seed: u64, window: u64) -> Result<Self> {
        let stream = Self {
            channels,
            integration_ns,
            seed,
            window,
        };
        stream.validate()?;
        Ok(stream)
    }

    /// Strictly increasing timestamps inside [0, integration).
    pub fn validate(&self) -> Result<()> {
        if !(self.integration_ns > 0.0) {
            return Err(Error::InvalidParameter {
                name: "integration_ns",
                reason: format!("must be positive, got {}", self.integration_ns),
            });
        }
        for (ch, ts) in self.channels.iter().enumerate() {
            if let Some(i) = ts.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::Unsorted {
                    channel: ch,
                    index: i + 1,
                });
            }
            if let Some(&t) = ts.iter().find(|&&t| !(0.0..self.integration_ns).contains(&t)) {
                return Err(Error::OutOfRange {
                    quantity: "timestamp_ns",
                    value: t,
                    min: 0.0,
                    max: self.integration_ns,
                });
            }
        }
        Ok(())
    }

    pub fn integration_s(&self) -> f64 {
        self.integration_ns * 1e-9
    }

    pub fn total_clicks(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    /// `channel,timestamp_ns` rows merged in time order, with metadata in
    /// `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# channels: {}", self.channels.len());
        let _ = writeln!(out, "# integration_ns: {}", self.integration_ns);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# window: {}", self.window);
        out.push_str("channel,timestamp_ns\n");
        let mut rows: Vec<(f64, usize)> = self
            .channels
            .iter()
            .enumerate()
            .flat_map(|(ch, ts)| ts.iter().map(move |&t| (t, ch)))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (t, ch) in rows {
            let _ = writeln!(out, "{ch},{t}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut n_channels = None;
        let mut integration_ns = None;
        let mut seed = 0;
        let mut window = 0;
        let mut clicks: Vec<(usize, f64)> = Vec::new();
        let mut header_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.split_once(':') else {
                    continue;
                };
                let value = value.trim();
                let bad = |e: &dyn std::fmt::Display| parse_err(line_no, format!("{}: {e}", key.trim()));
                match key.trim() {
                    "channels" => n_channels = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
                    "integration_ns" => integration_ns = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                    "seed" => seed = value.parse().map_err(|e| bad(&e))?,
                    "window" => window = value.parse().map_err(|e| bad(&e))?,
                    _ => {}
                }
                continue;
            }
            if !header_seen {
                if line != "channel,timestamp_ns" {
                    return Err(parse_err(
                        line_no,
                        format!("expected header channel,timestamp_ns, got {line:?}"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let (ch, t) = line
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected two columns".into()))?;
            let ch: usize = ch
                .trim()
                .parse()
                .map_err(|e| parse_err(line_no, format!("channel: {e}")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|e| parse_err(line_no, format!("timestamp_ns: {e}")))?;
            clicks.push((ch, t));
        }
        let integration_ns =
            integration_ns.ok_or_else(|| parse_err(1, "missing '# integration_ns:' metadata".into()))?;
        let n = n_channels
            .unwrap_or(0)
            .max(clicks.iter().map(|c| c.0 + 1).max().unwrap_or(0));
        let mut channels = vec![Vec::new(); n];
        for (ch, t) in clicks {
            channels[ch].push(t);
        }
        Self::new(channels, integration_ns, seed, window)
    }
}
