use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{count_coincidences, CountSummary, DetectionChain, SourceRates, TagStream, Topology};
use crate::error::{Error, Result};

/// Upper bound on expected clicks per window before simulation refuses.
pub const MAX_EXPECTED_EVENTS: f64 = 1e8;

/// Optional sample in the beam path: linear loss per photon and removal of
/// whole pairs (two-photon absorption).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleModel {
    pub photon_transmission: f64,
    pub pair_absorption: f64,
}

impl Default for SampleModel {
    fn default() -> Self {
        Self {
            photon_transmission: 1.0,
            pair_absorption: 0.0,
        }
    }
}

impl SampleModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("photon_transmission", self.photon_transmission),
            ("pair_absorption", self.pair_absorption),
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
        Ok(())
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    } else {
        0
    }
}

/// One integration window of clicks. Windows of the same seed draw from
/// independent ChaCha streams, so results do not depend on scheduling.
///
/// Each pair is emitted at a uniform time. The pair is coupled into fiber
/// as a whole with probability η_coup. In the pair topology each photon then
/// reaches its own channel with probability η_inser·η_det. In the heralded
/// topology one photon reaches H with η_inser·η_det and the other survives
/// η_inser, is routed to channel 1 or 2 with equal odds, then detected with
/// η_det. Every click gets Gaussian jitter whose pair-difference FWHM is
/// `jitter_fwhm_ns`.
pub fn simulate_tags(
    src: &SourceRates,
    chain: &DetectionChain,
    sample: Option<&SampleModel>,
    seed: u64,
    window: u64,
) -> Result<TagStream> {
    src.validate()?;
    chain.validate()?;
    if let Some(s) = sample {
        s.validate()?;
    }
    let t_s = chain.integration_s();
    let t_ns = chain.integration_ms * 1e6;
    let pair_rate = src.pair_rate();
    let darks = chain.dark_rates();
    let expected = (2.0 * pair_rate + darks.iter().sum::<f64>()) * t_s;
    if expected > MAX_EXPECTED_EVENTS {
        return Err(Error::MemoryGuard {
            expected,
            limit: MAX_EXPECTED_EVENTS,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(window);
    let sigma = chain.jitter_fwhm_ns / (2.0 * (2.0 * LN_2).sqrt()) / 2f64.sqrt();
    let jitter = Normal::new(0.0, sigma).expect("finite jitter");
    let p_arm = chain.eta_inser * chain.eta_det;
    let sample = sample.copied().unwrap_or_default();

    let n_pairs = poisson(&mut rng, pair_rate * t_s);
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); chain.topology.channels()];
    for _ in 0..n_pairs {
        let t = rng.random::<f64>() * t_ns;
        if rng.random_bool(sample.pair_absorption) {
            continue;
        }
        let a_alive = rng.random_bool(sample.photon_transmission);
        let b_alive = rng.random_bool(sample.photon_transmission);
        if !rng.random_bool(chain.eta_coup) {
            continue;
        }
        if rng.random_bool(p_arm) && a_alive {
            channels[0].push(t + jitter.sample(&mut rng));
        }
        match chain.topology {
            Topology::Pair => {
                if rng.random_bool(p_arm) && b_alive {
                    channels[1].push(t + jitter.sample(&mut rng));
                }
            }
            Topology::Heralded => {
                let survives = rng.random_bool(chain.eta_inser);
                let ch = if rng.random_bool(0.5) { 1 } else { 2 };
                if survives && rng.random_bool(chain.eta_det) && b_alive {
                    channels[ch].push(t + jitter.sample(&mut rng));
                }
            }
        }
    }
    for (ch, dark) in channels.iter_mut().zip(&darks) {
        let n = poisson(&mut rng, dark * t_s);
        ch.extend((0..n).map(|_| rng.random::<f64>() * t_ns));
    }
    for ch in &mut channels {
        ch.retain(|t| (0.0..t_ns).contains(t));
        ch.sort_unstable_by(f64::total_cmp);
        ch.dedup();
    }
    TagStream::new(channels, t_ns, seed, window)
}

/// Simulate and count `n_windows` windows in parallel, returning one
/// summary per window in window order.
pub fn simulate_windows(
    src: &SourceRates,
    chain: &DetectionChain,
    sample: Option<&SampleModel>,
    seed: u64,
    n_windows: u64,
) -> Result<Vec<CountSummary>> {
    (0..n_windows)
        .into_par_iter()
        .map(|w| {
            let tags = simulate_tags(src, chain, sample, seed, w)?;
            count_coincidences(&tags, chain.window_ns)
        })
        .collect()
}
