//! Centred, unitary 2D Fourier transform between the spectral and temporal
//! domains.
//!
//! JTA(t_s, t_i) = 1/2π ∬ f(ω_s, ω_i) e^{−i[(ω_s−ω_s0) t_s + (ω_i−ω_i0) t_i]} dω_s dω_i
//!
//! with ω_s0, ω_i0 the spectral grid centres. Index `n/2` of every axis is the
//! origin, so Parseval holds as Σ|f|²Δω_sΔω_i = Σ|JTA|²Δt_sΔt_i.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{Axis, Domain, JointSpectrum};
use crate::error::Result;

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// In-place centred DFT of every row: input index k is offset k − len/2,
/// output likewise.
fn centered_rows(data: &mut [Complex64], len: usize, fft: &dyn Fft<f64>) {
    let shift = len / 2;
    data.par_chunks_mut(len).for_each(|row| {
        row.rotate_left(shift);
        fft.process(row);
        row.rotate_right(shift);
    });
}

fn centered_2d(data: &mut Vec<Complex64>, rows: usize, cols: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(cols, direction);
    let col_fft = planner.plan_fft(rows, direction);
    centered_rows(data, cols, row_fft.as_ref());
    let mut t = transpose(data, rows, cols);
    centered_rows(&mut t, rows, col_fft.as_ref());
    *data = transpose(&t, cols, rows);
}

/// Joint temporal amplitude of a spectral-domain grid.
pub fn to_temporal(js: &JointSpectrum) -> Result<JointSpectrum> {
    js.require(Domain::Spectral)?;
    let dws = js.axis_s.uniform_step("omega_s")?;
    let dwi = js.axis_i.uniform_step("omega_i")?;
    let (ns, ni) = js.shape();
    let mut data = js.data.clone();
    centered_2d(&mut data, ns, ni, FftDirection::Forward);
    let scale = dws * dwi / (2.0 * PI);
    data.par_iter_mut().for_each(|z| *z *= scale);
    Ok(JointSpectrum {
        data,
        axis_s: Axis::centered(0.0, 2.0 * PI / (ns as f64 * dws), ns),
        axis_i: Axis::centered(0.0, 2.0 * PI / (ni as f64 * dwi), ni),
        domain: Domain::Temporal,
        normalized: js.normalized,
        measured: js.measured,
        carrier_s: js.axis_s.center(),
        carrier_i: js.axis_i.center(),
    })
}

/// Inverse of [`to_temporal`].
pub fn to_spectral(jta: &JointSpectrum) -> Result<JointSpectrum> {
    jta.require(Domain::Temporal)?;
    let dts = jta.axis_s.uniform_step("t_s")?;
    let dti = jta.axis_i.uniform_step("t_i")?;
    let (ns, ni) = jta.shape();
    let mut data = jta.data.clone();
    centered_2d(&mut data, ns, ni, FftDirection::Inverse);
    let scale = dts * dti / (2.0 * PI);
    data.par_iter_mut().for_each(|z| *z *= scale);
    Ok(JointSpectrum {
        data,
        axis_s: Axis::centered(jta.carrier_s, 2.0 * PI / (ns as f64 * dts), ns),
        axis_i: Axis::centered(jta.carrier_i, 2.0 * PI / (ni as f64 * dti), ni),
        domain: Domain::Spectral,
        normalized: jta.normalized,
        measured: jta.measured,
        carrier_s: jta.carrier_s,
        carrier_i: jta.carrier_i,
    })
}
