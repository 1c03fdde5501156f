//! Quasi-phase-matching for collinear type-0 SPDC.
//!
//! The mismatch is Δk = k_p − k_s − k_i − 2π/Λ with the idler frequency
//! always derived from energy conservation, ω_i = ω_p − ω_s. All indices are
//! evaluated at the effective temperature `temperature_c + calibration_offset_c`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{NM_PER_M, SPEED_OF_LIGHT, UM_PER_M};
use crate::dispersion::{nm_from_omega, omega_from_nm, SellmeierModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    #[serde(skip)]
    pub model: SellmeierModel,
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub temperature_c: f64,
    /// Added to `temperature_c` before evaluating the material model.
    #[serde(default)]
    pub calibration_offset_c: f64,
}

impl CrystalConfig {
    pub fn new(
        model: SellmeierModel,
        length_mm: f64,
        poling_period_um: f64,
        temperature_c: f64,
    ) -> Result<Self> {
        let cfg = Self {
            model,
            length_mm,
            poling_period_um,
            temperature_c,
            calibration_offset_c: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 20 mm MgO:PPLN with a 2.72 µm poling period.
    pub fn ppln_waveguide() -> Self {
        Self::new(SellmeierModel::mgo_cln(), 20.0, 2.72, 59.4).expect("valid crystal")
    }

    pub fn with_temperature(&self, temperature_c: f64) -> Self {
        Self {
            temperature_c,
            ..self.clone()
        }
    }

    pub fn with_offset(&self, calibration_offset_c: f64) -> Self {
        Self {
            calibration_offset_c,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm.is_finite() && self.length_mm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "length_mm",
                reason: format!("must be positive, got {}", self.length_mm),
            });
        }
        if !(self.poling_period_um.is_finite() && self.poling_period_um > 0.0) {
            return Err(Error::InvalidParameter {
                name: "poling_period_um",
                reason: format!("must be positive, got {}", self.poling_period_um),
            });
        }
        self.model.check_temperature(self.effective_temperature())
    }

    pub fn effective_temperature(&self) -> f64 {
        self.temperature_c + self.calibration_offset_c
    }

    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }

    /// Grating vector 2π/Λ in 1/m.
    pub fn grating_wavenumber(&self) -> f64 {
        2.0 * PI * UM_PER_M / self.poling_period_um
    }

    fn wavenumber_omega(&self, omega: f64) -> Result<f64> {
        let n = self
            .model
            .refractive_index(nm_from_omega(omega), self.effective_temperature())?;
        Ok(n * omega / SPEED_OF_LIGHT)
    }
}

/// Δk(ω_s, ω_i) in 1/m with the pump at ω_s + ω_i.
pub fn delta_k_omega(cfg: &CrystalConfig, omega_s: f64, omega_i: f64) -> Result<f64> {
    let kp = cfg.wavenumber_omega(omega_s + omega_i)?;
    let ks = cfg.wavenumber_omega(omega_s)?;
    let ki = cfg.wavenumber_omega(omega_i)?;
    Ok(kp - ks - ki - cfg.grating_wavenumber())
}

/// Δk in 1/m for pump `lambda_p_nm` and signal `lambda_s_nm`.
pub fn delta_k(cfg: &CrystalConfig, lambda_p_nm: f64, lambda_s_nm: f64) -> Result<f64> {
    let omega_p = omega_from_nm(lambda_p_nm);
    let omega_s = omega_from_nm(lambda_s_nm);
    let omega_i = omega_p - omega_s;
    if !(omega_i > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda_s",
            reason: format!(
                "signal at {lambda_s_nm} nm leaves no energy for the idler (pump {lambda_p_nm} nm)"
            ),
        });
    }
    cfg.model.check_wavelength(lambda_p_nm)?;
    delta_k_omega(cfg, omega_s, omega_i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchPoint {
    pub omega_p: f64,
    pub omega_s: f64,
    pub delta_k: f64,
    pub theta_c: f64,
}

impl PhaseMatchPoint {
    pub fn omega_i(&self) -> f64 {
        self.omega_p - self.omega_s
    }

    pub fn lambda_s_nm(&self) -> f64 {
        nm_from_omega(self.omega_s)
    }

    pub fn lambda_i_nm(&self) -> f64 {
        nm_from_omega(self.omega_i())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub scan_points: usize,
    pub wavelength_tol_nm: f64,
    pub temperature_tol_c: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            scan_points: 500,
            wavelength_tol_nm: 1e-4,
            temperature_tol_c: 1e-10,
        }
    }
}

/// Bisection on a bracketing interval, returning the midpoint once the
/// bracket is narrower than `tol` or an exact zero is hit.
fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Coarse scan of `[lo, hi]` with `scan_points` samples followed by bisection
/// of every sign change. Roots are returned in ascending order.
pub fn scan_roots<F>(f: &F, lo: f64, hi: f64, scan_points: usize, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = scan_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo)?;
    if f_prev == 0.0 {
        roots.push(lo);
    }
    for k in 1..n {
        let x = if k == n - 1 { hi } else { lo + step * k as f64 };
        let fx = f(x)?;
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && (fx < 0.0) != (f_prev < 0.0) {
            roots.push(bisect(f, x_prev, x, f_prev, tol)?);
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(roots)
}

/// First bracketed root of `f` in `[lo, hi]`.
pub fn solve_bracketed<F>(f: F, lo: f64, hi: f64, scan_points: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    scan_roots(&f, lo, hi, scan_points, tol)?
        .into_iter()
        .next()
        .ok_or(Error::NoPhaseMatching { lo, hi, unit: "degC" })
}

/// Crystal temperature (before the calibration offset is added) at which
/// degenerate emission λ_s = λ_i = 2λ_p is phase matched.
pub fn find_degeneracy_temperature(cfg: &CrystalConfig, lambda_p_nm: f64) -> Result<f64> {
    find_degeneracy_temperature_with(cfg, lambda_p_nm, &SolverOptions::default())
}

pub fn find_degeneracy_temperature_with(
    cfg: &CrystalConfig,
    lambda_p_nm: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let (t_lo, t_hi) = cfg.model.temperature_range_c();
    let lo = t_lo - cfg.calibration_offset_c;
    let hi = t_hi - cfg.calibration_offset_c;
    let lambda_s = 2.0 * lambda_p_nm;
    let f = |theta: f64| delta_k(&cfg.with_temperature(theta), lambda_p_nm, lambda_s);
    let theta = solve_bracketed(f, lo, hi, opts.scan_points, opts.temperature_tol_c)?;
    let residual = f(theta)?;
    let tol = 1e-6 * cfg.grating_wavenumber();
    if residual.abs() > tol {
        return Err(Error::NoPhaseMatching { lo, hi, unit: "degC" });
    }
    Ok(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub point: PhaseMatchPoint,
    /// Signal and idler coincide (double root of Δk).
    pub degenerate: bool,
}

/// All phase-matched signal wavelengths λ_s ≤ 2λ_p at the configured
/// temperature.
pub fn phase_matched_roots(cfg: &CrystalConfig, lambda_p_nm: f64, opts: &SolverOptions) -> Result<Vec<Root>> {
    cfg.validate()?;
    cfg.model.check_wavelength(lambda_p_nm)?;
    let (wl_lo, wl_hi) = cfg.model.wavelength_range_nm();
    let omega_p = omega_from_nm(lambda_p_nm);
    let lambda_deg = 2.0 * lambda_p_nm;
    // The idler partner must also stay inside the validity window.
    let lambda_s_min = wl_lo.max(nm_from_omega(omega_p - omega_from_nm(wl_hi))) * (1.0 + 1e-12);
    if lambda_s_min >= lambda_deg {
        return Ok(Vec::new());
    }
    let theta = cfg.temperature_c;
    let dk = |lambda_s: f64| delta_k(cfg, lambda_p_nm, lambda_s);
    let make = |omega_s: f64, delta_k: f64| PhaseMatchPoint {
        omega_p,
        omega_s,
        delta_k,
        theta_c: theta,
    };

    // Local even fit Δk(Ω) ≈ a + bΩ² around degeneracy; the discriminant −4ab
    // tells whether the two branches have merged into a double root.
    let n = opts.scan_points.max(3);
    let lambda_step = (lambda_deg - lambda_s_min) / (n - 1) as f64;
    let omega_deg = 0.5 * omega_p;
    let h = omega_from_nm(lambda_deg - lambda_step) - omega_deg;
    let a = delta_k_omega(cfg, omega_deg, omega_deg)?;
    let b = (delta_k_omega(cfg, omega_deg + h, omega_deg - h)? - a) / (h * h);
    let disc = -4.0 * a * b;
    let omega_tol = omega_from_nm(lambda_deg - opts.wavelength_tol_nm) - omega_deg;
    let root_offset = disc.abs().sqrt() / (2.0 * b.abs());
    let degenerate = b != 0.0 && root_offset <= omega_tol;

    let mut roots = Vec::new();
    for lambda_s in scan_roots(&dk, lambda_s_min, lambda_deg, n, opts.wavelength_tol_nm)? {
        if degenerate && lambda_deg - lambda_s <= lambda_step {
            continue;
        }
        let omega_s = omega_from_nm(lambda_s);
        roots.push(Root {
            point: make(omega_s, delta_k_omega(cfg, omega_s, omega_p - omega_s)?),
            degenerate: false,
        });
    }
    if degenerate {
        roots.push(Root {
            point: make(omega_deg, a),
            degenerate: true,
        });
    }
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Degenerate,
    /// Index of the root pair, ordered by ascending signal wavelength.
    Split(usize),
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Degenerate => write!(f, "degenerate"),
            Branch::Split(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPoint {
    pub theta_c: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub lambda_p_nm: f64,
    /// Scanned temperatures, ascending; each may have zero or more points.
    pub temperatures_c: Vec<f64>,
    pub points: Vec<TuningPoint>,
}

impl TuningCurve {
    pub const CSV_HEADER: &'static str = "theta_C,lambda_s_nm,lambda_i_nm,branch";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.theta_c, p.lambda_s_nm, p.lambda_i_nm, p.branch
            ));
        }
        out
    }

    pub fn at(&self, theta_c: f64) -> impl Iterator<Item = &TuningPoint> {
        self.points.iter().filter(move |p| p.theta_c == theta_c)
    }
}

/// Phase-matched signal/idler pairs over an evenly spaced temperature grid.
pub fn tuning_curve(
    cfg: &CrystalConfig,
    lambda_p_nm: f64,
    theta_range_c: (f64, f64),
    grid: usize,
) -> Result<TuningCurve> {
    tuning_curve_with(cfg, lambda_p_nm, theta_range_c, grid, &SolverOptions::default())
}

pub fn tuning_curve_with(
    cfg: &CrystalConfig,
    lambda_p_nm: f64,
    theta_range_c: (f64, f64),
    grid: usize,
    opts: &SolverOptions,
) -> Result<TuningCurve> {
    let (lo, hi) = theta_range_c;
    if !(lo <= hi) || grid == 0 {
        return Err(Error::InvalidParameter {
            name: "theta_range",
            reason: format!("need lo <= hi and grid > 0, got [{lo}, {hi}] x {grid}"),
        });
    }
    cfg.with_temperature(lo).validate()?;
    cfg.with_temperature(hi).validate()?;
    cfg.model.check_wavelength(lambda_p_nm)?;
    let temperatures: Vec<f64> = if grid == 1 {
        vec![lo]
    } else {
        (0..grid)
            .map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64)
            .collect()
    };
    let per_theta: Vec<Vec<Root>> = temperatures
        .par_iter()
        .map(|&theta| phase_matched_roots(&cfg.with_temperature(theta), lambda_p_nm, opts))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for (theta, roots) in temperatures.iter().zip(per_theta) {
        let mut split = 0;
        for root in roots {
            let branch = if root.degenerate {
                Branch::Degenerate
            } else {
                split += 1;
                Branch::Split(split - 1)
            };
            points.push(TuningPoint {
                theta_c: *theta,
                lambda_s_nm: root.point.lambda_s_nm(),
                lambda_i_nm: root.point.lambda_i_nm(),
                branch,
            });
        }
    }
    Ok(TuningCurve {
        lambda_p_nm,
        temperatures_c: temperatures,
        points,
    })
}

/// Poling period (µm) that phase-matches degenerate emission at the
/// configured temperature. Useful for sanity checks of the material model.
pub fn degenerate_poling_period_um(cfg: &CrystalConfig, lambda_p_nm: f64) -> Result<f64> {
    let t = cfg.effective_temperature();
    let np = cfg.model.refractive_index(lambda_p_nm, t)?;
    let ns = cfg.model.refractive_index(2.0 * lambda_p_nm, t)?;
    Ok(lambda_p_nm / NM_PER_M * UM_PER_M / (np - ns))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PUMP: f64 = 405.0;

    fn cfg() -> CrystalConfig {
        CrystalConfig::ppln_waveguide()
    }

    #[test]
    fn infinite_period_reduces_to_bulk_mismatch() {
        let mut c = cfg();
        c.poling_period_um = f64::INFINITY;
        let dk = delta_k(&c, PUMP, 810.0).unwrap();
        let t = c.effective_temperature();
        let kp = c.model.wavenumber(PUMP, t).unwrap();
        let ks = c.model.wavenumber(810.0, t).unwrap();
        assert!(((dk - (kp - 2.0 * ks)) / dk).abs() < 1e-9);
    }

    #[test]
    fn delta_k_symmetric_under_relabeling() {
        let c = cfg();
        for ls in [790.0, 800.0, 780.5] {
            let li = nm_from_omega(omega_from_nm(PUMP) - omega_from_nm(ls));
            let a = delta_k(&c, PUMP, ls).unwrap();
            let b = delta_k(&c, PUMP, li).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn solver_on_injected_function() {
        let root = solve_bracketed(|t| Ok(t - 50.0), 20.0, 200.0, 500, 1e-12).unwrap();
        assert!((root - 50.0).abs() < 1e-10);
        let err = solve_bracketed(|t| Ok(t + 1.0), 20.0, 200.0, 50, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoPhaseMatching { .. }));
    }

    #[test]
    fn degeneracy_temperature_zeroes_mismatch() {
        let c = cfg();
        let theta = find_degeneracy_temperature(&c, PUMP).unwrap();
        let dk = delta_k(&c.with_temperature(theta), PUMP, 810.0).unwrap();
        assert!(dk.abs() < 1e-6 * c.grating_wavenumber(), "{dk}");
        // Bulk dispersion puts the 2.72 µm degeneracy well above 59.4 °C.
        assert!(theta > 100.0 && theta < 115.0, "{theta}");
    }

    #[test]
    fn calibration_offset_is_a_fixed_point() {
        let c = cfg();
        let theta = find_degeneracy_temperature(&c, PUMP).unwrap();
        let calibrated = c.with_offset(theta - 59.4);
        let theta2 = find_degeneracy_temperature(&calibrated, PUMP).unwrap();
        assert!((theta2 - 59.4).abs() < 0.01, "{theta2}");
    }

    #[test]
    fn no_bracket_reports_interval() {
        let mut c = cfg();
        c.poling_period_um = 10.0;
        let err = find_degeneracy_temperature(&c, PUMP).unwrap_err();
        assert!(err.to_string().contains("no phase matching"), "{err}");
    }

    #[test]
    fn roots_at_degeneracy_coincide() {
        let c = cfg();
        let theta = find_degeneracy_temperature(&c, PUMP).unwrap();
        let roots = phase_matched_roots(&c.with_temperature(theta), PUMP, &SolverOptions::default()).unwrap();
        assert_eq!(roots.len(), 1, "{roots:?}");
        assert!(roots[0].degenerate);
        assert!((roots[0].point.lambda_s_nm() - 810.0).abs() < 1e-9);
        assert!((roots[0].point.lambda_i_nm() - 810.0).abs() < 1e-9);
    }

    #[test]
    fn branches_split_above_degeneracy() {
        let c = cfg();
        let theta = find_degeneracy_temperature(&c, PUMP).unwrap();
        let below = phase_matched_roots(&c.with_temperature(theta - 1.0), PUMP, &Default::default()).unwrap();
        assert!(below.is_empty(), "{below:?}");
        let above = phase_matched_roots(&c.with_temperature(theta + 1.0), PUMP, &Default::default()).unwrap();
        assert_eq!(above.len(), 1);
        let p = above[0].point;
        assert!(!above[0].degenerate);
        assert!(p.lambda_s_nm() < 810.0 && p.lambda_i_nm() > 810.0);
        assert!(p.delta_k.abs() < 1e-3 * c.grating_wavenumber());
    }

    #[test]
    fn tuning_csv_header() {
        let c = cfg();
        let curve = tuning_curve(&c, PUMP, (105.0, 115.0), 11).unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("theta_C,lambda_s_nm,lambda_i_nm,branch\n"));
        assert_eq!(curve.temperatures_c.len(), 11);
    }

    #[test]
    fn tuning_range_outside_validity_rejected() {
        let c = cfg();
        assert!(tuning_curve(&c, PUMP, (0.0, 50.0), 5).is_err());
        assert!(tuning_curve(&c, PUMP, (60.0, 50.0), 5).is_err());
    }

    #[test]
    fn bulk_period_at_lab_temperature() {
        // Bulk MgO:CLN needs ~2.77 µm for degenerate 405 → 810 nm at 59.4 °C.
        let p = degenerate_poling_period_um(&cfg(), PUMP).unwrap();
        assert!((p - 2.7673).abs() < 1e-3, "{p}");
    }
}
