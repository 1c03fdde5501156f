use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use spdclab_core::analysis::{analyze as run_analysis, AnalysisOptions, RateTable};
use spdclab_core::biphoton::{
    apply_fiber_phase, build_jsa, entanglement_time_from_jti, read_matrix_csv, to_temporal, write_matrix_csv,
    FiberDispersion, JointSpectrum, PumpEnvelope,
};
use spdclab_core::counting::{correct_rates, heralded_g2, simulate_windows, CountSummary, Topology};
use spdclab_core::etpa::{evaluate, EtpaScenario};
use spdclab_core::phasematch::{find_degeneracy_temperature, tuning_curve as scan, CrystalConfig};

use crate::config::{
    load_toml, resolve, AnalyzeConfig, CrystalSection, JsaConfig, SimulateConfig, TuningConfig,
};
use crate::{input_err, to_json, write_output, CliError, Common};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Published entanglement times the `jsa` report compares against.
const REFERENCE_TE_WITH_FIBER_FS: f64 = 408.6;
const REFERENCE_TE_WITHOUT_FIBER_FS: f64 = 102.0;

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct Calibration {
    /// Degeneracy temperature of the uncalibrated material model.
    degeneracy_model_c: f64,
    calibration_offset_c: f64,
    /// Degeneracy temperature after the offset.
    degeneracy_c: f64,
}

/// Crystal with its calibration applied and the resulting degeneracy point.
fn calibrate(
    sec: &CrystalSection,
    base: &Path,
    lambda_p_nm: f64,
) -> Result<(CrystalConfig, Calibration), CliError> {
    let cfg = sec.crystal(base)?;
    let model_deg = find_degeneracy_temperature(&cfg.with_offset(0.0), lambda_p_nm)?;
    let offset = match sec.target_degeneracy_c {
        Some(target) => model_deg - target,
        None => sec.calibration_offset_c,
    };
    let cfg = cfg.with_offset(offset);
    let deg = find_degeneracy_temperature(&cfg, lambda_p_nm)?;
    let cfg = cfg.with_temperature(sec.temperature_c.unwrap_or(deg));
    cfg.validate()?;
    Ok((
        cfg,
        Calibration {
            degeneracy_model_c: model_deg,
            calibration_offset_c: offset,
            degeneracy_c: deg,
        },
    ))
}

/// The crystal section as actually used, with derived values filled in.
fn resolved_crystal(sec: &CrystalSection, cfg: &CrystalConfig) -> Value {
    json!({
        "material": cfg.model,
        "material_file": sec.material_file,
        "length_mm": cfg.length_mm,
        "poling_period_um": cfg.poling_period_um,
        "temperature_c": cfg.temperature_c,
        "calibration_offset_c": cfg.calibration_offset_c,
        "target_degeneracy_c": sec.target_degeneracy_c,
    })
}

pub fn tuning_curve(c: &Common) -> Result<Vec<PathBuf>, CliError> {
    let cfg: TuningConfig = load_toml(&c.config)?;
    let base = config_dir(&c.config);
    let (crystal, cal) = calibrate(&cfg.crystal, &base, cfg.pump.wavelength_nm)?;
    let curve = scan(
        &crystal,
        cfg.pump.wavelength_nm,
        (cfg.scan.theta_min_c, cfg.scan.theta_max_c),
        cfg.scan.points,
    )?;
    let summary = json!({
        "spdclab_version": VERSION,
        "config": {
            "crystal": resolved_crystal(&cfg.crystal, &crystal),
            "pump": cfg.pump,
            "scan": cfg.scan,
        },
        "calibration": cal,
        "points": curve.points.len(),
        "temperatures_with_roots": curve.temperatures_c.iter().filter(|&&t| curve.at(t).next().is_some()).count(),
    });
    Ok(vec![
        write_output(&c.out, "tuning_curve.csv", curve.to_csv().as_bytes())?,
        write_output(&c.out, "tuning_summary.json", &to_json(&summary))?,
    ])
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    ((value - target) / target).abs() <= tol
}

pub fn jsa(c: &Common) -> Result<Vec<PathBuf>, CliError> {
    let cfg: JsaConfig = load_toml(&c.config)?;
    let base = config_dir(&c.config);
    let lambda_p = cfg.pump.wavelength_nm;
    let mut out = Vec::new();

    let (spectrum, route, crystal_json, calibration) = match (&cfg.measured, &cfg.crystal) {
        (Some(m), _) => {
            let path = resolve(&base, &m.jsi_path);
            let file = read_matrix_csv(&path).map_err(input_err(&path))?;
            let js = file
                .into_measured_spectrum(m.resample)
                .map_err(input_err(&path))?;
            (js, "measured", Value::Null, None)
        }
        (None, Some(sec)) => {
            let (crystal, cal) = calibrate(sec, &base, lambda_p)?;
            let env = PumpEnvelope::from_linewidth(lambda_p, cfg.pump.linewidth_fwhm_nm)?;
            let js = build_jsa(&crystal, &env, &cfg.grid)?;
            (js, "model", resolved_crystal(sec, &crystal), Some(cal))
        }
        (None, None) => {
            return Err(CliError::Config(format!(
                "{}: need a [crystal] section or a [measured] JSI",
                c.config.display()
            )))
        }
    };
    let fiber = FiberDispersion::degenerate(cfg.fiber.beta_fs2, lambda_p)?;
    let dispersed = apply_fiber_phase(&spectrum, &fiber)?;
    let jta_plain = to_temporal(&spectrum)?;
    let jta = to_temporal(&dispersed)?;
    let te_plain = entanglement_time_from_jti(&jta_plain)?;
    let te_fiber = entanglement_time_from_jti(&jta)?;

    let stride = cfg.export.stride.max(1);
    let export = |name: &str, js: &JointSpectrum| write_matrix_csv(&c.out.join(name), js, stride);
    for (name, js) in [
        ("jsi.csv", &spectrum),
        ("jti.csv", &jta),
        ("jti_no_fiber.csv", &jta_plain),
    ] {
        let sidecar = export(name, js).map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))?;
        out.push(c.out.join(name));
        out.push(sidecar);
    }
    let report = json!({
        "spdclab_version": VERSION,
        "route": route,
        "config": {
            "crystal": crystal_json,
            "pump": cfg.pump,
            "grid": cfg.grid,
            "fiber": cfg.fiber,
            "measured": cfg.measured,
            "export": cfg.export,
        },
        "calibration": calibration,
        "T_e_fs": {
            "without_fiber": te_plain,
            "with_fiber": te_fiber,
        },
        "reference": {
            "with_fiber_fs": REFERENCE_TE_WITH_FIBER_FS,
            "with_fiber_tolerance": 0.10,
            "with_fiber_within": within(te_fiber, REFERENCE_TE_WITH_FIBER_FS, 0.10),
            "without_fiber_fs": REFERENCE_TE_WITHOUT_FIBER_FS,
            "without_fiber_tolerance": 0.15,
            "without_fiber_within": within(te_plain, REFERENCE_TE_WITHOUT_FIBER_FS, 0.15),
        },
    });
    out.push(write_output(&c.out, "te_report.json", &to_json(&report))?);
    Ok(out)
}

pub fn simulate(c: &Common) -> Result<Vec<PathBuf>, CliError> {
    let cfg: SimulateConfig = load_toml(&c.config)?;
    let invalid = |e: spdclab_core::Error| CliError::Config(format!("{}: {e}", c.config.display()));
    cfg.chain.validate().map_err(invalid)?;
    cfg.source.validate().map_err(invalid)?;
    if let Some(s) = &cfg.sample {
        s.validate().map_err(invalid)?;
    }
    if cfg.run.windows == 0 {
        return Err(CliError::Config(format!(
            "{}: run.windows must be positive",
            c.config.display()
        )));
    }
    let mut out = Vec::new();
    let parts = simulate_windows(
        &cfg.source,
        &cfg.chain,
        cfg.sample.as_ref(),
        c.seed,
        cfg.run.windows,
    )?;
    if cfg.run.write_tags {
        for w in 0..cfg.run.windows {
            let tags = spdclab_core::counting::simulate_tags(
                &cfg.source,
                &cfg.chain,
                cfg.sample.as_ref(),
                c.seed,
                w,
            )?;
            out.push(write_output(
                &c.out,
                &format!("tags_window{w}.csv"),
                tags.to_csv().as_bytes(),
            )?);
        }
    }
    let raw = CountSummary::pool(&parts)?;
    let corrected = correct_rates(&raw, &cfg.chain.dark_rates())?;
    let g2 = match cfg.chain.topology {
        Topology::Heralded => Some(match heralded_g2(&raw) {
            Ok(g) => json!({ "value": g.value, "uncertainty": g.uncertainty }),
            Err(e) => json!({ "undefined": e.to_string() }),
        }),
        Topology::Pair => None,
    };
    let run = json!({
        "spdclab_version": VERSION,
        "seed": c.seed,
        "config": cfg,
        "g2": g2,
    });
    let mut summary = raw.to_json();
    summary.push('\n');
    let mut corrected_json = corrected.to_json();
    corrected_json.push('\n');
    out.push(write_output(&c.out, "count_summary.json", summary.as_bytes())?);
    out.push(write_output(
        &c.out,
        "corrected_summary.json",
        corrected_json.as_bytes(),
    )?);
    out.push(write_output(&c.out, "simulate_run.json", &to_json(&run))?);
    Ok(out)
}

pub fn etpa_report(c: &Common) -> Result<Vec<PathBuf>, CliError> {
    let scn = EtpaScenario::from_file(&c.config).map_err(input_err(&c.config))?;
    let report = evaluate(&scn)?;
    let table = report.to_table();
    print!("{table}");
    let doc = json!({
        "spdclab_version": VERSION,
        "scenario": scn.to_json(),
        "report": report,
    });
    Ok(vec![
        write_output(&c.out, "etpa_report.json", &to_json(&doc))?,
        write_output(&c.out, "etpa_report.txt", table.as_bytes())?,
    ])
}

pub fn analyze(c: &Common, drop_flagged: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg: AnalyzeConfig = load_toml(&c.config)?;
    cfg.drop_flagged |= drop_flagged;
    let base = config_dir(&c.config);
    let read = |p: &Path| {
        let path = resolve(&base, p);
        RateTable::read_csv(&path).map_err(input_err(&path))
    };
    let solv = read(&cfg.solvent)?;
    let samp = read(&cfg.sample)?;
    let opts = AnalysisOptions {
        flag_threshold: cfg.flag_threshold,
        drop_flagged: cfg.drop_flagged,
        monte_carlo_draws: cfg.monte_carlo_draws,
        seed: c.seed,
    };
    let report = run_analysis(&solv, &samp, &opts)?;
    let doc = json!({
        "spdclab_version": VERSION,
        "config": cfg,
        "report": report,
    });
    Ok(vec![
        write_output(&c.out, "analysis_report.json", &to_json(&doc))?,
        write_output(&c.out, "analysis_plot.csv", report.plot_csv().as_bytes())?,
    ])
}
