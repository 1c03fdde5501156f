use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config(name: &str) -> PathBuf {
    fixtures().join("configs").join(name)
}

fn spdclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        sub,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    spdclab(&args)
}

fn ok(o: &Output) {
    assert_eq!(
        o.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn tuning_curve_reports_calibrated_degeneracy_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&run("tuning-curve", &config("tuning_paper.toml"), &a, &[]));
    ok(&run(
        "tuning-curve",
        &config("tuning_paper.toml"),
        &b,
        &["--threads", "1"],
    ));
    for f in ["tuning_curve.csv", "tuning_summary.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let s = json(&a.join("tuning_summary.json"));
    let cal = &s["calibration"];
    assert!((cal["degeneracy_c"].as_f64().unwrap() - 59.4).abs() < 1e-6);
    let model = cal["degeneracy_model_c"].as_f64().unwrap();
    assert!((cal["calibration_offset_c"].as_f64().unwrap() - (model - 59.4)).abs() < 1e-9);
    assert_eq!(s["config"]["crystal"]["length_mm"], 20.0);
    let csv = std::fs::read_to_string(a.join("tuning_curve.csv")).unwrap();
    assert!(csv.starts_with("theta_C,lambda_s_nm,lambda_i_nm,branch\n"));
}

#[test]
fn missing_config_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = run("tuning-curve", &missing, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(spdclab(&[]).status.code(), Some(2));
    assert_eq!(spdclab(&["simulate"]).status.code(), Some(2));
    assert_eq!(spdclab(&["frobnicate", "--config", "x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "simulate",
        &config("simulate_paper.toml"),
        dir.path(),
        &["--threads", "0"],
    );
    assert_eq!(o.status.code(), Some(2));
    let bad = write(dir.path(), "bad.toml", "[chain]\neta_coup = 2.0\n");
    assert_eq!(run("simulate", &bad, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn unreachable_phase_matching_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "[crystal]\nlength_mm = 20.0\npoling_period_um = 8.0\n\n[pump]\nwavelength_nm = 405.0\n\n\
         [scan]\ntheta_min_c = 40.0\ntheta_max_c = 80.0\npoints = 5\n",
    );
    let o = run("tuning-curve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn jsa_paper_config_reports_both_entanglement_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("paper");
    ok(&run("jsa", &config("jsa_paper.toml"), &out, &[]));
    let r = json(&out.join("te_report.json"));
    assert_eq!(r["route"], "model");
    let te = &r["T_e_fs"];
    let (plain, fiber) = (
        te["without_fiber"].as_f64().unwrap(),
        te["with_fiber"].as_f64().unwrap(),
    );
    assert!(fiber > plain);
    assert_eq!(r["reference"]["with_fiber_fs"], 408.6);
    assert_eq!(r["reference"]["without_fiber_fs"], 102.0);
    assert_eq!(r["reference"]["without_fiber_within"], true);
    for f in ["jsi.csv", "jsi.json", "jti.csv", "jti.json", "jti_no_fiber.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    // Measured route on the exported JSI.
    let measured = write(
        dir.path(),
        "m.toml",
        &format!(
            "[pump]\nwavelength_nm = 405.0\n\n[fiber]\nbeta_fs2 = 0.0\n\n[measured]\njsi_path = \"{}\"\n",
            out.join("jsi.csv").display()
        ),
    );
    let mout = dir.path().join("measured");
    ok(&run("jsa", &measured, &mout, &[]));
    let m = json(&mout.join("te_report.json"));
    assert_eq!(m["route"], "measured");
    // β = 0: both reported values coincide.
    assert_eq!(m["T_e_fs"]["with_fiber"], m["T_e_fs"]["without_fiber"]);
}

#[test]
fn simulate_matches_golden_summary_and_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&run(
        "simulate",
        &config("simulate_paper.toml"),
        &a,
        &["--seed", "42", "--threads", "1"],
    ));
    ok(&run(
        "simulate",
        &config("simulate_paper.toml"),
        &b,
        &["--seed", "42", "--threads", "4"],
    ));
    let golden = std::fs::read(fixtures().join("golden/simulate_seed42_count_summary.json")).unwrap();
    assert_eq!(std::fs::read(a.join("count_summary.json")).unwrap(), golden);
    for f in [
        "count_summary.json",
        "corrected_summary.json",
        "simulate_run.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let run_doc = json(&a.join("simulate_run.json"));
    assert_eq!(run_doc["seed"], 42);
    assert_eq!(run_doc["config"]["source"]["pump_uw"], 7.0);
    let corrected = json(&a.join("corrected_summary.json"));
    assert_eq!(corrected["corrected"], true);
}

#[test]
fn simulate_zero_rate_and_heralded_topology() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(
        dir.path(),
        "zero.toml",
        "[chain]\neta_coup = 0.9\neta_inser = 0.43\neta_det = 0.6\nwindow_ns = 1.0\n\
         integration_ms = 10.0\ntopology = \"pair\"\n\n[source]\npair_rate_per_s_per_uw = 4.5e5\npump_uw = 0.0\n\n\
         [run]\nwrite_tags = true\n",
    );
    let out = dir.path().join("zero");
    ok(&run("simulate", &zero, &out, &[]));
    let s = json(&out.join("count_summary.json"));
    assert_eq!(s["singles"][0]["counts"], 0);
    assert_eq!(s["coincidences"][0]["rate"]["counts"], 0);
    assert!(s["triple"].is_null());
    let tags = std::fs::read_to_string(out.join("tags_window0.csv")).unwrap();
    assert!(tags.trim_end().ends_with("channel,timestamp_ns"));

    let hout = dir.path().join("heralded");
    ok(&run("simulate", &config("simulate_heralded.toml"), &hout, &[]));
    let h = json(&hout.join("count_summary.json"));
    assert_eq!(h["singles"].as_array().unwrap().len(), 3);
    assert!(h["triple"]["counts"].as_u64().is_some());
    let g2 = json(&hout.join("simulate_run.json"))["g2"]["value"]
        .as_f64()
        .unwrap();
    assert!(g2 < 0.1, "{g2}");
}

#[test]
fn etpa_report_reproduces_estimate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "etpa-report",
        &fixtures().join("etpa_scenario.json"),
        dir.path(),
        &[],
    );
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stdout).contains("R_eTPA in volume"));
    let r = &json(&dir.path().join("etpa_report.json"))["report"];
    let close = |key: &str, target: f64| {
        let v = r[key].as_f64().unwrap();
        assert!((v / target - 1.0).abs() <= 0.10, "{key} = {v}");
    };
    close("A_e_um2", 2.13);
    close("sigma_e_cm2", 3.1e-26);
    close("phi_pair_per_cm2_s", 7.6e14);
    close("R_eTPA_per_s_per_molecule", 2.4e-11);
    close("R_eTPA_volume_per_s", 1.7e-7);
    close("R_cTPA_volume_per_s", 1.1e-12);
}

#[test]
fn etpa_zero_flux_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"delta_c_GM": 27000, "T_e_fs": 408.6, "A_e_um2": 2.13, "phi_pair_per_cm2_s": 0,
            "spot_diameter_um": 1.7, "density_per_mL": 2.7e15}"#,
    );
    ok(&run("etpa-report", &zero, &dir.path().join("z"), &[]));
    let r = &json(&dir.path().join("z/etpa_report.json"))["report"];
    for key in [
        "R_eTPA_per_s_per_molecule",
        "R_cTPA_per_s_per_molecule",
        "R_total_volume_per_s",
    ] {
        assert_eq!(r[key], 0.0, "{key}");
    }

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"delta_c": 27000, "T_e_fs": 408.6, "A_e_um2": 2.13, "phi_pair_per_cm2_s": 1,
            "spot_diameter_um": 1.7, "density_per_mL": 2.7e15}"#,
    );
    let o = run("etpa-report", &bad, &dir.path().join("b"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`delta_c`"));
}

#[test]
fn analyze_identical_tables_give_zero_gamma() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        "analyze",
        &config("analyze_identical.toml"),
        dir.path(),
        &[],
    ));
    let r = &json(&dir.path().join("analysis_report.json"))["report"];
    let mut evaluated = 0;
    for g in r["gamma"].as_array().unwrap() {
        if let Some(v) = g["gamma"].as_f64() {
            assert_eq!(v, 0.0);
            evaluated += 1;
        } else {
            assert!(g["skipped"].as_str().unwrap().contains("R_coin"));
        }
    }
    assert_eq!(evaluated, 6);
    for a in r["absorption"].as_array().unwrap() {
        assert_eq!(a["r_abs_per_s"], 0.0);
    }
}

#[test]
fn analyze_prefers_quadratic_fit_for_spdc_attenuation() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        "analyze",
        &config("analyze_quadratic.toml"),
        dir.path(),
        &[],
    ));
    let r = &json(&dir.path().join("analysis_report.json"))["report"];
    for f in r["fits"].as_array().unwrap() {
        let expected = if f["mode"] == "spdc" {
            "quadratic"
        } else {
            "linear"
        };
        assert_eq!(f["preferred"], expected, "{f}");
    }
}

#[test]
fn analyze_flags_and_optionally_drops_noisy_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        "analyze",
        &config("analyze_fixtures.toml"),
        &dir.path().join("keep"),
        &[],
    ));
    let r = json(&dir.path().join("keep/analysis_report.json"));
    let flagged = r["report"]["flagged"].as_array().unwrap();
    assert!(flagged
        .iter()
        .any(|f| f["P_SPDC_pW"] == 70.0 && f["mode"] == "pump" && f["table"] == "solv"));
    assert_eq!(r["report"]["gamma"].as_array().unwrap().len(), 8);
    let plot = std::fs::read_to_string(dir.path().join("keep/analysis_plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 9);

    ok(&run(
        "analyze",
        &config("analyze_fixtures.toml"),
        &dir.path().join("drop"),
        &["--drop-flagged"],
    ));
    let d = json(&dir.path().join("drop/analysis_report.json"));
    assert_eq!(d["config"]["drop_flagged"], true);
    assert_eq!(d["report"]["gamma"].as_array().unwrap().len(), 5);
}

#[test]
fn analyze_reports_parse_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let table = write(
        dir.path(),
        "neg.csv",
        "P_SPDC_pW,R_s1,R_s1_err,R_s2,R_s2_err,R_coin,R_coin_err,mode,label\n1,10,1,10,1,-3,1,pump,x\n",
    );
    let cfg = write(
        dir.path(),
        "a.toml",
        &format!(
            "solvent = \"{}\"\nsample = \"{}\"\n",
            table.display(),
            table.display()
        ),
    );
    let o = run("analyze", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("neg.csv:2:") && err.contains("R_coin"), "{err}");
}
