use std::f64::consts::PI;

use super::*;

const SCENARIO: &str = r#"{
    "label": "fiber-coupled source, 36 uW pump",
    "delta_c_GM": 27000,
    "T_e_fs": 408.6,
    "wavelength_nm": 810,
    "numerical_aperture_dimensionless": 0.6,
    "pair_rate_per_s": 1.62e7,
    "spot_diameter_um": 1.7,
    "mass_concentration_mg_per_mL": 1.0,
    "molar_mass_g_per_mol": 2.21e5
}"#;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn airy_area() {
    let a = entanglement_area(&FocusConfig::new(810.0, 0.6).unwrap());
    let um2 = a.value_in(Unit::UM2).unwrap();
    assert!(rel(um2, 2.13) < 0.01, "{um2}");
    let a2 = entanglement_area(&FocusConfig::new(810.0, 1.2).unwrap());
    assert!(rel(a2.value_in(Unit::UM2).unwrap(), um2 / 4.0) < 1e-12);
    let unit = entanglement_area(&FocusConfig::new(810.0, 1.22 * 0.810).unwrap());
    assert!(rel(unit.value_in(Unit::UM2).unwrap(), PI / 4.0) < 1e-12);
    assert!(FocusConfig::new(810.0, 1.5).is_err());
    assert!(FocusConfig::new(-1.0, 0.5).is_err());
}

#[test]
fn cross_section() {
    let s = entangled_cross_section(
        Quantity::new(27000.0, Unit::GM),
        Quantity::new(408.6, Unit::FS),
        Quantity::new(2.13, Unit::UM2),
        1.0,
    )
    .unwrap();
    assert!(rel(s.value_in(Unit::CM2).unwrap(), 3.1e-26) < 0.01);
    let one = entangled_cross_section(
        Quantity::new(1.0, Unit::GM),
        Quantity::new(1.0, Unit::S),
        Quantity::new(1.0, Unit::CM2),
        1.0,
    )
    .unwrap();
    assert_eq!(one.value_in(Unit::CM2).unwrap(), 1e-50);
    let twice = entangled_cross_section(
        Quantity::new(54000.0, Unit::GM),
        Quantity::new(408.6, Unit::FS),
        Quantity::new(2.13, Unit::UM2),
        1.0,
    )
    .unwrap();
    assert!(rel(twice.base_value(), 2.0 * s.base_value()) < 1e-14);
    // Swapped arguments are a dimension error, not a number.
    assert!(matches!(
        entangled_cross_section(
            Quantity::new(27000.0, Unit::GM),
            Quantity::new(2.13, Unit::UM2),
            Quantity::new(408.6, Unit::FS),
            1.0
        ),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn flux_and_density() {
    let phi = pair_flux(Quantity::new(1.62e7, Unit::PER_S), Quantity::new(2.13, Unit::UM2)).unwrap();
    assert!(rel(phi.value_in(Unit::PER_CM2_S).unwrap(), 7.6e14) < 0.01);
    let phi = pair_flux(Quantity::new(2.13e8, Unit::PER_S), Quantity::new(2.13, Unit::UM2)).unwrap();
    assert!(rel(phi.value_in(Unit::PER_CM2_S).unwrap(), 1e16) < 1e-12);
    let half = pair_flux(Quantity::new(2.13e8, Unit::PER_S), Quantity::new(4.26, Unit::UM2)).unwrap();
    assert!(rel(half.base_value(), 0.5e16) < 1e-12);
    assert!(pair_flux(Quantity::new(1.0, Unit::PER_S), Quantity::new(1.0, Unit::UM)).is_err());

    let n = molecule_density(
        Quantity::new(1.0, Unit::MG_PER_ML),
        Quantity::new(2.21e5, Unit::G_PER_MOL),
    )
    .unwrap()
    .value_in(Unit::PER_ML)
    .unwrap();
    assert!(rel(n, 2.725e15) < 1e-3, "{n}");
    assert!(rel(n, 2.9e15) < 0.10);
    let constructed = molecule_density(
        Quantity::new(1.0, Unit::MG_PER_ML),
        Quantity::new(crate::constants::AVOGADRO * 1e-9, Unit::G_PER_MOL),
    )
    .unwrap();
    assert!(rel(constructed.value_in(Unit::PER_ML).unwrap(), 1e6) < 1e-12);
}

#[test]
fn rates_scale() {
    let sigma = Quantity::new(3.1e-26, Unit::CM2);
    let delta = Quantity::new(27000.0, Unit::GM);
    let phi = Quantity::new(7.6e14, Unit::PER_CM2_S);
    let r = tpa_rate(sigma, delta, phi).unwrap();
    assert!(rel(r.entangled.value_in(Unit::PER_S).unwrap(), 2.4e-11) < 0.02);
    assert!(rel(r.classical.value_in(Unit::PER_S).unwrap(), 1.6e-16) < 0.03);
    let r2 = tpa_rate(sigma, delta, phi.scale(2.0)).unwrap();
    assert_eq!(r2.classical.base_value(), 4.0 * r.classical.base_value());
    let zero = tpa_rate(sigma, delta, phi.scale(0.0)).unwrap();
    assert_eq!(
        (
            zero.entangled.base_value(),
            zero.classical.base_value(),
            zero.total.base_value()
        ),
        (0.0, 0.0, 0.0)
    );
}

#[test]
fn volume_rates() {
    let d = Quantity::new(1.7, Unit::UM);
    let n = Quantity::new(2.9e15, Unit::PER_ML);
    let e = volume_rate(Quantity::new(2.4e-11, Unit::PER_S), n, d).unwrap();
    assert!(rel(e.value_in(Unit::PER_S).unwrap(), 1.7e-7) < 0.10);
    let c = volume_rate(Quantity::new(1.6e-16, Unit::PER_S), n, d).unwrap();
    assert!(rel(c.value_in(Unit::PER_S).unwrap(), 1.1e-12) < 0.10);
    let z = volume_rate(Quantity::new(1.6e-16, Unit::PER_S), n.scale(0.0), d).unwrap();
    assert_eq!(z.base_value(), 0.0);
    let v = illuminated_volume(d).unwrap().value_in(Unit::ML).unwrap();
    assert!(rel(v, PI / 6.0 * 1.7e-4f64.powi(3)) < 1e-12);
}

#[test]
fn full_chain_on_scenario() {
    let scn = EtpaScenario::from_json_str(SCENARIO).unwrap();
    let r = evaluate(&scn).unwrap();
    assert_eq!(r.A_e_source, "airy_disc");
    for (got, paper) in [
        (r.sigma_e_cm2, 3.1e-26),
        (r.phi_pair_per_cm2_s, 7.6e14),
        (r.R_eTPA_per_s_per_molecule, 2.4e-11),
        (r.R_cTPA_per_s_per_molecule, 1.6e-16),
        (r.R_eTPA_volume_per_s, 1.7e-7),
        (r.R_cTPA_volume_per_s, 1.1e-12),
    ] {
        assert!(rel(got, paper) < 0.10, "{got} vs {paper}");
    }
    let table = r.to_table();
    assert!(table.contains("R_eTPA in volume"));
    let back = EtpaScenario::from_json_str(&scn.to_json().to_string()).unwrap();
    assert_eq!(evaluate(&back).unwrap(), r);
}

#[test]
fn scenario_units_are_enforced() {
    let bare = SCENARIO.replace("\"T_e_fs\"", "\"T_e\"");
    let err = EtpaScenario::from_json_str(&bare).unwrap_err().to_string();
    assert!(err.contains("`T_e`") && err.contains("unit suffix"), "{err}");

    let wrong = SCENARIO.replace("\"T_e_fs\"", "\"T_e_um\"");
    let err = EtpaScenario::from_json_str(&wrong).unwrap_err().to_string();
    assert!(err.contains("T_e_um"), "{err}");

    let unknown = SCENARIO.replace("\"spot_diameter_um\"", "\"spot_size_um\"");
    assert!(EtpaScenario::from_json_str(&unknown).is_err());

    // Same quantity in another unit gives the same answer.
    let ps = SCENARIO.replace("\"T_e_fs\": 408.6", "\"T_e_ps\": 0.4086");
    let a = evaluate(&EtpaScenario::from_json_str(SCENARIO).unwrap()).unwrap();
    let b = evaluate(&EtpaScenario::from_json_str(&ps).unwrap()).unwrap();
    assert!(rel(a.sigma_e_cm2, b.sigma_e_cm2) < 1e-12);

    let dup = SCENARIO.replace("\"T_e_fs\": 408.6", "\"T_e_fs\": 408.6, \"T_e_ps\": 0.4");
    assert!(EtpaScenario::from_json_str(&dup).is_err());
}

#[test]
fn explicit_area_overrides_airy_disc() {
    let s = SCENARIO.replace("\"spot_diameter_um\"", "\"A_e_um2\": 4.26, \"spot_diameter_um\"");
    let r = evaluate(&EtpaScenario::from_json_str(&s).unwrap()).unwrap();
    assert_eq!(r.A_e_source, "input");
    assert!(rel(r.A_e_um2, 4.26) < 1e-12);
}
