use bosecool::fock::ThermalSpec;
use bosecool::nonlinear::evolve::exact_evolve_at;
use bosecool::nonlinear::{
    enumerate_second_order_terms, exact_evolve, manley_rowe_residual, perturbative_delta_n, resonance_scan,
    rwa_delta_n, CoefficientSet, NonlinearConfig, Variant,
};

fn full(g: f64) -> NonlinearConfig {
    NonlinearConfig::rescaled(2.0, 1.3, g, 5.0, Variant::Full).unwrap()
}

#[test]
fn derived_coefficients_track_exact_full_evolution() {
    let cut = [12, 16];
    let mut rem = Vec::new();
    for g in [0.01, 0.005] {
        let c = full(g);
        let exact = exact_evolve_at(&c, &cut).unwrap().report.dn;
        let derived = perturbative_delta_n(&c, CoefficientSet::Derived).unwrap().dn;
        let printed = perturbative_delta_n(&c, CoefficientSet::Printed).unwrap().dn;
        assert!((exact - derived).abs() < 0.02 * exact.abs(), "g={g}: {exact} vs {derived}");
        assert!((exact - printed).abs() > 0.2 * exact.abs());
        rem.push((exact - derived).abs());
    }
    // the remainder is fourth order in g
    let ratio = rem[0] / rem[1];
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn exact_full_evolution_costs_energy() {
    let r = exact_evolve_at(&full(0.05), &[12, 16]).unwrap();
    assert!(r.energy_change >= -1e-9);
}

#[test]
fn rwa_exact_evolution_keeps_invariant() {
    for w2 in [0.45, 0.48, 0.52] {
        let c = NonlinearConfig::rescaled(1.0, w2, 0.02, 20.0, Variant::Rwa).unwrap();
        let r = exact_evolve(&c, None).unwrap();
        assert!(r.invariant_drift.abs() < 1e-9, "w2={w2}");
        assert!((r.report.dn2 + 2.0 * r.report.dn1).abs() < 1e-9);
        let p = rwa_delta_n(&c).unwrap();
        assert_eq!(p.dn2, -2.0 * p.dn1);
        assert!(p.dn1.signum() == r.report.dn1.signum() || w2 == 0.5);
    }
}

#[test]
fn invariant_commutators() {
    assert!(manley_rowe_residual(&[12, 12], Variant::Rwa).unwrap().interior <= 1e-12);
    assert!(manley_rowe_residual(&[12, 12], Variant::RwaMirrored).unwrap().interior <= 1e-12);
    assert!(manley_rowe_residual(&[12, 12], Variant::Full).unwrap().interior > 1.0);
}

#[test]
fn resonance_scan_reports_sign_changes() {
    let alphas: Vec<f64> = (1..=300).map(|i| 0.01 * i as f64).collect();
    let scan = resonance_scan(0.35, 10.0 * std::f64::consts::PI, 0.01, &alphas, CoefficientSet::Printed).unwrap();
    assert_eq!(scan.rows.len(), 300);
    assert!(!scan.sign_changes.is_empty());
    for w in scan.cooling_windows() {
        assert!(w.0 <= w.1);
    }
    let at_one = scan.rows.iter().find(|r| (r.alpha - 1.0).abs() < 1e-9).unwrap();
    assert!(at_one.dn > 0.0);
}

#[test]
fn enumeration_is_cutoff_stable_and_hermitian() {
    let spec = ThermalSpec::two_mode_ordered(1.0, 0.5, 1.0).unwrap();
    let e = enumerate_second_order_terms(&spec, &[20, 30], 2).unwrap();
    assert_eq!(e.total, 192);
    assert!(e.all_hermitian);
    for t in &e.terms {
        assert!(t.trace_n1.abs() > 0.0 || t.trace_n2.abs() > 0.0);
    }
    assert_eq!(enumerate_second_order_terms(&spec, &[20, 30], 1).unwrap().nonzero, 0);
}
