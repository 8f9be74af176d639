use bosecool::fock::{thermal_populations, FockSpace, ThermalSpec};
use bosecool::linear::{
    delta_total_number, dispersion, dispersion_counterexample, dispersion_sum, heisenberg_matrix,
    propagate_moments, random_bogoliubov, validate_symplectic, BogoliubovMap, MomentState,
};
use bosecool::{CMatrix, CVector, C64};
use proptest::prelude::*;

fn occupations(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..3.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn occupation_never_drops_for_diagonal_inputs(
        (n, occ) in (1usize..=4).prop_flat_map(|n| (Just(n), occupations(n))),
        seed in any::<u64>(),
    ) {
        let map = random_bogoliubov(n, 1.5, 1.0, seed).unwrap();
        prop_assert!(validate_symplectic(&map).unwrap().accepted());
        let d = delta_total_number(&map, &MomentState::diagonal(&occ)).unwrap();
        prop_assert!(d.total >= -1e-9);
        prop_assert!(d.f_term >= 0.0 && d.r_term >= 0.0 && d.y_term >= -1e-12);
        prop_assert!((d.total - d.propagated).abs() <= 1e-10 * (1.0 + d.total.abs()));
    }

    #[test]
    fn dispersion_change_equals_number_change(
        (n, occ) in (1usize..=4).prop_flat_map(|n| (Just(n), occupations(n))),
        seed in any::<u64>(),
    ) {
        let map = random_bogoliubov(n, 1.5, 1.0, seed).unwrap();
        let before = MomentState::diagonal(&occ);
        let after = propagate_moments(&map, &before).unwrap();
        let dn = after.total_number() - before.total_number();
        let dd = dispersion_sum(&after).unwrap() - dispersion_sum(&before).unwrap();
        let f2: f64 = map.f.iter().map(|z| z.norm_sqr()).sum();
        // the displacement contributes to the number but not to dispersion
        prop_assert!((dd + f2 - dn).abs() <= 1e-10 * (1.0 + dn.abs()));
        for i in 0..n {
            let d = dispersion(&after, i).unwrap();
            prop_assert!((d.direct - d.quadrature).abs() <= 1e-10 * (1.0 + d.direct.abs()));
        }
    }

    #[test]
    fn composition_is_canonical(seed in any::<u64>(), n in 1usize..=3) {
        let a = random_bogoliubov(n, 1.0, 0.5, seed).unwrap();
        let b = random_bogoliubov(n, 1.0, 0.5, seed.wrapping_add(1)).unwrap();
        prop_assert!(validate_symplectic(&b.after(&a).unwrap()).unwrap().accepted());
    }
}

/// `<b_i^dagger b_j>` and `<b_i b_j>` of a thermal input, evaluated with
/// truncated Fock matrices.
fn fock_moments(map: &BogoliubovMap, spec: &ThermalSpec, cutoffs: &[usize]) -> (CMatrix, CMatrix) {
    let space = FockSpace::new(cutoffs).unwrap();
    let p = thermal_populations(&space, spec);
    let z: f64 = p.iter().sum();
    let n = map.num_modes();
    let b: Vec<CMatrix> = (0..n).map(|i| heisenberg_matrix(map, &space, i).unwrap()).collect();
    let mean = |op: &CMatrix| -> C64 {
        p.iter()
            .enumerate()
            .map(|(k, w)| op[(k, k)] * (w / z))
            .sum()
    };
    let normal = CMatrix::from_fn(n, n, |i, j| mean(&(b[i].adjoint() * &b[j])));
    let anomalous = CMatrix::from_fn(n, n, |i, j| mean(&(&b[i] * &b[j])));
    (normal, anomalous)
}

#[test]
fn moment_propagation_matches_fock_oracle() {
    let spec = ThermalSpec::new(&[2.0, 1.5], 1.0).unwrap();
    for seed in 0..4 {
        let map = random_bogoliubov(2, 0.3, 0.4, seed).unwrap();
        let out = propagate_moments(&map, &MomentState::thermal(&spec)).unwrap();
        let (normal, anomalous) = fock_moments(&map, &spec, &[20, 20]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((out.normal[(i, j)] - normal[(i, j)]).norm() < 1e-8, "normal {i}{j}");
                assert!((out.anomalous[(i, j)] - anomalous[(i, j)]).norm() < 1e-8, "anomalous {i}{j}");
            }
        }
    }
}

#[test]
fn single_mode_squeezer_decomposition() {
    let r = 0.7f64;
    let n = 0.8;
    let map = BogoliubovMap::single_mode_squeezers(&[r], &[0.0]);
    let d = delta_total_number(&map, &MomentState::diagonal(&[n])).unwrap();
    let sh2 = r.sinh().powi(2);
    assert!((d.r_term - sh2).abs() < 1e-14);
    assert!((d.y_term - 2.0 * n * sh2).abs() < 1e-14);
    assert!((d.total - sh2 * (2.0 * n + 1.0)).abs() < 1e-14);
}

#[test]
fn dispersion_can_fall_while_number_rises() {
    let (map, state) = dispersion_counterexample();
    assert_eq!(map.f, CVector::zeros(1));
    let after = propagate_moments(&map, &state).unwrap();
    assert!(after.total_number() - state.total_number() >= 0.0);
    assert!(dispersion_sum(&after).unwrap() < dispersion_sum(&state).unwrap());
}
