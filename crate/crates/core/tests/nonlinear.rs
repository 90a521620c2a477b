use entcert::catalog::{bell_example_table, wit322_entangled_table};
use entcert::nonlinear::*;
use entcert::qcore::{psi_plus, HermitianOperator, PovmElement, PureState, C64};
use entcert::scenario::{evaluate_probabilities, ProbabilityTable};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fidelity_bound_grid() {
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    for &a in &grid {
        for &b in &grid {
            let f = fidelity_bound(a, b).unwrap();
            assert_eq!(f, fidelity_bound(b, a).unwrap());
            assert!((0.0..=1.0).contains(&f));
            assert_eq!(f >= 1.0 - 1e-12, (a - b).abs() < 1e-12, "{a} {b}");
        }
    }
    // Fixed sum, shrinking gap.
    let s = 0.8;
    let mut last = -1.0;
    for k in (0..=8).rev() {
        let gap = k as f64 / 10.0;
        let f = fidelity_bound((s + gap) / 2.0, (s - gap) / 2.0).unwrap();
        assert!(f >= last);
        last = f;
    }
}

fn state(a: C64, b: C64) -> HermitianOperator {
    PureState::normalized(DVector::from_vec(vec![a, b]))
        .unwrap()
        .projector()
}

#[test]
fn bell_projector_experiment_is_certified() {
    // Alice sends +1 eigenstates of Z, X, Y; Bob sends the complex
    // conjugates of the -1 eigenstates, so P_xx = 0 and P_xy = 1/4.
    let (one, zero, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    let rho = [state(one, zero), state(one, one), state(one, i)];
    let sigma = [state(zero, one), state(one, -one), state(one, i)];
    let m = PovmElement::new(psi_plus().projector()).unwrap();
    let p = evaluate_probabilities(&rho, &sigma, &m).unwrap();
    let expected = bell_example_table().unwrap();
    for (a, b) in p.entries().iter().zip(expected.entries()) {
        assert!((a - b).abs() < 1e-12);
    }
    let report = evaluate_nonlinear_witness(&p).unwrap();
    assert!((report.min_value + 0.25).abs() < 1e-12);
    assert!((report.r_value - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(report.certified_entangled);
}

#[test]
fn entangled_optimum_table_is_not_certified() {
    let report = evaluate_nonlinear_witness(&wit322_entangled_table().unwrap()).unwrap();
    assert!(report.r_value < 1.0);
    assert!(!report.certified_entangled);
}

#[test]
fn flat_table_is_inconclusive() {
    let r = evaluate_nonlinear_witness(&ProbabilityTable::constant(3, 0.5).unwrap()).unwrap();
    assert_eq!(r.r_value, 1.0);
    assert!(!r.certified_entangled);
}

#[test]
fn separable_experiments_never_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..2_000 {
        let (rho, sigma, m) = random_separable_experiment(&mut rng, 3);
        let p = evaluate_probabilities(&rho, &sigma, &m).unwrap();
        let report = evaluate_nonlinear_witness(&p).unwrap();
        assert!(
            !report.certified_entangled || report.min_value >= -1e-9,
            "{report:?}"
        );
    }
}

#[test]
fn overlap_bounds_hold_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5_000 {
        for d in [2, 4] {
            let a = random_effect(&mut rng, d);
            let w1 = random_density(&mut rng, d);
            let w2 = random_density(&mut rng, d);
            assert!(check_prop1(&a, &w1, &w2).unwrap());
        }
        let (term, rho, sigma) = random_prop2_instance(&mut rng);
        assert!(check_prop2(&term, &rho, &sigma).unwrap());
    }
}

#[test]
fn prop1_saturation_and_trivial_cases() {
    let a = PureState::basis(2, 0).projector();
    let psi = |p: f64| {
        PureState::from_real(&[p.sqrt(), (1.0 - p).sqrt()])
            .unwrap()
            .projector()
    };
    for (p1, p2) in [(0.1, 0.9), (0.5, 0.25), (0.0, 1.0)] {
        let (w1, w2) = (psi(p1), psi(p2));
        let f = fidelity_bound(p1, p2).unwrap();
        assert!((w1.inner(&w2) - f * f).abs() < 1e-10);
        assert!(check_prop1(&a, &w1, &w2).unwrap());
        assert!(check_prop1(&a, &w1, &w1).unwrap());
    }
}

#[test]
fn prop2_rejects_vacuous_instances() {
    let s = PureState::basis(2, 0);
    let term = SeparableTerm::new(1.0, s.clone(), s.clone()).unwrap();
    let same = [s.clone(), s.clone(), s.clone()];
    assert!(check_prop2(&term, &same, &same).is_err());
    assert!(SeparableTerm::new(0.0, s.clone(), s).is_err());
}
