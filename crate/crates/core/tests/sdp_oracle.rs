mod common;

use entcert::qcore::{psi_plus, HermitianOperator};
use entcert::sdp::{
    constraint_violation, dual_bound, solve_ppt, solve_unconstrained_entangled, PptProblem,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_splitting_oracle_on_random_objectives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = common::random_hermitian(&mut rng, 4);
        let sol = solve_ppt(&PptProblem::new(f.clone())).unwrap();
        let (_, oracle) = common::admm_ppt(&f, 20_000);
        assert!(
            (sol.value - oracle).abs() < 1e-4,
            "ipm {} oracle {}",
            sol.value,
            oracle
        );
        assert!(oracle <= sol.value + 1e-7);
        let (_, ent) = solve_unconstrained_entangled(&f).unwrap();
        assert!(sol.value <= ent + 1e-9);
        assert!(constraint_violation(sol.m.operator()).unwrap() <= 1e-9);
    }
}

#[test]
fn identity_objectives() {
    let id = HermitianOperator::identity(4);
    assert_eq!(
        solve_ppt(&PptProblem::new(id.clone()))
            .unwrap()
            .value
            .round(),
        4.0
    );
    assert!((solve_ppt(&PptProblem::new(id.clone())).unwrap().value - 4.0).abs() < 1e-8);
    assert!(
        solve_ppt(&PptProblem::new(id.scale(-1.0)))
            .unwrap()
            .value
            .abs()
            < 1e-8
    );
}

#[test]
fn bell_projector_and_dual_bound() {
    let f = psi_plus().projector();
    let sol = solve_ppt(&PptProblem::new(f.clone())).unwrap();
    assert!((sol.value - 1.0).abs() < 1e-7);
    // M = (I + 2 Psi+)/3 attains the bound and any K gives an upper bound.
    let m = HermitianOperator::identity(4)
        .add(&f.scale(2.0))
        .scale(1.0 / 3.0);
    assert!((m.inner(&f) - 1.0).abs() < 1e-12);
    assert!(dual_bound(&f, &HermitianOperator::zeros(4)).unwrap() >= 1.0 - 1e-12);
    let (_, ent) = solve_unconstrained_entangled(&f).unwrap();
    assert!((ent - 1.0).abs() < 1e-12);
}
