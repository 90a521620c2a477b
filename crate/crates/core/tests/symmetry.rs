use entcert::catalog;
use entcert::polytope::{classical_max, enumerate_vertices, with_classical_bound};
use entcert::scenario::{Scenario, Witness};
use entcert::symmetry::*;
use proptest::prelude::*;

fn op_strategy(n: usize) -> impl Strategy<Value = SymmetryOp> {
    let perms = permutations(n);
    (0..perms.len(), 0..perms.len(), any::<bool>(), any::<bool>()).prop_map(
        move |(a, b, swap_parties, negate)| SymmetryOp {
            alice_perm: perms[a].clone(),
            bob_perm: perms[b].clone(),
            swap_parties,
            negate,
        },
    )
}

fn witness_strategy(n: usize) -> impl Strategy<Value = Witness> {
    prop::collection::vec(-3i64..=3, n * n).prop_map(move |c| Witness::integer(n, c, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_form_is_orbit_invariant(w in witness_strategy(3), op in op_strategy(3)) {
        prop_assert_eq!(canonical_form(&apply(&op, &w)), canonical_form(&w));
    }

    #[test]
    fn composition_matches_sequential_application(
        w in witness_strategy(3), a in op_strategy(3), b in op_strategy(3),
    ) {
        prop_assert_eq!(apply(&a.compose(&b), &w), apply(&a, &apply(&b, &w)));
    }

    #[test]
    fn classical_bound_transforms_with_the_witness(w in witness_strategy(3), op in op_strategy(3)) {
        let v = enumerate_vertices(&Scenario::new(3).unwrap()).unwrap();
        let bounded = with_classical_bound(w, &v).unwrap();
        let image = apply(&op, &bounded);
        prop_assert_eq!(Some(classical_max(&image, &v).unwrap()), image.classical_bound());
    }

    #[test]
    fn orbit_table_agrees_with_canonical_form(c in prop::collection::vec(-1i8..=1, 9)) {
        let table = OrbitTable::new(3);
        let w = Witness::integer(3, c.iter().map(|&x| x as i64).collect(), None).unwrap();
        prop_assert_eq!(table.is_minimal(&c), canonical_form(&w).coefficients() == w.coefficients());
    }
}

#[test]
fn group_has_expected_order_and_identity() {
    let ops = all_ops(3);
    assert_eq!(ops.len(), 144);
    assert_eq!(ops[0], SymmetryOp::identity(3));
    let w = catalog::table1()[0].witness();
    assert_eq!(apply(&ops[0], &w), w);
}

#[test]
fn displayed_form_of_row_four_is_equivalent() {
    let row4 = catalog::table1()[3].witness();
    assert!(equivalent(&row4, &catalog::wit322()));
    assert!(orbit(&row4).contains(&catalog::wit322()));
    assert!(!equivalent(&row4, &catalog::table1()[0].witness()));
}

#[test]
fn reference_rows_are_pairwise_inequivalent() {
    for rows in [catalog::table1(), catalog::table2()] {
        let canon: Vec<Witness> = rows.iter().map(|r| canonical_form(&r.witness())).collect();
        for i in 0..canon.len() {
            for j in (i + 1)..canon.len() {
                assert_ne!(canon[i], canon[j], "rows {} and {}", i + 1, j + 1);
            }
        }
    }
}
