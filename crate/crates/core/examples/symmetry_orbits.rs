//! Shows the orbit of a reference witness under input relabelings, party
//! swap and outcome negation, and its canonical representative.
use entcert::catalog;
use entcert::symmetry::{all_ops, canonical_form, orbit};

fn main() {
    let w = catalog::table1()[3].witness();
    println!("group order for N = 3: {}", all_ops(3).len());
    println!("orbit size: {}", orbit(&w).len());
    println!("canonical form: {:?}", canonical_form(&w).coefficients());
    println!(
        "canonical bound: {:?}",
        canonical_form(&w).classical_bound()
    );
}
