//! Decides membership in the classical polytope for a mixture of vertices,
//! the Bell-state table (classical, although the nonlinear witness flags it)
//! and the entangled optimum of the bound-2 witness.
use entcert::catalog::{bell_example_table, wit322_entangled_table};
use entcert::polytope::{enumerate_vertices, membership, Membership};
use entcert::scenario::{ProbabilityTable, Scenario};

fn describe(name: &str, result: Membership) {
    match result {
        Membership::Inside { weights, exact } => {
            println!("{name}: classical, {} vertices", weights.len());
            for ((k, w), (_, q)) in weights.iter().zip(&exact) {
                println!("  vertex {k:>3}  weight {w:.6}  ({q})");
            }
        }
        Membership::Outside { separator, value } => {
            println!("{name}: not classical");
            println!(
                "  separator {:?} with bound {:?}",
                separator.coefficients(),
                separator.classical_bound()
            );
            println!("  value on the table {value:.6}");
        }
    }
}

fn main() -> entcert::Result<()> {
    let vertices = enumerate_vertices(&Scenario::new(3)?)?;
    let mix: Vec<f64> = vertices[3]
        .table()
        .entries()
        .iter()
        .zip(vertices[40].table().entries())
        .map(|(a, b)| 0.25 * a + 0.75 * b)
        .collect();
    describe(
        "mixture",
        membership(&ProbabilityTable::new(3, mix)?, &vertices)?,
    );
    describe("bell table", membership(&bell_example_table()?, &vertices)?);
    describe(
        "entangled optimum",
        membership(&wit322_entangled_table()?, &vertices)?,
    );
    Ok(())
}
