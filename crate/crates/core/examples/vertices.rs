//! Counts the deterministic strategies of the classical polytope for
//! N = 1..=4 and prints the first few tables of the N = 2 case.
use entcert::polytope::enumerate_vertices;
use entcert::scenario::Scenario;

fn main() -> entcert::Result<()> {
    for n in 1..=4 {
        let vertices = enumerate_vertices(&Scenario::new(n)?)?;
        println!("N = {n}: {} vertices", vertices.len());
    }
    for v in enumerate_vertices(&Scenario::new(2)?)?.iter().take(4) {
        println!("{:?}", v.table().rows());
    }
    Ok(())
}
