//! Enumerates every facet for three inputs and groups them into symmetry
//! classes, marking which reference row each class corresponds to.
use entcert::catalog;
use entcert::polytope::{classify_facets, enumerate_facets, enumerate_vertices};
use entcert::scenario::Scenario;
use entcert::symmetry::canonical_form;

fn main() -> entcert::Result<()> {
    let vertices = enumerate_vertices(&Scenario::new(3)?)?;
    let facets = enumerate_facets(&vertices)?;
    let summary = classify_facets(&facets);
    println!(
        "{} facets: {} positivity, {} equivalent to positivity, {} classes",
        summary.total,
        summary.positivity,
        summary.trivial,
        summary.classes.len()
    );
    let reference = catalog::table1();
    for class in &summary.classes {
        let case = reference
            .iter()
            .find(|r| canonical_form(&r.witness()) == class.witness)
            .map(|r| r.case);
        println!(
            "case {:>2?}  members {:>3}  tight {:>2}  bound {:?}",
            case.unwrap_or(0),
            class.members,
            class.tight_vertices,
            class.witness.classical_bound()
        );
    }
    Ok(())
}
