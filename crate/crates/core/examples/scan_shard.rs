//! Scans a shard of four-input {-1, 0, 1} witnesses with a checkpoint file,
//! then compares see-saw values on one hit that lies outside the reference
//! catalog.
use entcert::catalog;
use entcert::polytope::enumerate_vertices;
use entcert::polytope::scan::{run_shard, ScanContext, ShardConfig};
use entcert::scenario::{Scenario, Witness};
use entcert::seesaw::{optimize, Mode, SeeSawConfig};
use entcert::symmetry::canonical_form;

fn main() -> entcert::Result<()> {
    let ctx = ScanContext::new(enumerate_vertices(&Scenario::new(4)?)?)?;
    let checkpoint = std::env::temp_dir().join("entcert-scan-example.json");
    let _ = std::fs::remove_file(&checkpoint);
    let state = run_shard(
        &ctx,
        &ShardConfig {
            start: 0,
            end: 200_000,
            batch: 50_000,
            checkpoint: Some(checkpoint.clone()),
            max_batches: None,
        },
    )?;
    println!(
        "scanned [{}, {}): {} facet classes",
        state.start,
        state.end,
        state.hits.len()
    );
    for hit in &state.hits {
        let known = catalog::table2()
            .iter()
            .find(|r| canonical_form(&r.witness()) == hit.witness)
            .map(|r| r.case);
        println!(
            "  #{:<8} tight {:>3}  reference case {:?}",
            hit.index, hit.tight_vertices, known
        );
    }
    let _ = std::fs::remove_file(&checkpoint);

    let extra = Witness::integer_rows(
        &[
            &[-1, -1, -1, 1],
            &[-1, -1, 0, 0],
            &[-1, 0, 1, -1],
            &[1, 0, -1, 0],
        ],
        Some(1),
    )?;
    let hit = ctx.submit(&extra)?.expect("facet-defining");
    let u = optimize(
        &extra,
        &SeeSawConfig::new(Mode::Unentangled).with_restarts(40),
    )?;
    let e = optimize(
        &extra,
        &SeeSawConfig::new(Mode::Entangled).with_restarts(40),
    )?;
    println!(
        "uncatalogued facet #{}: unentangled {:.6}, entangled {:.6}, negativity {:.4}",
        hit.index, u.value, e.value, e.negativity
    );
    Ok(())
}
