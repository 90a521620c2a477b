use entcert::catalog;
use entcert::polytope::enumerate_vertices;
use entcert::polytope::scan::*;
use entcert::scenario::Scenario;
use entcert::symmetry::canonical_form;

fn context(n: usize) -> ScanContext {
    ScanContext::new(enumerate_vertices(&Scenario::new(n).unwrap()).unwrap()).unwrap()
}

fn index_of(coeffs: &[i64]) -> u64 {
    encode(&coeffs.iter().map(|&c| c as i8).collect::<Vec<_>>())
}

#[test]
fn resumed_shard_matches_uninterrupted_run() {
    let ctx = context(4);
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("shard.json");
    let (start, end) = (34_000, 134_000);
    let full = run_shard(
        &ctx,
        &ShardConfig {
            start,
            end,
            batch: 10_000,
            checkpoint: None,
            max_batches: None,
        },
    )
    .unwrap();
    assert!(full.is_complete());
    assert!(!full.hits.is_empty());

    let interrupted = ShardConfig {
        start,
        end,
        batch: 10_000,
        checkpoint: Some(ckpt.clone()),
        max_batches: Some(3),
    };
    let partial = run_shard(&ctx, &interrupted).unwrap();
    assert!(!partial.is_complete());
    assert_eq!(ScanState::load(&ckpt).unwrap(), partial);
    let resumed = run_shard(
        &ctx,
        &ShardConfig {
            max_batches: None,
            ..interrupted
        },
    )
    .unwrap();
    assert_eq!(resumed, full);
    assert_eq!(resumed.to_json_string(), full.to_json_string());
}

#[test]
fn shard_containing_a_reference_row_emits_it() {
    let ctx = context(4);
    let canon = canonical_form(&catalog::table2()[0].witness());
    let idx = index_of(canon.integer_coefficients().unwrap());
    let hits = ctx.scan_range(idx - 500, idx + 500).unwrap();
    let hit = hits
        .iter()
        .find(|h| h.index == idx)
        .expect("reference row is found");
    assert_eq!(hit.witness, canon);
    assert_eq!(hit.tight_vertices, 31);
}

#[test]
fn every_reference_row_is_a_scan_hit() {
    let ctx = context(4);
    for row in catalog::table2() {
        let hit = ctx.submit(&row.witness()).unwrap().expect("facet-defining");
        assert_eq!(hit.witness, canonical_form(&row.witness()));
        assert_eq!(hit.tight_vertices, row.vertices);
        assert_eq!(ctx.evaluate(hit.index).unwrap(), Some(hit));
    }
}

#[test]
fn empty_and_invalid_shards() {
    let ctx = context(3);
    assert!(ctx.scan_range(100, 100).unwrap().is_empty());
    let state = run_shard(
        &ctx,
        &ShardConfig {
            start: 5,
            end: 5,
            batch: 10,
            checkpoint: None,
            max_batches: None,
        },
    )
    .unwrap();
    assert!(state.is_complete() && state.hits.is_empty());
    let bad = ScanState::new(3, 0, 10)
        .to_json_string()
        .replace("\"version\": 1", "\"version\": 99");
    assert!(ScanState::from_json_str(&bad).is_err());
}

#[test]
fn three_input_scan_finds_small_coefficient_classes() {
    let ctx = context(3);
    let hits = ctx.scan_range(0, total_candidates(3)).unwrap();
    for h in &hits {
        assert_eq!(canonical_form(&h.witness), h.witness);
    }
    // Reference rows with coefficients in {-1, 0, 1}.
    for row in catalog::table1() {
        let small = row.coefficients.iter().flatten().all(|c| c.abs() <= 1);
        let found = hits
            .iter()
            .any(|h| h.witness == canonical_form(&row.witness()));
        assert_eq!(found, small, "case {}", row.case);
    }
}
