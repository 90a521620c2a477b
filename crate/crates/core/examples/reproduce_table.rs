//! Recomputes the three-input reference table with a small restart budget.
//! Pass `2` as the first argument for the four-input table.
use entcert::cli::{reproduce_table, Format, RunConfig};

fn main() -> entcert::Result<()> {
    let which = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cfg = RunConfig {
        seed: 0,
        threads: None,
        output: None,
        format: Format::Json,
        restarts: 20,
        max_rounds: 500,
        epsilon: 1e-9,
    };
    let report = reproduce_table(which, &cfg)?;
    println!("case  w_c  tight  w_unent (ref)        w_ent (ref)          lambda1");
    for r in &report.rows {
        println!(
            "{:>4} {:>4} {:>6}  {:.5} ({:.4})  {:.5} ({:.4})  {:+.4}  {}",
            r.case,
            r.w_c,
            r.vertices,
            r.w_unent,
            r.w_unent_expected,
            r.w_ent,
            r.w_ent_expected,
            r.lambda1,
            r.flags.join(", ")
        );
    }
    println!(
        "all within {}: {}",
        report.tolerance, report.all_within_tolerance
    );
    Ok(())
}
