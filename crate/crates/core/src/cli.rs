//! Command-line front end.
//!
//! Every command produces a JSON envelope
//!
//! ```text
//! { "schema": "entcert.<command>/v1", "command": ..., "timestamp": ...,
//!   "seed": ..., "result": { ... } }
//! ```
//!
//! and `--format csv` flattens the `result` object into CSV: one line per
//! element of `result.rows` when that array is present and non-empty, else
//! a single line of the scalar fields. Nested values are written as compact
//! JSON.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::catalog::{self, CatalogRow};
use crate::error::{Error, Result};
use crate::nonlinear::evaluate_nonlinear_witness;
use crate::polytope::scan::{run_shard, total_candidates, ScanContext, ShardConfig};
use crate::polytope::{
    classical_max_int, classify_facets, enumerate_facets, enumerate_vertices, membership,
    Membership,
};
use crate::qcore::pt_eigenvalues;
use crate::scenario::{ProbabilityTable, Scenario, Witness};
use crate::seesaw::{optimize, Mode, ResultExport, SeeSawConfig};
use crate::symmetry::canonical_form;

pub const ENV_THREADS: &str = "ENTCERT_THREADS";
pub const ENV_OUTPUT: &str = "ENTCERT_OUTPUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "entcert",
    version,
    about = "Certify entangled two-qubit measurements from outcome statistics"
)]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with defaults for the flags above and the see-saw options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SeeSawArgs {
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Convergence threshold on the per-round objective gain.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count (and optionally list) the vertices of the classical polytope.
    Vertices {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dump: bool,
    },
    /// Enumerate facets and group them into symmetry classes.
    Facets {
        #[arg(long)]
        n: usize,
        /// Also list every facet.
        #[arg(long)]
        list: bool,
    },
    /// Run the see-saw optimizer on a witness file.
    Optimize {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        mode: Mode,
        #[command(flatten)]
        seesaw: SeeSawArgs,
    },
    /// Reproduce the three-input reference table.
    Table1 {
        #[command(flatten)]
        seesaw: SeeSawArgs,
    },
    /// Reproduce the four-input reference table.
    Table2 {
        #[command(flatten)]
        seesaw: SeeSawArgs,
    },
    /// Evaluate the nonlinear witness on a probability-table file.
    Nonlinear {
        #[arg(long)]
        table: PathBuf,
    },
    /// Scan {-1, 0, 1} witnesses for facets, with checkpointing.
    Scan {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Exclusive end of the shard (defaults to the last candidate).
        #[arg(long)]
        end: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        batch: u64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Decide whether a probability table is classical.
    Membership {
        #[arg(long)]
        table: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Vertices { .. } => "vertices",
            Command::Facets { .. } => "facets",
            Command::Optimize { .. } => "optimize",
            Command::Table1 { .. } => "table1",
            Command::Table2 { .. } => "table2",
            Command::Nonlinear { .. } => "nonlinear",
            Command::Scan { .. } => "scan",
            Command::Membership { .. } => "membership",
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub restarts: Option<usize>,
    pub max_rounds: Option<usize>,
    pub epsilon: Option<f64>,
}

/// Fully resolved options: flags, then environment (threads and output
/// only), then config file, then defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub restarts: usize,
    pub max_rounds: usize,
    pub epsilon: f64,
}

impl RunConfig {
    pub fn resolve(cli: &Cli, env: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => serde_json::from_str::<ConfigFile>(&fs::read_to_string(p)?)?,
            None => ConfigFile::default(),
        };
        let env_threads = env(ENV_THREADS)
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    Error::validation(format!("{ENV_THREADS}='{s}' is not a thread count"))
                })
            })
            .transpose()?;
        let seesaw = match &cli.command {
            Command::Optimize { seesaw, .. }
            | Command::Table1 { seesaw }
            | Command::Table2 { seesaw } => seesaw.clone(),
            _ => SeeSawArgs::default(),
        };
        let defaults = SeeSawConfig::new(Mode::Unentangled);
        let cfg = Self {
            seed: cli.seed.or(file.seed).unwrap_or(0),
            threads: cli.threads.or(env_threads).or(file.threads),
            output: cli
                .output
                .clone()
                .or_else(|| env(ENV_OUTPUT).map(PathBuf::from))
                .or(file.output),
            format: cli.format.or(file.format).unwrap_or(Format::Json),
            restarts: seesaw
                .restarts
                .or(file.restarts)
                .unwrap_or(defaults.restarts),
            max_rounds: seesaw
                .max_rounds
                .or(file.max_rounds)
                .unwrap_or(defaults.max_rounds),
            epsilon: seesaw
                .epsilon
                .or(file.epsilon)
                .unwrap_or(defaults.convergence_epsilon),
        };
        if cfg.threads == Some(0) {
            return Err(Error::validation("threads must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn seesaw(&self, mode: Mode) -> SeeSawConfig {
        SeeSawConfig {
            restarts: self.restarts,
            max_rounds: self.max_rounds,
            convergence_epsilon: self.epsilon,
            seed: self.seed,
            ..SeeSawConfig::new(mode)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::Overflow => EXIT_NON_CONVERGENCE,
        Error::UnsupportedScenario(_) => EXIT_UNSUPPORTED,
        _ => EXIT_VALIDATION,
    }
}

pub fn schema_id(command: &str) -> String {
    format!("entcert.{command}/v1")
}

fn envelope(command: &str, seed: u64, result: Value) -> Value {
    json!({
        "schema": schema_id(command),
        "command": command,
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "seed": seed,
        "result": result,
    })
}

fn read_table(path: &Path) -> Result<ProbabilityTable> {
    ProbabilityTable::from_json_str(&fs::read_to_string(path)?)
}

fn witness_json(w: &Witness) -> Value {
    serde_json::to_value(w.to_json()).expect("witness serializes")
}

fn cmd_vertices(n: usize, dump: bool) -> Result<Value> {
    let vertices = enumerate_vertices(&Scenario::new(n)?)?;
    let rows: Vec<Value> = if dump {
        vertices
            .iter()
            .enumerate()
            .map(|(k, v)| {
                json!({
                    "index": k,
                    "bits": v.bits(),
                    "alice_map": v.alice_map,
                    "bob_map": v.bob_map,
                    "charlie_map": v.charlie_map,
                    "table": v.table().rows(),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(json!({ "n": n, "count": vertices.len(), "rows": rows }))
}

fn catalog_case(canon: &Witness, rows: &[CatalogRow]) -> Option<usize> {
    rows.iter()
        .find(|r| canonical_form(&r.witness()) == *canon)
        .map(|r| r.case)
}

fn cmd_facets(n: usize, list: bool) -> Result<Value> {
    let vertices = enumerate_vertices(&Scenario::new(n)?)?;
    let facets = enumerate_facets(&vertices)?;
    let summary = classify_facets(&facets);
    let reference = if n == 3 {
        catalog::table1()
    } else {
        Vec::new()
    };
    let rows: Vec<Value> = summary
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            json!({
                "class": k + 1,
                "members": c.members,
                "tight_vertices": c.tight_vertices,
                "bound": witness_json(&c.witness)["classical_bound"],
                "coefficients": witness_json(&c.witness)["coefficients"],
                "reference_case": catalog_case(&c.witness, &reference),
            })
        })
        .collect();
    let mut out = json!({
        "n": n,
        "total": summary.total,
        "positivity": summary.positivity,
        "trivial": summary.trivial,
        "classes": summary.classes.len(),
        "rows": rows,
    });
    if list {
        out["facets"] = facets
            .iter()
            .map(|f| {
                json!({
                    "witness": witness_json(&f.witness),
                    "tight_vertices": f.tight_vertices.len(),
                    "positivity": f.is_positivity(),
                })
            })
            .collect();
    }
    Ok(out)
}

fn cmd_optimize(path: &Path, mode: Mode, cfg: &RunConfig) -> Result<Value> {
    let w = Witness::from_json_str(&fs::read_to_string(path)?)?;
    let sc = cfg.seesaw(mode);
    let result = optimize(&w, &sc)?;
    Ok(serde_json::to_value(ResultExport::new(&w, &sc, &result)?)?)
}

/// One row of a reproduced reference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRowReport {
    pub case: usize,
    pub w_c: i64,
    pub w_c_expected: i64,
    pub vertices: usize,
    pub vertices_expected: usize,
    pub w_unent: f64,
    pub w_unent_expected: f64,
    pub w_ent: f64,
    pub w_ent_expected: f64,
    /// Smallest partial-transpose eigenvalue of the entangled optimum.
    pub lambda1: f64,
    pub lambda1_expected: Option<f64>,
    /// Spectrum of the unentangled optimum.
    pub unent_eigenvalues: Vec<f64>,
    pub unent_negativity: f64,
    /// Distinct unentangled local optima, best first.
    pub unent_local_optima: Vec<f64>,
    pub monotone: bool,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub all_within_tolerance: bool,
    pub rows: Vec<TableRowReport>,
}

fn is_monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

/// Recomputes every row of reference table 1 or 2 and flags deviations
/// larger than the table's tolerance (`1e-3` and `2e-3`).
pub fn reproduce_table(which: usize, cfg: &RunConfig) -> Result<TableReport> {
    let (rows, tolerance, n) = match which {
        1 => (catalog::table1(), 1e-3, 3),
        2 => (catalog::table2(), 2e-3, 4),
        _ => return Err(Error::validation(format!("no reference table {which}"))),
    };
    let vertices = enumerate_vertices(&Scenario::new(n)?)?;
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let w = row.witness();
        let coeffs = w.integer_coefficients().expect("integer catalog");
        let w_c = classical_max_int(coeffs, &vertices);
        let tight = vertices.iter().filter(|v| v.dot_int(coeffs) == w_c).count();
        let unent = optimize(&w, &cfg.seesaw(Mode::Unentangled))?;
        let ent = optimize(&w, &cfg.seesaw(Mode::Entangled))?;
        let lambda1 = pt_eigenvalues(ent.m.operator())?[0];
        let mut flags = Vec::new();
        if w_c != row.w_c {
            flags.push(format!("w_c {w_c} != {}", row.w_c));
        }
        if tight != row.vertices {
            flags.push(format!("vertices {tight} != {}", row.vertices));
        }
        if (unent.value - row.w_unent).abs() > tolerance {
            flags.push(format!("w_unent {:.6} vs {}", unent.value, row.w_unent));
        }
        if (ent.value - row.w_ent).abs() > tolerance {
            flags.push(format!("w_ent {:.6} vs {}", ent.value, row.w_ent));
        }
        if let Some(l) = row.lambda1 {
            if (lambda1 - l).abs() > tolerance {
                flags.push(format!("lambda1 {lambda1:.6} vs {l}"));
            }
        }
        let monotone = is_monotone(&unent.trace) && is_monotone(&ent.trace);
        if !monotone {
            flags.push("non-monotone trace".to_string());
        }
        out.push(TableRowReport {
            case: row.case,
            w_c,
            w_c_expected: row.w_c,
            vertices: tight,
            vertices_expected: row.vertices,
            w_unent: unent.value,
            w_unent_expected: row.w_unent,
            w_ent: ent.value,
            w_ent_expected: row.w_ent,
            lambda1,
            lambda1_expected: row.lambda1,
            unent_eigenvalues: unent.m.operator().eigenvalues(),
            unent_negativity: unent.negativity,
            unent_local_optima: unent.local_optima.iter().map(|o| o.value).collect(),
            monotone,
            flags,
        });
    }
    Ok(TableReport {
        table: which,
        restarts: cfg.restarts,
        tolerance,
        all_within_tolerance: out.iter().all(|r| r.flags.is_empty()),
        rows: out,
    })
}

fn cmd_nonlinear(path: &Path) -> Result<Value> {
    Ok(serde_json::to_value(evaluate_nonlinear_witness(
        &read_table(path)?,
    )?)?)
}

fn cmd_scan(
    n: usize,
    start: u64,
    end: Option<u64>,
    batch: u64,
    checkpoint: Option<PathBuf>,
) -> Result<Value> {
    if n < 2 {
        return Err(Error::validation("scan needs N >= 2"));
    }
    let total = total_candidates(n);
    let end = end.unwrap_or(total).min(total);
    if start > end {
        return Err(Error::validation(format!(
            "empty shard: start {start} > end {end}"
        )));
    }
    let ctx = ScanContext::new(enumerate_vertices(&Scenario::new(n)?)?)?;
    let state = run_shard(
        &ctx,
        &ShardConfig {
            start,
            end,
            batch,
            checkpoint,
            max_batches: None,
        },
    )?;
    let rows: Vec<Value> = state
        .hits
        .iter()
        .map(|h| {
            json!({
                "index": h.index,
                "tight_vertices": h.tight_vertices,
                "bound": witness_json(&h.witness)["classical_bound"],
                "coefficients": witness_json(&h.witness)["coefficients"],
            })
        })
        .collect();
    Ok(json!({
        "n": n,
        "start": state.start,
        "end": state.end,
        "next": state.next,
        "complete": state.is_complete(),
        "hits": rows.len(),
        "rows": rows,
    }))
}

fn cmd_membership(path: &Path) -> Result<Value> {
    let p = read_table(path)?;
    let vertices = enumerate_vertices(&Scenario::new(p.n())?)?;
    Ok(match membership(&p, &vertices)? {
        Membership::Inside { weights, exact } => json!({
            "feasible": true,
            "rows": weights.iter().zip(&exact).map(|((k, w), (_, q))| json!({
                "vertex": k,
                "weight": w,
                "exact": q,
                "table": vertices[*k].table().rows(),
            })).collect::<Vec<_>>(),
            "separator": null,
            "value": null,
        }),
        Membership::Outside { separator, value } => json!({
            "feasible": false,
            "rows": [],
            "separator": witness_json(&separator),
            "value": value,
        }),
    })
}

/// Runs one parsed command and returns its JSON envelope.
pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Value> {
    let run = || -> Result<Value> {
        match &cli.command {
            Command::Vertices { n, dump } => cmd_vertices(*n, *dump),
            Command::Facets { n, list } => cmd_facets(*n, *list),
            Command::Optimize { witness, mode, .. } => cmd_optimize(witness, *mode, cfg),
            Command::Table1 { .. } => Ok(serde_json::to_value(reproduce_table(1, cfg)?)?),
            Command::Table2 { .. } => Ok(serde_json::to_value(reproduce_table(2, cfg)?)?),
            Command::Nonlinear { table } => cmd_nonlinear(table),
            Command::Scan {
                n,
                start,
                end,
                batch,
                checkpoint,
            } => cmd_scan(*n, *start, *end, *batch, checkpoint.clone()),
            Command::Membership { table } => cmd_membership(table),
        }
    };
    let result = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::validation(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(envelope(cli.command.name(), cfg.seed, result))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV rendering of an envelope, as described in the module docs.
pub fn to_csv(envelope: &Value) -> Result<String> {
    let result = envelope
        .get("result")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::validation("envelope has no result object"))?;
    let records: Vec<Map<String, Value>> = match result.get("rows").and_then(Value::as_array) {
        Some(rows) if !rows.is_empty() => rows
            .iter()
            .map(|r| r.as_object().cloned().unwrap_or_default())
            .collect(),
        _ => vec![result
            .iter()
            .filter(|(k, _)| k.as_str() != "rows")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()],
    };
    let header: Vec<String> = records
        .first()
        .map(|r| r.keys().cloned().collect())
        .unwrap_or_default();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(&header)
        .map_err(|e| Error::validation(e.to_string()))?;
    for r in &records {
        wtr.write_record(
            header
                .iter()
                .map(|k| cell(r.get(k).unwrap_or(&Value::Null))),
        )
        .map_err(|e| Error::validation(e.to_string()))?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 input is UTF-8"))
}

pub fn render(envelope: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(envelope)? + "\n"),
        Format::Csv => to_csv(envelope),
    }
}

/// Parses `args`, runs the command and writes the report; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::resolve(&cli, |k| std::env::var(k).ok()).and_then(|cfg| {
        let env = execute(&cli, &cfg)?;
        let text = render(&env, cfg.format)?;
        match &cfg.output {
            Some(p) => fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("entcert").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_beat_environment() {
        let cli = parse(&["--threads", "3", "vertices", "--n", "2"]);
        let cfg =
            RunConfig::resolve(&cli, |k| (k == ENV_THREADS).then(|| "7".to_string())).unwrap();
        assert_eq!(cfg.threads, Some(3));
        let cli = parse(&["vertices", "--n", "2"]);
        let cfg = RunConfig::resolve(&cli, |k| match k {
            ENV_THREADS => Some("7".into()),
            ENV_OUTPUT => Some("/tmp/x.json".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.threads, Some(7));
        assert_eq!(cfg.output, Some(PathBuf::from("/tmp/x.json")));
    }

    #[test]
    fn vertices_envelope() {
        let cli = parse(&["vertices", "--n", "3"]);
        let cfg = RunConfig::resolve(&cli, |_| None).unwrap();
        let env = execute(&cli, &cfg).unwrap();
        assert_eq!(env["schema"], "entcert.vertices/v1");
        assert_eq!(env["result"]["count"], 104);
        let csv = to_csv(&env).unwrap();
        assert_eq!(csv, "count,n\n104,3\n");
    }

    #[test]
    fn unsupported_exit_code() {
        assert_eq!(run(["entcert", "facets", "--n", "4"]), EXIT_UNSUPPORTED);
        assert_eq!(run(["entcert", "vertices", "--n", "0"]), EXIT_VALIDATION);
    }
}
