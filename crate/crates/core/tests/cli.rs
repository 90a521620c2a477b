use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use entcert::cli::{self, Cli, RunConfig, EXIT_UNSUPPORTED, EXIT_VALIDATION};
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn schema_path(command: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{command}.schema.json"))
}

fn entcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcert"))
        .args(args)
        .env_remove(cli::ENV_THREADS)
        .env_remove(cli::ENV_OUTPUT)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn assert_valid(command: &str, doc: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path(command)).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    panic!("{command} output violates its schema: {msgs:?}");
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

fn wit322_file(dir: &Path) -> String {
    let p = dir.join("wit322.json");
    std::fs::write(&p, entcert::catalog::wit322().to_json_string()).unwrap();
    p.display().to_string()
}

#[test]
fn every_command_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let wit = wit322_file(dir.path());
    let bell = data("bell_table.json");
    let flat = data("flat_table.json");
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("vertices", vec!["vertices", "--n", "3", "--dump"]),
        ("facets", vec!["facets", "--n", "3", "--list"]),
        (
            "optimize",
            vec![
                "optimize",
                "--witness",
                &wit,
                "--mode",
                "entangled",
                "--restarts",
                "4",
            ],
        ),
        (
            "optimize",
            vec![
                "optimize",
                "--witness",
                &wit,
                "--mode",
                "unentangled",
                "--restarts",
                "4",
            ],
        ),
        ("table1", vec!["table1", "--restarts", "3"]),
        ("table2", vec!["table2", "--restarts", "2"]),
        ("nonlinear", vec!["nonlinear", "--table", &bell]),
        ("nonlinear", vec!["nonlinear", "--table", &flat]),
        ("scan", vec!["scan", "--n", "3"]),
        ("scan", vec!["scan", "--start", "34000", "--end", "36000"]),
        ("membership", vec!["membership", "--table", &bell]),
        ("membership", vec!["membership", "--table", &flat]),
    ];
    for (command, args) in cases {
        let doc = json_of(&entcert(&args));
        assert_eq!(doc["schema"], cli::schema_id(command));
        assert_eq!(doc["command"], command);
        assert_valid(command, &doc);
    }
}

#[test]
fn reports_are_deterministic_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let wit = wit322_file(dir.path());
    let args = [
        "--seed",
        "11",
        "optimize",
        "--witness",
        &wit,
        "--mode",
        "entangled",
        "--restarts",
        "6",
    ];
    let a = without_timestamp(json_of(&entcert(&args)));
    let b = without_timestamp(json_of(&entcert(&args)));
    assert_eq!(a, b);
    let threaded = [
        "--threads",
        "1",
        "--seed",
        "11",
        "optimize",
        "--witness",
        &wit,
        "--mode",
        "entangled",
        "--restarts",
        "6",
    ];
    assert_eq!(without_timestamp(json_of(&entcert(&threaded))), a);
    assert_eq!(a["seed"], 11);
}

#[test]
fn csv_is_derived_from_the_json_report() {
    let json = json_of(&entcert(&["facets", "--n", "3"]));
    let out = entcert(&["facets", "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, cli::to_csv(&json).unwrap());
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), json["result"]["rows"].as_array().unwrap().len());
    assert_eq!(rows.len(), 13);
}

#[test]
fn output_flag_and_environment_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let by_flag = dir.path().join("flag.json");
    let out = entcert(&[
        "vertices",
        "--n",
        "2",
        "--output",
        by_flag.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&by_flag).unwrap()).unwrap();
    assert_eq!(doc["result"]["count"], 16);

    let by_env = dir.path().join("env.json");
    let out = Command::new(env!("CARGO_BIN_EXE_entcert"))
        .args(["vertices", "--n", "1"])
        .env(cli::ENV_OUTPUT, &by_env)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&by_env)
        .unwrap()
        .contains("\"count\": 2"));
}

#[test]
fn config_file_supplies_defaults_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"seed": 5, "restarts": 9, "format": "csv", "threads": 2}"#,
    )
    .unwrap();
    let cfg_arg = cfg_path.to_str().unwrap();
    let cli = <Cli as clap::Parser>::try_parse_from([
        "entcert",
        "--config",
        cfg_arg,
        "table1",
        "--restarts",
        "3",
    ])
    .unwrap();
    let cfg = RunConfig::resolve(&cli, |_| Some("4".into())).unwrap();
    assert_eq!((cfg.seed, cfg.restarts, cfg.threads), (5, 3, Some(4)));
    assert_eq!(cfg.format, cli::Format::Csv);

    std::fs::write(&cfg_path, r#"{"sead": 5}"#).unwrap();
    assert_eq!(
        entcert(&["--config", cfg_arg, "vertices", "--n", "2"])
            .status
            .code(),
        Some(EXIT_VALIDATION)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        entcert(&["facets", "--n", "4"]).status.code(),
        Some(EXIT_UNSUPPORTED)
    );
    assert_eq!(
        entcert(&["vertices", "--n", "7"]).status.code(),
        Some(EXIT_UNSUPPORTED)
    );
    assert_eq!(
        entcert(&["vertices", "--n", "0"]).status.code(),
        Some(EXIT_VALIDATION)
    );
    assert_eq!(
        entcert(&["frobnicate"]).status.code(),
        Some(EXIT_VALIDATION)
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "entries": [[0.5, 1.5], [0.0, 0.0]]}"#).unwrap();
    let out = entcert(&["membership", "--table", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("missing.json");
    let out = entcert(&["nonlinear", "--table", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    let out = entcert(&["nonlinear", "--table", &data("table1.json")]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
}

#[test]
fn scan_checkpoint_resumes_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("scan.json");
    let args = [
        "scan", "--start", "34000", "--end", "40000", "--batch", "1000",
    ];
    let plain = json_of(&entcert(&args));
    let mut with_ckpt = args.to_vec();
    with_ckpt.extend(["--checkpoint", ckpt.to_str().unwrap()]);
    let first = json_of(&entcert(&with_ckpt));
    assert_eq!(first["result"], plain["result"]);
    assert!(ckpt.exists());
    let again = json_of(&entcert(&with_ckpt));
    assert_eq!(again["result"], plain["result"]);
}
