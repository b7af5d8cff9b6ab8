use std::path::Path;
use std::process::{Command, Output};

use maxweights_core::harness::{corpus_scenario, ScenarioConfig};
use serde_json::Value;

fn maxweights(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxweights"))
        .args(args)
        .env_remove("MAXWEIGHTS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn schema(name: &str) -> Value {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema");
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("$id");
    v
}

/// Report schema with the config schema substituted for its reference.
fn report_schema() -> Value {
    fn inline(node: &mut Value, config: &Value) {
        match node {
            Value::Object(map) => {
                if map.get("$ref").and_then(Value::as_str) == Some("config.schema.json") {
                    *node = config.clone();
                } else {
                    map.values_mut().for_each(|v| inline(v, config));
                }
            }
            Value::Array(items) => items.iter_mut().for_each(|v| inline(v, config)),
            _ => {}
        }
    }
    let mut config = schema("config.schema.json");
    config.as_object_mut().unwrap().remove("$schema");
    let mut report = schema("report.schema.json");
    inline(&mut report, &config);
    report
}

fn assert_valid(schema: &Value, doc: &Value) {
    let validator = jsonschema::validator_for(schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn shipped(name: &str) -> Value {
    serde_json::to_value(corpus_scenario(name).unwrap().unwrap()).unwrap()
}

#[test]
fn corpus_lists_shipped_scenarios() {
    let out = maxweights(&["corpus"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["lebesgue_m1", "lebesgue_m2", "power_half_a2", "smoke_m3"] {
        assert!(text.lines().any(|l| l == name), "{name} missing from:\n{text}");
    }
}

#[test]
fn run_report_matches_schema_and_round_trips_config() {
    let out = maxweights(&["run", "lebesgue_m1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_valid(&report_schema(), &report);
    let cfg = ScenarioConfig::from_value(report["config"].clone()).unwrap();
    assert_eq!(cfg, corpus_scenario("lebesgue_m1").unwrap().unwrap());
    assert_eq!(report["sawyer"]["value"], 1.0);
}

#[test]
fn two_dimensional_report_matches_schema() {
    let out = maxweights(&["run", "checkerboard_2d"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_valid(&report_schema(), &stdout_json(&out));
}

#[test]
fn verify_report_matches_schema() {
    let out = maxweights(&["verify", "--suite", "sandwich,sparse,principal,dilation", "checkerboard_a2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_valid(&schema("verify.schema.json"), &report);
    assert_eq!(report["pass"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 4);
    assert!(stderr(&out).contains("sparse"));
}

#[test]
fn corrupted_sparse_family_fails_with_exit_1() {
    let out = maxweights(&["verify", "--suite", "sparse", "--corrupt-sparse", "lognormal_pair_1d"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], false);
    assert!(report["suites"][0]["failures"].as_u64().unwrap() > 0);
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = shipped("lebesgue_m1");
    cfg["lattice"]["Q"] = Value::from(3);
    let out = maxweights(&["run", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lattice"), "{}", stderr(&out));

    let mut cfg = shipped("lebesgue_m1");
    cfg["exponents"]["p"] = serde_json::json!([0.5]);
    let out = maxweights(&["run", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let out = maxweights(&["verify", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"));

    let out = maxweights(&["run", "no_such_scenario"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_budget_writes_partial_report_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = shipped("lebesgue_m1");
    cfg["budgets"] = serde_json::json!({"sawyer_work": 1});
    let out = maxweights(&["run", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["partial_report"], true);
    assert!(report["error"].is_string());
    assert_valid(&report_schema(), &report);
}

#[test]
fn csv_outputs_have_expected_columns() {
    let out = maxweights(&["run", "lebesgue_m1", "--format", "csv"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["key", "value"]);
    assert!(rdr.records().map(Result::unwrap).any(|r| &r[0] == "sawyer"));

    let out = maxweights(&["sparse", "lognormal_pair_1d", "--dump"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["t", "k", "anchor", "side", "term", "e_measure"]);
    let shifts: std::collections::BTreeSet<String> =
        rdr.records().map(|r| r.unwrap()[0].to_owned()).collect();
    assert_eq!(shifts.len(), 2);

    let out = maxweights(&["principal", "lognormal_pair_1d", "--dump"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().len(), 8);
    assert!(rdr.records().count() >= 1);
}

#[test]
fn sweep_table_has_one_row_per_value_and_records_bad_points() {
    let out = maxweights(&[
        "sweep",
        "checkerboard_a2",
        "--param",
        "w[0].lo",
        "--values=0.5,-1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "value");
    assert_eq!(&header[header.len() - 1], "error");
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][header.len() - 1].is_empty());
    assert!(!rows[1][header.len() - 1].is_empty());

    let out = maxweights(&["sweep", "checkerboard_a2", "--param", "w.0.nope", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_receives_files_and_seed_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = maxweights(&["run", "lebesgue_m1", "--seed", "77", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 77);
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_maxweights"))
            .args(["run", "checkerboard_a2"])
            .env("MAXWEIGHTS_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let two = run("2");
    assert!(one.status.success() && two.status.success());
    let strip = |o: &Output| {
        let mut v = stdout_json(o);
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    assert_eq!(strip(&one), strip(&two));
    assert_eq!(run("many").status.code(), Some(2));
}
