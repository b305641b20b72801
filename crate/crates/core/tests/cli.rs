use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_odc");
const SCHEMA_BASE: &str = "https://odc.invalid/schemas/";

fn odc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run odc")
}

fn ok(args: &[&str]) -> String {
    let out = odc(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn load(name: &str) -> Value {
    let path = schema_dir().join(format!("{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn validate(name: &str, doc: &Value) {
    let schema = load(name);
    let compiled = JSONSchema::options()
        .with_document(format!("{SCHEMA_BASE}manifest.schema.json"), load("manifest"))
        .compile(&schema)
        .unwrap_or_else(|e| panic!("{name} schema: {e}"));
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{name}: {msgs:?}\n{doc:#}");
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = odc(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_and_version_succeed() {
    assert!(ok(&["--help"]).contains("Usage"));
    assert!(ok(&["--version"]).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn unknown_subcommand_or_flag_is_a_usage_error() {
    assert_eq!(odc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(odc(&["kc", "x", "--bogus"]).status.code(), Some(1));
}

#[test]
fn wrong_magic_is_a_format_error_naming_the_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.odc");
    fs::write(&bad, b"PK\x03\x04 not a container").unwrap();
    let out = odc(&["unpack", p(&bad), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("50 4b 03 04"), "{err}");
}

#[test]
fn truncated_container_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.bin");
    ok(&["gen", "family", "--family", "beta", "--n", "2000", "--out", p(&src)]);
    let packed = dir.path().join("s.odc");
    ok(&["pack", p(&src), "--codec", "lz", "--out", p(&packed)]);
    let bytes = fs::read(&packed).unwrap();
    fs::write(&packed, &bytes[..bytes.len() / 2]).unwrap();
    let out = odc(&["unpack", p(&packed), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_data_error() {
    assert_eq!(odc(&["kc", "/nonexistent/input"]).status.code(), Some(2));
}

#[test]
fn kc_on_constant_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.bin");
    ok(&["gen", "constant", "--n", "100000", "--out", p(&f)]);
    let report = json(&ok(&["kc", p(&f)]));
    validate("kc", &report);
    assert_eq!(report["best_codec"], "RLE");
    assert!(report["best_bits"].as_u64().unwrap() <= 200);
    assert_eq!(report["per_codec"]["RLE"], 104);
    assert_eq!(report["original_bits"], 800_000);
    assert_eq!(report["manifest"]["subcommand"], "kc");
    assert_eq!(report["manifest"]["inputs"][0]["length"], 100_000);
}

#[test]
fn every_json_output_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = d.join("fx");
    let sidecars = json(&ok(&["gen", "fixtures", "--n", "2048", "--out", p(&fx)]));
    for s in sidecars.as_array().unwrap() {
        validate("sidecar", s);
    }
    let a = d.join("a.bin");
    let b = d.join("b.bin");
    let sc = json(&ok(&["gen", "family", "--family", "alpha", "--n", "3000", "--seed", "4", "--out", p(&a)]));
    validate("sidecar", &sc);
    validate("sidecar", &json(&fs::read_to_string(d.join("a.bin.json")).unwrap()));
    ok(&["gen", "family", "--family", "gamma", "--n", "3000", "--out", p(&b)]);
    let empty = fx.join("empty.bin");

    validate("entropy", &json(&ok(&["entropy", p(&a)])));
    validate("kc", &json(&ok(&["kc", p(&empty)])));
    validate("depth", &json(&ok(&["depth", p(&a)])));
    validate("depth", &json(&ok(&["depth", p(&a), "--reps", "5", "--warmups", "1"])));
    let packed = d.join("a.odc");
    validate("pack", &json(&ok(&["pack", p(&a), "--out", p(&packed)])));
    validate("unpack", &json(&ok(&["unpack", p(&packed), "--out", p(&d.join("a.out"))])));
    assert_eq!(fs::read(&a).unwrap(), fs::read(d.join("a.out")).unwrap());
    validate("ncd", &json(&ok(&["ncd", p(&a), p(&b)])));
    validate("ncd", &json(&ok(&["ncd", p(&a), p(&b), "--codec", "best"])));
    validate("matrix", &json(&ok(&["matrix", p(&a), p(&b), "--format", "json"])));
    let m = d.join("m.csv");
    ok(&["matrix", p(&a), p(&b), p(&fx.join("random-2048-s1.bin")), "--out", p(&m)]);
    validate("manifest", &json(&fs::read_to_string(d.join("m.csv.manifest.json")).unwrap()));
    let nwk = d.join("t.nwk");
    validate("cluster", &json(&ok(&["cluster", p(&m), "--k", "2", "--newick", p(&nwk)])));
    assert!(fs::read_to_string(&nwk).unwrap().trim_end().ends_with(';'));
    validate("manifest", &json(&fs::read_to_string(d.join("t.nwk.manifest.json")).unwrap()));
    let steps = d.join("steps.json");
    fs::write(&steps, "[10, 12, 40, 41]").unwrap();
    validate("slowgrowth", &json(&ok(&["slowgrowth", p(&steps), "--bound", "5"])));
    let files: Vec<PathBuf> = ["empty.bin", "one-byte.bin", "pi-16384b.bin"].iter().map(|f| fx.join(f)).collect();
    let mut args = vec!["report"];
    args.extend(files.iter().map(|f| p(f)));
    validate("report", &json(&ok(&args)));

    let trace = d.join("t.jsonl");
    let summary = json(&ok(&[
        "evolve", "--mode", "cumulative", "--genome-len", "128", "--population", "16",
        "--generations", "30", "--sample-every", "5", "--out", p(&trace),
    ]));
    validate("evolve", &summary);
    validate("manifest", &json(&fs::read_to_string(d.join("t.jsonl.manifest.json")).unwrap()));
    let lines = fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count(), 7);
    for line in lines.lines() {
        validate("trace-line", &json(line));
    }
    validate("analyze", &json(&ok(&["analyze", p(&trace), "--format", "json"])));
    validate("analyze", &json(&ok(&["analyze", p(&trace), "--format", "json", "--bound", "100"])));
    let csv = ok(&["analyze", p(&trace)]);
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn gen_writes_raw_bytes_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pi.bin");
    ok(&["gen", "pi", "--bits", "32", "--out", p(&f)]);
    assert_eq!(fs::read(&f).unwrap(), [0x24, 0x3f, 0x6a, 0x88]);
    let f = dir.path().join("per.bin");
    ok(&["gen", "periodic", "--n", "7", "--pattern-hex", "0a0b", "--out", p(&f)]);
    assert_eq!(fs::read(&f).unwrap(), [10, 11, 10, 11, 10, 11, 10]);
    let f = dir.path().join("ca.bin");
    ok(&["gen", "ca", "--rule", "30", "--width", "3", "--steps", "1", "--out", p(&f)]);
    assert_eq!(fs::read(&f).unwrap(), [0xe0]);
}

#[test]
fn schemas_reject_malformed_reports() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.bin");
    ok(&["gen", "constant", "--n", "10", "--out", p(&f)]);
    let good = json(&ok(&["kc", p(&f)]));
    let compiled = |name: &str| {
        JSONSchema::options()
            .with_document(format!("{SCHEMA_BASE}manifest.schema.json"), load("manifest"))
            .compile(&load(name))
            .unwrap()
    };
    let kc = compiled("kc");
    assert!(kc.is_valid(&good));
    let mut bad = good.clone();
    bad["best_codec"] = "GZIP".into();
    assert!(!kc.is_valid(&bad));
    let mut bad = good.clone();
    bad["manifest"]["inputs"][0]["sha256"] = "xyz".into();
    assert!(!kc.is_valid(&bad));
    let mut bad = good;
    bad.as_object_mut().unwrap().remove("manifest");
    assert!(!kc.is_valid(&bad));
}
