//! The command-line binary: outputs, exit codes, determinism and documents.

use std::path::PathBuf;
use std::process::{Command, Output};

use chanmetric::document::{load_channel, ChannelDocument};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn chanmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chanmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let mut full = vec!["--output", "json"];
    full.extend_from_slice(args);
    let out = chanmetric(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn trivial_fidelities_and_angles() {
    let v = json_ok(&["fidelity", &data("id.json"), &data("id.json")]);
    assert!((v["result"]["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["command"], "fidelity");
    assert_eq!(v["config"]["sdp_tol"], 1e-9);
    let v = json_ok(&["angle", &data("id.json"), &data("rot_halfpi.json")]);
    let a = v["result"]["angle"].as_f64().unwrap();
    assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    let v = json_ok(&["angle", "--unitary", &data("id.json"), &data("rot_halfpi.json")]);
    assert!((v["result"]["angle"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let v = json_ok(&["cu", &data("rot_0.3.json")]);
    assert!((v["result"]["c"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn diamond_bounds_with_oracle() {
    let v = json_ok(&[
        "diamond-bounds",
        "--oracle",
        &data("id.json"),
        &data("dephasing_0.5.json"),
    ]);
    let r = &v["result"];
    let d = r["diamond_norm"].as_f64().unwrap();
    assert!((d - 0.5).abs() < 1e-6);
    assert!(r["lower"].as_f64().unwrap() <= d && d <= r["upper"].as_f64().unwrap() + 1e-6);
}

#[test]
fn text_output_is_key_value() {
    let out = chanmetric(&["bures", &data("id.json"), &data("dephasing_0.5.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("bures"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    let out = chanmetric(&["fidelity", &data("id.json")]);
    assert_eq!(out.status.code(), Some(2));
    let out = chanmetric(&["fidelity", &data("id.json"), "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = chanmetric(&[
        "--output",
        "json",
        "qfi",
        "--family",
        "rotation",
        "--params",
        "pauli=x",
        "--x",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid-argument");
    // Channels with different dimensions.
    let out = chanmetric(&["fidelity", &data("id.json"), &data("plus_plus.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_setting_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_chanmetric"))
        .args(["cu", &data("id.json")])
        .env("CHANMETRIC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "--output",
        "json",
        "oracle",
        "min-output-fidelity",
        "--restarts",
        "4",
        &data("rot_0.3.json"),
        &data("dephasing_0.5.json"),
    ];
    let first = chanmetric(&args).stdout;
    let second = Command::new(env!("CARGO_BIN_EXE_chanmetric"))
        .args(args)
        .env("CHANMETRIC_THREADS", "1")
        .output()
        .unwrap()
        .stdout;
    assert!(!first.is_empty());
    assert_eq!(first, second);
    let f = ["--output", "json", "fidelity", &data("rot_0.3.json"), &data("dephasing_0.5.json")];
    assert_eq!(chanmetric(&f).stdout, chanmetric(&f).stdout);
}

#[test]
fn report_embeds_round_trippable_channels() {
    let v = json_ok(&[
        "--max-n",
        "2",
        "discriminate",
        &data("id.json"),
        &data("rot_halfpi.json"),
    ]);
    let r = &v["result"];
    assert_eq!(r["direct_min_n"], 1);
    assert_eq!(r["lb_angle"], 1);
    let doc: ChannelDocument = serde_json::from_value(r["pair"][1].clone()).unwrap();
    let original = load_channel(std::path::Path::new(&data("rot_halfpi.json"))).unwrap();
    assert!(doc.to_channel().unwrap().approx_eq(&original, 0.0));
}

#[test]
fn family_file_matches_flags() {
    let by_flags = json_ok(&["qfi", "--family", "dephasing", "--x", "0.5"]);
    let by_file = json_ok(&["qfi", "--family-file", &data("family_dephasing.json"), "--x", "0.5"]);
    assert_eq!(by_flags["result"], by_file["result"]);
}

#[test]
fn oracle_commands_run() {
    let v = json_ok(&[
        "oracle",
        "classical-fisher",
        "--family",
        "unitary-generator",
        "--params",
        "pauli=z,scale=0.5",
        "--x",
        "1",
        "--povm",
        &data("povm_x.json"),
        "--probe",
        &data("plus_plus.json"),
    ]);
    assert!((v["result"]["classical_fisher"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    let v = json_ok(&["oracle", "state-fidelity", &data("plus_plus.json"), &data("plus_plus.json")]);
    assert!((v["result"]["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let v = json_ok(&["oracle", "diamond", &data("id.json"), &data("rot_halfpi.json")]);
    assert!((v["result"]["diamond_norm"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn outputs_match_schemas() {
    let out = schema("output.schema.json");
    for args in [
        vec!["fidelity".to_string(), data("rot_0.3.json"), data("dephasing_0.5.json")],
        vec!["angle".into(), "--unitary".into(), data("id.json"), data("rot_0.3.json")],
        vec!["bures".into(), data("id.json"), data("dephasing_0.5.json")],
        vec!["diamond-bounds".into(), data("id.json"), data("dephasing_0.5.json")],
        vec!["cu".into(), data("rot_0.3.json")],
        vec!["qfi".into(), "--family".into(), "depolarizing".into(), "--x".into(), "0.5".into()],
        vec![
            "path-length".into(),
            "--family".into(),
            "unitary-generator".into(),
            "--params".into(),
            "pauli=x,hi=1".into(),
            "--variant".into(),
            "scaled".into(),
            "--grid".into(),
            "9".into(),
        ],
        vec!["--max-n".into(), "1".into(), "discriminate".into(), data("id.json"), data("rot_halfpi.json")],
        vec!["oracle".into(), "min-overlap".into(), "--restarts".into(), "2".into(), data("rot_0.3.json")],
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_valid(&out, &json_ok(&refs));
    }

    let err = schema("error.schema.json");
    let failed = chanmetric(&["--output", "json", "cu", "/nonexistent.json"]);
    assert_eq!(failed.status.code(), Some(2));
    assert_valid(&err, &serde_json::from_slice(&failed.stderr).unwrap());

    let channel = schema("channel.schema.json");
    for name in ["id.json", "rot_0.3.json", "dephasing_0.5.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
        assert_valid(&channel, &v);
    }
    let bad = serde_json::json!({"format_version": 1, "dim_in": 2, "dim_out": 2, "kraus": [], "extra": 0});
    assert!(!channel.is_valid(&bad));
}
