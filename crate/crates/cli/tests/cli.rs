//! End-to-end tests for the `mumford` binary: JSON contract, exit
//! codes, figure emission, and byte-level determinism.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mumford"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(stdin.as_bytes())
        .expect("stdin writable");
    child.wait_with_output().expect("binary finishes")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn dendrogram_reports_tree_and_writes_figures() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("tree.svg");
    let dot_path = dir.path().join("tree.dot");
    let out = run(
        &[
            "dendrogram",
            "--svg",
            svg_path.to_str().unwrap(),
            "--dot",
            dot_path.to_str().unwrap(),
        ],
        r#"{"p":5,"points":["0","1","inf","5"]}"#,
    );
    assert_eq!(exit_code(&out), 0, "stderr: {:?}", out.stderr);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 4);
    assert_eq!(v["type"]["binary"], true);
    assert_eq!(v["type"]["dimension"], 1);
    assert_eq!(v["type"]["splits"], serde_json::json!([[1, 2]]));
    assert_eq!(v["depths"].as_array().unwrap().len(), 2);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(">inf<"));
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("graph dendrogram {"));
}

#[test]
fn composite_p_is_a_machine_readable_error() {
    let out = run(&["dendrogram"], r#"{"p":4,"points":["0","1"]}"#);
    assert_eq!(exit_code(&out), 2);
    let v = stdout_json(&out);
    assert_eq!(v["error"]["kind"], "invalid_input");
    assert!(v["error"]["message"].as_str().unwrap().contains("prime"));
}

#[test]
fn count_methods_agree_on_cubics() {
    let lattice = run(&["count"], r#"{"d":3,"g":0}"#);
    assert_eq!(exit_code(&lattice), 0);
    assert_eq!(stdout_json(&lattice)["N"], 12);

    let recursion = run(&["count"], r#"{"d":3,"g":0,"method":"recursion"}"#);
    assert_eq!(exit_code(&recursion), 0);
    assert_eq!(stdout_json(&recursion)["N"], 12);

    let direct = run(
        &["count"],
        r#"{"d":1,"g":0,"method":"direct","points":[["0","0"],["1","3"]]}"#,
    );
    assert_eq!(exit_code(&direct), 0);
    let v = stdout_json(&direct);
    assert_eq!(v["N"], 1);
    assert_eq!(v["certificate"], "general");
    assert_eq!(v["curves"], 1);
}

#[test]
fn impossible_genus_is_rejected() {
    let out = run(&["count"], r#"{"d":3,"g":4}"#);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "invalid_input");
}

#[test]
fn direct_search_bound_is_a_resource_error() {
    let pts: Vec<String> = (0..11).map(|i| format!("[\"{}\",\"{}\"]", i, i * i)).collect();
    let doc = format!(
        r#"{{"d":4,"g":0,"method":"direct","points":[{}]}}"#,
        pts.join(",")
    );
    let out = run(&["count"], &doc);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "resource_bound");
}

#[test]
fn cells_summarizes_moduli_structure() {
    let out = run(&["cells"], r#"{"n":4}"#);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["types"], 4);
    assert_eq!(v["maximal"], 3);
    assert_eq!(v["weight"], "1/3");
    assert_eq!(v["lambda"], 1.0);
}

#[test]
fn measure_emits_exact_atoms_and_stable_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    let doc = r#"{"chain_N":2}"#;
    let first = run(&["measure", "--svg", svg_a.to_str().unwrap()], doc);
    assert_eq!(exit_code(&first), 0);
    let v = stdout_json(&first);
    assert_eq!(
        v["atoms"],
        serde_json::json!([["0", "1/4"], ["1/2", "1/2"], ["1", "1/4"]])
    );
    assert_eq!(v["weak_convergence_error"], "1/4");
    let second = run(&["measure", "--svg", svg_b.to_str().unwrap()], doc);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(
        std::fs::read(&svg_a).unwrap(),
        std::fs::read(&svg_b).unwrap(),
        "figure bytes must be reproducible"
    );
}

#[test]
fn amplitude_closed_form_matches_known_value() {
    // At vanishing exponents the four regional values cancel exactly,
    // but the outside series only sums after continuation.
    let out = run(&["amplitude"], r#"{"p":3,"exponents":[0,0],"mode":"continued"}"#);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["total"], 0.0);
    let regions = v["regions"].as_array().unwrap();
    assert_eq!(regions.len(), 4);
    assert_eq!(regions[3]["region"], "outside");
    assert_eq!(regions[3]["value"], -1.0);
    assert_eq!(regions[3]["convergent"], false);

    let strict = run(&["amplitude"], r#"{"p":3,"exponents":[0,0]}"#);
    assert_eq!(exit_code(&strict), 2);
    assert!(stdout_json(&strict)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("outside"));
}

#[test]
fn strict_mode_rejects_divergent_exponents() {
    let out = run(&["amplitude"], r#"{"p":3,"exponents":[-1.5,0.2]}"#);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "invalid_input");
    let continued = run(
        &["amplitude"],
        r#"{"p":3,"exponents":[-1.5,0.2],"mode":"continued"}"#,
    );
    assert_eq!(exit_code(&continued), 0);
}

/// Massless Klein-parametrized momenta with k₁·k₂ = k₂·k₃ = 0: on the
/// units window every sample carries the same weight, so the estimate
/// is the exact units mass 1 − 2/p.
const UNIT_MOMENTA: &str =
    r#""momenta":[[1,0,1],[1,0,-1],[-1,0,-1],[-1,0,1]],"window":"units""#;

#[test]
fn amplitude_mc_is_seed_deterministic() {
    let doc = format!(r#"{{"p":5,{},"samples":5000,"seed":11}}"#, UNIT_MOMENTA);
    let first = run(&["amplitude"], &doc);
    assert_eq!(exit_code(&first), 0);
    let second = run(&["amplitude"], &doc);
    assert_eq!(first.stdout, second.stdout, "same seed, same bytes");
    let v = stdout_json(&first);
    let estimate = v["estimate"].as_f64().unwrap();
    assert!((estimate - 0.6).abs() < 1e-12);
    assert_eq!(v["warning"], false);
    assert_eq!(v["window"]["units_only"], true);

    let reseeded = run(
        &["amplitude"],
        &format!(r#"{{"p":5,{},"samples":5000,"seed":12}}"#, UNIT_MOMENTA),
    );
    assert_eq!(exit_code(&reseeded), 0);
}

#[test]
fn json_seed_takes_precedence_over_flag() {
    let doc = format!(r#"{{"p":5,{},"samples":2000,"seed":11}}"#, UNIT_MOMENTA);
    let a = run(&["amplitude", "--seed", "99"], &doc);
    let b = run(&["amplitude", "--seed", "100"], &doc);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "JSON seed wins over the flag");
}

#[test]
fn stochastic_subcommands_require_a_seed() {
    let doc = format!(r#"{{"p":5,{},"samples":2000}}"#, UNIT_MOMENTA);
    let out = run(&["amplitude"], &doc);
    assert_eq!(exit_code(&out), 2);
    assert!(stdout_json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("seed"));
}

#[test]
fn mumford_certifies_or_abstains() {
    let certified = run(
        &["mumford"],
        r#"{"p":5,"d":1,"g":0,"points":[["1","1","5"],["1","25","1"]],"config_pool_seed":7}"#,
    );
    assert_eq!(exit_code(&certified), 0);
    let v = stdout_json(&certified);
    assert_eq!(v["outcome"], "certified");
    assert_eq!(v["N"], 1);

    // Coincident tropicalizations that this pool fails to separate: the
    // tool must abstain (exit 3), never report a wrong count.
    let abstained = run(
        &["mumford"],
        r#"{"p":5,"d":1,"g":0,"points":[["1","1","1"],["1","1","2"]],"config_pool_seed":1}"#,
    );
    assert_eq!(exit_code(&abstained), 3);
    assert_eq!(stdout_json(&abstained)["outcome"], "inconclusive");
}

#[test]
fn thread_count_never_changes_results() {
    let doc = format!(r#"{{"p":5,{},"samples":5000,"seed":11}}"#, UNIT_MOMENTA);
    let one = run(&["amplitude", "--threads", "1"], &doc);
    let four = run(&["amplitude", "--threads", "4"], &doc);
    assert_eq!(exit_code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let zero = run(&["amplitude", "--threads", "0"], &doc);
    assert_eq!(exit_code(&zero), 2);
}

#[test]
fn unknown_fields_warn_but_do_not_fail() {
    let out = run(&["cells"], r#"{"n":4,"flavor":"mint"}"#);
    assert_eq!(exit_code(&out), 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("flavor"));
    assert_eq!(stdout_json(&out)["types"], 4);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let in_path = dir.path().join("job.json");
    let out_path = dir.path().join("result.json");
    std::fs::write(&in_path, r#"{"d":2,"g":0}"#).unwrap();
    let out = run(
        &[
            "count",
            "--in",
            in_path.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(exit_code(&out), 0);
    let file = std::fs::read_to_string(&out_path).unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(file, stdout.trim_end());
    assert!(!Path::new(&format!("{}.tmp", out_path.display())).exists());
}

#[test]
fn tropicalize_maps_coordinates_to_valuations() {
    let out = run(
        &["tropicalize"],
        r#"{"p":5,"points":[["1","1","5"],["1","25","1"]]}"#,
    );
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(
        v["points"],
        serde_json::json!([
            {"x": "0", "y": "1"},
            {"x": "2", "y": "0"}
        ])
    );

    // A point on the line the chart omits is rejected, not silently mapped.
    let bad = run(&["tropicalize"], r#"{"p":5,"points":[["0","0","1"]]}"#);
    assert_eq!(exit_code(&bad), 2);
    assert!(stdout_json(&bad)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("points[0]"));
}

#[test]
fn figures_are_refused_where_nothing_is_drawn() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("nope.svg");
    let out = run(
        &["tropicalize", "--svg", svg_path.to_str().unwrap()],
        r#"{"p":5,"points":[["1","1","5"]]}"#,
    );
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "invalid_input");
    assert!(!svg_path.exists());
}

#[test]
fn malformed_json_is_rejected() {
    let out = run(&["count"], "{\"d\":3,");
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "invalid_input");
}
