//! End-to-end tests against the built binary: exit codes, determinism,
//! format contracts, and the documented environment switch.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static DIR_SEQ: AtomicUsize = AtomicUsize::new(0);

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "jplus-cli-test-{}-{}",
        std::process::id(),
        DIR_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn jplus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jplus"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_str(stdout_of(out).trim()).unwrap()
}

fn write(dir: &PathBuf, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

fn constructed(dir: &PathBuf, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--format", "json", "--out", path.to_str().unwrap()]);
    let out = jplus(&full);
    assert!(out.status.success());
    path.to_str().unwrap().to_string()
}

#[test]
fn construct_output_pipes_into_invariants() {
    let dir = workdir();
    let curve = constructed(&dir, "k3.json", &["standard", "3"]);
    let report = json_of(&jplus(&["invariants", &curve, "--format", "json"]));
    assert_eq!(report["jplus"], -4);
    assert_eq!(report["rotation"], 3);
    assert_eq!(report["rotation_geometric"], 3);
}

#[test]
fn nested_family_member_sits_on_the_bound() {
    let dir = workdir();
    let curve = constructed(&dir, "a3.json", &["innerloop", "3"]);
    let report = json_of(&jplus(&["invariants", &curve, "--format", "json"]));
    assert_eq!(report["jplus"], -6);
    assert_eq!(report["bound_slack"], 0);
}

#[test]
fn gauss_code_input_is_accepted() {
    let dir = workdir();
    let code = write(&dir, "circle.gauss", "@0");
    let text = stdout_of(&jplus(&["invariants", &code]));
    assert!(text.contains("rotation: 1"));
    assert!(text.contains("jplus: 0"));
}

#[test]
fn garbage_input_exits_one() {
    let dir = workdir();
    let bad = write(&dir, "bad.txt", "definitely not a curve");
    let out = jplus(&["invariants", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unknown_verb_exits_one() {
    let out = jplus(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn walks_are_deterministic_and_print_the_seed() {
    let dir = workdir();
    let code = write(&dir, "circle.gauss", "@0");
    let args = ["move", "walk", &code, "--steps", "8", "--seed", "11", "--format", "json"];
    let first = stdout_of(&jplus(&args));
    let second = stdout_of(&jplus(&args));
    assert_eq!(first, second);
    assert!(first.contains("\"seed\":11"));

    let text = stdout_of(&jplus(&["move", "walk", &code, "--steps", "8", "--seed", "11"]));
    assert!(text.contains("seed: 11"));
}

#[test]
fn crossing_cap_env_bounds_walks() {
    let dir = workdir();
    let code = write(&dir, "circle.gauss", "@0");
    let out = Command::new(env!("CARGO_BIN_EXE_jplus"))
        .args(["move", "walk", &code, "--steps", "60", "--seed", "3", "--format", "json"])
        .env("JPLUS_MAX_CROSSINGS", "4")
        .output()
        .unwrap();
    let trace = json_of(&out);
    let visits = trace["final"]["visits"].as_array().unwrap();
    assert!(visits.len() <= 8, "cap of 4 crossings allows 8 visits");
}

#[test]
fn move_list_and_apply_share_indices() {
    let dir = workdir();
    let code = write(&dir, "circle.gauss", "@0");
    let listing = stdout_of(&jplus(&["move", "list", &code]));
    assert!(listing.starts_with("0: create inverse contact"));

    let applied = json_of(&jplus(&["move", "apply", &code, "--site", "0", "--format", "json"]));
    assert_eq!(applied["delta_jplus"], 0);
    // A tangency adds two crossings, each visited twice.
    assert_eq!(applied["visits"].as_array().unwrap().len(), 4);

    let out = jplus(&["move", "apply", &code, "--site", "99"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn loop_insertion_defaults_to_the_disk() {
    let dir = workdir();
    let circle = constructed(&dir, "circle.json", &["standard", "1"]);
    let result = json_of(&jplus(&["sum", "loop", &circle, "--depth", "3", "--format", "json"]));
    assert_eq!(result["predicted_jplus"], -12);
    assert_eq!(result["predicted_rot"], 4);
}

#[test]
fn connected_sums_add_values() {
    let dir = workdir();
    let circle = constructed(&dir, "circle.json", &["standard", "1"]);
    let two = constructed(&dir, "two.json", &["standard", "2"]);
    let result = json_of(&jplus(&[
        "sum", "connected", &circle, &two, "--mode", "flip", "--format", "json",
    ]));
    assert_eq!(result["predicted_jplus"], -2);
    // The summed curve is itself ingestible.
    let dirpath = dir.join("sum.json");
    fs::write(&dirpath, stdout_of(&jplus(&[
        "sum", "connected", &circle, &two, "--mode", "flip", "--format", "json",
    ]))).unwrap();
    let report = json_of(&jplus(&["invariants", dirpath.to_str().unwrap(), "--format", "json"]));
    assert_eq!(report["jplus"], -2);
}

#[test]
fn render_is_byte_stable_and_rejects_bare_diagrams() {
    let dir = workdir();
    let square = write(&dir, "square.json", r#"{"vertices": [[0,0],[4,0],[4,4],[0,4]]}"#);
    let a = dir.join("a.svg");
    let b = dir.join("b.svg");
    assert!(jplus(&["render", &square, "--out", a.to_str().unwrap()]).status.success());
    assert!(jplus(&["render", &square, "--out", b.to_str().unwrap()]).status.success());
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let svg = String::from_utf8(bytes).unwrap();
    assert_eq!(svg.matches("<path").count(), 1);

    let diagram = write(
        &dir,
        "diagram.json",
        r#"{"visits":[],"signs":[],"outer_arc":0,"outer_side":"right"}"#,
    );
    let out = jplus(&["render", &diagram]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn render_labels_flag_adds_layers() {
    let dir = workdir();
    let circle = constructed(&dir, "circle.json", &["standard", "1"]);
    let svg = stdout_of(&jplus(&["render", &circle, "--labels", "winding,rotation"]));
    assert!(svg.contains("class=\"winding\""));
    assert!(svg.contains("rotation 1"));

    let out = jplus(&["render", &circle, "--labels", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_filter_runs_matching_checks() {
    let out = jplus(&["verify", "--filter", "standard-family", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 1);

    let none = jplus(&["verify", "--filter", "no-such-check"]);
    assert_eq!(none.status.code(), Some(1));
}
