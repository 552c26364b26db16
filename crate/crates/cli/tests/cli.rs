use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "fixtures",
        &format!("{name}.json"),
    ]
    .iter()
    .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatial-alex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = run(&all);
    (
        serde_json::from_str(&stdout(&o)).expect("report is JSON"),
        o.status.code().unwrap(),
    )
}

#[test]
fn fig5_rotation_number() {
    let o = run(&["rot", &fixture("fig5")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "rot: t*s^(-1)"), "{}", stdout(&o));
}

#[test]
fn fig5_region_windings() {
    let (v, code) = json(&["regions", &fixture("fig5")]);
    assert_eq!(code, 0);
    let mut w: Vec<&str> = v["result"]["regions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["kind"] == "regular")
        .map(|r| r["winding"]["text"].as_str().unwrap())
        .collect();
    w.sort();
    assert_eq!(w, ["1", "s^(-1)", "t", "t*s^(-1)"]);
    let unbounded: Vec<_> = v["result"]["regions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["unbounded"] == true)
        .collect();
    assert_eq!(unbounded.len(), 1);
    assert_eq!(unbounded[0]["winding"]["text"], "1");
}

#[test]
fn unknot_value() {
    let o = run(&["alexander", &fixture("circle")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "value: 1/(t^(1/2) - t^(-1/2))"), "{out}");
    assert!(out.lines().any(|l| l == "polynomial: false"));
    assert!(out.lines().any(|l| l == "rot: t"));
}

#[test]
fn report_schema() {
    let (v, _) = json(&["alexander", &fixture("fig5")]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "alexander");
    assert_eq!(v["ok"], true);
    assert_eq!(v["input"]["sha256"].as_str().unwrap().len(), 64);
    assert!(v["result"]["raw_sum"]["text"].is_string());
    assert!(v["result"]["rot"]["halves"].is_array());
    assert!(v.get("elapsed_ms").is_none());
}

#[test]
fn output_is_byte_identical() {
    for args in [
        vec!["check", "--all", "--json"],
        vec!["fuzz", "--seed", "7", "--moves", "25", "--json"],
        vec!["regions", "--json"],
    ] {
        let mut a = args.clone();
        let f = fixture("fig5");
        a.push(&f);
        let x = run(&a);
        let y = run(&a);
        assert_eq!(x.stdout, y.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let f = fixture("trefoil");
    let run_with = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_spatial-alex"))
            .args(["check", "--json", &f])
            .env("SPATIAL_ALEX_THREADS", n)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run_with("1"), run_with("4"));
}

#[test]
fn timing_is_opt_in() {
    let (v, _) = json(&["rot", "--timing", &fixture("fig5")]);
    assert!(v["elapsed_ms"].is_number());
}

#[test]
fn check_all_on_fixtures() {
    for name in ["fig5", "theta", "hopf", "trefoil", "circle"] {
        let (v, code) = json(&["check", "--all", &fixture(name)]);
        assert_eq!(code, 0, "{name}: {v}");
        let names: Vec<&str> = v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["name"].as_str().unwrap())
            .collect();
        assert!(names.contains(&"base point sweep"));
        assert!(names.contains(&"determinant oracle"));
        if name == "theta" {
            assert!(names.contains(&"states equal spanning trees"));
        }
        if name == "fig5" || name == "trefoil" {
            assert!(names.contains(&"crossing relations"));
        }
    }
}

#[test]
fn oracle_can_be_switched_off() {
    let (v, code) = json(&["check", "--all", "--oracle", "off", &fixture("fig5")]);
    assert_eq!(code, 0);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["name"] != "determinant oracle"));
}

#[test]
fn disconnected_input_sums_to_zero() {
    let (v, code) = json(&["check", "--all", "fixture:two_circles"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["statesum"]["text"], "0");
    assert_eq!(v["result"]["connected"], false);
}

#[test]
fn basis_renames_variables() {
    let (v, code) = json(&["rot", "--basis", "t,m", &fixture("fig5")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["basis"], serde_json::json!(["t", "m"]));
    let (v, code) = json(&["rot", "--basis", "t,t", &fixture("fig5")]);
    assert_eq!(code, 2);
    assert_eq!(v["ok"], false);
    assert!(v["error"]["kind"].is_string());
}

#[test]
fn specialize_auto() {
    let (v, code) = json(&["specialize", &fixture("fig5")]);
    assert_eq!(code, 0, "{v}");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "MOY relation" && c["ok"] == true));
    assert!(checks
        .iter()
        .any(|c| c["name"] == "specialized equals one-variable run" && c["ok"] == true));
}

#[test]
fn bad_inputs_exit_2() {
    assert_eq!(run(&["rot", "no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["rot", "fixture:nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["specialize", "--coloring", "t=1", &fixture("fig5")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["statesum", "--base", "zz", &fixture("fig5")]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{not json").unwrap();
    assert_eq!(run(&["rot", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn statesum_at_chosen_base() {
    let a = json(&["statesum", "--base", "t1", &fixture("fig5")]).0;
    let b = json(&["statesum", "--base", "s2", &fixture("fig5")]).0;
    assert_eq!(a["result"]["base"], "t1");
    assert_eq!(b["result"]["base"], "s2");
    assert_eq!(a["result"]["value"]["text"], b["result"]["value"]["text"]);
}

#[test]
fn framed_fuzz_keeps_value() {
    for (name, seed, moves) in [("fig5", "1", "50"), ("circle", "2", "30")] {
        let (v, code) = json(&["fuzz", "--framed", "--seed", seed, "--moves", moves, &fixture(name)]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(
            v["result"]["script"].as_array().unwrap().len(),
            moves.parse::<usize>().unwrap()
        );
        assert_eq!(v["checks"][0]["name"], "normalized value constant");
    }
}

#[test]
fn unframed_fuzz_logs_drift() {
    let (v, code) = json(&["fuzz", "--seed", "1", "--moves", "50", &fixture("fig5")]);
    assert_eq!(code, 0);
    assert!(v["result"]["drift"].is_object() || v["result"]["drift"].is_array());
    assert_eq!(v["result"]["steps"].as_array().unwrap().len(), 50);
}

#[test]
fn replay_reproduces_fuzz() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.json");
    let out = dir.path().join("end.json");
    let f = fixture("trefoil");
    let o = run(&[
        "fuzz",
        "--framed",
        "--seed",
        "5",
        "--moves",
        "20",
        "--script",
        script.to_str().unwrap(),
        &f,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "replay",
        "--framed",
        "--out",
        out.to_str().unwrap(),
        &f,
        script.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let start = json(&["alexander", &f]).0;
    let end = json(&["alexander", out.to_str().unwrap()]).0;
    assert_eq!(start["result"]["value"]["text"], end["result"]["value"]["text"]);
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_spatial-alex"))
        .args(["rot", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(&std::fs::read(fixture("fig5")).unwrap())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(String::from_utf8(o.stdout).unwrap().contains("rot: t*s^(-1)"));
}
