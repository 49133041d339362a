use std::path::{Path, PathBuf};
use std::process::Command;

use fracdecomp::io;
use fracdecomp::{verify_weighting, weighting::unit_target, Edge, Graph};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    report: Value,
}

fn run(args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_fracdecomp"))
        .args(args)
        .arg("--report")
        .arg(&report_path)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(&report_path)
        .map(|s| serde_json::from_str(&s).unwrap())
        .unwrap_or(Value::Null);
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        report,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn minus_perfect_matching(n: usize) -> Graph {
    Graph::complete(n).with_edges_removed((0..n / 2).map(|i| Edge::new(2 * i, 2 * i + 1)))
}

fn check_report_shape(r: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.v1.json")).unwrap();
    let obj = r.as_object().expect("report object");
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    let mut want = required.clone();
    want.sort_unstable();
    assert_eq!(keys, want);
    assert_eq!(r["schema"], schema["properties"]["schema"]["const"]);
    let verdicts = schema["properties"]["verdict"]["enum"].as_array().unwrap();
    assert!(verdicts.contains(&r["verdict"]));
    let digest = r["inputs_digest"].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
    let empty = r["residuals"].as_array().unwrap().is_empty();
    assert_eq!(empty, r["verdict"] == "pass", "{r}");
}

#[test]
fn kminusm_output_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "0-1"]);
    assert_eq!(r.code, 0);
    check_report_shape(&r.report);
    let w = io::parse_weighting(&r.stdout).unwrap();
    let g = Graph::complete(8).with_edges_removed([Edge::new(0, 1)]);
    assert!(verify_weighting(&g, &w, unit_target).pass);
    let gp = write(dir.path(), "g.txt", &io::write_graph(&g));
    let wp = write(dir.path(), "w.json", &r.stdout);
    let v = run(&["verify", "--graph", s(&gp), "--weights", s(&wp)]);
    assert_eq!(v.code, 0);
    assert_eq!(v.report["verdict"], "pass");
    assert!(v.stdout.is_empty());
}

#[test]
fn compressed_kminusm() {
    let r = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "0-1", "--compressed"]);
    assert_eq!(r.code, 0);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["per_type"]["1"], "1/5");
    assert_eq!(doc["per_type"]["0"], "3/20");
}

#[test]
fn self_loop_is_a_usage_error_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let gp = write(dir.path(), "g.txt", "4 2\n0 1\n3 3\n");
    let wp = write(dir.path(), "w.json", "{\"r\": 3, \"entries\": []}");
    let r = run(&["verify", "--graph", s(&gp), "--weights", s(&wp)]);
    assert_eq!(r.code, 2);
    check_report_shape(&r.report);
    assert_eq!(r.report["verdict"], "error");
    let msg = r.report["residuals"][0]["message"].as_str().unwrap();
    assert!(msg.contains("line 3") && msg.contains("self-loop"), "{msg}");
}

#[test]
fn bad_weights_fail_with_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let gp = write(dir.path(), "g.txt", &io::write_graph(&Graph::complete(4)));
    let wp = write(dir.path(), "w.json", "{\"r\": 3, \"entries\": [{\"vertices\": [0,1,2], \"weight\": \"1/2\"}]}");
    let r = run(&["verify", "--graph", s(&gp), "--weights", s(&wp)]);
    assert_eq!(r.code, 1);
    check_report_shape(&r.report);
    let first = &r.report["residuals"][0];
    assert_eq!(first["edge"], serde_json::json!([0, 1]));
    assert_eq!(first["actual"], "1/2");
    assert_eq!(first["residual"], "1/2");
}

#[test]
fn usage_errors_exit_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_fracdecomp"))
        .args(["decompose-kminusm", "--r", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "0-1,1-2"]);
    assert_eq!(r.code, 2);
    let r = run(&["decompose-kminusm", "--r", "3", "--k", "7"]);
    assert_eq!(r.code, 2);
}

#[test]
fn lp_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let star = write(dir.path(), "star.txt", "4 3\n0 1\n0 2\n0 3\n");
    let r = run(&["lp-check", "--graph", s(&star), "--r", "3"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["verdict"], "infeasible");
    assert_eq!(r.report["details"]["certificate_valid"], true);
    let c = io::parse_certificate(&r.stdout).unwrap();
    let g = io::parse_graph(&std::fs::read_to_string(&star).unwrap()).unwrap();
    assert!(c.check(&g, unit_target));

    let k5 = write(dir.path(), "k5.txt", &io::write_graph(&Graph::complete(5)));
    let r = run(&["lp-check", "--graph", s(&k5), "--r", "3"]);
    assert_eq!(r.code, 0);
    let w = io::parse_weighting(&r.stdout).unwrap();
    assert!(verify_weighting(&Graph::complete(5), &w, unit_target).pass);
}

#[test]
fn pipeline_exact_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (Graph::complete(12), vec![], "lift-to-exact"),
        (minus_perfect_matching(10), vec![], "matching-recursion"),
        (Graph::complete(5), vec!["--blow-up", "2"], "blow-up-projection"),
    ];
    for (i, (g, extra, step)) in cases.into_iter().enumerate() {
        let gp = write(dir.path(), &format!("g{i}.txt"), &io::write_graph(&g));
        let out = dir.path().join(format!("w{i}.json"));
        let mut args = vec!["decompose", "--graph", s(&gp), "--r", "3", "--mode", "exact", "--out", s(&out)];
        args.extend(extra);
        let r = run(&args);
        assert_eq!(r.code, 0, "{}", r.report);
        check_report_shape(&r.report);
        let text = std::fs::read_to_string(&out).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert!(doc["provenance"].as_array().unwrap().iter().any(|p| p == step), "{}", doc["provenance"]);
        let w = io::parse_weighting(&text).unwrap();
        assert!(verify_weighting(&g, &w, unit_target).pass);
        let v = run(&["verify", "--graph", s(&gp), "--weights", s(&out)]);
        assert_eq!(v.code, 0);
    }
}

#[test]
fn pipeline_gate_and_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let gp = write(dir.path(), "k12.txt", &io::write_graph(&Graph::complete(12)));
    let r = run(&["decompose", "--graph", s(&gp), "--r", "3", "--enforce-gate"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["verdict"], "fail");
    let star = write(dir.path(), "star.txt", "4 3\n0 1\n0 2\n0 3\n");
    let r = run(&["decompose", "--graph", s(&star), "--r", "3"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["verdict"], "infeasible");
}

#[test]
fn pipeline_validate_is_marked_approximate() {
    let dir = tempfile::tempdir().unwrap();
    let gp = write(dir.path(), "k24.txt", &io::write_graph(&Graph::complete(24)));
    let r = run(&["decompose", "--graph", s(&gp), "--r", "3", "--mode", "validate", "--n-samples", "5000", "--seed", "3"]);
    assert_ne!(r.code, 2);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["approximate"], true);
    assert_eq!(r.report["seed"], 3);
}

#[test]
fn correct_and_lift() {
    let dir = tempfile::tempdir().unwrap();
    let mut targets = String::new();
    for u in 0..8 {
        for v in u + 1..8 {
            let x = if (u + v) % 3 == 0 { "6/7" } else { "13/14" };
            targets.push_str(&format!("{u} {v} {x}\n"));
        }
    }
    let tp = write(dir.path(), "t.txt", &targets);
    let r = run(&["correct", "--r", "3", "--targets", s(&tp)]);
    assert_eq!(r.code, 0, "{}", r.report);

    let bad = write(dir.path(), "bad.txt", &targets.replace("13/14", "1/2"));
    let r = run(&["correct", "--r", "3", "--targets", s(&bad)]);
    assert_eq!(r.code, 2);

    let gp = write(dir.path(), "k8.txt", &io::write_graph(&Graph::complete(8)));
    let wp = write(
        dir.path(),
        "w22.json",
        "{\"r\": 8, \"entries\": [{\"vertices\": [0,1,2,3,4,5,6,7], \"weight\": \"1/1\"}]}",
    );
    let r = run(&["lift", "--r", "3", "--graph", s(&gp), "--weights", s(&wp)]);
    assert_eq!(r.code, 0);
    let w = io::parse_weighting(&r.stdout).unwrap();
    assert!(verify_weighting(&Graph::complete(8), &w, unit_target).pass);
    let low = write(
        dir.path(),
        "low.json",
        "{\"r\": 8, \"entries\": [{\"vertices\": [0,1,2,3,4,5,6,7], \"weight\": \"1/2\"}]}",
    );
    let r = run(&["lift", "--r", "3", "--graph", s(&gp), "--weights", s(&low)]);
    assert_eq!(r.code, 1);
}

#[test]
fn sparse_decomposition_from_partition_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = minus_perfect_matching(10);
    let gp = write(dir.path(), "g.txt", &io::write_graph(&g));
    let pp = write(dir.path(), "p.txt", "0-1,2-3,4-5,6-7,8-9\n");
    let r = run(&["decompose-sparse", "--r", "3", "--graph", s(&gp), "--partition", s(&pp)]);
    assert_eq!(r.code, 0, "{}", r.report);
    let w = io::parse_weighting(&r.stdout).unwrap();
    assert!(verify_weighting(&g, &w, unit_target).pass);
}

#[test]
fn sample_csv_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let gp = write(dir.path(), "k24.txt", &io::write_graph(&Graph::complete(24)));
    let base = ["sample", "--graph", s(&gp), "--r", "3", "--n-samples", "9000", "--seed", "5", "--marginals"];
    let a = run(&[&base[..], &["--threads", "1"]].concat());
    let b = run(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let mut lines = a.stdout.lines();
    assert_eq!(lines.next(), Some("u,v,estimate,halfwidth"));
    assert_eq!(lines.count(), 276);
    assert_eq!(a.report["details"]["approximate"], true);
    let traces = run(&["sample", "--graph", s(&gp), "--r", "3", "--n-samples", "4"]);
    assert_eq!(traces.code, 0);
    assert_eq!(traces.stdout.lines().count(), 5);
}

#[test]
fn family_marginal_tables() {
    let r = run(&["family-marginals", "--kind", "w", "--r", "3", "--k", "6"]);
    assert_eq!(r.code, 0, "{}", r.report);
    let rows: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(rows[0], "class,base_marginal,keep_probability,marginal,target,enumerated");
    assert_eq!(rows[1], "intra,1/9,9/10,1/10,1/10,");
    assert_eq!(rows[2], "cross,1/10,1/1,1/10,1/10,");
    let r = run(&["family-marginals", "--kind", "w", "--r", "3", "--k", "4", "--chosen", "3", "--enumerate"]);
    assert_eq!(r.code, 0, "{}", r.report);
    let r = run(&["family-marginals", "--kind", "m", "--r", "3", "--ell", "4", "--chosen", "2", "--enumerate"]);
    assert_eq!(r.code, 0, "{}", r.report);
    let r = run(&["family-marginals", "--kind", "w", "--r", "3", "--k", "5"]);
    assert_eq!(r.code, 2);
}

#[test]
fn digest_tracks_inputs() {
    let a = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "0-1"]);
    let b = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "0-1"]);
    let c = run(&["decompose-kminusm", "--r", "3", "--k", "8", "--matching", "2-3"]);
    assert_eq!(a.report["inputs_digest"], b.report["inputs_digest"]);
    assert_ne!(a.report["inputs_digest"], c.report["inputs_digest"]);
}
