use std::process::Command;

fn rhg(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rhg")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn karlsson_table_row() {
    let (code, out, _) = rhg(&["karlsson-table", "--scaling", "exp(1/2)", "--alpha", "id", "--eps", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out, "eps,k\n1,6\n");
}

#[test]
fn karlsson_table_rejects_inappropriate_pair() {
    let (code, _, err) = rhg(&["karlsson-table", "--scaling", "exp(1/4)", "--alpha", "exp(2)"]);
    assert_eq!(code, 1);
    assert!(err.contains("not appropriate"), "{err}");
}

#[test]
fn dump_ball_counts_vertices() {
    let (code, out, _) = rhg(&["dump-ball", "--group", "free(2)", "--radius", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "index,normal_form,dist0");
    assert_eq!(lines.len() - 1, 53);
    assert!(!out.contains('\r'));
    assert!(lines.iter().all(|l| !l.ends_with(',')));
}

#[test]
fn dump_ball_edges() {
    let (code, out, _) = rhg(&["dump-ball", "--group", "free(2)", "--radius", "1", "--edges"]);
    assert_eq!(code, 0);
    assert_eq!(out, "u_index,v_index,generator_label\n0,1,a\n0,2,a^-1\n0,3,b\n0,4,b^-1\n");
}

#[test]
fn dump_relgraph_marks_horospherical_edges() {
    let (code, out, _) = rhg(&[
        "dump-relgraph",
        "--group",
        "product(free(a),free(b))",
        "--peripheral",
        "a",
        "--radius",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("u_index,v_index,horospherical,coset_id\n"));
    assert!(out.lines().any(|l| l.ends_with(",true,1<a>")));
}

#[test]
fn list_scenarios_has_the_library() {
    let (code, out, _) = rhg(&["list-scenarios"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() >= 6);
    for name in ["f2-plain", "f2-rel-a--subgroup-b", "f2-plain--anbn-family", "dirichlet-f2-b"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn run_builtin_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = rhg(&["run", "dirichlet-f2-b", "--workers", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("relative: certified-positive"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["summary"]["exit_code"], 0);
    assert!(out.join("timing.json").exists());
    let csv = std::fs::read_to_string(out.join("tables").join("qc_constants.csv")).unwrap();
    assert!(csv.starts_with("notion,param,radius,constant,max_possible,exhaustive\n"));
}

#[test]
fn run_scenario_file_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (_, json, _) = rhg(&["show-scenario", "dirichlet-f2-b"]);
    let good = dir.path().join("good.json");
    std::fs::write(&good, &json).unwrap();
    let out = dir.path().join("out");
    let (code, _, _) = rhg(&["run", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.replace("\"radii\"", "\"radius\"")).unwrap();
    let (code, _, err) = rhg(&["run", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");

    let (code, _, _) = rhg(&["run", "no-such-scenario", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn vertex_budget_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let (_, json, _) = rhg(&["show-scenario", "dirichlet-f2-b"]);
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["budgets"]["vertices"] = serde_json::json!(100);
    let path = dir.path().join("tight.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = rhg(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn expectation_mismatch_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (_, json, _) = rhg(&["show-scenario", "dirichlet-f2-b"]);
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["expectation"] = serde_json::json!("negative");
    let path = dir.path().join("flipped.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = rhg(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("expectation negative: not met"));
}
