use std::path::PathBuf;

use omqlab::cli::run;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel).display().to_string()
}

fn omqlab(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("omqlab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn treewidth_of_grid_query() {
    let (code, out, _) = omqlab(&["treewidth", "--query", &fixture("grid/query.cq")]);
    assert_eq!(code, 0);
    assert!(out.contains("max: 2"), "{out}");
}

#[test]
fn tw_equiv_writes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let (code, out, _) = omqlab(&[
        "tw-equiv",
        "--onto",
        &fixture("grid/onto_yes.dl"),
        "--query",
        &fixture("grid/query.cq"),
        "-k",
        "1",
        "--out-dir",
        &out_dir,
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("YES"), "{out}");
    let witness = std::fs::read_to_string(dir.path().join("witness.cq")).unwrap();
    assert!(omqlab::surface::parse_query(&witness).is_ok());
}

#[test]
fn unknown_verdict_exits_with_four() {
    let (code, out, _) = omqlab(&[
        "--json",
        "tw-equiv",
        "--onto",
        &fixture("grid/onto_no.dl"),
        "--query",
        &fixture("grid/query.cq"),
        "--schema",
        &fixture("grid/schema_no_a1.txt"),
        "--budget",
        "4",
    ]);
    assert_eq!(code, 4);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "UNKNOWN");
}

#[test]
fn eval_reports_boolean_answer() {
    let (code, out, _) = omqlab(&[
        "eval",
        "--onto",
        &fixture("detour/ontology.dl"),
        "--schema",
        &fixture("detour/schema.txt"),
        "--query",
        &fixture("grid/query.cq"),
        "--db",
        &fixture("detour/d1.db"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "true");
}

#[test]
fn errors_map_to_exit_codes() {
    let (code, _, err) = omqlab(&["treewidth", "--query", "/nonexistent/query.cq"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:") && err.contains("/nonexistent/query.cq"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cq");
    std::fs::write(&bad, "q(x) :- \n").unwrap();
    let (code, _, _) = omqlab(&["treewidth", "--query", &bad.display().to_string()]);
    assert_eq!(code, 2);
    let (code, _, _) = omqlab(&["nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn dllite_f_fixtures() {
    let onto = fixture("dllitef/func.dl");
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let merge = fixture("dllitef/merge.cq");
    let (code, out, _) = omqlab(&["dlf-equiv1", "--onto", &onto, "--query", &merge, "--out-dir", &out_dir]);
    assert_eq!((code, out.lines().next()), (0, Some("YES")));
    let (code, out, _) = omqlab(&["dlf-equiv1", "--onto", &onto, "--query", &fixture("dllitef/cycle.cq")]);
    assert_eq!((code, out.lines().next()), (0, Some("NO")));
}
