use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn bitopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitopt")).args(args).env_remove("BITOPT_STORE").output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn loaded() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = bitopt(&["load", dir.path().to_str().unwrap(), fixture("seinfeld.nt").to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    dir
}

fn query(dir: &Path, q: &Path, flags: &[&str]) -> Output {
    let mut args = vec!["query", dir.to_str().unwrap(), q.to_str().unwrap()];
    args.extend_from_slice(flags);
    bitopt(&args)
}

#[test]
fn load_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bitopt(&["load", dir.path().to_str().unwrap(), fixture("seinfeld.nt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout).trim(), "8 triples, 3 predicates");
}

#[test]
fn load_missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bitopt(&["load", dir.path().to_str().unwrap(), "/nonexistent/data.nt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reload_needs_force() {
    let dir = loaded();
    let data = fixture("seinfeld.nt");
    let args = ["load", dir.path().to_str().unwrap(), data.to_str().unwrap()];
    assert_ne!(bitopt(&args).status.code(), Some(0));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(bitopt(&forced).status.code(), Some(0));
}

#[test]
fn q1_prints_two_rows() {
    let dir = loaded();
    let out = query(dir.path(), &fixture("q1.rq"), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        text(&out.stdout),
        "?friend\t?sitcom\n<http://example.org/Julia>\t<http://example.org/Seinfeld>\n<http://example.org/Larry>\t\n"
    );
}

#[test]
fn explain_goes_to_stderr() {
    let dir = loaded();
    let out = query(dir.path(), &fixture("q1.rq"), &["--explain"]);
    assert_eq!(out.status.code(), Some(0));
    let report = text(&out.stderr);
    assert!(report.contains("nb_required=false"));
    assert!(report.starts_with("explain_version=1"));
    assert!(text(&out.stdout).starts_with("?friend\t?sitcom\n"));
}

#[test]
fn unsafe_order_without_nullification_leaks_veep() {
    let dir = loaded();
    let out = query(dir.path(), &fixture("q1.rq"), &["--no-prune", "--unsafe-order"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().count(), 6);
    assert!(stdout.contains("<http://example.org/Julia>\t<http://example.org/Veep>"));
}

#[test]
fn unsafe_order_requires_no_prune() {
    let dir = loaded();
    let out = query(dir.path(), &fixture("q1.rq"), &["--unsafe-order"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn variable_predicate_is_unsupported_without_oracle() {
    let dir = loaded();
    let q = dir.path().join("vp.rq");
    std::fs::write(&q, "SELECT * WHERE { ?s ?p ?o }").unwrap();
    let out = query(dir.path(), &q, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("unsupported-by-index"));
    let out = query(dir.path(), &q, &["--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout).lines().count(), 9);
}

#[test]
fn rejected_query_exits_4() {
    let dir = loaded();
    let q = dir.path().join("bad.rq");
    std::fs::write(&q, "SELECT * WHERE { ?s :a ?o . ?x :b ?y }").unwrap();
    assert_eq!(query(dir.path(), &q, &[]).status.code(), Some(4));
    std::fs::write(&q, "SELECT * WHERE { ?s :a ").unwrap();
    assert_eq!(query(dir.path(), &q, &[]).status.code(), Some(4));
}

#[test]
fn store_directory_from_environment() {
    let dir = loaded();
    let out = Command::new(env!("CARGO_BIN_EXE_bitopt"))
        .args(["query", fixture("q1.rq").to_str().unwrap()])
        .env("BITOPT_STORE", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = loaded();
    let a = query(dir.path(), &fixture("q2.rq"), &[]);
    let b = query(dir.path(), &fixture("q2.rq"), &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn empty_result_still_succeeds() {
    let dir = loaded();
    let q = dir.path().join("empty.rq");
    std::fs::write(&q, "SELECT ?x WHERE { ?x :hasFriend :Nobody }").unwrap();
    let out = query(dir.path(), &q, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "?x\n");
}
