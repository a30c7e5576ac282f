use std::fs;
use std::path::PathBuf;

use bitopt_core::exec::{best_match, execute, run_query, ExecOptions, ResultSet};
use bitopt_core::{parse, Store, Term};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn seinfeld() -> Store {
    let text = fs::read_to_string(fixture("seinfeld.nt")).unwrap();
    Store::load_ntriples(text.as_bytes()).unwrap()
}

fn q1() -> bitopt_core::Query {
    parse(&fs::read_to_string(fixture("q1.rq")).unwrap()).unwrap()
}

fn ex(name: &str) -> Option<Term> {
    Some(Term::Iri(format!("http://example.org/{name}")))
}

fn rows(rs: &ResultSet) -> Vec<Vec<Option<Term>>> {
    rs.sorted().rows
}

fn expect(pairs: &[(&str, Option<&str>)]) -> Vec<Vec<Option<Term>>> {
    let mut v: Vec<Vec<Option<Term>>> = pairs.iter().map(|(f, s)| vec![ex(f), s.and_then(ex)]).collect();
    v.sort();
    v
}

#[test]
fn q1_returns_res3() {
    let rs = run_query(&q1(), &seinfeld()).unwrap();
    assert_eq!(rows(&rs), expect(&[("Julia", Some("Seinfeld")), ("Larry", None)]));
}

#[test]
fn unsafe_order_reproduces_res1_and_res2() {
    let store = seinfeld();
    let opts = ExecOptions { no_prune: true, unsafe_order: true, ..Default::default() };
    let res1 = execute(&q1(), &store, &opts).unwrap().result;
    assert_eq!(
        rows(&res1),
        expect(&[
            ("Larry", Some("CurbYourEnthu")),
            ("Julia", Some("Seinfeld")),
            ("Julia", Some("Veep")),
            ("Julia", Some("NewAdvOldChristine")),
            ("Julia", Some("CurbYourEnthu")),
        ])
    );
    let res2 = execute(&q1(), &store, &ExecOptions { nullify: true, ..opts }).unwrap().result;
    assert_eq!(
        rows(&res2),
        expect(&[("Larry", None), ("Julia", Some("Seinfeld")), ("Julia", None), ("Julia", None), ("Julia", None)])
    );
    assert_eq!(rows(&best_match(&res2)), expect(&[("Julia", Some("Seinfeld")), ("Larry", None)]));
}

#[test]
fn q1_stps_and_classification() {
    let run = execute(&q1(), &seinfeld(), &ExecOptions::default()).unwrap();
    let sub = &run.subqueries[0];
    assert!(!sub.analysis.report.nb_required);
    assert_eq!(sub.counts, vec![2, 1, 1]);
    assert_eq!(sub.stps, vec![0, 1, 2]);
    assert!(!run.best_match_applied);
}
