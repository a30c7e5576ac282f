mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bitopt_core::analysis::{Analysis, Label, LabeledGraph};
use bitopt_core::distinct::{distinct_eval, naive, DistinctPath};
use bitopt_core::exec::{best_match, execute, prune_component, run_query, ExecOptions, ResultSet};
use bitopt_core::oracle::oracle_eval;
use bitopt_core::prune::Regime;
use bitopt_core::rewrite::{push_filters, to_unf};
use bitopt_core::store::{bmm, BitArray, BitMat, BitMatKind, CompressedRow, Dim, Retain, Triple};
use bitopt_core::{parse, Query, Store, Term, Variable};
use common::*;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1", "seinfeld golden Res1/Res2/Res3", golden),
        ("2", "row compression", compression),
        ("3", "engine equals oracle on random queries", oracle_equivalence),
        ("3m", "join memory bounded by one vmap", join_memory),
        ("4", "nullification skipped only when safe", nullification),
        ("5", "pruning minimality", minimality),
        ("6", "acyclicity classifier", acyclicity),
        ("7", "UNION normal form", unf),
        ("8", "DISTINCT via BitMat products", distinct),
        ("9", "fold/unfold/bmm against dense oracles", matrix_oracles),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {id}: PASS  {name} ({detail}; {ms} ms)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id}: FAIL  {name} ({detail}; {ms} ms)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ex(name: &str) -> Term {
    Term::Iri(format!("http://example.org/{name}"))
}

fn pairs(rs: &ResultSet) -> Vec<(Option<Term>, Option<Term>)> {
    let mut v: Vec<_> = rs.rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    v.sort();
    v
}

fn expect(rows: &[(&str, Option<&str>)]) -> Vec<(Option<Term>, Option<Term>)> {
    let mut v: Vec<_> = rows.iter().map(|(f, s)| (Some(ex(f)), s.map(ex))).collect();
    v.sort();
    v
}

fn golden() -> Check {
    let started = Instant::now();
    let store = Store::load_ntriples(fs::read_to_string(fixture("seinfeld.nt")).unwrap().as_bytes()).unwrap();
    let q1 = parse(&fs::read_to_string(fixture("q1.rq")).unwrap()).unwrap();
    let res3 = expect(&[("Julia", Some("Seinfeld")), ("Larry", None)]);
    ensure(pairs(&run_query(&q1, &store).unwrap()) == res3, || "Q1 is not Res3".into())?;
    let debug = ExecOptions { no_prune: true, unsafe_order: true, ..Default::default() };
    let res1 = execute(&q1, &store, &debug).unwrap().result;
    let want1 = expect(&[
        ("Larry", Some("CurbYourEnthu")),
        ("Julia", Some("Seinfeld")),
        ("Julia", Some("Veep")),
        ("Julia", Some("NewAdvOldChristine")),
        ("Julia", Some("CurbYourEnthu")),
    ]);
    ensure(pairs(&res1) == want1, || format!("Res1 mismatch: {:?}", pairs(&res1)))?;
    let res2 = execute(&q1, &store, &ExecOptions { nullify: true, ..debug }).unwrap().result;
    let want2 = expect(&[("Larry", None), ("Julia", Some("Seinfeld")), ("Julia", None), ("Julia", None), ("Julia", None)]);
    ensure(pairs(&res2) == want2, || format!("Res2 mismatch: {:?}", pairs(&res2)))?;
    ensure(pairs(&best_match(&res2)) == res3, || "best_match(Res2) is not Res3".into())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok("Res1 5 rows, Res2 5 rows, Res3 2 rows".into())
}

fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

fn compression() -> Check {
    let a = CompressedRow::encode(&bits("1110011110")).to_string();
    ensure(a == "[1] 3 2 4 1", || format!("1110011110 encoded as {a}"))?;
    let b = CompressedRow::encode(&bits("0010010000")).to_string();
    ensure(b == "3 6", || format!("0010010000 encoded as {b}"))?;
    let mut r = rng(2);
    for i in 0..10_000 {
        let width = r.gen_range(1..=512usize);
        let density: f64 = r.gen();
        let row: Vec<bool> = (0..width).map(|_| r.gen_bool(density)).collect();
        let enc = CompressedRow::encode(&row);
        ensure(enc.decode(width as u32) == row, || format!("round trip {i} failed"))?;
    }
    Ok("2 worked examples, 10000 round trips".into())
}

fn random_case(seed: u64, shape: QueryShape) -> Option<(Vec<Triple>, String, Query)> {
    let mut r = rng(seed);
    let triples = random_store(&mut r, 40);
    let text = random_query(&mut r, shape);
    let q = parse(&text).ok()?;
    Some((triples, text, q))
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    let mut checked = 0;
    for seed in 0..500u64 {
        let Some((triples, text, q)) = random_case(seed, QueryShape::FULL) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let got = best_match(&execute(&q, &store, &ExecOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?.result);
        let want = best_match(&oracle_eval(&q, &triples).unwrap());
        ensure(got.same_multiset(&want), || format!("seed {seed} mismatch on {text}"))?;
        checked += 1;
    }
    let elapsed = started.elapsed();
    ensure(checked >= 490, || format!("only {checked} queries parsed"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} queries"))
}

fn join_memory() -> Check {
    let mut rows = 0;
    for seed in 0..500u64 {
        let Some((triples, _, q)) = random_case(seed, QueryShape::FULL) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let run = execute(&q, &store, &ExecOptions::default()).unwrap();
        for sub in &run.subqueries {
            let budget: usize = sub.analysis.gosn.patterns.iter().map(|tp| tp.vars().len()).sum();
            ensure(sub.stats.vmap_cells <= budget, || format!("seed {seed}: {} vmap cells > {budget}", sub.stats.vmap_cells))?;
            ensure(sub.stats.max_depth <= sub.stps.len(), || format!("seed {seed}: recursion deeper than stps"))?;
            rows += sub.stats.rows_emitted;
        }
    }
    Ok(format!("vmap within sum of pattern variables over {rows} emitted rows"))
}

fn nullification() -> Check {
    let mut checked = 0;
    for seed in 0..500u64 {
        let Some((triples, text, q)) = random_case(seed, QueryShape::FULL) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let plain = execute(&q, &store, &ExecOptions::default()).unwrap();
        if plain.subqueries.iter().any(|s| s.analysis.report.nb_required) {
            continue;
        }
        let forced = execute(&q, &store, &ExecOptions { force_nullify: true, ..Default::default() }).unwrap();
        ensure(plain.result.same_multiset(&forced.result), || format!("seed {seed}: forced run differs on {text}"))?;
        checked += 1;
    }
    let q = parse("SELECT * WHERE { ?x :p ?y OPTIONAL { ?x :q ?w . ?w :r ?y } }").unwrap();
    let triples: Vec<Triple> = vec![
        (ex("a1"), ex("p"), ex("b1")),
        (ex("a2"), ex("p"), ex("b2")),
        (ex("a1"), ex("q"), ex("c1")),
        (ex("c1"), ex("r"), ex("b2")),
    ];
    let store = Store::from_triples(&triples).unwrap();
    let run = execute(&q, &store, &ExecOptions::default()).unwrap();
    ensure(run.subqueries[0].analysis.report.nb_required, || "two-class query not flagged".into())?;
    let want = best_match(&oracle_eval(&q, &triples).unwrap());
    ensure(best_match(&run.result).same_multiset(&want), || "two-class query wrong with nullification".into())?;
    let skipped = execute(&q, &store, &ExecOptions { skip_nullification: true, ..Default::default() }).unwrap();
    ensure(!best_match(&skipped.result).same_multiset(&want), || "skipping nullification did not break the witness".into())?;
    Ok(format!("{checked} safe queries unchanged; witness mismatches without nullification"))
}

fn minimality() -> Check {
    let mut checked = 0;
    let shape = QueryShape { union: false, filter: false, ..QueryShape::FULL };
    for seed in 0..2000u64 {
        let Some((triples, text, q)) = random_case(seed, shape) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let (wps, run) = prune_component(&store, &q.root).unwrap();
        let analysis = Analysis::of(&q.root).unwrap();
        let connected = analysis.gosn.supernodes.iter().all(|sn| analysis.got.induced(&sn.patterns).is_connected());
        if run.prune.regime != Regime::Passes || !analysis.report.path_acyclic || !connected {
            continue;
        }
        checked += 1;
        let oracle = oracle_eval(&Query::select_all(q.root.clone()), &triples).unwrap();
        let dict = store.dictionary();
        for wp in &wps {
            for (rk, ck) in wp.matches(dict, |_| None) {
                let want: Vec<(usize, Term)> = [(&wp.row_var, rk), (&wp.col_var, ck)]
                    .into_iter()
                    .filter_map(|(v, k)| Some((oracle.column(v.as_ref()?)?, dict.node_term(k?)?.clone())))
                    .collect();
                let used = oracle.rows.iter().any(|row| want.iter().all(|(c, t)| row[*c].as_ref() == Some(t)));
                ensure(used, || format!("seed {seed}: {} keeps an unused triple in {text}", wp.tp))?;
            }
        }
    }
    ensure(checked > 200, || format!("only {checked} acyclic queries"))?;
    Ok(format!("{checked} acyclic queries, zero violations"))
}

fn got_of(text: &str) -> LabeledGraph {
    let q = parse(text).unwrap();
    Analysis::of(&q.root).unwrap().got
}

/// Leaf-elimination search over every removal order, with its own notion of
/// edge classes.
fn exhaustive_acyclic(n: usize, edges: &[(usize, usize, Label)]) -> bool {
    fn classes(labels: &[&Label]) -> usize {
        let mut comp: Vec<usize> = (0..labels.len()).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..labels.len() {
                for j in 0..labels.len() {
                    let related = labels[i].is_subset(labels[j]) || labels[j].is_subset(labels[i]);
                    if related && comp[i] != comp[j] {
                        let m = comp[i].min(comp[j]);
                        comp[i] = m;
                        comp[j] = m;
                        changed = true;
                    }
                }
            }
        }
        comp.iter().collect::<BTreeSet<_>>().len()
    }
    fn go(alive: &mut Vec<bool>, left: usize, edges: &[(usize, usize, Label)]) -> bool {
        if left == 0 {
            return true;
        }
        for v in 0..alive.len() {
            if !alive[v] {
                continue;
            }
            let labels: Vec<&Label> =
                edges.iter().filter(|(a, b, _)| (*a == v || *b == v) && alive[*a] && alive[*b]).map(|(_, _, l)| l).collect();
            if classes(&labels) <= 1 {
                alive[v] = false;
                let ok = go(alive, left - 1, edges);
                alive[v] = true;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(&mut vec![true; n], n, edges)
}

fn acyclicity() -> Check {
    let corner = got_of("SELECT * WHERE { ?a :p1 ?b . ?b :p2 ?c . ?c :p3 ?a . ?a ?b ?c }");
    ensure(corner.is_acyclic(), || "corner case classified cyclic".into())?;
    let triangle = got_of("SELECT * WHERE { ?a :p1 ?b . ?b :p2 ?c . ?c :p3 ?a }");
    ensure(!triangle.is_acyclic(), || "3-cycle classified acyclic".into())?;

    let var = |s: &str| Variable::new(s);
    let alphabet: Vec<Option<Label>> = vec![
        None,
        Some([var("?a")].into_iter().collect()),
        Some([var("?b")].into_iter().collect()),
        Some([var("?a"), var("?b")].into_iter().collect()),
    ];
    let mut graphs = 0u64;
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let total = alphabet.len().pow(pairs.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut edges = Vec::new();
            for &(a, b) in &pairs {
                if let Some(l) = &alphabet[c % alphabet.len()] {
                    edges.push((a, b, l.clone()));
                }
                c /= alphabet.len();
            }
            let mut g = LabeledGraph::new(n);
            for (a, b, l) in &edges {
                g.add_edge(*a, *b, l.clone());
            }
            let want = exhaustive_acyclic(n, &edges);
            ensure(g.is_acyclic() == want, || format!("disagreement on {n} nodes, edges {edges:?}"))?;
            graphs += 1;
        }
    }
    Ok(format!("corner case acyclic, 3-cycle cyclic, {graphs} labeled graphs agree"))
}

fn header_projection(rs: &ResultSet, header: &[Variable]) -> ResultSet {
    let mut out = ResultSet::new(header.to_vec());
    for row in &rs.rows {
        out.rows.push(header.iter().map(|v| rs.column(v).and_then(|c| row[c].clone())).collect());
    }
    out
}

fn unf() -> Check {
    let q2 = parse(&fs::read_to_string(fixture("q2.rq")).unwrap()).unwrap();
    let r = to_unf(&push_filters(&q2.root)).unwrap();
    ensure(r.disjuncts.len() == 2 && !r.rule3_used, || format!("Q2 gave {} disjuncts, rule3={}", r.disjuncts.len(), r.rule3_used))?;

    let q3 = parse("SELECT * WHERE { ?x :p ?y OPTIONAL { { ?y :q ?z } UNION { ?y :r ?z } } }").unwrap();
    let store = Store::from_triples(&[
        (ex("a"), ex("p"), ex("b")),
        (ex("b"), ex("q"), ex("c")),
        (ex("a2"), ex("p"), ex("b2")),
    ])
    .unwrap();
    let run = execute(&q3, &store, &ExecOptions::default()).unwrap();
    ensure(run.unf.rule3_used && run.best_match_applied, || "rule 3 not flagged or best-match not applied".into())?;
    let got = pairs(&run.result.project(&[Variable::new("?x"), Variable::new("?z")]));
    ensure(got == vec![(Some(ex("a")), Some(ex("c"))), (Some(ex("a2")), None)], || format!("rule-3 result {got:?}"))?;

    let mut instances = 0;
    let mut seed = 0u64;
    while instances < 200 {
        seed += 1;
        ensure(seed < 20_000, || format!("only {instances} union instances generated"))?;
        let Some((triples, text, q)) = random_case(seed, QueryShape::FULL) else { continue };
        if !q.root.contains_union() {
            continue;
        }
        instances += 1;
        let normalized = push_filters(&q.root);
        let header = normalized.vars_in_order();
        let original = header_projection(&oracle_eval(&Query::select_all(q.root.clone()), &triples).unwrap(), &header);
        let rewritten = to_unf(&normalized).unwrap();
        let mut union = ResultSet::new(header.clone());
        for d in &rewritten.disjuncts {
            let part = oracle_eval(&Query::select_all(d.clone()), &triples).unwrap();
            union.extend_from(&header_projection(&part, &header));
        }
        ensure(best_match(&original).same_multiset(&best_match(&union)), || format!("seed {seed}: rewrite changed {text}"))?;
    }
    Ok(format!("Q2 2 disjuncts, rule 3 detected, {instances} rewrites preserve semantics"))
}

fn movie_store() -> Store {
    let mut triples = Vec::new();
    for m in ["KillBill1", "KillBill2", "PulpFiction"] {
        triples.push((ex("UmaThurman"), ex("actedIn"), ex(m)));
        triples.push((ex(m), ex("directedBy"), ex("QuentinTarantino")));
    }
    triples.push((ex("JohnTravolta"), ex("actedIn"), ex("PulpFiction")));
    triples.push((ex("UmaThurman"), ex("actedIn"), ex("Gattaca")));
    triples.push((ex("Gattaca"), ex("directedBy"), ex("AndrewNiccol")));
    Store::from_triples(&triples).unwrap()
}

fn distinct() -> Check {
    let q = parse(
        "PREFIX : <http://example.org/>
         SELECT DISTINCT ?actor ?director WHERE { ?actor :actedIn ?movie . ?movie :directedBy ?director }",
    )
    .unwrap();
    let run = distinct_eval(&q, &movie_store()).unwrap();
    ensure(run.path == DistinctPath::Bmm, || format!("movie query took {}", run.path))?;
    let uma_qt = run.result.rows.iter().filter(|r| r[0] == Some(ex("UmaThurman")) && r[1] == Some(ex("QuentinTarantino"))).count();
    ensure(uma_qt == 1, || format!("(UmaThurman, QuentinTarantino) appears {uma_qt} times"))?;

    let shapes = [
        QueryShape { optional: false, ..QueryShape::BGP_OPT },
        QueryShape::BGP_OPT,
    ];
    let mut per_shape = [0usize; 2];
    let mut seed = 0u64;
    while per_shape.iter().sum::<usize>() < 100 {
        seed += 1;
        ensure(seed < 50_000, || format!("only {per_shape:?} BMM-path queries generated"))?;
        let k = (seed % 2) as usize;
        if per_shape[k] >= 50 {
            continue;
        }
        let mut r = rng(seed);
        let triples = random_store(&mut r, 40);
        let text = random_distinct_query(&mut r, shapes[k]);
        let Ok(q) = parse(&text) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let run = distinct_eval(&q, &store).map_err(|e| format!("seed {seed}: {e}"))?;
        if run.path != DistinctPath::Bmm {
            continue;
        }
        per_shape[k] += 1;
        let monotone = run.history.windows(2).all(|w| w[1].nodes.len() <= w[0].nodes.len());
        ensure(monotone, || format!("seed {seed}: BitMat count grew"))?;
        ensure(run.result.same_multiset(&naive(&q, &store).unwrap()), || format!("seed {seed}: BMM differs from naive on {text}"))?;
    }
    Ok(format!("movie pair once; {} BGP and {} BGP-OPT queries agree", per_shape[0], per_shape[1]))
}

fn dense(bm: &BitMat) -> Vec<Vec<bool>> {
    let mut d = vec![vec![false; bm.ncols() as usize]; bm.nrows() as usize];
    for (r, c) in bm.pairs() {
        d[r as usize - 1][c as usize - 1] = true;
    }
    d
}

fn random_bitmat(r: &mut TestRng, (rd, cd): (Dim, Dim), nrows: u32, ncols: u32) -> BitMat {
    let density: f64 = r.gen_range(0.0..0.6);
    let mut pairs = Vec::new();
    for i in 1..=nrows {
        for j in 1..=ncols {
            if r.gen_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    BitMat::from_pairs(BitMatKind::Derived, 0, (rd, cd), (nrows, ncols), pairs)
}

fn matrix_oracles() -> Check {
    let mut r = rng(9);
    for case in 0..1000 {
        let (n, k, m) = (r.gen_range(1..=64u32), r.gen_range(1..=64u32), r.gen_range(1..=64u32));
        let a = random_bitmat(&mut r, (Dim::S, Dim::O), n, k);
        let da = dense(&a);

        let rows: Vec<bool> = da.iter().map(|row| row.iter().any(|&b| b)).collect();
        let cols: Vec<bool> = (0..k as usize).map(|j| da.iter().any(|row| row[j])).collect();
        let fr = a.fold(Retain::Row);
        let fc = a.fold(Retain::Column);
        ensure((1..=n).all(|i| fr.get(i) == rows[i as usize - 1]), || format!("case {case}: row fold"))?;
        ensure((1..=k).all(|j| fc.get(j) == cols[j as usize - 1]), || format!("case {case}: column fold"))?;

        let mask = BitArray::from_positions(k, (1..=k).filter(|_| r.gen_bool(0.5)));
        let mut u = a.clone();
        u.unfold(&mask, Retain::Column).unwrap();
        let du = dense(&u);
        let ok = (0..n as usize).all(|i| (0..k as usize).all(|j| du[i][j] == (da[i][j] && mask.get(j as u32 + 1))));
        ensure(ok, || format!("case {case}: unfold"))?;

        let b = random_bitmat(&mut r, (Dim::O, Dim::S), k, m);
        let db = dense(&b);
        let p = bmm(&a, &b, 0).unwrap();
        let dp = dense(&p);
        for i in 0..n as usize {
            for j in 0..m as usize {
                let want = (0..k as usize).any(|t| da[i][t] && db[t][j]);
                ensure(dp[i][j] == want, || format!("case {case}: bmm at ({i},{j})"))?;
            }
        }
    }
    Ok("1000 random matrices".into())
}
