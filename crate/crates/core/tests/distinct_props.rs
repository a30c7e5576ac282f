mod common;

use bitopt_core::distinct::{distinct_eval, naive, DistinctPath};
use bitopt_core::exec::best_match;
use bitopt_core::oracle::oracle_eval;
use bitopt_core::{parse, Store};
use common::*;

#[test]
fn bmm_path_agrees_with_naive_and_oracle() {
    let mut failures = Vec::new();
    let (mut via_bmm, mut multiplied) = (0, 0);
    for seed in 0..3000u64 {
        let mut r = rng(seed);
        let triples = random_store(&mut r, 40);
        let text = random_distinct_query(&mut r, QueryShape::BGP_OPT);
        let Ok(q) = parse(&text) else { continue };
        let store = Store::from_triples(&triples).unwrap();
        let run = match distinct_eval(&q, &store) {
            Ok(run) => run,
            Err(e) => {
                failures.push(format!("seed {seed}: error {e} on {text}"));
                continue;
            }
        };
        if run.path == DistinctPath::Bmm {
            via_bmm += 1;
            if run.history.len() > 1 {
                multiplied += 1;
            }
            if !run.history.windows(2).all(|w| w[1].nodes.len() < w[0].nodes.len()) {
                failures.push(format!("seed {seed}: MCS did not shrink monotonically"));
            }
        }
        let reference = naive(&q, &store).unwrap();
        let oracle = best_match(&oracle_eval(&q, &triples).unwrap().sorted());
        if !run.result.same_multiset(&reference) || !run.result.same_multiset(&oracle) {
            failures.push(format!(
                "seed {seed}: {} mismatch on {text}\n got {:?}\n naive {:?}\n oracle {:?}",
                run.path,
                run.result.sorted().rows,
                reference.sorted().rows,
                oracle.rows
            ));
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.iter().take(4).cloned().collect::<Vec<_>>().join("\n"));
    assert!(via_bmm > 300, "only {via_bmm} queries took the BMM path");
    assert!(multiplied > 50, "only {multiplied} queries multiplied BitMats");
}
