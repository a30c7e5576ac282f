//! Seeded generators for small stores and well-designed, connected queries.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use bitopt_core::store::Triple;
use bitopt_core::Term;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub const ENTITIES: usize = 5;
pub const PREDICATES: usize = 3;
pub const INTS: i64 = 4;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ex(name: String) -> Term {
    Term::Iri(format!("http://example.org/{name}"))
}

pub fn random_store(rng: &mut TestRng, max_triples: usize) -> Vec<Triple> {
    let n = rng.gen_range(8..=max_triples);
    (0..n)
        .map(|_| {
            let s = ex(format!("e{}", rng.gen_range(0..ENTITIES)));
            let p = ex(format!("p{}", rng.gen_range(0..PREDICATES)));
            let o = if rng.gen_bool(0.25) {
                Term::Int(rng.gen_range(0..INTS))
            } else {
                ex(format!("e{}", rng.gen_range(0..ENTITIES)))
            };
            (s, p, o)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct QueryShape {
    pub max_patterns: usize,
    pub optional: bool,
    pub union: bool,
    pub filter: bool,
    /// Allow patterns that close cycles among existing variables.
    pub cycles: bool,
}

impl QueryShape {
    pub const FULL: QueryShape = QueryShape { max_patterns: 6, optional: true, union: true, filter: true, cycles: true };
    pub const BGP_OPT: QueryShape = QueryShape { max_patterns: 6, optional: true, union: false, filter: false, cycles: true };
}

struct Gen<'a> {
    rng: &'a mut TestRng,
    shape: QueryShape,
    budget: usize,
    next_var: usize,
}

struct Group {
    text: String,
    /// Variables of the mandatory triple patterns.
    mandatory: Vec<String>,
    /// Every variable mentioned anywhere in the group.
    all: Vec<String>,
}

fn push_unique(v: &mut Vec<String>, x: &str) {
    if !v.iter().any(|y| y == x) {
        v.push(x.to_string());
    }
}

impl Gen<'_> {
    fn fresh(&mut self) -> String {
        self.next_var += 1;
        format!("?v{}", self.next_var - 1)
    }

    fn constant(&mut self, object: bool) -> String {
        if object && self.rng.gen_bool(0.25) {
            format!("{}", self.rng.gen_range(0..INTS))
        } else {
            format!(":e{}", self.rng.gen_range(0..ENTITIES))
        }
    }

    /// One triple pattern linked to `link` (when given), other position
    /// drawn from `local` variables, a fresh variable, or a constant.
    fn pattern(&mut self, link: Option<&str>, local: &[String], vars: &mut Vec<String>) -> String {
        self.budget -= 1;
        let p = format!(":p{}", self.rng.gen_range(0..PREDICATES));
        let first = match link {
            Some(v) => v.to_string(),
            None => self.fresh(),
        };
        let roll: f64 = self.rng.gen();
        let other = if roll < 0.35 || (link.is_none() && roll < 0.8) {
            self.fresh()
        } else if roll < 0.75 && self.shape.cycles && !local.is_empty() {
            local.choose(self.rng).unwrap().clone()
        } else {
            "CONST".to_string()
        };
        push_unique(vars, &first);
        if other != "CONST" {
            push_unique(vars, &other);
        }
        if self.rng.gen_bool(0.5) {
            let o = if other == "CONST" { self.constant(true) } else { other };
            format!("{first} {p} {o} .")
        } else {
            let s = if other == "CONST" { self.constant(false) } else { other };
            format!("{s} {p} {first} .")
        }
    }

    /// A group whose first pattern uses `link`; later mandatory patterns
    /// link to variables of earlier ones or of `ctx`, the mandatory
    /// variables of the enclosing group.
    fn group(&mut self, link: Option<String>, ctx: &[String], depth: usize) -> Group {
        let mut mandatory: Vec<String> = Vec::new();
        let mut parts = Vec::new();
        let t = self.pattern(link.as_deref(), &[], &mut mandatory);
        parts.push(t);
        while self.budget > 0 && self.rng.gen_bool(0.6) {
            let mut pool = mandatory.clone();
            if self.shape.cycles {
                for v in ctx {
                    push_unique(&mut pool, v);
                }
            }
            let l = pool.choose(self.rng).unwrap().clone();
            let t = self.pattern(Some(&l), &pool, &mut mandatory);
            parts.push(t);
        }
        let mut all = mandatory.clone();
        if self.shape.union && depth < 2 && self.budget >= 2 && self.rng.gen_bool(0.3) {
            let l = mandatory.choose(self.rng).unwrap().clone();
            self.budget -= 1;
            let a = self.group(Some(l.clone()), &[], depth + 1);
            self.budget += 1;
            let b = self.group(Some(l), &[], depth + 1);
            for v in a.all.iter().chain(&b.all) {
                push_unique(&mut all, v);
            }
            parts.push(format!("{{ {} }} UNION {{ {} }}", a.text, b.text));
        }
        while self.shape.optional && depth < 3 && self.budget > 0 && self.rng.gen_bool(0.55) {
            let l = mandatory.choose(self.rng).unwrap().clone();
            let ctx = mandatory.clone();
            let g = self.group(Some(l), &ctx, depth + 1);
            for v in &g.all {
                push_unique(&mut all, v);
            }
            parts.push(format!("OPTIONAL {{ {} }}", g.text));
        }
        if self.shape.filter && self.rng.gen_bool(0.3) {
            let f = self.filter(&all);
            parts.push(format!("FILTER({f})"));
        }
        Group { text: parts.join(" "), mandatory, all }
    }

    fn comparison(&mut self, vars: &[String]) -> String {
        let v = vars.choose(self.rng).unwrap().clone();
        let op = ["=", "!=", "<", "<=", ">", ">="].choose(self.rng).unwrap();
        let rhs = if vars.len() > 1 && self.rng.gen_bool(0.3) {
            vars.choose(self.rng).unwrap().clone()
        } else if self.rng.gen_bool(0.5) {
            format!("{}", self.rng.gen_range(0..INTS))
        } else {
            format!(":e{}", self.rng.gen_range(0..ENTITIES))
        };
        format!("{v} {op} {rhs}")
    }

    fn filter(&mut self, vars: &[String]) -> String {
        let a = self.comparison(vars);
        match self.rng.gen_range(0..4) {
            0 => {
                let b = self.comparison(vars);
                format!("{a} && {b}")
            }
            1 => {
                let b = self.comparison(vars);
                format!("{a} || {b}")
            }
            2 => format!("!({a})"),
            _ => a,
        }
    }
}

/// SPARQL text of a random query.
pub fn random_query(rng: &mut TestRng, shape: QueryShape) -> String {
    let budget = rng.gen_range(2..=shape.max_patterns);
    let mut g = Gen { rng, shape, budget, next_var: 0 };
    let group = g.group(None, &[], 0);
    format!("SELECT * WHERE {{ {} }}", group.text)
}

/// A random DISTINCT query projecting a non-empty subset of the variables.
pub fn random_distinct_query(rng: &mut TestRng, shape: QueryShape) -> String {
    let budget = rng.gen_range(2..=shape.max_patterns);
    let mut g = Gen { rng, shape, budget, next_var: 0 };
    let group = g.group(None, &[], 0);
    let mut vars = group.all.clone();
    vars.shuffle(g.rng);
    let k = g.rng.gen_range(1..=vars.len());
    vars.truncate(k);
    format!("SELECT DISTINCT {} WHERE {{ {} }}", vars.join(" "), group.text)
}
