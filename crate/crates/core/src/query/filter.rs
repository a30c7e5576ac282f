//! FILTER expressions with three-valued evaluation.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Term, TermOrVar, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterExpr {
    Cmp(CmpOp, TermOrVar, TermOrVar),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

/// Kleene truth values. A row passes a filter only on `True`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::True, _) | (_, Truth::True) => Truth::True,
            (Truth::False, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Truth::True
    }
}

impl std::ops::Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

impl FilterExpr {
    pub fn cmp(op: CmpOp, l: impl Into<TermOrVar>, r: impl Into<TermOrVar>) -> Self {
        FilterExpr::Cmp(op, l.into(), r.into())
    }

    pub fn and(l: FilterExpr, r: FilterExpr) -> Self {
        FilterExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: FilterExpr, r: FilterExpr) -> Self {
        FilterExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn negate(e: FilterExpr) -> Self {
        FilterExpr::Not(Box::new(e))
    }

    /// Folds a non-empty list of conjuncts back into one expression.
    pub fn conjoin(parts: impl IntoIterator<Item = FilterExpr>) -> Option<Self> {
        parts.into_iter().reduce(FilterExpr::and)
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            FilterExpr::Cmp(_, l, r) => {
                out.extend(l.as_var().cloned());
                out.extend(r.as_var().cloned());
            }
            FilterExpr::And(l, r) | FilterExpr::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            FilterExpr::Not(e) => e.collect_vars(out),
        }
    }

    /// Splits top-level conjunctions.
    pub fn conjuncts(&self) -> Vec<FilterExpr> {
        match self {
            FilterExpr::And(l, r) => {
                let mut out = l.conjuncts();
                out.extend(r.conjuncts());
                out
            }
            other => vec![other.clone()],
        }
    }

    /// True when the expression is a conjunction whose every conjunct mentions
    /// exactly one variable; such filters may be applied while loading BitMats.
    pub fn is_conjunctive_single_variable(&self) -> bool {
        self.conjuncts()
            .iter()
            .all(|c| c.vars().len() == 1 && !c.has_disjunction())
    }

    fn has_disjunction(&self) -> bool {
        match self {
            FilterExpr::Cmp(..) => false,
            FilterExpr::Or(..) => true,
            FilterExpr::And(l, r) => l.has_disjunction() || r.has_disjunction(),
            FilterExpr::Not(e) => e.has_disjunction(),
        }
    }

    /// Evaluates the expression; `lookup` returns `None` for NULL bindings.
    pub fn eval<'a>(&'a self, lookup: &dyn Fn(&Variable) -> Option<&'a Term>) -> Truth {
        match self {
            FilterExpr::Cmp(op, l, r) => {
                let resolve = |x: &'a TermOrVar| match x {
                    TermOrVar::Term(t) => Some(t),
                    TermOrVar::Var(v) => lookup(v),
                };
                match (resolve(l), resolve(r)) {
                    (Some(a), Some(b)) => compare(*op, a, b),
                    _ => Truth::Unknown,
                }
            }
            FilterExpr::And(l, r) => l.eval(lookup).and(r.eval(lookup)),
            FilterExpr::Or(l, r) => l.eval(lookup).or(r.eval(lookup)),
            FilterExpr::Not(e) => !e.eval(lookup),
        }
    }
}

/// `=` and `!=` compare term identity. Orderings are defined between two
/// integers (numeric) and between two strings (lexicographic) and are
/// unknown for any other pairing.
pub fn compare(op: CmpOp, a: &Term, b: &Term) -> Truth {
    let ord = match op {
        CmpOp::Eq => return (a == b).into(),
        CmpOp::Ne => return (a != b).into(),
        _ => match (a, b) {
            (Term::Int(x), Term::Int(y)) => x.cmp(y),
            (Term::Str(x), Term::Str(y)) => x.cmp(y),
            _ => return Truth::Unknown,
        },
    };
    let holds = match op {
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
        CmpOp::Eq | CmpOp::Ne => unreachable!(),
    };
    holds.into()
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

fn operand(f: &mut fmt::Formatter<'_>, x: &TermOrVar) -> fmt::Result {
    match x {
        TermOrVar::Term(Term::Int(i)) => write!(f, "{i}"),
        other => write!(f, "{other}"),
    }
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Cmp(op, l, r) => {
                operand(f, l)?;
                write!(f, " {} ", op.symbol())?;
                operand(f, r)
            }
            FilterExpr::And(l, r) => write!(f, "({l} && {r})"),
            FilterExpr::Or(l, r) => write!(f, "({l} || {r})"),
            FilterExpr::Not(e) => write!(f, "!({e})"),
        }
    }
}
