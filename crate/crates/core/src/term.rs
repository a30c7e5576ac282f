//! RDF terms and query variables.

use std::fmt;

pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

/// A ground RDF term. Literals are restricted to plain strings and integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Str(String),
    Int(i64),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn is_literal(&self) -> bool {
        !matches!(self, Term::Iri(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Term::Int(i) => write!(f, "\"{i}\"^^<{XSD_INTEGER}>"),
        }
    }
}

/// A query variable, stored without its leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(pub String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        match name.strip_prefix('?').or_else(|| name.strip_prefix('$')) {
            Some(stripped) => Variable(stripped.to_string()),
            None => Variable(name),
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A position of a triple pattern: either a constant or a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermOrVar {
    Term(Term),
    Var(Variable),
}

impl TermOrVar {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            TermOrVar::Var(v) => Some(v),
            TermOrVar::Term(_) => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            TermOrVar::Term(t) => Some(t),
            TermOrVar::Var(_) => None,
        }
    }
}

impl fmt::Display for TermOrVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermOrVar::Term(t) => t.fmt(f),
            TermOrVar::Var(v) => v.fmt(f),
        }
    }
}

impl From<Term> for TermOrVar {
    fn from(t: Term) -> Self {
        TermOrVar::Term(t)
    }
}

impl From<Variable> for TermOrVar {
    fn from(v: Variable) -> Self {
        TermOrVar::Var(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(Term::iri("http://x/a").to_string(), "<http://x/a>");
        assert_eq!(Term::Str("a\"b".into()).to_string(), "\"a\\\"b\"");
        assert_eq!(
            Term::Int(42).to_string(),
            "\"42\"^^<http://www.w3.org/2001/XMLSchema#integer>"
        );
        assert_eq!(Variable::new("?x").to_string(), "?x");
        assert_eq!(Variable::new("y").name(), "y");
    }
}
