//! First-order syntax: signatures, terms, formulas, printing.
//!
//! Negation is not a primitive; `~p` is sugar for `p -> bot` and the printer
//! folds that shape back to `~`. Multi-variable quantifiers desugar to nested
//! single-variable ones, so `forall x, y. p` and `forall x. forall y. p` are
//! the same AST.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

mod parse;

pub use parse::parse_formula;

/// Words the grammar claims for itself; they cannot name symbols or variables.
pub const KEYWORDS: [&str; 4] = ["forall", "exists", "top", "bot"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown symbol `{name}` at offset {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("duplicate variable `{0}` in context")]
    DuplicateContextVariable(String),
    #[error("free variable `{0}` is not in the context")]
    FreeVariableNotInContext(String),
    #[error("variable `{0}` clashes with a declared symbol")]
    VariableShadowsSymbol(String),
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Function and relation symbols with their arities. Names are unique across
/// both kinds. Equality is built into the formula language and never appears
/// here.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    functions: BTreeMap<String, usize>,
    relations: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Adds a function symbol (arity 0 is a constant).
    ///
    /// Panics on malformed names, keywords, or redeclaration; signatures are
    /// built from literals and a bad one is a programming error.
    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        assert!(valid_name(name), "bad function name `{name}`");
        assert!(!self.declares(name), "`{name}` declared twice");
        self.functions.insert(name.to_string(), arity);
        self
    }

    /// Adds a relation symbol. Same rules as [`Signature::with_function`].
    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        assert!(valid_name(name), "bad relation name `{name}`");
        assert!(!self.declares(name), "`{name}` declared twice");
        self.relations.insert(name.to_string(), arity);
        self
    }

    pub fn declares(&self, name: &str) -> bool {
        self.functions.contains_key(name) || self.relations.contains_key(name)
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// Function application; an empty argument list is a constant.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), Vec::new())
    }

    fn collect_vars(&self, acc: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                acc.insert(v.clone());
            }
            Term::App(_, args) => {
                for arg in args {
                    arg.collect_vars(acc);
                }
            }
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Var(v) if v == from => Term::var(to),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|t| t.rename(from, to)).collect())
            }
        }
    }

    fn check(&self, sig: &Signature) -> Result<(), SyntaxError> {
        match self {
            Term::Var(v) => {
                if sig.declares(v) {
                    return Err(SyntaxError::VariableShadowsSymbol(v.clone()));
                }
            }
            Term::App(f, args) => {
                let expected = sig.function_arity(f).ok_or(SyntaxError::UnknownSymbol {
                    name: f.clone(),
                    offset: 0,
                })?;
                if expected != args.len() {
                    return Err(SyntaxError::ArityMismatch {
                        name: f.clone(),
                        expected,
                        got: args.len(),
                    });
                }
                for arg in args {
                    arg.check(sig)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{arg}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bottom,
    Atom(String, Vec<Term>),
    Equals(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(name.to_string(), args)
    }

    pub fn equals(lhs: Term, rhs: Term) -> Formula {
        Formula::Equals(lhs, rhs)
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn not(inner: Formula) -> Formula {
        Formula::implies(inner, Formula::Bottom)
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn is_negation(&self) -> bool {
        matches!(self, Formula::Implies(_, b) if **b == Formula::Bottom)
    }

    /// Variables with at least one free occurrence.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        self.free_into(&mut Vec::new(), &mut acc);
        acc
    }

    fn free_into(&self, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match self {
            Formula::Top | Formula::Bottom => {}
            Formula::Atom(_, args) => {
                let mut vars = BTreeSet::new();
                for arg in args {
                    arg.collect_vars(&mut vars);
                }
                acc.extend(vars.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Equals(l, r) => {
                let mut vars = BTreeSet::new();
                l.collect_vars(&mut vars);
                r.collect_vars(&mut vars);
                acc.extend(vars.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.free_into(bound, acc);
                r.free_into(bound, acc);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.free_into(bound, acc);
                bound.pop();
            }
        }
    }

    /// Renames free occurrences of `from` to `to`. `to` is assumed fresh, so
    /// no capture check is performed.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Top | Formula::Bottom => self.clone(),
            Formula::Atom(r, args) => {
                Formula::Atom(r.clone(), args.iter().map(|t| t.rename(from, to)).collect())
            }
            Formula::Equals(l, r) => Formula::Equals(l.rename(from, to), r.rename(from, to)),
            Formula::And(l, r) => Formula::and(l.rename_free(from, to), r.rename_free(from, to)),
            Formula::Or(l, r) => Formula::or(l.rename_free(from, to), r.rename_free(from, to)),
            Formula::Implies(l, r) => {
                Formula::implies(l.rename_free(from, to), r.rename_free(from, to))
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) if v == from => self.clone(),
            Formula::Exists(v, body) => Formula::exists(v, body.rename_free(from, to)),
            Formula::Forall(v, body) => Formula::forall(v, body.rename_free(from, to)),
        }
    }

    /// Checks every symbol against `sig` (declared, right arity) and every
    /// variable against the keyword/symbol namespace.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), SyntaxError> {
        match self {
            Formula::Top | Formula::Bottom => Ok(()),
            Formula::Atom(r, args) => {
                let expected = sig.relation_arity(r).ok_or(SyntaxError::UnknownSymbol {
                    name: r.clone(),
                    offset: 0,
                })?;
                if expected != args.len() {
                    return Err(SyntaxError::ArityMismatch {
                        name: r.clone(),
                        expected,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|t| t.check(sig))
            }
            Formula::Equals(l, r) => {
                l.check(sig)?;
                r.check(sig)
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.well_formed(sig)?;
                r.well_formed(sig)
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                if sig.declares(v) || !valid_name(v) {
                    return Err(SyntaxError::VariableShadowsSymbol(v.clone()));
                }
                body.well_formed(sig)
            }
        }
    }

    /// Nesting depth as counted by the bounded generators and checkers.
    ///
    /// Atoms, equalities and the constants are depth 0. Negation is
    /// transparent: `~p` is as deep as `p`. A run of one associative
    /// connective (`/\` or `\/`) or one quantifier counts a single level, so
    /// `forall x, y, z. p` is one level above `p`.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(..) | Formula::Equals(..) => 0,
            Formula::Implies(a, b) if **b == Formula::Bottom => a.depth(),
            Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Formula::And(..) => {
                let mut parts = Vec::new();
                self.and_spine(&mut parts);
                1 + parts.iter().map(|p| p.depth()).max().unwrap_or(0)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                self.or_spine(&mut parts);
                1 + parts.iter().map(|p| p.depth()).max().unwrap_or(0)
            }
            Formula::Forall(_, body) => {
                let mut inner = body;
                while let Formula::Forall(_, next) = inner.as_ref() {
                    inner = next;
                }
                1 + inner.depth()
            }
            Formula::Exists(_, body) => {
                let mut inner = body;
                while let Formula::Exists(_, next) = inner.as_ref() {
                    inner = next;
                }
                1 + inner.depth()
            }
        }
    }

    fn and_spine<'a>(&'a self, acc: &mut Vec<&'a Formula>) {
        match self {
            Formula::And(l, r) => {
                l.and_spine(acc);
                r.and_spine(acc);
            }
            other => acc.push(other),
        }
    }

    fn or_spine<'a>(&'a self, acc: &mut Vec<&'a Formula>) {
        match self {
            Formula::Or(l, r) => {
                l.or_spine(acc);
                r.or_spine(acc);
            }
            other => acc.push(other),
        }
    }

    /// Grammar level, for the printer: quantifier 0, `->` 1, `\/` 2, `/\` 3,
    /// `~` 4, atoms 5.
    fn level(&self) -> u8 {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => 0,
            Formula::Implies(_, b) if **b == Formula::Bottom => 4,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Formula::Top => write!(f, "top"),
            Formula::Bottom => write!(f, "bot"),
            Formula::Atom(name, args) => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{arg}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Equals(l, r) => write!(f, "{l} = {r}"),
            Formula::Implies(a, b) if **b == Formula::Bottom => {
                write!(f, "~")?;
                a.fmt_at(f, 4)
            }
            Formula::Implies(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " -> ")?;
                // An arrow's right side is a full formula, so a quantifier
                // there needs no parentheses.
                b.fmt_at(f, 0)
            }
            Formula::Or(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " \\/ ")?;
                b.fmt_at(f, 3)
            }
            Formula::And(a, b) => {
                a.fmt_at(f, 3)?;
                write!(f, " /\\ ")?;
                b.fmt_at(f, 4)
            }
            Formula::Forall(..) | Formula::Exists(..) => {
                let existential = matches!(self, Formula::Exists(..));
                write!(f, "{}", if existential { "exists " } else { "forall " })?;
                let mut cursor = self;
                let mut first = true;
                loop {
                    let (var, body) = match (existential, cursor) {
                        (true, Formula::Exists(v, b)) => (v, b),
                        (false, Formula::Forall(v, b)) => (v, b),
                        _ => break,
                    };
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{var}")?;
                    first = false;
                    cursor = body;
                }
                write!(f, ". ")?;
                cursor.fmt_at(f, 0)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Checks that `ctx` is a valid context for `formula`: pairwise distinct
/// variable names covering every free variable.
pub fn check_context(ctx: &[String], formula: &Formula) -> Result<(), SyntaxError> {
    let mut seen = BTreeSet::new();
    for var in ctx {
        if !seen.insert(var.clone()) {
            return Err(SyntaxError::DuplicateContextVariable(var.clone()));
        }
    }
    for free in formula.free_variables() {
        if !seen.contains(&free) {
            return Err(SyntaxError::FreeVariableNotInContext(free));
        }
    }
    Ok(())
}

/// Smallest of `base`, `base_1`, `base_2`, ... not present in `taken`.
pub fn fresh_variable(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut i = 1usize;
    loop {
        let candidate = format!("{base}_{i}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new()
            .with_relation("R", 2)
            .with_relation("S", 1)
            .with_relation("P", 0)
            .with_function("f", 1)
            .with_function("c", 0)
    }

    #[test]
    fn parses_nested_quantifiers() {
        let f = parse_formula(&sig(), "forall x, y. (R(x, y) -> exists z. R(x, z))").unwrap();
        let expected = Formula::forall(
            "x",
            Formula::forall(
                "y",
                Formula::implies(
                    Formula::atom("R", vec![Term::var("x"), Term::var("y")]),
                    Formula::exists(
                        "z",
                        Formula::atom("R", vec![Term::var("x"), Term::var("z")]),
                    ),
                ),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = parse_formula(&sig(), "R(").unwrap_err();
        match err {
            SyntaxError::Parse { offset, .. } => assert_eq!(offset, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch_is_detected() {
        let err = parse_formula(&sig(), "S(x, y)").unwrap_err();
        assert_eq!(
            err,
            SyntaxError::ArityMismatch { name: "S".into(), expected: 1, got: 2 }
        );
    }

    #[test]
    fn unknown_symbol_is_detected() {
        let err = parse_formula(&sig(), "Q(x)").unwrap_err();
        assert!(matches!(err, SyntaxError::UnknownSymbol { name, .. } if name == "Q"));
    }

    #[test]
    fn negation_is_sugar_for_implies_bottom() {
        let f = parse_formula(&sig(), "~P").unwrap();
        assert_eq!(f, Formula::not(Formula::atom("P", vec![])));
        assert_eq!(f.to_string(), "~P");
    }

    #[test]
    fn precedence_implication_binds_loosest() {
        let f = parse_formula(&sig(), "P \\/ S(x) -> P /\\ P").unwrap();
        let p = || Formula::atom("P", vec![]);
        let sx = Formula::atom("S", vec![Term::var("x")]);
        assert_eq!(
            f,
            Formula::implies(Formula::or(p(), sx), Formula::and(p(), p()))
        );
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse_formula(&sig(), "P -> P -> P").unwrap();
        let p = || Formula::atom("P", vec![]);
        assert_eq!(f, Formula::implies(p(), Formula::implies(p(), p())));
    }

    #[test]
    fn conjunction_is_left_associative() {
        let f = parse_formula(&sig(), "P /\\ P /\\ P").unwrap();
        let p = || Formula::atom("P", vec![]);
        assert_eq!(f, Formula::and(Formula::and(p(), p()), p()));
    }

    #[test]
    fn equality_parses_with_function_terms() {
        let f = parse_formula(&sig(), "f(x) = c").unwrap();
        assert_eq!(
            f,
            Formula::equals(Term::app("f", vec![Term::var("x")]), Term::constant("c"))
        );
        assert_eq!(f.to_string(), "f(x) = c");
    }

    #[test]
    fn negated_equality_scopes_over_the_whole_atom() {
        let f = parse_formula(&sig(), "~x = y").unwrap();
        assert_eq!(
            f,
            Formula::not(Formula::equals(Term::var("x"), Term::var("y")))
        );
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula(&sig(), "forall x. S(x) -> P").unwrap();
        assert!(matches!(f, Formula::Forall(..)));
    }

    #[test]
    fn quantifier_allowed_after_arrow_but_not_under_or() {
        let f = parse_formula(&sig(), "P -> forall x. S(x)").unwrap();
        assert_eq!(f.to_string(), "P -> forall x. S(x)");
        assert!(parse_formula(&sig(), "P \\/ forall x. S(x)").is_err());
        let g = parse_formula(&sig(), "P \\/ (forall x. S(x))").unwrap();
        assert_eq!(g.to_string(), "P \\/ (forall x. S(x))");
    }

    #[test]
    fn free_variables_respect_binders() {
        let f = parse_formula(&sig(), "forall x. R(x, y)").unwrap();
        let free: Vec<_> = f.free_variables().into_iter().collect();
        assert_eq!(free, vec!["y".to_string()]);
    }

    #[test]
    fn context_checking() {
        let f = parse_formula(&sig(), "R(x, y)").unwrap();
        assert!(check_context(&["x".into(), "y".into()], &f).is_ok());
        assert!(check_context(&["x".into(), "y".into(), "z".into()], &f).is_ok());
        assert_eq!(
            check_context(&["x".into()], &f),
            Err(SyntaxError::FreeVariableNotInContext("y".into()))
        );
        assert_eq!(
            check_context(&["x".into(), "x".into(), "y".into()], &f),
            Err(SyntaxError::DuplicateContextVariable("x".into()))
        );
    }

    #[test]
    fn depth_ignores_negation_and_flattens_runs() {
        let s = |v: &str| Formula::atom("S", vec![Term::var(v)]);
        assert_eq!(s("x").depth(), 0);
        assert_eq!(Formula::not(s("x")).depth(), 0);
        assert_eq!(Formula::not(Formula::not(s("x"))).depth(), 0);
        // x = y \/ x = z \/ y = z: one level for the whole run.
        let eq = |a: &str, b: &str| Formula::equals(Term::var(a), Term::var(b));
        let chain = Formula::or(Formula::or(eq("x", "y"), eq("x", "z")), eq("y", "z"));
        assert_eq!(chain.depth(), 1);
        // forall x, y, z: one level for the whole block.
        let block = Formula::forall("x", Formula::forall("y", Formula::forall("z", chain)));
        assert_eq!(block.depth(), 2);
        // Negation under a quantifier still contributes its own operand depth.
        let f = Formula::forall("x", Formula::not(Formula::or(s("x"), Formula::not(s("x")))));
        assert_eq!(f.depth(), 2);
    }

    #[test]
    fn rename_free_stops_at_binders() {
        let f = parse_formula(&sig(), "S(x) /\\ (exists x. S(x))").unwrap();
        let renamed = f.rename_free("x", "w");
        assert_eq!(renamed.to_string(), "S(w) /\\ (exists x. S(x))");
    }

    #[test]
    fn fresh_variable_avoids_taken_names() {
        let taken: BTreeSet<String> =
            ["x".to_string(), "x_1".to_string()].into_iter().collect();
        assert_eq!(fresh_variable("x", &taken), "x_2");
        assert_eq!(fresh_variable("y", &taken), "y");
    }

    #[test]
    fn printer_round_trips_the_examples() {
        for src in [
            "forall x, y. (R(x, y) -> exists z. R(x, z))",
            "~(P /\\ ~P)",
            "S(f(c)) \\/ ~S(c)",
            "forall x. (S(x) \\/ ~S(x)) /\\ ~(forall x. ~S(x)) -> (exists x. ~~S(x))",
            "x = y \\/ ~x = y",
        ] {
            let parsed = parse_formula(&sig(), src).unwrap();
            let reparsed = parse_formula(&sig(), &parsed.to_string()).unwrap();
            assert_eq!(parsed, reparsed, "printing `{src}` lost structure");
        }
    }
}
