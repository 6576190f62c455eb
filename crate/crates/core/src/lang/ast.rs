//! Typed model of an input specification.

use crate::fact::Fact;
use crate::formula::Formula;
use crate::sig::Signature;
use crate::term::{Term, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Var(Var),
    /// `=M`: the input must equal the term.
    Eq(Term),
    Tuple(Vec<Pattern>),
}

impl Pattern {
    /// The pattern as a term, with equality tests inlined.
    pub fn to_term(&self) -> Term {
        match self {
            Pattern::Var(v) => Term::Var(v.clone()),
            Pattern::Eq(t) => t.clone(),
            Pattern::Tuple(ps) => Term::tuple(ps.iter().map(Pattern::to_term).collect()),
        }
    }

    pub fn binders(&self, out: &mut Vec<Var>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Eq(_) => {}
            Pattern::Tuple(ps) => {
                for p in ps {
                    p.binders(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Process {
    Nil,
    Output(Term, Term, Box<Process>),
    Input(Term, Pattern, Box<Process>),
    Parallel(Box<Process>, Box<Process>),
    /// Session identifier filled in by instrumentation.
    Repl(Option<Var>, Box<Process>),
    Restriction(String, String, Box<Process>),
    /// `let pat = D in P else Q`
    Let(Pattern, Term, Box<Process>, Box<Process>),
    /// `let x1,...,xn suchthat p(...) in P else Q`; `if p(...) then` is the
    /// zero-binder form.
    LetSuchThat(Vec<Var>, Fact, Box<Process>, Box<Process>),
    Event(String, Vec<Term>, Box<Process>),
}

impl Process {
    pub fn boxed(self) -> Box<Process> {
        Box::new(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StatementKind {
    Query,
    Lemma,
    Axiom,
}

impl std::fmt::Display for StatementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatementKind::Query => write!(f, "query"),
            StatementKind::Lemma => write!(f, "lemma"),
            StatementKind::Axiom => write!(f, "axiom"),
        }
    }
}

/// One disjunct of a statement conclusion: a conjunction of facts plus
/// (dis)equalities and natural-number comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunct {
    pub facts: Vec<Fact>,
    pub formula: Formula,
}

/// A correspondence statement: premise conjunction implies a disjunction of
/// conclusion conjunctions.
#[derive(Debug, Clone)]
pub struct Statement {
    pub name: String,
    pub kind: StatementKind,
    /// Canonical premise order: standard predicates before user predicates.
    pub premises: Vec<Fact>,
    /// Constraint atoms appearing in the premise.
    pub premise_formula: Formula,
    pub conclusion: Vec<Conjunct>,
    pub induction: bool,
    /// First premise index (1-based) holding a user-defined predicate;
    /// `premises.len() + 1` if none.
    pub idx: usize,
}

impl Statement {
    pub fn compute_idx(premises: &[Fact], sig: &Signature) -> usize {
        for (i, f) in premises.iter().enumerate() {
            if f.is_pred() && (sig.is_user_pred(f.label()) || sig.is_abstract_pred(f.label())) {
                return i + 1;
            }
        }
        premises.len() + 1
    }

    /// Reorders premises so standard predicates come first, then recomputes
    /// `idx`.
    pub fn canonicalize(&mut self, sig: &Signature) {
        let (std_p, user_p): (Vec<_>, Vec<_>) = self
            .premises
            .drain(..)
            .partition(|f| !f.is_pred() || !(sig.is_user_pred(f.label()) || sig.is_abstract_pred(f.label())));
        self.premises = std_p;
        self.premises.extend(user_p);
        self.idx = Statement::compute_idx(&self.premises, sig);
    }

    pub fn premise_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for p in &self.premises {
            p.vars_into(&mut out);
        }
        for v in self.premise_formula.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct UserClause {
    pub hyps: Vec<Fact>,
    pub formula: Formula,
    pub concl: Fact,
}

/// A parsed and validated specification.
#[derive(Debug, Clone, Default)]
pub struct Specification {
    pub sig: Signature,
    pub user_clauses: Vec<UserClause>,
    pub process: Option<Process>,
    pub statements: Vec<Statement>,
}

impl Specification {
    pub fn new() -> Specification {
        Specification {
            sig: Signature::new(),
            user_clauses: Vec::new(),
            process: None,
            statements: Vec::new(),
        }
    }
}
