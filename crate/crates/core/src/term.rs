//! Terms, variables and substitutions: the symbolic kernel.
//!
//! Terms are immutable values with structural equality and hashing. A term is
//! a variable, an instrumented name pattern `k[M1,...,Mn]`, a constructor or
//! destructor application, or the distinguished failure constant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

static FRESH_VAR_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Built-in data constructor for the natural number zero.
pub const ZERO: &str = "@zero";
/// Built-in data constructor for the natural number successor.
pub const SUCC: &str = "@succ";

/// Name of the built-in n-ary tuple data constructor.
pub fn tuple_sym(n: usize) -> String {
    format!("@tup{n}")
}

pub fn is_tuple_sym(name: &str) -> bool {
    name.starts_with("@tup")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Var {
    pub name: String,
    pub id: u64,
    pub sort: Option<String>,
}

impl Var {
    pub fn fresh(name: &str, sort: Option<String>) -> Var {
        Var {
            name: name.to_string(),
            id: FRESH_VAR_COUNTER.fetch_add(1, Ordering::Relaxed),
            sort,
        }
    }

    pub fn renamed(&self) -> Var {
        Var::fresh(&self.name, self.sort.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}#{}", self.name, self.id)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Term {
    Var(Var),
    /// Instrumented name pattern `k[M1,...,Mn]`; the arguments are the
    /// session identifiers and prior inputs in scope when the name was bound.
    Name(String, Vec<Term>),
    App(String, Vec<Term>),
    Fail,
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn name(n: &str, args: Vec<Term>) -> Term {
        Term::Name(n.to_string(), args)
    }

    pub fn tuple(args: Vec<Term>) -> Term {
        Term::App(tuple_sym(args.len()), args)
    }

    pub fn nat(k: u64) -> Term {
        let mut t = Term::App(ZERO.to_string(), vec![]);
        for _ in 0..k {
            t = Term::App(SUCC.to_string(), vec![t]);
        }
        t
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Fail => 1,
            Term::Name(_, args) | Term::App(_, args) => {
                1 + args.iter().map(Term::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Fail => 1,
            Term::Name(_, args) | Term::App(_, args) => {
                1 + args.iter().map(Term::size).sum::<usize>()
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fail => true,
            Term::Name(_, args) | Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Fail => false,
            Term::Name(_, args) | Term::App(_, args) => args.iter().any(|t| t.occurs(v)),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Fail => {}
            Term::Name(_, args) | Term::App(_, args) => {
                for a in args {
                    a.vars_into(out);
                }
            }
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.vars_into(&mut out);
        out
    }

    /// Strips `@succ` applications, returning `(k, base)` with `self = succ^k(base)`.
    pub fn strip_succ(&self) -> (u64, &Term) {
        let mut k = 0;
        let mut t = self;
        while let Term::App(f, args) = t {
            if f == SUCC && args.len() == 1 {
                k += 1;
                t = &args[0];
            } else {
                break;
            }
        }
        (k, t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Fail => write!(f, "fail"),
            Term::Name(n, args) => {
                write!(f, "{n}[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
            Term::App(g, args) => {
                if g == ZERO || g == SUCC {
                    let (k, base) = self.strip_succ();
                    return match base {
                        Term::App(z, _) if z == ZERO => write!(f, "{k}"),
                        _ => {
                            if k == 0 {
                                write!(f, "{base}")
                            } else {
                                write!(f, "{base} + {k}")
                            }
                        }
                    };
                }
                if is_tuple_sym(g) {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    return write!(f, ")");
                }
                write!(f, "{g}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Kind of a function symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FuncKind {
    Constructor,
    Destructor,
    /// Data constructors additionally induce build/projection clauses in `C_std`.
    Data,
}

/// One rewrite rule `g(patterns) -> result` of a destructor definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub patterns: Vec<Term>,
    pub result: Term,
}

#[derive(Debug, Clone)]
pub struct FunctionSymbol {
    pub name: String,
    pub arity: usize,
    pub kind: FuncKind,
    /// Ordered rewrite rules; empty for constructors, non-empty for destructors.
    pub rules: Vec<RewriteRule>,
    pub arg_sorts: Vec<String>,
    pub result_sort: String,
}

/// A finite, idempotent assignment of terms to variables.
///
/// After every `bind`, no domain variable occurs in any range term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn singleton(v: Var, t: Term) -> Subst {
        let mut s = Subst::new();
        s.bind(v, t);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Adds a binding, keeping the substitution idempotent: the new binding is
    /// applied to all existing range terms first.
    pub fn bind(&mut self, v: Var, t: Term) {
        let single = Subst {
            map: BTreeMap::from([(v.clone(), t.clone())]),
        };
        for range in self.map.values_mut() {
            *range = single.apply(range);
        }
        self.map.insert(v, self.apply_once(&t));
    }

    fn apply_once(&self, t: &Term) -> Term {
        self.apply(t)
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(u) => u.clone(),
                None => t.clone(),
            },
            Term::Fail => Term::Fail,
            Term::Name(n, args) => {
                Term::Name(n.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// Composition: `self.compose(other)` behaves as applying `other` first,
    /// then `self`.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut map = BTreeMap::new();
        for (v, t) in &other.map {
            map.insert(v.clone(), self.apply(t));
        }
        for (v, t) in &self.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Subst { map }
    }
}

/// Unification failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnifyError {
    #[error("symbol clash: {0} vs {1}")]
    Clash(String, String),
    #[error("occurs check failed on {0}")]
    Occurs(String),
    #[error("cannot instantiate frozen variable {0}")]
    Frozen(String),
}

/// Incremental unifier. `frozen` variables behave like constants: they unify
/// only with themselves (free variables may still be bound to them). When a
/// sort oracle is installed, a sorted variable refuses terms whose sort is
/// known and different.
pub struct Unifier<'a> {
    pub subst: Subst,
    pub frozen: Option<&'a dyn Fn(&Var) -> bool>,
    pub sort_of: Option<&'a dyn Fn(&Term) -> Option<String>>,
}

impl<'a> Unifier<'a> {
    pub fn new() -> Unifier<'a> {
        Unifier {
            subst: Subst::new(),
            frozen: None,
            sort_of: None,
        }
    }

    pub fn with_frozen(f: &'a dyn Fn(&Var) -> bool) -> Unifier<'a> {
        Unifier {
            subst: Subst::new(),
            frozen: Some(f),
            sort_of: None,
        }
    }

    pub fn with_sorts(s: &'a dyn Fn(&Term) -> Option<String>) -> Unifier<'a> {
        Unifier {
            subst: Subst::new(),
            frozen: None,
            sort_of: Some(s),
        }
    }

    fn is_frozen(&self, v: &Var) -> bool {
        self.frozen.map(|f| f(v)).unwrap_or(false)
    }

    fn sorts_compatible(&self, v: &Var, t: &Term) -> bool {
        let (Some(oracle), Some(vs)) = (self.sort_of, v.sort.as_ref()) else {
            return true;
        };
        match oracle(t) {
            Some(ts) => *vs == ts,
            None => true,
        }
    }

    pub fn unify(&mut self, t1: &Term, t2: &Term) -> Result<(), UnifyError> {
        let a = self.subst.apply(t1);
        let b = self.subst.apply(t2);
        self.unify_applied(&a, &b)
    }

    fn unify_applied(&mut self, a: &Term, b: &Term) -> Result<(), UnifyError> {
        match (a, b) {
            (x, y) if x == y => Ok(()),
            (Term::Var(v), t) | (t, Term::Var(v))
                if !self.is_frozen(v) && self.sorts_compatible(v, t) =>
            {
                if t.occurs(v) {
                    return Err(UnifyError::Occurs(v.to_string()));
                }
                self.subst.bind(v.clone(), t.clone());
                Ok(())
            }
            (Term::Var(v), t) | (t, Term::Var(v))
                if !self.is_frozen(v) && !self.sorts_compatible(v, t) =>
            {
                Err(UnifyError::Clash(v.to_string(), t.to_string()))
            }
            // A frozen variable may still absorb a free one.
            (Term::Var(v), Term::Var(w)) | (Term::Var(w), Term::Var(v))
                if !self.is_frozen(w) && self.is_frozen(v) =>
            {
                self.subst.bind(w.clone(), Term::Var(v.clone()));
                Ok(())
            }
            (Term::Var(v), _) | (_, Term::Var(v)) => Err(UnifyError::Frozen(v.to_string())),
            (Term::App(f, fa), Term::App(g, ga)) if f == g && fa.len() == ga.len() => {
                for (x, y) in fa.iter().zip(ga) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            (Term::Name(f, fa), Term::Name(g, ga)) if f == g && fa.len() == ga.len() => {
                for (x, y) in fa.iter().zip(ga) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            _ => Err(UnifyError::Clash(a.to_string(), b.to_string())),
        }
    }
}

impl<'a> Default for Unifier<'a> {
    fn default() -> Self {
        Unifier::new()
    }
}

/// Most general unifier of two terms, with occurs check.
pub fn mgu_terms(t1: &Term, t2: &Term) -> Option<Subst> {
    let mut u = Unifier::new();
    u.unify(t1, t2).ok()?;
    Some(u.subst)
}

/// One-way matching: find sigma with `pattern * sigma == target`, binding
/// only variables satisfying `bindable`. After substitution a pattern may
/// mention target-side variables; those are rigid and match only themselves.
pub fn match_term_in(
    pattern: &Term,
    target: &Term,
    subst: &mut Subst,
    bindable: &dyn Fn(&Var) -> bool,
) -> bool {
    let p = subst.apply(pattern);
    match (&p, target) {
        (Term::Var(v), t) if bindable(v) => {
            if let Some(bound) = subst.get(v) {
                bound == t
            } else {
                subst.bind(v.clone(), (*t).clone());
                true
            }
        }
        (Term::Var(v), Term::Var(w)) => v == w,
        (Term::Var(_), _) => false,
        (Term::Fail, Term::Fail) => true,
        (Term::App(f, fa), Term::App(g, ga)) if f == g && fa.len() == ga.len() => fa
            .iter()
            .zip(ga.iter())
            .all(|(x, y)| match_term_in(x, y, subst, bindable)),
        (Term::Name(f, fa), Term::Name(g, ga)) if f == g && fa.len() == ga.len() => fa
            .iter()
            .zip(ga.iter())
            .all(|(x, y)| match_term_in(x, y, subst, bindable)),
        _ => false,
    }
}

/// One-way matching with every pattern variable bindable. Only safe when the
/// pattern's variables are disjoint from the target's (e.g. ground targets).
pub fn match_term(pattern: &Term, target: &Term, subst: &mut Subst) -> bool {
    match_term_in(pattern, target, subst, &|_| true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var {
            name: n.into(),
            id: 0,
            sort: None,
        }
    }

    #[test]
    fn apply_subst_replaces_domain_vars() {
        // {x -> a} applied to f(x,y) = f(a,y)
        let x = v("x");
        let y = v("y");
        let a = Term::app("a", vec![]);
        let s = Subst::singleton(x.clone(), a.clone());
        let t = Term::app("f", vec![Term::var(x), Term::var(y.clone())]);
        assert_eq!(
            s.apply(&t),
            Term::app("f", vec![a, Term::var(y)])
        );
    }

    #[test]
    fn empty_subst_is_identity() {
        let t = Term::app("f", vec![Term::var(v("x"))]);
        assert_eq!(Subst::new().apply(&t), t);
    }

    #[test]
    fn subst_application_to_att_argument() {
        // {x -> enc(ek,s)} applied to the argument of att(x)
        let x = v("x");
        let enc = Term::app("enc", vec![Term::app("ek", vec![]), Term::app("s", vec![])]);
        let s = Subst::singleton(x.clone(), enc.clone());
        assert_eq!(s.apply(&Term::var(x)), enc);
    }

    #[test]
    fn subst_idempotent() {
        let x = v("x");
        let y = v("y");
        let mut s = Subst::new();
        s.bind(x.clone(), Term::app("f", vec![Term::var(y.clone())]));
        s.bind(y.clone(), Term::app("a", vec![]));
        let t = Term::app("g", vec![Term::var(x), Term::var(y)]);
        assert_eq!(s.apply(&t), s.apply(&s.apply(&t)));
    }

    #[test]
    fn unify_basic() {
        let x = v("x");
        let t1 = Term::var(x);
        let t2 = Term::app("enc", vec![Term::app("ek", vec![]), Term::app("s", vec![])]);
        let s = mgu_terms(&t1, &t2).unwrap();
        assert_eq!(s.apply(&t1), t2);
    }

    #[test]
    fn unify_occurs_check() {
        let x = v("x");
        let t1 = Term::var(x.clone());
        let t2 = Term::app("f", vec![Term::var(x)]);
        assert!(mgu_terms(&t1, &t2).is_none());
    }

    #[test]
    fn frozen_vars_do_not_instantiate() {
        let x = v("x");
        let d = v("d");
        let frozen = |w: &Var| w.name == "d";
        let mut u = Unifier::with_frozen(&frozen);
        // free x may bind to frozen d
        assert!(u.unify(&Term::var(x), &Term::var(d.clone())).is_ok());
        // frozen d may not bind to a structured term
        let mut u2 = Unifier::with_frozen(&frozen);
        assert!(u2
            .unify(&Term::var(d), &Term::app("f", vec![]))
            .is_err());
    }

    #[test]
    fn nat_display_and_strip() {
        let t = Term::nat(3);
        assert_eq!(t.to_string(), "3");
        let (k, base) = t.strip_succ();
        assert_eq!(k, 3);
        assert_eq!(base, &Term::app(ZERO, vec![]));
    }
}
