//! Facts: the atoms Horn clauses range over.
//!
//! The blocking counterpart of a fact is the same fact with the `blocked`
//! flag set; sure-events are exactly blocked events (the paper renames
//! s-event as b-event). Predicates declared `[block]` are their own blocking
//! counterpart and keep `blocked = false`.

use std::fmt;

use crate::sig::Signature;
use crate::term::{Subst, Term, Unifier, UnifyError, Var};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKind {
    Att(Term),
    Mess(Term, Term),
    Event(String, Vec<Term>),
    Pred(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub kind: FactKind,
    pub blocked: bool,
}

impl Fact {
    pub fn att(t: Term) -> Fact {
        Fact {
            kind: FactKind::Att(t),
            blocked: false,
        }
    }

    pub fn mess(c: Term, m: Term) -> Fact {
        Fact {
            kind: FactKind::Mess(c, m),
            blocked: false,
        }
    }

    pub fn event(name: &str, args: Vec<Term>) -> Fact {
        Fact {
            kind: FactKind::Event(name.to_string(), args),
            blocked: false,
        }
    }

    pub fn sevent(name: &str, args: Vec<Term>) -> Fact {
        Fact {
            kind: FactKind::Event(name.to_string(), args),
            blocked: true,
        }
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Fact {
        Fact {
            kind: FactKind::Pred(name.to_string(), args),
            blocked: false,
        }
    }

    /// Predicate label, ignoring blocking.
    pub fn label(&self) -> &str {
        match &self.kind {
            FactKind::Att(_) => "attacker",
            FactKind::Mess(_, _) => "mess",
            FactKind::Event(_, _) => "event",
            FactKind::Pred(p, _) => p,
        }
    }

    pub fn args(&self) -> Vec<&Term> {
        match &self.kind {
            FactKind::Att(t) => vec![t],
            FactKind::Mess(c, m) => vec![c, m],
            FactKind::Event(_, a) | FactKind::Pred(_, a) => a.iter().collect(),
        }
    }

    pub fn is_user_pred(&self, sig: &Signature) -> bool {
        matches!(&self.kind, FactKind::Pred(p, _) if sig.is_user_pred(p))
    }

    pub fn is_pred(&self) -> bool {
        matches!(&self.kind, FactKind::Pred(_, _))
    }

    /// True for facts that behave as blocking: explicitly blocked ones and
    /// facts of predicates declared `[block]`.
    pub fn is_blocking(&self, sig: &Signature) -> bool {
        if self.blocked {
            return true;
        }
        matches!(&self.kind, FactKind::Pred(p, _) if sig.is_abstract_pred(p))
    }

    /// The transformation to blocking form. Identity on `[block]` predicates.
    pub fn to_blocking(&self, sig: &Signature) -> Fact {
        if let FactKind::Pred(p, _) = &self.kind {
            if sig.is_abstract_pred(p) {
                return self.clone();
            }
        }
        Fact {
            kind: self.kind.clone(),
            blocked: true,
        }
    }

    /// Blocking-insensitive equality.
    pub fn same_modulo_blocking(&self, other: &Fact) -> bool {
        self.kind == other.kind
    }

    pub fn apply(&self, s: &Subst) -> Fact {
        let kind = match &self.kind {
            FactKind::Att(t) => FactKind::Att(s.apply(t)),
            FactKind::Mess(c, m) => FactKind::Mess(s.apply(c), s.apply(m)),
            FactKind::Event(e, a) => {
                FactKind::Event(e.clone(), a.iter().map(|t| s.apply(t)).collect())
            }
            FactKind::Pred(p, a) => {
                FactKind::Pred(p.clone(), a.iter().map(|t| s.apply(t)).collect())
            }
        };
        Fact {
            kind,
            blocked: self.blocked,
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Var>) {
        for t in self.args() {
            t.vars_into(out);
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.vars_into(&mut out);
        out
    }

    pub fn depth(&self) -> usize {
        self.args().iter().map(|t| t.depth()).max().unwrap_or(0)
    }

    pub fn is_ground(&self) -> bool {
        self.args().iter().all(|t| t.is_ground())
    }

    fn same_shape(&self, other: &Fact) -> bool {
        match (&self.kind, &other.kind) {
            (FactKind::Att(_), FactKind::Att(_)) => true,
            (FactKind::Mess(_, _), FactKind::Mess(_, _)) => true,
            (FactKind::Event(a, x), FactKind::Event(b, y)) => a == b && x.len() == y.len(),
            (FactKind::Pred(a, x), FactKind::Pred(b, y)) => a == b && x.len() == y.len(),
            _ => false,
        }
    }

    /// Unifies the underlying atoms, ignoring blocking flags.
    pub fn unify_kind(&self, other: &Fact, u: &mut Unifier) -> Result<(), UnifyError> {
        if !self.same_shape(other) {
            return Err(UnifyError::Clash(
                self.label().to_string(),
                other.label().to_string(),
            ));
        }
        for (a, b) in self.args().iter().zip(other.args()) {
            u.unify(a, b)?;
        }
        Ok(())
    }

    /// One-way matching on the underlying atom, binding only variables the
    /// caller owns (typically the pattern side's original variables).
    pub fn match_kind_in(
        &self,
        target: &Fact,
        s: &mut Subst,
        bindable: &dyn Fn(&crate::term::Var) -> bool,
    ) -> bool {
        if !self.same_shape(target) {
            return false;
        }
        self.args()
            .iter()
            .zip(target.args())
            .all(|(p, t)| crate::term::match_term_in(p, t, s, bindable))
    }

    /// One-way matching with all pattern variables bindable; only safe when
    /// pattern and target variables are disjoint.
    pub fn match_kind(&self, target: &Fact, s: &mut Subst) -> bool {
        self.match_kind_in(target, s, &|_| true)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.blocked {
            match &self.kind {
                FactKind::Event(_, _) => "s-event:",
                _ => "b-",
            }
        } else {
            ""
        };
        match &self.kind {
            FactKind::Att(t) => write!(f, "{prefix}attacker({t})"),
            FactKind::Mess(c, m) => write!(f, "{prefix}mess({c},{m})"),
            FactKind::Event(e, a) => {
                write!(f, "{prefix}event({e}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "))")
            }
            FactKind::Pred(p, a) => {
                write!(f, "{prefix}{p}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Most general unifier of two facts (same predicate, same blocking status),
/// with sort-aware unification.
pub fn mgu_facts(f1: &Fact, f2: &Fact, sig: &Signature) -> Option<Subst> {
    if f1.is_blocking(sig) != f2.is_blocking(sig) {
        return None;
    }
    let sort_of = |t: &Term| sig.sort_of(t);
    let mut u = Unifier::with_sorts(&sort_of);
    f1.unify_kind(f2, &mut u).ok()?;
    Some(u.subst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::Var(Var {
            name: n.into(),
            id: 0,
            sort: None,
        })
    }

    #[test]
    fn mgu_one_variable_match() {
        let sig = Signature::new();
        let enc = Term::app("enc", vec![Term::app("ek", vec![]), Term::app("s", vec![])]);
        let f1 = Fact::att(v("x"));
        let f2 = Fact::att(enc.clone());
        let s = mgu_facts(&f1, &f2, &sig).unwrap();
        assert_eq!(f1.apply(&s), f2);
    }

    #[test]
    fn mgu_clash_through_shared_variable() {
        // mem(x, cons(x,l)) vs mem(a, cons(b,l')): a/b clash through x
        let sig = Signature::new();
        let f1 = Fact::pred(
            "mem",
            vec![v("x"), Term::app("cons", vec![v("x"), v("l")])],
        );
        let f2 = Fact::pred(
            "mem",
            vec![
                Term::app("a", vec![]),
                Term::app("cons", vec![Term::app("b", vec![]), v("l2")]),
            ],
        );
        assert!(mgu_facts(&f1, &f2, &sig).is_none());
    }

    #[test]
    fn mgu_instantiates_under_constructor() {
        let sig = Signature::new();
        let ek = Term::app("ek", vec![]);
        let f1 = Fact::att(Term::app("enc", vec![ek.clone(), v("x")]));
        let f2 = Fact::att(Term::app("enc", vec![ek, Term::app("s", vec![])]));
        let s = mgu_facts(&f1, &f2, &sig).unwrap();
        assert_eq!(s.apply(&v("x")), Term::app("s", vec![]));
    }

    #[test]
    fn blocking_never_wraps_blocking() {
        let sig = Signature::new();
        let f = Fact::event("E", vec![]);
        let b = f.to_blocking(&sig);
        assert_eq!(b, b.to_blocking(&sig));
        assert!(b.same_modulo_blocking(&f));
    }
}
