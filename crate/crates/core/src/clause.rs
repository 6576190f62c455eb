//! Horn clauses: hypotheses, constraint formula, conclusion, provenance,
//! and the blocking-aware subsumption relation.

use std::collections::BTreeSet;
use std::fmt;

use crate::fact::Fact;
use crate::formula::Formula;
use crate::sig::Signature;
use crate::term::{Subst, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Attacker rule id: RInit, RGen, RFail, Rf, Rl, Rs, data build/proj.
    Attacker(String),
    /// Site inside the process the clause was translated from.
    Protocol(String),
    /// Index into the user clause set.
    UserClause(usize),
    /// Blocked-fact axiom `-> b-F`.
    BlockedAxiom,
    Resolution {
        left: u64,
        right: u64,
    },
    LemmaApp {
        parent: u64,
        lemma: String,
    },
    Simplified {
        parent: u64,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Attacker(r) => write!(f, "attacker:{r}"),
            Provenance::Protocol(site) => write!(f, "protocol:{site}"),
            Provenance::UserClause(i) => write!(f, "user:{i}"),
            Provenance::BlockedAxiom => write!(f, "blocked-axiom"),
            Provenance::Resolution { left, right } => write!(f, "res({left},{right})"),
            Provenance::LemmaApp { parent, lemma } => write!(f, "lemma({parent},{lemma})"),
            Provenance::Simplified { parent } => write!(f, "simplified({parent})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Clause {
    pub id: u64,
    pub hyps: Vec<Fact>,
    pub formula: Formula,
    pub concl: Fact,
    pub provenance: Provenance,
    /// Member of C_std: the listening rule and the data build/projection
    /// clauses. Lemmas are never applied to these.
    pub std: bool,
    /// Fingerprints of lemma applications already attempted on this lineage.
    pub lemma_memo: BTreeSet<String>,
}

impl Clause {
    pub fn new(hyps: Vec<Fact>, formula: Formula, concl: Fact, provenance: Provenance) -> Clause {
        Clause {
            id: 0,
            hyps,
            formula,
            concl,
            provenance,
            std: false,
            lemma_memo: BTreeSet::new(),
        }
    }

    pub fn fact(concl: Fact, provenance: Provenance) -> Clause {
        Clause::new(Vec::new(), Formula::default(), concl, provenance)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for h in &self.hyps {
            h.vars_into(&mut out);
        }
        self.concl.vars_into(&mut out);
        for v in self.formula.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> Clause {
        Clause {
            id: self.id,
            hyps: self.hyps.iter().map(|h| h.apply(s)).collect(),
            formula: self.formula.apply(s),
            concl: self.concl.apply(s),
            provenance: self.provenance.clone(),
            std: self.std,
            lemma_memo: self.lemma_memo.clone(),
        }
    }

    /// Renames every variable to a fresh one.
    pub fn rename_apart(&self) -> Clause {
        let mut s = Subst::new();
        for v in self.vars() {
            s.bind(v.clone(), Term::Var(v.renamed()));
        }
        self.apply(&s)
    }

    /// Canonical printed form with variables numbered in first occurrence
    /// order; used for dedup and memo fingerprints.
    pub fn fingerprint(&self) -> String {
        let mut s = Subst::new();
        for (i, v) in self.vars().iter().enumerate() {
            s.bind(
                v.clone(),
                Term::Var(Var {
                    name: format!("_c{i}"),
                    id: 0,
                    sort: None,
                }),
            );
        }
        let c = self.apply(&s);
        let mut hyps: Vec<String> = c.hyps.iter().map(|h| h.to_string()).collect();
        hyps.sort();
        format!("{} && {} -> {}", hyps.join(" && "), c.formula, c.concl)
    }

    /// Consistency with F_p: blocking conclusions have no hypotheses; user
    /// predicate conclusions have only user/blocking hypotheses.
    pub fn consistent_with_fp(&self, sig: &Signature) -> bool {
        if self.concl.is_blocking(sig) {
            return self.hyps.is_empty();
        }
        if self.concl.is_user_pred(sig) {
            return self
                .hyps
                .iter()
                .all(|h| h.is_user_pred(sig) || h.is_blocking(sig));
        }
        true
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.hyps.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{h}")?;
        }
        if !self.formula.is_true() {
            if !self.hyps.is_empty() {
                write!(f, " && ")?;
            }
            write!(f, "{}", self.formula)?;
        }
        if self.hyps.is_empty() && self.formula.is_true() {
            write!(f, "-> {}", self.concl)
        } else {
            write!(f, " -> {}", self.concl)
        }
    }
}

/// `f` (from the subsumer, instantiated) may stand for `g`: exact, or `f` is
/// the blocking form of `g`. A non-blocking fact never subsumes a blocking one.
fn subsumption_fact_ok(f: &Fact, g: &Fact, sig: &Signature) -> bool {
    f.same_modulo_blocking(g) && (f.is_blocking(sig) == g.is_blocking(sig) || f.is_blocking(sig))
}

/// Clause subsumption with blocking: there is a substitution sigma with
/// `concl1 * sigma == concl2`, an injective map of hypotheses of `c1` onto
/// hypotheses of `c2` compatible modulo blocking, and `phi2 |= phi1 * sigma`.
pub fn subsumes(c1: &Clause, c2: &Clause, sig: &Signature) -> bool {
    if c1.hyps.len() > c2.hyps.len() {
        return false;
    }
    let own: std::collections::BTreeSet<Var> = c1.vars().into_iter().collect();
    let bindable = |v: &Var| own.contains(v);
    let mut s = Subst::new();
    if c1.concl.blocked != c2.concl.blocked
        || !c1.concl.match_kind_in(&c2.concl, &mut s, &bindable)
    {
        return false;
    }
    let mut used = vec![false; c2.hyps.len()];
    subsume_hyps(c1, c2, 0, &mut used, s, sig, &bindable)
}

#[allow(clippy::too_many_arguments)]
fn subsume_hyps(
    c1: &Clause,
    c2: &Clause,
    i: usize,
    used: &mut Vec<bool>,
    s: Subst,
    sig: &Signature,
    bindable: &dyn Fn(&Var) -> bool,
) -> bool {
    if i == c1.hyps.len() {
        return c2.formula.implies(&c1.formula.apply(&s));
    }
    for j in 0..c2.hyps.len() {
        if used[j] {
            continue;
        }
        let mut s2 = s.clone();
        if c1.hyps[i].match_kind_in(&c2.hyps[j], &mut s2, bindable) {
            let f = c1.hyps[i].apply(&s2);
            if subsumption_fact_ok(&f, &c2.hyps[j], sig) {
                used[j] = true;
                if subsume_hyps(c1, c2, i + 1, used, s2, sig, bindable) {
                    used[j] = false;
                    return true;
                }
                used[j] = false;
            }
        }
    }
    false
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

    fn clause(hyps: Vec<Fact>, concl: Fact) -> Clause {
        Clause::new(hyps, Formula::default(), concl, Provenance::UserClause(0))
    }

    #[test]
    fn subsumption_is_reflexive() {
        let sig = Signature::new();
        let c = clause(
            vec![Fact::att(v("x")), Fact::pred("p", vec![v("y")])],
            Fact::att(Term::app("f", vec![v("x"), v("y")])),
        );
        assert!(subsumes(&c, &c, &sig));
    }

    #[test]
    fn blocking_subsumes_plain_not_conversely() {
        let sig = Signature::new();
        let h = Fact::att(v("x"));
        let hb = h.to_blocking(&sig);
        let c = Fact::att(Term::app("f", vec![v("x")]));
        let with_plain = clause(vec![h], c.clone());
        let with_blocked = clause(vec![hb], c);
        assert!(subsumes(&with_blocked, &with_plain, &sig));
        assert!(!subsumes(&with_plain, &with_blocked, &sig));
    }

    #[test]
    fn generalization_subsumes_instance() {
        let sig = Signature::new();
        let gen = clause(vec![Fact::att(v("x"))], Fact::att(Term::app("h", vec![v("x")])));
        let inst = clause(
            vec![Fact::att(Term::app("a", vec![])), Fact::att(v("z"))],
            Fact::att(Term::app("h", vec![Term::app("a", vec![])])),
        );
        assert!(subsumes(&gen, &inst, &sig));
        assert!(!subsumes(&inst, &gen, &sig));
    }
}
