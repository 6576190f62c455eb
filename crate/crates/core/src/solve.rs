//! The order-preserving second saturation that decides queries and lemmas:
//! ordered clauses, ordering functions, the Res_o / Lem_o / Ind_o rules, the
//! strictness check behind inductive applications, and the final conclusion
//! check with its derivability search.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::clause::Clause;
use crate::fact::{Fact, FactKind};
use crate::formula::{Atom, Formula};
use crate::lang::ast::{Conjunct, Statement, StatementKind};
use crate::saturate::{inductive_form, selectable, Limits, PredSet};
use crate::sig::Signature;
use crate::term::{Subst, Term, Unifier, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rel {
    Less,
    Leq,
}

impl std::fmt::Display for Rel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rel::Less => write!(f, "<"),
            Rel::Leq => write!(f, "<="),
        }
    }
}

/// Ordering function: premise index (1-based) to strictness.
pub type Delta = BTreeMap<usize, Rel>;

fn strictified(d: &Delta) -> Delta {
    d.keys().map(|k| (*k, Rel::Less)).collect()
}

/// Pointwise strongest combination (< beats <=).
fn glb(a: &Delta, b: &Delta) -> Delta {
    let mut out = a.clone();
    for (k, r) in b {
        match out.get(k) {
            Some(Rel::Less) => {}
            _ => {
                let stronger = match (out.get(k), r) {
                    (Some(Rel::Leq), Rel::Leq) => Rel::Leq,
                    _ => *r,
                };
                out.insert(*k, stronger);
            }
        }
    }
    out
}

/// `a` is at least as strong as `b` (entrywise, < above <=).
fn delta_geq(a: &Delta, b: &Delta) -> bool {
    b.iter().all(|(k, r)| match a.get(k) {
        Some(Rel::Less) => true,
        Some(Rel::Leq) => *r == Rel::Leq,
        None => false,
    })
}

#[derive(Debug, Clone)]
pub enum OProv {
    Query,
    Res {
        parent: u64,
        sat_clause: u64,
        sat_prov: String,
        hyp: String,
    },
    Lemma {
        parent: u64,
        lemma: String,
        inductive: bool,
        added: Vec<String>,
    },
}

#[derive(Debug, Clone)]
pub struct OrderedClause {
    pub id: u64,
    pub hyps: Vec<(Fact, Delta)>,
    pub formula: Formula,
    /// The conjunction fact: the instantiated query premises.
    pub concl: Vec<Fact>,
    /// First user-predicate index of the conclusion (fixed by the query).
    pub idx: usize,
    pub memo: BTreeSet<String>,
    pub prov: OProv,
}

impl OrderedClause {
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for (h, _) in &self.hyps {
            h.vars_into(&mut out);
        }
        for c in &self.concl {
            c.vars_into(&mut out);
        }
        for v in self.formula.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> OrderedClause {
        OrderedClause {
            id: self.id,
            hyps: self
                .hyps
                .iter()
                .map(|(f, d)| (f.apply(s), d.clone()))
                .collect(),
            formula: self.formula.apply(s),
            concl: self.concl.iter().map(|f| f.apply(s)).collect(),
            idx: self.idx,
            memo: self.memo.clone(),
            prov: self.prov.clone(),
        }
    }

    pub fn display(&self) -> String {
        let hyps: Vec<String> = self
            .hyps
            .iter()
            .map(|(f, d)| {
                if d.is_empty() {
                    format!("{f}")
                } else {
                    let entries: Vec<String> =
                        d.iter().map(|(k, r)| format!("{k}{r}")).collect();
                    format!("{f}^[{}]", entries.join(","))
                }
            })
            .collect();
        let concl: Vec<String> = self.concl.iter().map(|f| f.to_string()).collect();
        let phi = if self.formula.is_true() {
            String::new()
        } else {
            format!(" && {}", self.formula)
        };
        format!("{}{} -> q({})", hyps.join(" && "), phi, concl.join(" @ "))
    }

    pub fn fingerprint(&self) -> String {
        let mut s = Subst::new();
        for (i, v) in self.vars().iter().enumerate() {
            s.bind(
                v.clone(),
                Term::Var(Var {
                    name: format!("_o{i}"),
                    id: 0,
                    sort: None,
                }),
            );
        }
        let mut c = self.apply(&s);
        c.hyps.sort_by_key(|(f, _)| f.to_string());
        c.display()
    }
}

/// The verdict outcome for one statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Proved,
    DisprovedCandidate,
    Inconclusive,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Proved => write!(f, "proved"),
            Outcome::DisprovedCandidate => write!(f, "disproved-candidate"),
            Outcome::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One node of a fact derivation: the clause used (by id and provenance) and
/// the instantiation; edges carry the derived ground facts.
#[derive(Debug, Clone, Serialize)]
pub struct DerivationNode {
    pub fact: String,
    pub rule: String,
    pub children: Vec<DerivationNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub id: u64,
    pub rule: String,
    pub parent: Option<u64>,
    pub clause: String,
    pub added_hypotheses: Vec<String>,
    pub discharged: bool,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Counters {
    pub ordered_clauses: usize,
    pub resolutions: usize,
    pub lemma_applications: usize,
    pub discharged: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub statement: String,
    pub kind: StatementKind,
    pub outcome: Outcome,
    pub counters: Counters,
    pub trace: Vec<TraceRecord>,
    /// Failing terminal clauses (disproof candidates), printed.
    pub failures: Vec<String>,
    /// Witness derivations found by the conclusion checks.
    pub witnesses: Vec<DerivationNode>,
}

/// delta_res: the ordering function assigned to a hypothesis inherited from a
/// saturated clause during ordered resolution.
pub fn delta_res(f: &Fact, concl: &Fact, delta: &Delta, sig: &Signature, sp: &PredSet) -> Delta {
    let user_blocking = f.is_blocking(sig) && f.is_pred();
    let f_user = f.is_user_pred(sig);
    let c_user = concl.is_user_pred(sig) || (concl.is_pred() && concl.is_blocking(sig));
    if user_blocking || (f_user && !c_user) {
        return Delta::new();
    }
    if sp.contains(f, sig) {
        return strictified(delta);
    }
    delta.clone()
}

/// Literal implementation of the (n_a, n_b)-equal / strict definitions for an
/// explicit target assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualStrict {
    Strict,
    Equal,
    Neither,
}

pub fn check_equal_strict(
    deltas: &[Delta],
    n_a: usize,
    n_b: usize,
    targets: &[usize],
) -> EqualStrict {
    let m = deltas.len();
    let in_range = |j: usize| j >= n_a && j <= n_b;
    let equal = m == targets.len()
        && n_b + 1 >= n_a
        && m <= n_b - n_a + 1
        && targets.iter().all(|j| in_range(*j))
        && (0..m).all(|k| deltas[k].contains_key(&targets[k]))
        && (0..m).all(|k| (0..m).all(|k2| k == k2 || targets[k] != targets[k2]));
    let all_strict_entry = n_a <= n_b
        && deltas
            .iter()
            .all(|d| d.iter().any(|(i, r)| in_range(*i) && *r == Rel::Less));
    let strict = all_strict_entry
        || (equal
            && n_a <= n_b
            && (m <= n_b - n_a || (0..m).any(|k| deltas[k].get(&targets[k]) == Some(&Rel::Less))));
    if strict {
        EqualStrict::Strict
    } else if equal {
        EqualStrict::Equal
    } else {
        EqualStrict::Neither
    }
}

/// Searches a target assignment making the deltas equal (resp. strict).
pub fn exists_targets(deltas: &[Delta], n_a: usize, n_b: usize, want_strict: bool) -> bool {
    if deltas.is_empty() {
        return if want_strict {
            n_a <= n_b
        } else {
            n_a <= n_b + 1
        };
    }
    // case 1 of strict needs no targets
    if want_strict {
        let all_strict = n_a <= n_b
            && deltas
                .iter()
                .all(|d| d.iter().any(|(i, r)| *i >= n_a && *i <= n_b && *r == Rel::Less));
        if all_strict {
            return true;
        }
    }
    fn rec(
        deltas: &[Delta],
        n_a: usize,
        n_b: usize,
        k: usize,
        used: &mut Vec<usize>,
        want_strict: bool,
    ) -> bool {
        if k == deltas.len() {
            let verdict = check_equal_strict(deltas, n_a, n_b, used);
            return if want_strict {
                verdict == EqualStrict::Strict
            } else {
                verdict != EqualStrict::Neither
            };
        }
        for j in deltas[k].keys() {
            if *j >= n_a && *j <= n_b && !used.contains(j) {
                used.push(*j);
                if rec(deltas, n_a, n_b, k + 1, used, want_strict) {
                    used.pop();
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    rec(deltas, n_a, n_b, 0, &mut Vec::new(), want_strict)
}

/// The two-part strictness condition for applying an inductive lemma:
/// deltas are strict for `(n_idx, n)` and `m_idx`.
pub fn strict_for(deltas: &[Delta], n_idx: usize, n: usize, m_idx: usize) -> bool {
    if m_idx == 0 || m_idx > deltas.len() + 1 || n_idx > n + 1 {
        return false;
    }
    let group1 = &deltas[..m_idx - 1];
    let group2 = &deltas[m_idx - 1..];
    // domains must stay within the groups' ranges for the definition to apply
    let dom_ok = |ds: &[Delta], lo: usize, hi: usize| {
        ds.iter().all(|d| d.keys().all(|k| *k >= lo && *k <= hi))
    };
    if !dom_ok(group1, 1, n_idx.saturating_sub(1)) || !dom_ok(group2, n_idx, n) {
        return false;
    }
    if n_idx >= 2 && exists_targets(group1, 1, n_idx - 1, true) {
        return true;
    }
    exists_targets(group1, 1, n_idx - 1, false) && exists_targets(group2, n_idx, n, true)
}

/// Builds the initial ordered clause of a query: premise i carries `{i: <=}`.
pub fn build_query_clause(stmt: &Statement) -> OrderedClause {
    let hyps = stmt
        .premises
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut d = Delta::new();
            d.insert(i + 1, Rel::Leq);
            (f.clone(), d)
        })
        .collect();
    OrderedClause {
        id: 0,
        hyps,
        formula: stmt.premise_formula.clone(),
        concl: stmt.premises.clone(),
        idx: stmt.idx,
        memo: BTreeSet::new(),
        prov: OProv::Query,
    }
}

pub struct Solver<'a> {
    pub sig: &'a Signature,
    pub sp: PredSet,
    pub c_sat: &'a [Clause],
    pub lemmas: Vec<Statement>,
    pub inductive: Vec<Statement>,
    pub limits: Limits,
    pub lemma_mode: bool,
    pub check_depth: usize,
    next_id: u64,
    counters: Counters,
    trace: Vec<TraceRecord>,
    recursive: BTreeSet<String>,
}

impl<'a> Solver<'a> {
    pub fn new(sig: &'a Signature, c_sat: &'a [Clause]) -> Solver<'a> {
        Solver {
            sig,
            sp: PredSet::default(),
            c_sat,
            lemmas: Vec::new(),
            inductive: Vec::new(),
            limits: Limits::default(),
            lemma_mode: false,
            check_depth: 12,
            next_id: 1,
            counters: Counters::default(),
            trace: Vec::new(),
            recursive: crate::saturate::recursive_channels(&[]),
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn record(&mut self, c: &OrderedClause, discharged: bool, added: Vec<String>) {
        let (rule, parent) = match &c.prov {
            OProv::Query => ("query".to_string(), None),
            OProv::Res {
                parent, sat_prov, hyp, ..
            } => (format!("resolve[{sat_prov}] on {hyp}"), Some(*parent)),
            OProv::Lemma {
                parent,
                lemma,
                inductive,
                ..
            } => (
                format!("{}[{lemma}]", if *inductive { "induction" } else { "lemma" }),
                Some(*parent),
            ),
        };
        self.trace.push(TraceRecord {
            id: c.id,
            rule,
            parent,
            clause: c.display(),
            added_hypotheses: added,
            discharged,
        });
    }

    /// Ordered selection: same hard constraints, deepest selectable fact.
    fn select(&self, c: &OrderedClause) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, (h, _)) in c.hyps.iter().enumerate() {
            if selectable(h, self.sig, &self.recursive) {
                let d = h.depth();
                if best.map(|(bd, _)| d >= bd).unwrap_or(true) {
                    best = Some((d, i));
                }
            }
        }
        best.map(|(_, i)| i)
    }

    /// Res_o: resolve the selected hypothesis of `r` against a saturated
    /// clause, assigning delta_res to the inherited hypotheses.
    pub fn resolve_ordered(
        &mut self,
        sat: &Clause,
        r: &OrderedClause,
        fi: usize,
    ) -> Option<OrderedClause> {
        let s_cl = sat.rename_apart();
        let (f, delta) = &r.hyps[fi];
        if s_cl.concl.is_blocking(self.sig) != f.is_blocking(self.sig) {
            return None;
        }
        let sort_of = |t: &Term| self.sig.sort_of(t);
        let mut u = Unifier::with_sorts(&sort_of);
        s_cl.concl.unify_kind(f, &mut u).ok()?;
        let s = u.subst;
        let mut hyps: Vec<(Fact, Delta)> = Vec::new();
        for h in &s_cl.hyps {
            let d = delta_res(h, &s_cl.concl, delta, self.sig, &self.sp);
            hyps.push((h.apply(&s), d));
        }
        for (i, (h, d)) in r.hyps.iter().enumerate() {
            if i != fi {
                hyps.push((h.apply(&s), d.clone()));
            }
        }
        let formula = s_cl.formula.and(&r.formula).apply(&s);
        Some(OrderedClause {
            id: 0,
            hyps,
            formula,
            concl: r.concl.iter().map(|c| c.apply(&s)).collect(),
            idx: r.idx,
            memo: r.memo.clone(),
            prov: OProv::Res {
                parent: r.id,
                sat_clause: sat.id,
                sat_prov: sat.provenance.to_string(),
                hyp: f.to_string(),
            },
        })
    }

    /// Lem_o / Ind_o. `proved` lemmas may also match conclusion conjuncts.
    pub fn apply_lemma_ordered(
        &mut self,
        r: &OrderedClause,
        lemma: &Statement,
        proved: bool,
    ) -> Option<Vec<OrderedClause>> {
        for f in &lemma.premises {
            if !self.sp.contains(f, self.sig) {
                return None;
            }
        }
        let lemma_vars: BTreeSet<Var> = lemma.premise_vars().into_iter().collect();
        let bindable = |v: &Var| lemma_vars.contains(v);
        let mut matches: Vec<(Subst, Vec<Delta>)> = Vec::new();
        self.match_ordered(r, lemma, proved, 0, Subst::new(), Vec::new(), &bindable, &mut matches);
        'candidates: for (sigma, deltas) in matches {
            let pf = lemma.premise_formula.apply(&sigma);
            if !pf.is_true() && !r.formula.implies(&pf) {
                continue;
            }
            if !proved {
                // inductive: the matched ordering functions must be strict for
                // (idx(R), n) and idx(lemma)
                if !strict_for(&deltas, r.idx, r.concl.len(), lemma.idx) {
                    continue 'candidates;
                }
            }
            let key = {
                let inst: Vec<String> = lemma
                    .premises
                    .iter()
                    .map(|f| f.apply(&sigma).to_string())
                    .collect();
                format!("{}|{}", lemma.name, inst.join("&"))
            };
            if r.memo.contains(&key) {
                continue;
            }
            // delta for added standard facts: strongest combination of the
            // deltas matched by standard-predicate premises
            let mut dadd = Delta::new();
            for (i, f) in lemma.premises.iter().enumerate() {
                if !f.is_pred() || !(self.sig.is_user_pred(f.label()) || self.sig.is_abstract_pred(f.label())) {
                    dadd = glb(&dadd, &deltas[i]);
                }
            }
            let mut out = Vec::new();
            for disjunct in &lemma.conclusion {
                out.push(self.ordered_product(r, lemma, disjunct, &sigma, &dadd, &key, !proved));
            }
            self.counters.lemma_applications += 1;
            return Some(out);
        }
        None
    }

    fn ordered_product(
        &mut self,
        r: &OrderedClause,
        lemma: &Statement,
        disjunct: &Conjunct,
        sigma: &Subst,
        dadd: &Delta,
        key: &str,
        inductive: bool,
    ) -> OrderedClause {
        let mut fresh = Subst::new();
        let premise_vars = lemma.premise_vars();
        for f in &disjunct.facts {
            for v in f.vars() {
                if !premise_vars.contains(&v) && fresh.get(&v).is_none() {
                    fresh.bind(v.clone(), Term::Var(v.renamed()));
                }
            }
        }
        for v in disjunct.formula.vars() {
            if !premise_vars.contains(&v) && fresh.get(&v).is_none() {
                fresh.bind(v.clone(), Term::Var(v.renamed()));
            }
        }
        let mut hyps = r.hyps.clone();
        let mut added = Vec::new();
        for f in &disjunct.facts {
            let inst = f.apply(sigma).apply(&fresh).to_blocking(self.sig);
            let user = inst.is_user_pred(self.sig)
                || (inst.is_pred() && self.sig.is_abstract_pred(inst.label()));
            let d = if user { Delta::new() } else { dadd.clone() };
            if !hyps.iter().any(|(g, gd)| *g == inst && delta_geq(gd, &d)) {
                added.push(inst.to_string());
                hyps.push((inst, d));
            }
        }
        let formula = r
            .formula
            .and(&disjunct.formula.apply(sigma).apply(&fresh));
        let mut memo = r.memo.clone();
        memo.insert(key.to_string());
        OrderedClause {
            id: 0,
            hyps,
            formula,
            concl: r.concl.clone(),
            idx: r.idx,
            memo,
            prov: OProv::Lemma {
                parent: r.id,
                lemma: lemma.name.clone(),
                inductive,
                added,
            },
        }
    }

    /// Matching for ordered lemma application: each premise hits a hypothesis
    /// (blocking-insensitively, inheriting its delta) or, for proved lemmas,
    /// a conclusion conjunct j with delta `{j: <=}`.
    #[allow(clippy::too_many_arguments)]
    fn match_ordered(
        &self,
        r: &OrderedClause,
        lemma: &Statement,
        proved: bool,
        i: usize,
        sigma: Subst,
        deltas: Vec<Delta>,
        bindable: &dyn Fn(&Var) -> bool,
        out: &mut Vec<(Subst, Vec<Delta>)>,
    ) {
        if out.len() >= 16 {
            return;
        }
        if i == lemma.premises.len() {
            out.push((sigma, deltas));
            return;
        }
        let f = &lemma.premises[i];
        for (g, d) in &r.hyps {
            if !proved && g.is_blocking(self.sig) && f.is_user_pred(self.sig) {
                continue;
            }
            let mut s2 = sigma.clone();
            if f.match_kind_in(g, &mut s2, bindable) {
                let mut d2 = deltas.clone();
                d2.push(d.clone());
                self.match_ordered(r, lemma, proved, i + 1, s2, d2, bindable, out);
            }
        }
        if proved {
            for (j, cf) in r.concl.iter().enumerate() {
                let mut s2 = sigma.clone();
                if f.match_kind_in(cf, &mut s2, bindable) {
                    let mut d = Delta::new();
                    d.insert(j + 1, Rel::Leq);
                    let mut d2 = deltas.clone();
                    d2.push(d);
                    self.match_ordered(r, lemma, proved, i + 1, s2, d2, bindable, out);
                }
            }
        }
    }

    /// Ordered-clause subsumption, delta-aware: the subsumer's hypotheses map
    /// injectively with at-least-as-strong ordering functions.
    fn osubsumes(&self, a: &OrderedClause, b: &OrderedClause) -> bool {
        if a.hyps.len() > b.hyps.len() || a.concl.len() != b.concl.len() {
            return false;
        }
        let own: BTreeSet<Var> = a.vars().into_iter().collect();
        let bindable = move |v: &Var| own.contains(v);
        let mut s = Subst::new();
        for (ca, cb) in a.concl.iter().zip(&b.concl) {
            if ca.blocked != cb.blocked || !ca.match_kind_in(cb, &mut s, &bindable) {
                return false;
            }
        }
        let mut used = vec![false; b.hyps.len()];
        self.osub_hyps(a, b, 0, &mut used, s, &bindable)
    }

    #[allow(clippy::too_many_arguments)]
    fn osub_hyps(
        &self,
        a: &OrderedClause,
        b: &OrderedClause,
        i: usize,
        used: &mut Vec<bool>,
        s: Subst,
        bindable: &dyn Fn(&Var) -> bool,
    ) -> bool {
        if i == a.hyps.len() {
            return b.formula.implies(&a.formula.apply(&s));
        }
        let (fa, da) = &a.hyps[i];
        for j in 0..b.hyps.len() {
            if used[j] {
                continue;
            }
            let (fb, db) = &b.hyps[j];
            let mut s2 = s.clone();
            if fa.match_kind_in(fb, &mut s2, bindable) {
                let inst = fa.apply(&s2);
                let blocking_ok = inst.is_blocking(self.sig) == fb.is_blocking(self.sig)
                    || inst.is_blocking(self.sig);
                if blocking_ok && delta_geq(da, db) {
                    used[j] = true;
                    if self.osub_hyps(a, b, i + 1, used, s2, bindable) {
                        used[j] = false;
                        return true;
                    }
                    used[j] = false;
                }
            }
        }
        false
    }

    /// Simplifies an ordered clause: formula normalization plus duplicate
    /// merging (taking the strongest delta on merge). Returns None when the
    /// formula is unsatisfiable.
    fn simplify(&self, c: OrderedClause) -> Option<OrderedClause> {
        let mut c = c;
        let (sigma, phi) = c.formula.normalize()?;
        if !sigma.is_empty() {
            c = c.apply(&sigma);
        }
        c.formula = phi;
        let mut merged: Vec<(Fact, Delta)> = Vec::new();
        for (f, d) in c.hyps {
            match merged.iter_mut().find(|(g, _)| *g == f) {
                Some((_, gd)) => *gd = glb(gd, &d),
                None => merged.push((f, d)),
            }
        }
        c.hyps = merged;
        Some(c)
    }

    /// Verifies one statement against the saturated set.
    pub fn verify(&mut self, stmt: &Statement) -> Verdict {
        let mut inductive = self.inductive.clone();
        if stmt.induction {
            inductive.push(inductive_form(stmt, self.sig));
        }
        let rq = build_query_clause(stmt);
        let mut queue: VecDeque<OrderedClause> = VecDeque::new();
        let mut active: Vec<OrderedClause> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut failures: Vec<String> = Vec::new();
        let mut witnesses: Vec<DerivationNode> = Vec::new();
        let mut outcome = Outcome::Proved;
        queue.push_back(rq);

        'main: while let Some(c) = queue.pop_front() {
            if self.counters.ordered_clauses > self.limits.max_clauses
                || self.counters.resolutions > self.limits.max_steps
            {
                outcome = Outcome::Inconclusive;
                break 'main;
            }
            let mut c = match self.simplify(c) {
                Some(c) => c,
                None => continue,
            };
            if !seen.insert(c.fingerprint()) {
                continue;
            }
            c.id = self.fresh_id();
            self.counters.ordered_clauses += 1;

            // eager discharge: a clause whose conclusion check passes is done
            if let Some(w) = self.check_conclusion(&c, stmt) {
                self.counters.discharged += 1;
                self.record(&c, true, Vec::new());
                witnesses.push(w);
                continue;
            }

            // lemma application replaces the clause
            let mut applied = false;
            for lemma in self.lemmas.clone() {
                if let Some(products) = self.apply_lemma_ordered(&c, &lemma, true) {
                    self.record(&c, false, Vec::new());
                    queue.extend(products);
                    applied = true;
                    break;
                }
            }
            if !applied {
                for lemma in inductive.clone() {
                    if let Some(products) = self.apply_lemma_ordered(&c, &lemma, false) {
                        self.record(&c, false, Vec::new());
                        queue.extend(products);
                        applied = true;
                        break;
                    }
                }
            }
            if applied {
                continue;
            }

            if active.iter().any(|a| self.osubsumes(a, &c)) {
                continue;
            }
            active.retain(|a| !self.osubsumes(&c, a));

            match self.select(&c) {
                Some(fi) => {
                    // resolve against every saturated clause
                    let mut products = Vec::new();
                    for sat in self.c_sat {
                        if let Some(r) = self.resolve_ordered(sat, &c, fi) {
                            products.push(r);
                        }
                    }
                    self.counters.resolutions += products.len();
                    self.record(&c, false, Vec::new());
                    queue.extend(products);
                    active.push(c);
                }
                None => {
                    // terminal clause failing the check: disproof candidate
                    self.record(&c, false, Vec::new());
                    failures.push(c.display());
                    outcome = Outcome::DisprovedCandidate;
                    active.push(c);
                }
            }
        }

        Verdict {
            statement: stmt.name.clone(),
            kind: stmt.kind,
            outcome,
            counters: std::mem::take(&mut self.counters),
            trace: std::mem::take(&mut self.trace),
            failures,
            witnesses,
        }
    }

    /// The conclusion check: does some disjunct of the statement's conclusion
    /// hold on this clause? Frozen variables are those of the recorded
    /// premise instance and formula; hypothesis-only variables may be
    /// instantiated by the search.
    pub fn check_conclusion(&self, r: &OrderedClause, stmt: &Statement) -> Option<DerivationNode> {
        // map statement premise variables onto the premise instance
        let mut theta = Subst::new();
        for (p, inst) in stmt.premises.iter().zip(&r.concl) {
            if !p.match_kind(inst, &mut theta) {
                return None;
            }
        }
        let frozen: BTreeSet<Var> = {
            let mut out = BTreeSet::new();
            for cfact in &r.concl {
                for v in cfact.vars() {
                    out.insert(v);
                }
            }
            for v in r.formula.vars() {
                out.insert(v);
            }
            out
        };
        for disjunct in &stmt.conclusion {
            if let Some(w) = self.check_disjunct(r, disjunct, &theta, &frozen) {
                return Some(w);
            }
        }
        None
    }

    fn check_disjunct(
        &self,
        r: &OrderedClause,
        disjunct: &Conjunct,
        theta: &Subst,
        frozen: &BTreeSet<Var>,
    ) -> Option<DerivationNode> {
        let goals: Vec<Fact> = disjunct.facts.iter().map(|f| f.apply(theta)).collect();
        let atoms: Vec<Atom> = disjunct
            .formula
            .atoms
            .iter()
            .map(|a| a.apply(theta))
            .collect();
        let mut search = Search {
            solver: self,
            r,
            frozen,
            depth: self.check_depth,
        };
        let mut sigma = Subst::new();
        let mut nodes = Vec::new();
        if search.solve_goals(&goals, &mut sigma, &mut nodes) {
            // equalities and the rest of the constraint atoms
            let is_frozen = |v: &Var| frozen.contains(v);
            let sort_of = |t: &Term| self.sig.sort_of(t);
            let mut u = Unifier::with_frozen(&is_frozen);
            u.sort_of = Some(&sort_of);
            u.subst = sigma.clone();
            let mut ok = true;
            let mut residual = Formula::default();
            for a in &atoms {
                match a.apply(&sigma) {
                    Atom::Equal(l, rr) => {
                        if u.unify(&l, &rr).is_err() {
                            ok = false;
                            break;
                        }
                    }
                    other => residual.push(other),
                }
            }
            if ok {
                let residual = residual.apply(&u.subst);
                if r.formula.implies(&residual) {
                    return Some(DerivationNode {
                        fact: "conclusion".into(),
                        rule: "disjunct".into(),
                        children: nodes,
                    });
                }
            }
        }
        None
    }
}

/// Backward derivability search used by the conclusion check.
struct Search<'s, 'a> {
    solver: &'s Solver<'a>,
    r: &'s OrderedClause,
    frozen: &'s BTreeSet<Var>,
    depth: usize,
}

impl<'s, 'a> Search<'s, 'a> {
    fn solve_goals(
        &mut self,
        goals: &[Fact],
        sigma: &mut Subst,
        nodes: &mut Vec<DerivationNode>,
    ) -> bool {
        match goals.split_first() {
            None => true,
            Some((g, rest)) => {
                let g = g.apply(sigma);
                let saved = sigma.clone();
                let saved_nodes = nodes.len();
                let candidates = self.prove_fact(&g, sigma, self.depth);
                for (s2, node) in candidates {
                    *sigma = s2;
                    nodes.push(node);
                    let rest2: Vec<Fact> = rest.iter().map(|f| f.apply(sigma)).collect();
                    if self.solve_goals(&rest2, sigma, nodes) {
                        return true;
                    }
                    nodes.truncate(saved_nodes);
                    *sigma = saved.clone();
                }
                false
            }
        }
    }

    /// All ways to establish `goal`: hypothesis facts (blocking-insensitive)
    /// and, for derivable kinds, backward resolution over the saturated set.
    fn prove_fact(&mut self, goal: &Fact, sigma: &Subst, depth: usize) -> Vec<(Subst, DerivationNode)> {
        let mut out = Vec::new();
        let goal = goal.apply(sigma);
        let frozen = self.frozen;
        // 1. the clause hypotheses, used as blocked axioms
        let is_frozen = |v: &Var| frozen.contains(v);
        let sort_of = |t: &Term| self.solver.sig.sort_of(t);
        for (h, _) in &self.r.hyps {
            let mut u = Unifier::with_frozen(&is_frozen);
            u.sort_of = Some(&sort_of);
            u.subst = sigma.clone();
            if goal.unify_kind(h, &mut u).is_ok() {
                out.push((
                    u.subst,
                    DerivationNode {
                        fact: h.to_string(),
                        rule: "hypothesis".into(),
                        children: vec![],
                    },
                ));
            }
        }
        // events and blocking facts must occur in the hypotheses; attacker
        // facts too when proving a lemma
        let must_occur = match &goal.kind {
            FactKind::Event(_, _) => true,
            FactKind::Att(_) => self.solver.lemma_mode,
            _ => goal.is_blocking(self.solver.sig) && goal.blocked,
        };
        if must_occur || depth == 0 {
            return out;
        }
        // 2. backward resolution over the saturated set; blocking flags are
        // identified (a blocked axiom witnesses the plain fact)
        for c in self.solver.c_sat {
            let cc = c.rename_apart();
            let mut u = Unifier::with_frozen(&is_frozen);
            u.sort_of = Some(&sort_of);
            u.subst = sigma.clone();
            if goal.unify_kind(&cc.concl, &mut u).is_err() {
                continue;
            }
            let s2 = u.subst;
            // the clause's own constraints must stay satisfiable
            let phi = cc.formula.apply(&s2);
            if phi.normalize().is_none() {
                continue;
            }
            let subgoals: Vec<Fact> = cc.hyps.iter().map(|h| h.apply(&s2)).collect();
            let mut inner = Search {
                solver: self.solver,
                r: self.r,
                frozen: self.frozen,
                depth: depth - 1,
            };
            let mut s3 = s2.clone();
            let mut children = Vec::new();
            if inner.solve_goals(&subgoals, &mut s3, &mut children) {
                out.push((
                    s3,
                    DerivationNode {
                        fact: goal.apply(&s2).to_string(),
                        rule: format!("clause {}", cc.provenance),
                        children,
                    },
                ));
            }
        }
        out
    }
}
