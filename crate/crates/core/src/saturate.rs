//! The first saturation: resolution with selection, the blocking-aware
//! simplification rules, lemma and inductive-lemma application, and
//! subsumption filtering.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::clause::{subsumes, Clause, Provenance};
use crate::fact::{Fact, FactKind};
use crate::lang::ast::{Conjunct, Statement};
use crate::sig::Signature;
use crate::term::{Subst, Term, Unifier, Var};

/// Resource caps; exceeding them aborts with an inconclusive outcome.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_clauses: usize,
    pub max_steps: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_clauses: 200_000,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("clause limit exceeded")]
    ClauseLimit,
    #[error("resolution step limit exceeded")]
    StepLimit,
}

/// Which copy the redundant-hypothesis rule keeps when a fact and its
/// blocking counterpart both occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedundancyBias {
    /// Keep the blocking copy (termination-biased).
    #[default]
    KeepBlocking,
    /// Keep the plain copy (precision-biased).
    KeepPlain,
}

/// The predicate set S_p: event, every blocking predicate, plus the
/// predicates collected from lemma premises and query conclusions.
#[derive(Debug, Clone, Default)]
pub struct PredSet {
    pub att: bool,
    pub mess: bool,
    pub user: BTreeSet<String>,
}

impl PredSet {
    pub fn contains(&self, f: &Fact, sig: &Signature) -> bool {
        if f.is_blocking(sig) {
            return true;
        }
        match &f.kind {
            FactKind::Event(_, _) => true,
            FactKind::Att(_) => self.att,
            FactKind::Mess(_, _) => self.mess,
            FactKind::Pred(p, _) => self.user.contains(p),
        }
    }

    fn add_fact(&mut self, f: &Fact) {
        match &f.kind {
            FactKind::Att(_) => self.att = true,
            FactKind::Mess(_, _) => self.mess = true,
            FactKind::Pred(p, _) => {
                self.user.insert(p.clone());
            }
            FactKind::Event(_, _) => {}
        }
    }
}

/// Builds S_p for a verification task: premises of every active lemma and
/// the conclusion facts of the statement under verification.
pub fn build_sp(lemmas: &[Statement], inductive: &[Statement], query: Option<&Statement>) -> PredSet {
    let mut sp = PredSet::default();
    for st in lemmas.iter().chain(inductive.iter()) {
        for f in &st.premises {
            sp.add_fact(f);
        }
    }
    if let Some(q) = query {
        for c in &q.conclusion {
            for f in &c.facts {
                sp.add_fact(f);
            }
        }
        if q.induction {
            for f in &q.premises {
                sp.add_fact(f);
            }
        }
    }
    sp
}

/// Channels written and read by the same clause family; message facts on them
/// are never selected (the memory-cell loop guard).
pub fn recursive_channels(clauses: &[Clause]) -> BTreeSet<String> {
    let chan_of = |f: &Fact| -> Option<String> {
        if let FactKind::Mess(Term::Name(n, _), _) = &f.kind {
            Some(n.clone())
        } else {
            None
        }
    };
    let mut out = BTreeSet::new();
    for c in clauses {
        if let Some(n) = chan_of(&c.concl) {
            if c.hyps.iter().any(|h| chan_of(h).as_deref() == Some(&n)) {
                out.insert(n);
            }
        }
    }
    out
}

/// Whether a hypothesis may be selected: never blocking facts, never attacker
/// facts on a bare variable, never messages on recursive private channels.
pub fn selectable(f: &Fact, sig: &Signature, recursive: &BTreeSet<String>) -> bool {
    if f.is_blocking(sig) {
        return false;
    }
    match &f.kind {
        FactKind::Att(Term::Var(_)) => false,
        FactKind::Mess(Term::Name(n, _), _) if recursive.contains(n) => false,
        _ => true,
    }
}

/// The selection function: empty on clauses concluding user or blocking
/// predicates, otherwise the single deepest selectable hypothesis (ties go to
/// the rightmost).
pub fn select(c: &Clause, sig: &Signature, recursive: &BTreeSet<String>) -> Option<usize> {
    if c.concl.is_blocking(sig) || c.concl.is_user_pred(sig) {
        return None;
    }
    let mut best: Option<(usize, usize)> = None;
    for (i, h) in c.hyps.iter().enumerate() {
        if selectable(h, sig, recursive) {
            let d = h.depth();
            if best.map(|(bd, _)| d >= bd).unwrap_or(true) {
                best = Some((d, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

pub struct Saturator<'a> {
    pub sig: &'a Signature,
    pub sp: PredSet,
    pub lemmas: Vec<Statement>,
    pub inductive: Vec<Statement>,
    pub limits: Limits,
    pub bias: RedundancyBias,
    pub recursive: BTreeSet<String>,
    next_id: u64,
    pub steps: usize,
    pub created: usize,
}

impl<'a> Saturator<'a> {
    pub fn new(sig: &'a Signature) -> Saturator<'a> {
        Saturator {
            sig,
            sp: PredSet::default(),
            lemmas: Vec::new(),
            inductive: Vec::new(),
            limits: Limits::default(),
            bias: RedundancyBias::default(),
            recursive: BTreeSet::new(),
            next_id: 1,
            steps: 0,
            created: 0,
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Runs the saturation to fixpoint and returns the saturated subset
    /// `{ R | sel(R) = empty }`.
    pub fn saturate(&mut self, initial: Vec<Clause>) -> Result<Vec<Clause>, SatError> {
        self.recursive = recursive_channels(&initial);
        let mut active: Vec<Clause> = Vec::new();
        let mut sels: Vec<Option<usize>> = Vec::new();
        let mut queue: VecDeque<Clause> = VecDeque::new();
        let mut seen: HashSet<String> = HashSet::new();

        for c in initial {
            for c2 in self.pipeline(c) {
                if seen.insert(c2.fingerprint()) {
                    queue.push_back(c2);
                }
            }
        }

        let log = std::env::var("HORNSAT_LOG").map(|v| v != "0").unwrap_or(false);
        while let Some(mut c) = queue.pop_front() {
            if active.len() + queue.len() > self.limits.max_clauses {
                if log {
                    eprintln!(
                        "[saturate] clause limit: active={} queue={}",
                        active.len(),
                        queue.len()
                    );
                    for a in active.iter().rev().take(12) {
                        eprintln!("  last: [{}] {}", a.provenance, a);
                    }
                }
                return Err(SatError::ClauseLimit);
            }
            if log && active.len() % 200 == 0 && !active.is_empty() {
                eprintln!("[saturate] active={} queue={} steps={}", active.len(), queue.len(), self.steps);
            }
            if active
                .iter()
                .any(|a| subsumes(a, &c, self.sig))
            {
                continue;
            }
            // back-subsumption
            let mut i = 0;
            while i < active.len() {
                if subsumes(&c, &active[i], self.sig) {
                    active.swap_remove(i);
                    sels.swap_remove(i);
                } else {
                    i += 1;
                }
            }
            c.id = self.fresh_id();
            let sel_c = select(&c, self.sig, &self.recursive);
            if log {
                eprintln!(
                    "[insert #{} sel={:?} prov={}] {}",
                    c.id,
                    sel_c.map(|i| c.hyps[i].to_string()),
                    c.provenance,
                    c
                );
            }
            // resolutions against the active set
            let mut products: Vec<Clause> = Vec::new();
            match sel_c {
                None => {
                    for (a, s) in active.iter().zip(&sels) {
                        if let Some(fi) = s {
                            if let Some(r) = self.resolve(&c, a, *fi) {
                                products.push(r);
                            }
                        }
                    }
                }
                Some(fi) => {
                    for (a, s) in active.iter().zip(&sels) {
                        if s.is_none() {
                            if let Some(r) = self.resolve(a, &c, fi) {
                                products.push(r);
                            }
                        }
                    }
                }
            }
            active.push(c);
            sels.push(sel_c);
            for p in products {
                self.steps += 1;
                if self.steps > self.limits.max_steps {
                    return Err(SatError::StepLimit);
                }
                for p2 in self.pipeline(p) {
                    if seen.insert(p2.fingerprint()) {
                        queue.push_back(p2);
                    }
                }
            }
        }

        Ok(active
            .into_iter()
            .zip(sels)
            .filter(|(_, s)| s.is_none())
            .map(|(c, _)| c)
            .collect())
    }

    /// Binary resolution: the conclusion of `left` (with empty selection)
    /// against the selected fact `fi` of `right`.
    pub fn resolve(&mut self, left: &Clause, right: &Clause, fi: usize) -> Option<Clause> {
        let l = left.rename_apart();
        let f = &right.hyps[fi];
        if l.concl.is_blocking(self.sig) != f.is_blocking(self.sig) {
            return None;
        }
        let sort_of = |t: &Term| self.sig.sort_of(t);
        let mut u = Unifier::with_sorts(&sort_of);
        l.concl.unify_kind(f, &mut u).ok()?;
        let s = u.subst;
        let mut hyps: Vec<Fact> = l.hyps.iter().map(|h| h.apply(&s)).collect();
        for (i, h) in right.hyps.iter().enumerate() {
            if i != fi {
                hyps.push(h.apply(&s));
            }
        }
        let formula = l.formula.and(&right.formula).apply(&s);
        let mut out = Clause::new(
            hyps,
            formula,
            right.concl.apply(&s),
            Provenance::Resolution {
                left: left.id,
                right: right.id,
            },
        );
        out.lemma_memo = right
            .lemma_memo
            .union(&left.lemma_memo)
            .cloned()
            .collect();
        Some(out)
    }

    /// Simplification plus lemma application, recursively to fixpoint.
    /// Returns zero or more replacement clauses. C_std clauses pass through
    /// untouched: they are canonical and lemmas never apply to them.
    pub fn pipeline(&mut self, c: Clause) -> Vec<Clause> {
        self.created += 1;
        if c.std {
            return vec![c];
        }
        let mut out = Vec::new();
        let mut work = vec![c];
        let mut guard = 0usize;
        while let Some(c) = work.pop() {
            guard += 1;
            if guard > 10_000 {
                // lemma application is memoized, so this is unreachable in
                // practice; bail out rather than loop
                out.extend(work);
                break;
            }
            let mut split = false;
            for c in self.decompose_data_concl(c) {
                let c = match self.simplify(c) {
                    Some(c) => c,
                    None => continue,
                };
                match self.try_lemmas(&c) {
                    Some(products) => {
                        work.extend(products);
                        split = true;
                    }
                    None => out.push(c),
                }
            }
            let _ = split;
        }
        out
    }

    /// Data-constructor decomposition of the conclusion: `H -> att(f(M..))`
    /// with f a data constructor becomes one clause per component (the build
    /// clause in C_std recovers the composite).
    fn decompose_data_concl(&self, c: Clause) -> Vec<Clause> {
        if let FactKind::Att(Term::App(f, args)) = &c.concl.kind {
            if !c.concl.blocked && self.sig.func_kind(f.as_str()) == Some(crate::term::FuncKind::Data) {
                let mut out = Vec::new();
                for a in args {
                    let mut c2 = c.clone();
                    c2.concl = Fact::att(a.clone());
                    c2.provenance = Provenance::Simplified { parent: c.id };
                    out.extend(self.decompose_data_concl(c2));
                }
                return out;
            }
        }
        vec![c]
    }

    /// Data-constructor decomposition of hypotheses: att(f(M..)) with f data
    /// is replaced by the component attacker facts.
    fn decompose_data_hyps(&self, c: &mut Clause) {
        let mut out: Vec<Fact> = Vec::new();
        let mut work: Vec<Fact> = c.hyps.drain(..).collect();
        while let Some(h) = work.pop() {
            match &h.kind {
                FactKind::Att(Term::App(f, args))
                    if !h.blocked
                        && self.sig.func_kind(f.as_str()) == Some(crate::term::FuncKind::Data) =>
                {
                    for a in args {
                        work.push(Fact::att(a.clone()));
                    }
                }
                _ => {
                    if !out.contains(&h) {
                        out.push(h);
                    }
                }
            }
        }
        out.reverse();
        c.hyps = out;
    }

    /// Structural simplification to fixpoint: formula normalization,
    /// duplicate merging, the classic and blocking tautology rules, the
    /// blocked-attacker-variable rule, and redundant hypotheses.
    pub fn simplify(&self, c: Clause) -> Option<Clause> {
        let mut c = c;
        loop {
            // formula normalization; solved equalities instantiate the clause
            let (sigma, phi) = c.formula.normalize()?;
            if !sigma.is_empty() {
                c = c.apply(&sigma);
            }
            c.formula = phi;
            self.decompose_data_hyps(&mut c);

            // duplicate hypotheses
            let mut dedup: Vec<Fact> = Vec::new();
            for h in &c.hyps {
                if !dedup.contains(h) {
                    dedup.push(h.clone());
                }
            }
            c.hyps = dedup;

            // tautology: F' && H -> F with F = F', or the blocking
            // counterpart when the conclusion is not a user-defined predicate
            for h in &c.hyps {
                if *h == c.concl
                    || (!c.concl.is_user_pred(self.sig) && h.same_modulo_blocking(&c.concl))
                {
                    return None;
                }
            }

            // blocked attacker variable: drop att(x)/b-att(x) hypotheses whose
            // variable occurs nowhere else
            let mut changed = false;
            let mut kept: Vec<Fact> = Vec::new();
            for (i, h) in c.hyps.iter().enumerate() {
                let lone_att_var = match &h.kind {
                    FactKind::Att(Term::Var(v)) => {
                        let mut elsewhere: Vec<Var> = Vec::new();
                        for (j, g) in c.hyps.iter().enumerate() {
                            if j != i {
                                g.vars_into(&mut elsewhere);
                            }
                        }
                        c.concl.vars_into(&mut elsewhere);
                        for fv in c.formula.vars() {
                            if !elsewhere.contains(&fv) {
                                elsewhere.push(fv);
                            }
                        }
                        !elsewhere.contains(v)
                    }
                    _ => false,
                };
                if lone_att_var {
                    changed = true;
                } else {
                    kept.push(h.clone());
                }
            }
            c.hyps = kept;

            if self.redundant_hyps(&mut c) {
                changed = true;
            }
            if !changed {
                return Some(c);
            }
        }
    }

    /// One pass of the redundant-hypotheses rule, restricted to single-fact
    /// redundancy: drops a hypothesis F when some sigma over F's private
    /// variables maps its blocking form into the rest, with phi |= phi sigma.
    fn redundant_hyps(&self, c: &mut Clause) -> bool {
        let order: Vec<usize> = {
            let mut plain = Vec::new();
            let mut blocked = Vec::new();
            for (i, h) in c.hyps.iter().enumerate() {
                if h.is_blocking(self.sig) {
                    blocked.push(i);
                } else {
                    plain.push(i);
                }
            }
            match self.bias {
                RedundancyBias::KeepBlocking => plain.into_iter().chain(blocked).collect(),
                RedundancyBias::KeepPlain => blocked.into_iter().chain(plain).collect(),
            }
        };
        for &i in &order {
            let f = &c.hyps[i];
            // variables private to this hypothesis
            let mut rest_vars: Vec<Var> = Vec::new();
            for (j, g) in c.hyps.iter().enumerate() {
                if j != i {
                    g.vars_into(&mut rest_vars);
                }
            }
            c.concl.vars_into(&mut rest_vars);
            let f_private = |v: &Var| !rest_vars.contains(v);
            for (j, g) in c.hyps.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut s = Subst::new();
                if !f.match_kind_in(g, &mut s, &f_private) {
                    continue;
                }
                if s.domain().any(|v| rest_vars.contains(v)) {
                    continue;
                }
                if !c.formula.implies(&c.formula.apply(&s)) {
                    continue;
                }
                c.hyps.remove(i);
                return true;
            }
        }
        false
    }

    /// Attempts every active lemma; the first applicable, non-memoized match
    /// replaces the clause with the per-disjunct products.
    fn try_lemmas(&mut self, c: &Clause) -> Option<Vec<Clause>> {
        if c.std {
            return None;
        }
        let lemmas: Vec<(Statement, bool)> = self
            .lemmas
            .iter()
            .map(|l| (l.clone(), false))
            .chain(self.inductive.iter().map(|l| (l.clone(), true)))
            .collect();
        for (lemma, inductive) in &lemmas {
            if let Some(products) = self.apply_lemma(c, lemma, *inductive) {
                return Some(products);
            }
        }
        None
    }

    /// The Lem / Ind transformation rules. Returns the replacement clauses
    /// when a fresh match exists.
    pub fn apply_lemma(&mut self, c: &Clause, lemma: &Statement, inductive: bool) -> Option<Vec<Clause>> {
        if c.std {
            return None;
        }
        for f in &lemma.premises {
            if !self.sp.contains(f, self.sig) {
                return None;
            }
        }
        let lemma_vars: BTreeSet<Var> = lemma.premise_vars().into_iter().collect();
        let bindable = |v: &Var| lemma_vars.contains(v);
        let mut matches = Vec::new();
        self.match_premises(c, lemma, inductive, 0, Subst::new(), &bindable, &mut matches);
        for sigma in matches {
            // premise constraint atoms must be entailed
            let pf = lemma.premise_formula.apply(&sigma);
            if !pf.is_true() && !c.formula.implies(&pf) {
                continue;
            }
            let key = self.lemma_key(lemma, &sigma);
            if c.lemma_memo.contains(&key) {
                continue;
            }
            let mut out = Vec::new();
            for disjunct in &lemma.conclusion {
                out.push(self.lemma_product(c, lemma, disjunct, &sigma, &key));
            }
            return Some(out);
        }
        None
    }

    fn lemma_key(&self, lemma: &Statement, sigma: &Subst) -> String {
        let inst: Vec<String> = lemma
            .premises
            .iter()
            .map(|f| f.apply(sigma).to_string())
            .collect();
        format!("{}|{}", lemma.name, inst.join("&"))
    }

    fn lemma_product(
        &mut self,
        c: &Clause,
        lemma: &Statement,
        disjunct: &Conjunct,
        sigma: &Subst,
        key: &str,
    ) -> Clause {
        // conclusion-only variables are existentials: freshen them
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
        let mut hyps = c.hyps.clone();
        for f in &disjunct.facts {
            let inst = f.apply(sigma).apply(&fresh).to_blocking(self.sig);
            if !hyps.contains(&inst) {
                hyps.push(inst);
            }
        }
        let formula = c.formula.and(&disjunct.formula.apply(sigma).apply(&fresh));
        let mut out = Clause::new(
            hyps,
            formula,
            c.concl.clone(),
            Provenance::LemmaApp {
                parent: c.id,
                lemma: lemma.name.clone(),
            },
        );
        out.lemma_memo = c.lemma_memo.clone();
        out.lemma_memo.insert(key.to_string());
        out
    }

    /// Backtracking premise matcher for the unordered Lem / Ind rules.
    #[allow(clippy::too_many_arguments)]
    fn match_premises(
        &self,
        c: &Clause,
        lemma: &Statement,
        inductive: bool,
        i: usize,
        sigma: Subst,
        bindable: &dyn Fn(&Var) -> bool,
        out: &mut Vec<Subst>,
    ) {
        if out.len() >= 16 {
            return; // enough candidates
        }
        if i == lemma.premises.len() {
            out.push(sigma);
            return;
        }
        let f = &lemma.premises[i];
        for g in &c.hyps {
            // Lem: blocking-insensitive match. Ind: a blocking hypothesis may
            // be matched only by a standard-predicate premise.
            if inductive && g.is_blocking(self.sig) && f.is_user_pred(self.sig) {
                continue;
            }
            let mut s2 = sigma.clone();
            if f.match_kind_in(g, &mut s2, bindable) {
                self.match_premises(c, lemma, inductive, i + 1, s2, bindable, out);
            }
        }
        if !inductive {
            // match against the conclusion when no lemma-conclusion fact can
            // unify with it, or the conclusion is a user predicate
            let cc = &c.concl;
            let mut s2 = sigma.clone();
            if f.match_kind_in(cc, &mut s2, bindable) && !cc.is_blocking(self.sig) {
                let allowed = cc.is_user_pred(self.sig) || {
                    let mut unifiable = false;
                    'outer: for d in &lemma.conclusion {
                        for cf in &d.facts {
                            let inst = cf.apply(&s2);
                            let sort_of = |t: &Term| self.sig.sort_of(t);
                            let mut u = Unifier::with_sorts(&sort_of);
                            if inst.unify_kind(cc, &mut u).is_ok() {
                                unifiable = true;
                                break 'outer;
                            }
                        }
                    }
                    !unifiable
                };
                if allowed {
                    self.match_premises(c, lemma, inductive, i + 1, s2, bindable, out);
                }
            }
        }
    }
}

/// Convenience wrapper: saturate `initial` with the given lemma sets.
pub fn saturate(
    sig: &Signature,
    initial: Vec<Clause>,
    lemmas: Vec<Statement>,
    inductive: Vec<Statement>,
    sp: PredSet,
    limits: Limits,
) -> Result<(Vec<Clause>, usize), SatError> {
    let mut sat = Saturator::new(sig);
    sat.lemmas = lemmas;
    sat.inductive = inductive;
    sat.sp = sp;
    sat.limits = limits;
    let c_sat = sat.saturate(initial)?;
    Ok((c_sat, sat.steps))
}

/// The inductive-lemma form of a query: conclusion facts replaced by their
/// blocking counterparts.
pub fn inductive_form(stmt: &Statement, sig: &Signature) -> Statement {
    let mut st = stmt.clone();
    for c in &mut st.conclusion {
        for f in &mut c.facts {
            *f = f.to_blocking(sig);
        }
    }
    st.name = format!("{}[ind]", stmt.name);
    st
}
