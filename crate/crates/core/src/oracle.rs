//! Test-support ground truth: a derivation validator, a brute-force
//! derivability enumerator over a bounded term universe, and a bounded
//! interpreter for the operational semantics. Used to certify the engine's
//! soundness properties at desk scale.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::clause::Clause;
use crate::eval::eval_ground;
use crate::fact::{Fact, FactKind};
use crate::lang::ast::{Pattern, Process, Specification};
use crate::sig::Signature;
use crate::term::{match_term, Subst, Term};

/// A derivation tree: each node holds the index of the clause used and its
/// instantiation; the incoming edge is `fact`.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub clause: usize,
    pub subst: Subst,
    pub fact: Fact,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }
}

/// Checks a derivation against a clause set: at every node the instantiated
/// clause concludes the incoming edge, its hypotheses embed injectively into
/// the outgoing edges, and its formula instance is true.
pub fn check_derivation(d: &Derivation, clauses: &[Clause]) -> bool {
    let c = match clauses.get(d.clause) {
        Some(c) => c,
        None => return false,
    };
    if c.concl.apply(&d.subst) != d.fact {
        return false;
    }
    if !d.fact.is_ground() {
        return false;
    }
    let child_facts: Vec<&Fact> = d.children.iter().map(|ch| &ch.fact).collect();
    let mut used = vec![false; child_facts.len()];
    fn embed(hyps: &[Fact], facts: &[&Fact], used: &mut Vec<bool>, i: usize) -> bool {
        if i == hyps.len() {
            return true;
        }
        for j in 0..facts.len() {
            if !used[j] && &hyps[i] == facts[j] {
                used[j] = true;
                if embed(hyps, facts, used, i + 1) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let hyps: Vec<Fact> = c.hyps.iter().map(|h| h.apply(&d.subst)).collect();
    if !embed(&hyps, &child_facts, &mut used, 0) {
        return false;
    }
    if c.formula.apply(&d.subst).eval_ground() != Some(true) {
        return false;
    }
    d.children.iter().all(|ch| check_derivation(ch, clauses))
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("term universe too large: {0} candidate groundings")]
    UniverseTooLarge(usize),
}

const GROUNDING_CAP: usize = 2_000_000;

/// All ground facts derivable from `clauses` over the given term universe
/// with a derivation of at most `max_size` nodes, together with the minimal
/// derivation size per fact.
pub fn enumerate_derivable(
    clauses: &[Clause],
    universe: &[Term],
    max_size: usize,
) -> Result<BTreeMap<Fact, usize>, OracleError> {
    let mut sizes: BTreeMap<Fact, usize> = BTreeMap::new();
    // pre-enumerate the ground instances of every clause
    let mut instances: Vec<(Vec<Fact>, Fact)> = Vec::new();
    let mut total = 0usize;
    for c in clauses {
        let vars = c.vars();
        let combos = universe.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
        total = total.saturating_add(combos);
        if total > GROUNDING_CAP {
            return Err(OracleError::UniverseTooLarge(total));
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut s = Subst::new();
            for (v, i) in vars.iter().zip(&idx) {
                s.bind(v.clone(), universe[*i].clone());
            }
            if c.formula.apply(&s).eval_ground() == Some(true) {
                let hyps: Vec<Fact> = c.hyps.iter().map(|h| h.apply(&s)).collect();
                let concl = c.concl.apply(&s);
                if concl.is_ground() && hyps.iter().all(|h| h.is_ground()) {
                    instances.push((hyps, concl));
                }
            }
            // odometer
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < universe.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    // fixpoint on minimal sizes
    loop {
        let mut changed = false;
        for (hyps, concl) in &instances {
            let mut size = 1usize;
            let mut ok = true;
            for h in hyps {
                match sizes.get(h) {
                    Some(s) => size += s,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                match sizes.get(concl) {
                    Some(old) if *old <= size => {}
                    _ => {
                        sizes.insert(concl.clone(), size);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    sizes.retain(|_, s| *s <= max_size);
    Ok(sizes)
}

/// A transition label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Mess(Term, Term),
    Event(String, Vec<Term>),
    Silent,
}

/// One execution trace of the bounded interpreter: the labels in order and
/// the final attacker knowledge.
#[derive(Debug, Clone)]
pub struct Trace {
    pub labels: Vec<Label>,
    pub knowledge: BTreeSet<Term>,
}

pub struct SemanticsBounds {
    pub step_budget: usize,
    pub attacker_depth: usize,
    pub max_traces: usize,
    pub max_repl: usize,
}

impl Default for SemanticsBounds {
    fn default() -> SemanticsBounds {
        SemanticsBounds {
            step_budget: 8,
            attacker_depth: 3,
            max_traces: 4_000,
            max_repl: 2,
        }
    }
}

/// Bounded attacker closure of a knowledge set: constructor applications up
/// to the depth cap, destructor evaluations, and fresh attacker names.
pub fn closure(sig: &Signature, know: &BTreeSet<Term>, depth: usize) -> BTreeSet<Term> {
    let mut out = know.clone();
    for k in 0..2 {
        out.insert(Term::Name(format!("@b0_{k}"), vec![]));
    }
    let max_depth = depth + know.iter().map(|t| t.depth()).max().unwrap_or(1);
    loop {
        let mut new = Vec::new();
        let terms: Vec<Term> = out.iter().cloned().collect();
        for f in sig.functions.values() {
            if f.arity > 2 {
                continue; // bounded harness: small signatures only
            }
            let mut pick = vec![0usize; f.arity];
            loop {
                let args: Vec<Term> = pick.iter().map(|i| terms[*i].clone()).collect();
                let t = Term::App(f.name.clone(), args);
                if let Ok(v) = eval_ground(sig, &t) {
                    if !matches!(v, Term::Fail) && v.depth() <= max_depth && !out.contains(&v) {
                        new.push(v);
                    }
                }
                let mut k = 0;
                loop {
                    if k == pick.len() {
                        break;
                    }
                    pick[k] += 1;
                    if pick[k] < terms.len() {
                        break;
                    }
                    pick[k] = 0;
                    k += 1;
                }
                if k == pick.len() || terms.is_empty() {
                    break;
                }
            }
        }
        if new.is_empty() {
            break;
        }
        for t in new {
            out.insert(t);
        }
        if out.len() > 600 {
            break;
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Config {
    procs: Vec<Process>,
    know: BTreeSet<Term>,
    labels: Vec<Label>,
    repl_unfolds: usize,
    sid: usize,
}

/// Exhaustive exploration of bounded traces of an *instrumented* process.
/// `sem_user` gives the bounded semantics of user predicates.
pub fn run_bounded_semantics(
    spec: &Specification,
    sem_user: &BTreeMap<Fact, usize>,
    bounds: &SemanticsBounds,
) -> Vec<Trace> {
    let sig = &spec.sig;
    let mut init_know = BTreeSet::new();
    for n in sig.free_names.values() {
        if !n.private {
            init_know.insert(Term::Name(n.name.clone(), vec![]));
        }
    }
    let start = match &spec.process {
        Some(p) => crate::clausegen::instrument(p),
        None => Process::Nil,
    };
    let mut traces = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back(Config {
        procs: vec![start],
        know: init_know,
        labels: Vec::new(),
        repl_unfolds: 0,
        sid: 0,
    });
    while let Some(cfg) = queue.pop_front() {
        if traces.len() >= bounds.max_traces {
            break;
        }
        let successors = step(sig, sem_user, &cfg, bounds);
        // every configuration yields a (prefix) trace
        traces.push(Trace {
            labels: cfg.labels.clone(),
            knowledge: cfg.know.clone(),
        });
        if cfg.labels.len() >= bounds.step_budget {
            continue;
        }
        for s in successors {
            queue.push_back(s);
        }
    }
    traces
}

fn step(
    sig: &Signature,
    sem_user: &BTreeMap<Fact, usize>,
    cfg: &Config,
    bounds: &SemanticsBounds,
) -> Vec<Config> {
    let mut out = Vec::new();
    for (pi, p) in cfg.procs.iter().enumerate() {
        let rest = |exclude: usize| -> Vec<Process> {
            cfg.procs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != exclude)
                .map(|(_, q)| q.clone())
                .collect()
        };
        match p {
            Process::Nil => {
                let mut c = cfg.clone();
                c.procs = rest(pi);
                c.labels.push(Label::Silent);
                out.push(c);
            }
            Process::Parallel(a, b) => {
                let mut c = cfg.clone();
                c.procs = rest(pi);
                c.procs.push((**a).clone());
                c.procs.push((**b).clone());
                c.labels.push(Label::Silent);
                out.push(c);
            }
            Process::Repl(v, body) => {
                if cfg.repl_unfolds < bounds.max_repl {
                    let mut c = cfg.clone();
                    c.repl_unfolds += 1;
                    c.sid += 1;
                    let mut unfolded = (**body).clone();
                    if let Some(var) = v {
                        let sid = Term::Name(format!("@sid{}", c.sid), vec![]);
                        let s = Subst::singleton(var.clone(), sid);
                        unfolded = crate::clausegen::apply_subst_process_pub(&unfolded, &s);
                    }
                    c.procs = rest(pi);
                    c.procs.push(unfolded);
                    c.procs.push(p.clone());
                    c.labels.push(Label::Silent);
                    out.push(c);
                }
            }
            Process::Restriction(_, _, _) => unreachable!("instrumented"),
            Process::Output(ch, m, k) => {
                let cl = closure(sig, &cfg.know, bounds.attacker_depth);
                // (Out): attacker-known channel
                if cl.contains(ch) {
                    let mut c = cfg.clone();
                    c.procs = rest(pi);
                    c.procs.push((**k).clone());
                    c.know.insert(m.clone());
                    c.labels.push(Label::Mess(ch.clone(), m.clone()));
                    out.push(c);
                }
                // (I/O): internal communication with a matching input
                for (qi, q) in cfg.procs.iter().enumerate() {
                    if qi == pi {
                        continue;
                    }
                    if let Process::Input(ch2, pat, k2) = q {
                        if ch == ch2 {
                            if let Some(s) = match_pattern(pat, m) {
                                let mut c = cfg.clone();
                                c.procs = cfg
                                    .procs
                                    .iter()
                                    .enumerate()
                                    .filter(|(i, _)| *i != pi && *i != qi)
                                    .map(|(_, r)| r.clone())
                                    .collect();
                                c.procs.push((**k).clone());
                                c.procs
                                    .push(crate::clausegen::apply_subst_process_pub(k2, &s));
                                c.labels.push(Label::Mess(ch.clone(), m.clone()));
                                out.push(c);
                            }
                        }
                    }
                }
            }
            Process::Input(ch, pat, k) => {
                // (In): attacker provides a message on a known channel
                let cl = closure(sig, &cfg.know, bounds.attacker_depth);
                if cl.contains(ch) {
                    for m in cl.iter() {
                        if let Some(s) = match_pattern(pat, m) {
                            let mut c = cfg.clone();
                            c.procs = rest(pi);
                            c.procs
                                .push(crate::clausegen::apply_subst_process_pub(k, &s));
                            c.labels.push(Label::Mess(ch.clone(), m.clone()));
                            out.push(c);
                        }
                    }
                }
            }
            Process::Let(pat, e, a, b) => {
                let mut c = cfg.clone();
                c.procs = rest(pi);
                c.labels.push(Label::Silent);
                match eval_ground(sig, e) {
                    Ok(Term::Fail) | Err(_) => {
                        c.procs.push((**b).clone());
                        out.push(c);
                    }
                    Ok(v) => match match_pattern(pat, &v) {
                        Some(s) => {
                            c.procs.push(crate::clausegen::apply_subst_process_pub(a, &s));
                            out.push(c);
                        }
                        None => {
                            c.procs.push((**b).clone());
                            out.push(c);
                        }
                    },
                }
            }
            Process::LetSuchThat(binders, atom, a, b) => {
                // (Pred1): every instantiation of the binders making the
                // predicate true; (Pred2): the else branch when none does
                let mut any = false;
                for (f, _) in sem_user.iter() {
                    let mut s = Subst::new();
                    if atom.match_kind(f, &mut s) {
                        let dom_ok = s.domain().all(|v| binders.contains(v));
                        if dom_ok {
                            any = true;
                            let mut c = cfg.clone();
                            c.procs = rest(pi);
                            c.procs.push(crate::clausegen::apply_subst_process_pub(a, &s));
                            c.labels.push(Label::Silent);
                            out.push(c);
                        }
                    }
                }
                if !any {
                    let mut c = cfg.clone();
                    c.procs = rest(pi);
                    c.procs.push((**b).clone());
                    c.labels.push(Label::Silent);
                    out.push(c);
                }
            }
            Process::Event(e, args, k) => {
                let mut c = cfg.clone();
                c.procs = rest(pi);
                c.procs.push((**k).clone());
                c.labels.push(Label::Event(e.clone(), args.clone()));
                out.push(c);
            }
        }
    }
    out
}

fn match_pattern(pat: &Pattern, value: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    if match_term(&pat.to_term(), value, &mut s) {
        // equality tests must bind nothing new: they are ground after
        // instrumentation, so plain matching covers them
        Some(s)
    } else {
        None
    }
}

/// The satisfaction relation `T |- F` (blocking identified with plain).
pub fn check_trace_satisfies(
    sig: &Signature,
    t: &Trace,
    f: &Fact,
    sem_user: &BTreeMap<Fact, usize>,
    attacker_depth: usize,
) -> bool {
    let plain = Fact {
        kind: f.kind.clone(),
        blocked: false,
    };
    match &plain.kind {
        FactKind::Att(m) => closure(sig, &t.knowledge, attacker_depth).contains(m),
        FactKind::Mess(c, m) => {
            t.labels.contains(&Label::Mess(c.clone(), m.clone())) || {
                let cl = closure(sig, &t.knowledge, attacker_depth);
                cl.contains(c) && cl.contains(m)
            }
        }
        FactKind::Event(e, args) => t.labels.contains(&Label::Event(e.clone(), args.clone())),
        FactKind::Pred(_, _) => sem_user.contains_key(&plain),
    }
}

/// Convenience: the bounded semantics of the user predicates of a spec over
/// a universe derived from its ground terms.
pub fn user_semantics(
    spec: &Specification,
    universe: &[Term],
    max_size: usize,
) -> Result<BTreeMap<Fact, usize>, OracleError> {
    let clauses: Vec<Clause> = spec
        .user_clauses
        .iter()
        .enumerate()
        .map(|(i, uc)| {
            Clause::new(
                uc.hyps.clone(),
                uc.formula.clone(),
                uc.concl.clone(),
                crate::clause::Provenance::UserClause(i),
            )
        })
        .collect();
    enumerate_derivable(&clauses, universe, max_size)
}

/// Collects the subterm universe of a trace (plus free names), capped.
pub fn trace_universe(t: &Trace, cap: usize) -> Vec<Term> {
    let mut out: BTreeSet<Term> = BTreeSet::new();
    fn subterms(t: &Term, out: &mut BTreeSet<Term>) {
        out.insert(t.clone());
        match t {
            Term::App(_, args) | Term::Name(_, args) => {
                for a in args {
                    subterms(a, out);
                }
            }
            _ => {}
        }
    }
    for l in &t.labels {
        match l {
            Label::Mess(c, m) => {
                subterms(c, &mut out);
                subterms(m, &mut out);
            }
            Label::Event(_, args) => {
                for a in args {
                    subterms(a, &mut out);
                }
            }
            Label::Silent => {}
        }
    }
    for k in &t.knowledge {
        subterms(k, &mut out);
    }
    out.into_iter().take(cap).collect()
}

/// Variables of a fact mapped away so it can act as a ground blocked axiom.
pub fn blocked_axiom(f: &Fact, sig: &Signature) -> Clause {
    Clause::fact(f.to_blocking(sig), crate::clause::Provenance::BlockedAxiom)
}
