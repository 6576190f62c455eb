//! Instrumentation and translation of processes into the initial Horn clause
//! set, plus the attacker clauses.

use std::collections::{BTreeMap, BTreeSet};

use crate::clause::{Clause, Provenance};
use crate::eval::eval_symbolic;
use crate::fact::{Fact, FactKind};
use crate::formula::Formula;
use crate::lang::ast::{Pattern, Process, Specification};
use crate::sig::Signature;
use crate::term::{
    is_tuple_sym, FuncKind, Subst, Term, Unifier, Var, SUCC, ZERO,
};

/// Instruments a process: each replication gets a fresh session variable and
/// each restriction `new k` is eliminated by substituting the name pattern
/// `k[x~]`, where `x~` collects the session variables and inputs in scope.
pub fn instrument(p: &Process) -> Process {
    instrument_rec(p, &mut Vec::new(), &mut BTreeMap::new())
}

fn instrument_rec(
    p: &Process,
    scope: &mut Vec<Term>,
    names: &mut BTreeMap<String, Term>,
) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Output(c, m, k) => Process::Output(
            subst_names(c, names),
            subst_names(m, names),
            instrument_rec(k, scope, names).boxed(),
        ),
        Process::Input(c, pat, k) => {
            let c2 = subst_names(c, names);
            let pat2 = pattern_subst_names(pat, names);
            scope.push(pat2.to_term());
            let k2 = instrument_rec(k, scope, names);
            scope.pop();
            Process::Input(c2, pat2, k2.boxed())
        }
        Process::Parallel(a, b) => Process::Parallel(
            instrument_rec(a, scope, names).boxed(),
            instrument_rec(b, scope, names).boxed(),
        ),
        Process::Repl(_, k) => {
            let i = Var::fresh("sid", Some("sid".into()));
            scope.push(Term::Var(i.clone()));
            let k2 = instrument_rec(k, scope, names);
            scope.pop();
            Process::Repl(Some(i), k2.boxed())
        }
        Process::Restriction(n, _, k) => {
            let pattern = Term::Name(n.clone(), scope.clone());
            let prev = names.insert(n.clone(), pattern);
            let k2 = instrument_rec(k, scope, names);
            match prev {
                Some(t) => {
                    names.insert(n.clone(), t);
                }
                None => {
                    names.remove(n);
                }
            }
            k2
        }
        Process::Let(pat, e, a, b) => Process::Let(
            pattern_subst_names(pat, names),
            subst_names(e, names),
            instrument_rec(a, scope, names).boxed(),
            instrument_rec(b, scope, names).boxed(),
        ),
        Process::LetSuchThat(vs, atom, a, b) => Process::LetSuchThat(
            vs.clone(),
            fact_subst_names(atom, names),
            instrument_rec(a, scope, names).boxed(),
            instrument_rec(b, scope, names).boxed(),
        ),
        Process::Event(e, args, k) => Process::Event(
            e.clone(),
            args.iter().map(|t| subst_names(t, names)).collect(),
            instrument_rec(k, scope, names).boxed(),
        ),
    }
}

fn subst_names(t: &Term, names: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Name(n, args) if args.is_empty() => match names.get(n) {
            Some(pat) => pat.clone(),
            None => t.clone(),
        },
        Term::Name(n, args) => Term::Name(
            n.clone(),
            args.iter().map(|a| subst_names(a, names)).collect(),
        ),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| subst_names(a, names)).collect(),
        ),
        _ => t.clone(),
    }
}

fn pattern_subst_names(p: &Pattern, names: &BTreeMap<String, Term>) -> Pattern {
    match p {
        Pattern::Var(v) => Pattern::Var(v.clone()),
        Pattern::Eq(t) => Pattern::Eq(subst_names(t, names)),
        Pattern::Tuple(ps) => {
            Pattern::Tuple(ps.iter().map(|q| pattern_subst_names(q, names)).collect())
        }
    }
}

fn fact_subst_names(f: &Fact, names: &BTreeMap<String, Term>) -> Fact {
    let kind = match &f.kind {
        FactKind::Att(t) => FactKind::Att(subst_names(t, names)),
        FactKind::Mess(c, m) => FactKind::Mess(subst_names(c, names), subst_names(m, names)),
        FactKind::Event(e, a) => FactKind::Event(
            e.clone(),
            a.iter().map(|t| subst_names(t, names)).collect(),
        ),
        FactKind::Pred(p, a) => FactKind::Pred(
            p.clone(),
            a.iter().map(|t| subst_names(t, names)).collect(),
        ),
    };
    Fact {
        kind,
        blocked: f.blocked,
    }
}

struct Translator<'a> {
    sig: &'a Signature,
    out: Vec<Clause>,
    site: usize,
}

/// Translates an instrumented process into protocol clauses.
pub fn translate(p: &Process, sig: &Signature) -> Vec<Clause> {
    let mut tr = Translator {
        sig,
        out: Vec::new(),
        site: 0,
    };
    tr.go(p, Vec::new(), Formula::default());
    tr.out
}

impl<'a> Translator<'a> {
    fn site(&mut self, what: &str) -> String {
        self.site += 1;
        format!("{what}#{}", self.site)
    }

    fn go(&mut self, p: &Process, hyps: Vec<Fact>, phi: Formula) {
        match p {
            Process::Nil => {}
            Process::Parallel(a, b) => {
                self.go(a, hyps.clone(), phi.clone());
                self.go(b, hyps, phi);
            }
            Process::Repl(_, k) => self.go(k, hyps, phi),
            Process::Restriction(_, _, _) => {
                unreachable!("restrictions are eliminated by instrumentation")
            }
            Process::Output(c, m, k) => {
                let site = self.site("out");
                // expressions inside outputs evaluate like a let binding
                let pair = Term::tuple(vec![c.clone(), m.clone()]);
                match eval_symbolic(self.sig, &pair) {
                    Ok(branches) => {
                        for (val, s, bphi) in branches {
                            let (cv, mv) = match &val {
                                Term::App(f, args) if is_tuple_sym(f) && args.len() == 2 => {
                                    (args[0].clone(), args[1].clone())
                                }
                                _ => continue, // failed evaluation: no output
                            };
                            let h2: Vec<Fact> = hyps.iter().map(|f| f.apply(&s)).collect();
                            let phi2 = phi.apply(&s).and(&bphi);
                            self.out.push(Clause::new(
                                h2.clone(),
                                phi2.clone(),
                                Fact::mess(cv, mv),
                                Provenance::Protocol(site.clone()),
                            ));
                            self.go_subst(k, h2, phi2, &s);
                        }
                    }
                    Err(_) => {}
                }
            }
            Process::Input(c, pat, k) => {
                let mut h2 = hyps;
                h2.push(Fact::mess(c.clone(), pat.to_term()));
                self.go(k, h2, phi);
            }
            Process::Let(pat, e, a, b) => {
                match eval_symbolic(self.sig, e) {
                    Ok(branches) => {
                        for (val, s, bphi) in branches {
                            match &val {
                                Term::Fail => {
                                    let h2: Vec<Fact> =
                                        hyps.iter().map(|f| f.apply(&s)).collect();
                                    self.go_subst(b, h2, phi.apply(&s).and(&bphi), &s);
                                }
                                _ => {
                                    // bind the pattern against the branch value
                                    let sort_of = |t: &Term| self.sig.sort_of(t);
                                    let mut u = Unifier::with_sorts(&sort_of);
                                    u.subst = s.clone();
                                    if u.unify(&pat.to_term(), &val).is_ok() {
                                        let s2 = u.subst;
                                        let h2: Vec<Fact> =
                                            hyps.iter().map(|f| f.apply(&s2)).collect();
                                        let phi2 = phi.apply(&s2).and(&bphi.apply(&s2));
                                        self.go_subst(a, h2, phi2, &s2);
                                    } else if !matches!(**b, Process::Nil) {
                                        // pattern mismatch runs the else branch;
                                        // the missing disequality guard makes this
                                        // an over-approximation
                                        let h2: Vec<Fact> =
                                            hyps.iter().map(|f| f.apply(&s)).collect();
                                        self.go_subst(b, h2, phi.apply(&s).and(&bphi), &s);
                                    }
                                }
                            }
                        }
                    }
                    Err(_) => {}
                }
            }
            Process::LetSuchThat(_, atom, a, b) => {
                let mut h2 = hyps.clone();
                h2.push(atom.clone());
                self.go(a, h2, phi.clone());
                self.go(b, hyps, phi);
            }
            Process::Event(e, args, k) => {
                let site = self.site("event");
                self.out.push(Clause::new(
                    hyps.clone(),
                    phi.clone(),
                    Fact::event(e, args.clone()),
                    Provenance::Protocol(site),
                ));
                let mut h2 = hyps;
                h2.push(Fact::sevent(e, args.clone()));
                self.go(k, h2, phi);
            }
        }
    }

    /// Continues translation after a branch substitution has been applied to
    /// the accumulated context. The process body still mentions the original
    /// variables, so terms are substituted as they are emitted.
    fn go_subst(&mut self, p: &Process, hyps: Vec<Fact>, phi: Formula, s: &Subst) {
        let p2 = apply_subst_process(p, s);
        self.go(&p2, hyps, phi);
    }
}

/// Public wrapper used by the oracle's bounded interpreter.
pub fn apply_subst_process_pub(p: &Process, s: &Subst) -> Process {
    apply_subst_process(p, s)
}

fn apply_subst_process(p: &Process, s: &Subst) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Output(c, m, k) => Process::Output(
            s.apply(c),
            s.apply(m),
            apply_subst_process(k, s).boxed(),
        ),
        Process::Input(c, pat, k) => Process::Input(
            s.apply(c),
            apply_subst_pattern(pat, s),
            apply_subst_process(k, s).boxed(),
        ),
        Process::Parallel(a, b) => Process::Parallel(
            apply_subst_process(a, s).boxed(),
            apply_subst_process(b, s).boxed(),
        ),
        Process::Repl(v, k) => Process::Repl(v.clone(), apply_subst_process(k, s).boxed()),
        Process::Restriction(n, so, k) => {
            Process::Restriction(n.clone(), so.clone(), apply_subst_process(k, s).boxed())
        }
        Process::Let(pat, e, a, b) => Process::Let(
            apply_subst_pattern(pat, s),
            s.apply(e),
            apply_subst_process(a, s).boxed(),
            apply_subst_process(b, s).boxed(),
        ),
        Process::LetSuchThat(vs, f, a, b) => Process::LetSuchThat(
            vs.clone(),
            f.apply(s),
            apply_subst_process(a, s).boxed(),
            apply_subst_process(b, s).boxed(),
        ),
        Process::Event(e, args, k) => Process::Event(
            e.clone(),
            args.iter().map(|t| s.apply(t)).collect(),
            apply_subst_process(k, s).boxed(),
        ),
    }
}

fn apply_subst_pattern(p: &Pattern, s: &Subst) -> Pattern {
    match p {
        Pattern::Var(v) => match s.get(v) {
            // a bound pattern variable becomes an equality test
            Some(t) => Pattern::Eq(t.clone()),
            None => Pattern::Var(v.clone()),
        },
        Pattern::Eq(t) => Pattern::Eq(s.apply(t)),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| apply_subst_pattern(q, s)).collect()),
    }
}

/// Collects every data-constructor symbol used anywhere in the specification.
fn used_data_symbols(spec: &Specification, protocol: &[Clause]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in spec.sig.functions.values() {
        if f.kind == FuncKind::Data {
            out.insert(f.name.clone());
        }
    }
    let mut visit = |t: &Term| collect_data_syms(t, &mut out);
    for c in protocol {
        for h in &c.hyps {
            for t in h.args() {
                visit(t);
            }
        }
        for t in c.concl.args() {
            visit(t);
        }
    }
    for uc in &spec.user_clauses {
        for f in uc.hyps.iter().chain(std::iter::once(&uc.concl)) {
            for t in f.args() {
                collect_data_syms(t, &mut out);
            }
        }
    }
    for st in &spec.statements {
        for f in &st.premises {
            for t in f.args() {
                collect_data_syms(t, &mut out);
            }
        }
        if !st.premise_formula.is_true() {
            out.insert(ZERO.to_string());
            out.insert(SUCC.to_string());
        }
        for c in &st.conclusion {
            for f in &c.facts {
                for t in f.args() {
                    collect_data_syms(t, &mut out);
                }
            }
            if !c.formula.is_true() {
                out.insert(ZERO.to_string());
                out.insert(SUCC.to_string());
            }
        }
    }
    out
}

fn collect_data_syms(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::App(f, args) => {
            if f == ZERO || f == SUCC || is_tuple_sym(f) {
                out.insert(f.clone());
                if f == SUCC {
                    out.insert(ZERO.to_string());
                }
            }
            for a in args {
                collect_data_syms(a, out);
            }
        }
        Term::Name(_, args) => {
            for a in args {
                collect_data_syms(a, out);
            }
        }
        _ => {}
    }
}

/// The attacker clause set: RInit, RGen, RFail, Rf (constructors and
/// destructor rewrite rules), Rl, Rs, and the C_std data build/projection
/// clauses.
pub fn attacker_clauses(spec: &Specification, protocol: &[Clause]) -> Vec<Clause> {
    let sig = &spec.sig;
    let mut out = Vec::new();
    let fact_clause = |f: Fact, tag: &str, std: bool| {
        let mut c = Clause::fact(f, Provenance::Attacker(tag.to_string()));
        c.std = std;
        c
    };

    // (RInit)
    for n in sig.free_names.values() {
        if !n.private {
            out.push(fact_clause(
                Fact::att(Term::Name(n.name.clone(), vec![])),
                "RInit",
                false,
            ));
        }
    }
    // (RGen): fresh attacker names b0[i]
    out.push(fact_clause(
        Fact::att(Term::Name(
            "@b0".into(),
            vec![Term::Var(Var::fresh("i", Some("sid".into())))],
        )),
        "RGen",
        false,
    ));
    // (RFail)
    out.push(fact_clause(Fact::att(Term::Fail), "RFail", false));

    // (Rf) for declared constructors
    for f in sig.functions.values() {
        match f.kind {
            FuncKind::Constructor => {
                let vars: Vec<Term> = (0..f.arity)
                    .map(|k| Term::Var(Var::fresh(&format!("x{k}"), None)))
                    .collect();
                out.push(Clause::new(
                    vars.iter().map(|v| Fact::att(v.clone())).collect(),
                    Formula::default(),
                    Fact::att(Term::App(f.name.clone(), vars)),
                    Provenance::Attacker(format!("Rf:{}", f.name)),
                ));
            }
            FuncKind::Destructor => {
                for (ri, rule) in f.rules.iter().enumerate() {
                    let hyps = rule.patterns.iter().map(|p| Fact::att(p.clone())).collect();
                    let mut c = Clause::new(
                        hyps,
                        Formula::default(),
                        Fact::att(rule.result.clone()),
                        Provenance::Attacker(format!("Rf:{}/{ri}", f.name)),
                    );
                    c = c.rename_apart();
                    out.push(c);
                }
            }
            FuncKind::Data => {}
        }
    }

    // (Rl) and (Rs)
    let x = Term::Var(Var::fresh("x", None));
    let y = Term::Var(Var::fresh("y", None));
    let mut rl = Clause::new(
        vec![Fact::mess(x.clone(), y.clone()), Fact::att(x.clone())],
        Formula::default(),
        Fact::att(y.clone()),
        Provenance::Attacker("Rl".into()),
    );
    rl.std = true;
    out.push(rl);
    out.push(Clause::new(
        vec![Fact::att(x.clone()), Fact::att(y.clone())],
        Formula::default(),
        Fact::mess(x, y),
        Provenance::Attacker("Rs".into()),
    ));

    // C_std: build and projection clauses for data constructors in use
    for name in used_data_symbols(spec, protocol) {
        let arity = sig.func_arity(&name).unwrap_or(0);
        let vars: Vec<Term> = (0..arity)
            .map(|k| Term::Var(Var::fresh(&format!("x{k}"), None)))
            .collect();
        let mut build = Clause::new(
            vars.iter().map(|v| Fact::att(v.clone())).collect(),
            Formula::default(),
            Fact::att(Term::App(name.clone(), vars.clone())),
            Provenance::Attacker(format!("Rf:{name}")),
        );
        build.std = true;
        out.push(build);
        for (k, v) in vars.iter().enumerate() {
            let mut proj = Clause::new(
                vec![Fact::att(Term::App(name.clone(), vars.clone()))],
                Formula::default(),
                Fact::att(v.clone()),
                Provenance::Attacker(format!("Rf:proj{k}:{name}")),
            );
            proj.std = true;
            out.push(proj);
        }
    }

    out.into_iter().map(|c| c.rename_apart()).collect()
}

/// Rewrites mess facts on declared public free names into att facts (the
/// standard optimization; private channels keep their mess form).
pub fn collapse_public(c: &Clause, sig: &Signature) -> Clause {
    let conv = |f: &Fact| -> Fact {
        if let FactKind::Mess(ch, m) = &f.kind {
            if let Term::Name(n, args) = ch {
                if args.is_empty() && sig.is_public_free(n) {
                    return Fact {
                        kind: FactKind::Att(m.clone()),
                        blocked: f.blocked,
                    };
                }
            }
        }
        f.clone()
    };
    let mut out = c.clone();
    out.hyps = c.hyps.iter().map(conv).collect();
    out.concl = conv(&c.concl);
    out
}

/// The full initial clause set: user clauses, translated protocol clauses
/// (with the public-channel collapse applied), and the attacker clauses.
pub fn initial_clauses(spec: &Specification) -> Vec<Clause> {
    let mut out = Vec::new();
    for (i, uc) in spec.user_clauses.iter().enumerate() {
        out.push(Clause::new(
            uc.hyps.clone(),
            uc.formula.clone(),
            uc.concl.clone(),
            Provenance::UserClause(i),
        ));
    }
    let protocol: Vec<Clause> = match &spec.process {
        Some(p) => {
            let ip = instrument(p);
            translate(&ip, &spec.sig)
                .iter()
                .map(|c| collapse_public(c, &spec.sig))
                .collect()
        }
        None => Vec::new(),
    };
    out.extend(attacker_clauses(spec, &protocol));
    out.extend(protocol);
    out.into_iter().map(|c| c.rename_apart()).collect()
}
