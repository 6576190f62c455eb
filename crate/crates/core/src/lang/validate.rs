//! Post-parse validation: invariants the grammar alone cannot enforce.

use std::collections::BTreeSet;

use crate::fact::FactKind;
use crate::lang::ast::{Pattern, Process, Specification};
use crate::lang::lexer::Pos;
use crate::lang::parser::Diagnostic;
use crate::term::Term;

fn diag(code: &'static str, msg: String) -> Diagnostic {
    Diagnostic {
        pos: Pos { line: 0, col: 0 },
        code,
        msg,
    }
}

/// Checks a parsed specification; an empty result means it is well-formed.
pub fn validate(spec: &Specification) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let sig = &spec.sig;

    for (i, c) in spec.user_clauses.iter().enumerate() {
        for f in c.hyps.iter().chain(std::iter::once(&c.concl)) {
            if !f.is_pred() {
                out.push(diag(
                    "E-CUSER",
                    format!("user clause {i} uses non-user-defined fact {f}"),
                ));
            }
        }
        if let FactKind::Pred(p, _) = &c.concl.kind {
            if sig.is_abstract_pred(p) {
                out.push(diag(
                    "E-BLOCKING-CONCL",
                    format!("user clause {i} concludes blocking predicate `{p}`"),
                ));
            }
        }
    }

    for st in &spec.statements {
        for f in &st.premises {
            if let FactKind::Pred(p, _) = &f.kind {
                if !sig.predicates.contains_key(p) {
                    out.push(diag(
                        "E-UNDECLARED-PRED",
                        format!("statement {} uses undeclared predicate `{p}`", st.name),
                    ));
                }
            }
        }
        let mut terms = Vec::new();
        for f in st.premises.iter() {
            terms.extend(f.args().into_iter().cloned());
        }
        for c in &st.conclusion {
            for f in &c.facts {
                terms.extend(f.args().into_iter().cloned());
            }
        }
        for t in &terms {
            if mentions_private(t, sig) {
                out.push(diag(
                    "E-PRIVATE",
                    format!("statement {} mentions a private name", st.name),
                ));
                break;
            }
        }
    }

    if let Some(p) = &spec.process {
        let mut seen = BTreeSet::new();
        check_process(p, sig, &mut seen, &mut out);
    }
    out
}

fn mentions_private(t: &Term, sig: &crate::sig::Signature) -> bool {
    match t {
        Term::Name(n, args) => {
            let private = sig
                .free_names
                .get(n)
                .map(|f| f.private)
                .unwrap_or_else(|| sig.bound_names.contains_key(n));
            private || args.iter().any(|a| mentions_private(a, sig))
        }
        Term::App(_, args) => args.iter().any(|a| mentions_private(a, sig)),
        _ => false,
    }
}

fn check_process(
    p: &Process,
    sig: &crate::sig::Signature,
    binders: &mut BTreeSet<(String, u64)>,
    out: &mut Vec<Diagnostic>,
) {
    let mut bind = |v: &crate::term::Var, out: &mut Vec<Diagnostic>| {
        if !binders.insert((v.name.clone(), v.id)) {
            out.push(diag(
                "E-ALPHA",
                format!("binder `{}` is not unique after renaming", v.name),
            ));
        }
    };
    match p {
        Process::Nil => {}
        Process::Output(_, _, k) => check_process(k, sig, binders, out),
        Process::Input(_, pat, k) => {
            let mut vs = Vec::new();
            pat.binders(&mut vs);
            for v in &vs {
                bind(v, out);
            }
            check_process(k, sig, binders, out);
        }
        Process::Parallel(a, b) => {
            check_process(a, sig, binders, out);
            check_process(b, sig, binders, out);
        }
        Process::Repl(_, k) => check_process(k, sig, binders, out),
        Process::Restriction(_, _, k) => check_process(k, sig, binders, out),
        Process::Let(pat, _, a, b) => {
            let mut vs = Vec::new();
            pat.binders(&mut vs);
            for v in &vs {
                bind(v, out);
            }
            check_process(a, sig, binders, out);
            check_process(b, sig, binders, out);
        }
        Process::LetSuchThat(vs, atom, a, b) => {
            let atom_vars = atom.vars();
            for v in vs {
                bind(v, out);
                if !atom_vars.contains(v) {
                    out.push(diag(
                        "E-SUCHTHAT",
                        format!("suchthat binder `{}` does not occur in the predicate", v.name),
                    ));
                }
            }
            if let FactKind::Pred(q, _) = &atom.kind {
                if !sig.predicates.contains_key(q) {
                    out.push(diag(
                        "E-UNDECLARED-PRED",
                        format!("suchthat uses undeclared predicate `{q}`"),
                    ));
                }
            }
            check_process(a, sig, binders, out);
            check_process(b, sig, binders, out);
        }
        Process::Event(_, _, k) => check_process(k, sig, binders, out),
    }
}

#[allow(dead_code)]
fn pattern_vars(p: &Pattern) -> Vec<crate::term::Var> {
    let mut out = Vec::new();
    p.binders(&mut out);
    out
}
