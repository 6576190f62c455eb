//! Destructor-expression evaluation: ground (first applicable rewrite rule
//! wins, failure propagates) and symbolic (all branches with their unifiers
//! and constraints, as used by clause generation).

use crate::formula::{Atom, Formula};
use crate::sig::Signature;
use crate::term::{match_term, FuncKind, Subst, Term, Unifier};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
}

/// Ground evaluation `D => U` per the rewrite semantics. The result may be
/// `Term::Fail`.
pub fn eval_ground(sig: &Signature, d: &Term) -> Result<Term, EvalError> {
    match d {
        Term::Var(_) | Term::Name(_, _) | Term::Fail => Ok(d.clone()),
        Term::App(f, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_ground(sig, a)?);
            }
            let kind = sig
                .func_kind(f)
                .ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
            match kind {
                FuncKind::Constructor | FuncKind::Data => {
                    if vals.iter().any(|v| matches!(v, Term::Fail)) {
                        Ok(Term::Fail)
                    } else {
                        Ok(Term::App(f.clone(), vals))
                    }
                }
                FuncKind::Destructor => {
                    let sym = &sig.functions[f];
                    for rule in &sym.rules {
                        let mut s = Subst::new();
                        let ok = rule
                            .patterns
                            .iter()
                            .zip(&vals)
                            .all(|(p, v)| match_term(p, v, &mut s));
                        if ok {
                            return Ok(s.apply(&rule.result));
                        }
                    }
                    Ok(Term::Fail)
                }
            }
        }
    }
}

/// One branch of a symbolic evaluation: result term (possibly `Fail`), the
/// substitution it requires, and the constraints it assumes.
pub type SymBranch = (Term, Subst, Formula);

/// Symbolic evaluation `D =>' (M, sigma, phi)`: returns every branch,
/// including failure branches. Rewrite rules are renamed apart per use.
pub fn eval_symbolic(sig: &Signature, d: &Term) -> Result<Vec<SymBranch>, EvalError> {
    eval_sym_under(sig, d, &Subst::new(), &Formula::default())
}

fn eval_sym_under(
    sig: &Signature,
    d: &Term,
    sigma: &Subst,
    phi: &Formula,
) -> Result<Vec<SymBranch>, EvalError> {
    let d = sigma.apply(d);
    match &d {
        Term::Var(_) | Term::Name(_, _) | Term::Fail => Ok(vec![(d, sigma.clone(), phi.clone())]),
        Term::App(f, args) => {
            let kind = sig
                .func_kind(f)
                .ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
            // evaluate arguments left to right, threading sigma and phi
            let mut branches: Vec<(Vec<Term>, Subst, Formula)> =
                vec![(Vec::new(), sigma.clone(), phi.clone())];
            for a in args {
                let mut next = Vec::new();
                for (vals, s, p) in &branches {
                    for (v, s2, p2) in eval_sym_under(sig, a, s, p)? {
                        let mut vals2 = vals.iter().map(|t| s2.apply(t)).collect::<Vec<_>>();
                        vals2.push(v);
                        next.push((vals2, s2, p2));
                    }
                }
                branches = next;
            }
            let mut out = Vec::new();
            for (vals, s, p) in branches {
                let any_fail = vals.iter().any(|v| matches!(v, Term::Fail));
                match kind {
                    FuncKind::Constructor | FuncKind::Data => {
                        if any_fail {
                            out.push((Term::Fail, s, p));
                        } else {
                            out.push((Term::App(f.clone(), vals), s, p));
                        }
                    }
                    FuncKind::Destructor => {
                        if any_fail {
                            out.push((Term::Fail, s, p));
                            continue;
                        }
                        let sym = &sig.functions[f];
                        let mut fail_phi = p.clone();
                        for rule in &sym.rules {
                            // rename the rule apart
                            let mut ren = Subst::new();
                            let mut rule_vars = Vec::new();
                            for pat in &rule.patterns {
                                pat.vars_into(&mut rule_vars);
                            }
                            rule.result.vars_into(&mut rule_vars);
                            for v in &rule_vars {
                                ren.bind(v.clone(), Term::Var(v.renamed()));
                            }
                            let pats: Vec<Term> =
                                rule.patterns.iter().map(|t| ren.apply(t)).collect();
                            let res = ren.apply(&rule.result);

                            let sort_of = |t: &Term| sig.sort_of(t);
                            let mut u = Unifier::with_sorts(&sort_of);
                            u.subst = s.clone();
                            let ok = pats.iter().zip(&vals).all(|(pt, v)| u.unify(pt, v).is_ok());
                            if ok {
                                let s2 = u.subst;
                                let p2 = p.apply(&s2);
                                out.push((s2.apply(&res), s2, p2));
                            }
                            // failure branch constraint: arguments differ from
                            // this rule's patterns for every instantiation
                            let qvars: Vec<_> = {
                                let mut qs = Vec::new();
                                for pt in &pats {
                                    pt.vars_into(&mut qs);
                                }
                                qs
                            };
                            fail_phi.push(Atom::Disequal(
                                qvars,
                                Term::tuple(vals.clone()),
                                Term::tuple(pats),
                            ));
                        }
                        out.push((Term::Fail, s, fail_phi));
                    }
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{FunctionSymbol, RewriteRule, Var};

    fn v(n: &str) -> Term {
        Term::Var(Var {
            name: n.into(),
            id: 0,
            sort: None,
        })
    }

    fn crypto_sig() -> Signature {
        let mut sig = Signature::new();
        for (name, arity) in [("encrypt", 2), ("enckey", 1)] {
            sig.functions.insert(
                name.into(),
                FunctionSymbol {
                    name: name.into(),
                    arity,
                    kind: FuncKind::Constructor,
                    rules: vec![],
                    arg_sorts: vec!["bitstring".into(); arity],
                    result_sort: "bitstring".into(),
                },
            );
        }
        // decrypt(k, encrypt(enckey(k), m)) = m
        sig.functions.insert(
            "decrypt".into(),
            FunctionSymbol {
                name: "decrypt".into(),
                arity: 2,
                kind: FuncKind::Destructor,
                rules: vec![RewriteRule {
                    patterns: vec![
                        v("k"),
                        Term::app("encrypt", vec![Term::app("enckey", vec![v("k")]), v("m")]),
                    ],
                    result: v("m"),
                }],
                arg_sorts: vec!["bitstring".into(); 2],
                result_sort: "bitstring".into(),
            },
        );
        sig
    }

    #[test]
    fn decrypt_of_encrypt_yields_plaintext() {
        let sig = crypto_sig();
        let k = Term::name("k", vec![]);
        let m = Term::name("m", vec![]);
        let d = Term::app(
            "decrypt",
            vec![
                k.clone(),
                Term::app("encrypt", vec![Term::app("enckey", vec![k]), m.clone()]),
            ],
        );
        assert_eq!(eval_ground(&sig, &d).unwrap(), m);
    }

    #[test]
    fn decrypt_of_name_fails() {
        let sig = crypto_sig();
        let d = Term::app(
            "decrypt",
            vec![Term::name("k", vec![]), Term::name("n", vec![])],
        );
        assert_eq!(eval_ground(&sig, &d).unwrap(), Term::Fail);
    }

    #[test]
    fn constructor_applied_to_fail_fails() {
        let sig = crypto_sig();
        let d = Term::app(
            "encrypt",
            vec![
                Term::app("enckey", vec![Term::name("k", vec![])]),
                Term::Fail,
            ],
        );
        assert_eq!(eval_ground(&sig, &d).unwrap(), Term::Fail);
    }

    #[test]
    fn ground_evaluation_is_deterministic() {
        let sig = crypto_sig();
        let k = Term::name("k", vec![]);
        let d = Term::app(
            "decrypt",
            vec![
                k.clone(),
                Term::app(
                    "encrypt",
                    vec![Term::app("enckey", vec![k]), Term::name("m", vec![])],
                ),
            ],
        );
        assert_eq!(eval_ground(&sig, &d).unwrap(), eval_ground(&sig, &d).unwrap());
    }

    #[test]
    fn symbolic_branches_cover_success_and_failure() {
        let sig = crypto_sig();
        // decrypt(k, x): success branch instantiates x, plus a fail branch
        let d = Term::app("decrypt", vec![Term::name("k", vec![]), v("x")]);
        let branches = eval_symbolic(&sig, &d).unwrap();
        let successes: Vec<_> = branches
            .iter()
            .filter(|(t, _, _)| !matches!(t, Term::Fail))
            .collect();
        let fails: Vec<_> = branches
            .iter()
            .filter(|(t, _, _)| matches!(t, Term::Fail))
            .collect();
        assert_eq!(successes.len(), 1);
        assert_eq!(fails.len(), 1);
        let (_, s, _) = successes[0];
        let x = s.apply(&v("x"));
        assert!(matches!(&x, Term::App(f, _) if f == "encrypt"));
    }

    /// Symbolic/ground coherence: for every symbolic branch (M, sigma, phi) and
    /// grounding making phi true, ground evaluation of the instantiated
    /// expression yields the instantiated result.
    #[test]
    fn symbolic_ground_coherence() {
        let sig = crypto_sig();
        let d = Term::app("decrypt", vec![Term::name("k", vec![]), v("x")]);
        let branches = eval_symbolic(&sig, &d).unwrap();
        // grounding: x -> encrypt(enckey(k), m)
        let k = Term::name("k", vec![]);
        let ground_x = Term::app(
            "encrypt",
            vec![Term::app("enckey", vec![k]), Term::name("m", vec![])],
        );
        for (result, s, phi) in &branches {
            let dx = s.apply(&d);
            // extend the branch substitution with the chosen grounding
            let mut gamma = Subst::new();
            for var in dx.vars() {
                gamma.bind(var, ground_x.clone());
            }
            let mut rvars = result.vars();
            // existentially produced rule variables: any grounding will do,
            // here map them to the plaintext name
            for var in rvars.drain(..) {
                if gamma.get(&var).is_none() {
                    gamma.bind(var, Term::name("m", vec![]));
                }
            }
            let phi_g = phi.apply(&gamma);
            if phi_g.eval_ground() != Some(true) {
                continue;
            }
            let lhs = eval_ground(&sig, &gamma.apply(&dx)).unwrap();
            assert_eq!(lhs, gamma.apply(result));
        }
    }
}
