//! Prints a specification back to `.hsl` source. `print(parse(x))` is a fixed
//! point of `print . parse` for well-formed inputs.

use std::collections::{HashMap, HashSet};

use crate::fact::{Fact, FactKind};
use crate::formula::{Atom, Formula};
use crate::lang::ast::*;
use crate::term::{FuncKind, Term, Var, SUCC, ZERO};

pub struct Printer<'a> {
    spec: &'a Specification,
    names: HashMap<Var, String>,
    used: HashSet<String>,
}

pub fn print_spec(spec: &Specification) -> String {
    Printer::new(spec).print()
}

impl<'a> Printer<'a> {
    pub fn new(spec: &'a Specification) -> Printer<'a> {
        Printer {
            spec,
            names: HashMap::new(),
            used: HashSet::new(),
        }
    }

    fn reset_scope(&mut self) {
        self.names.clear();
        self.used.clear();
    }

    fn var_name(&mut self, v: &Var) -> String {
        if let Some(n) = self.names.get(v) {
            return n.clone();
        }
        let mut candidate = v.name.clone();
        let mut k = 0;
        while self.used.contains(&candidate)
            || self.spec.sig.free_names.contains_key(&candidate)
            || self.spec.sig.functions.contains_key(&candidate)
            || self.spec.sig.bound_names.contains_key(&candidate)
        {
            k += 1;
            candidate = format!("{}_{k}", v.name);
        }
        self.used.insert(candidate.clone());
        self.names.insert(v.clone(), candidate.clone());
        candidate
    }

    pub fn term(&mut self, t: &Term) -> String {
        match t {
            Term::Var(v) => self.var_name(v),
            Term::Fail => "fail".into(),
            Term::Name(n, args) if args.is_empty() => n.clone(),
            Term::Name(n, args) => {
                let inner: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                format!("{n}[{}]", inner.join(","))
            }
            Term::App(f, args) => {
                if f == ZERO || f == SUCC {
                    let (k, base) = t.strip_succ();
                    return match base {
                        Term::App(z, _) if z == ZERO => format!("{k}"),
                        _ if k == 0 => self.term(base),
                        _ => format!("{} + {k}", self.term(base)),
                    };
                }
                if crate::term::is_tuple_sym(f) {
                    let inner: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                    return format!("({})", inner.join(","));
                }
                if args.is_empty() {
                    f.clone()
                } else {
                    let inner: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                    format!("{f}({})", inner.join(","))
                }
            }
        }
    }

    pub fn fact(&mut self, f: &Fact) -> String {
        match &f.kind {
            FactKind::Att(t) => format!("attacker({})", self.term(t)),
            FactKind::Mess(c, m) => format!("mess({},{})", self.term(c), self.term(m)),
            FactKind::Event(e, args) => {
                let inner: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                format!("event({e}({}))", inner.join(","))
            }
            FactKind::Pred(p, args) => {
                let inner: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                format!("{p}({})", inner.join(","))
            }
        }
    }

    fn atom(&mut self, a: &Atom) -> String {
        match a {
            Atom::Equal(l, r) => format!("{} = {}", self.term(l), self.term(r)),
            Atom::Disequal(_, l, r) => format!("{} <> {}", self.term(l), self.term(r)),
            Atom::NatLess(l, r) => format!("{} < {}", self.term(l), self.term(r)),
            Atom::NatLeq(l, r) => format!("{} <= {}", self.term(l), self.term(r)),
        }
    }

    fn binder_list(&mut self, vars: &[Var]) -> String {
        // group by sort, preserving first-occurrence order
        let mut groups: Vec<(String, Vec<String>)> = Vec::new();
        for v in vars {
            let sort = v.sort.clone().unwrap_or_else(|| "bitstring".into());
            let name = self.var_name(v);
            match groups.last_mut() {
                Some((s, ns)) if *s == sort => ns.push(name),
                _ => groups.push((sort, vec![name])),
            }
        }
        groups
            .iter()
            .map(|(s, ns)| format!("{}:{s}", ns.join(",")))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn conj(&mut self, facts: &[Fact], formula: &Formula) -> String {
        let mut parts: Vec<String> = facts.iter().map(|f| self.fact(f)).collect();
        parts.extend(formula.atoms.iter().map(|a| self.atom(a)));
        parts.join(" && ")
    }

    pub fn print(&mut self) -> String {
        let mut out = String::new();
        let sig = &self.spec.sig;
        let builtin = ["bitstring", "channel", "nat", "bool"];
        for t in &sig.types {
            if !builtin.contains(&t.as_str()) {
                out.push_str(&format!("type {t}.\n"));
            }
        }
        for f in sig.functions.values() {
            match f.kind {
                FuncKind::Destructor => {}
                _ => {
                    let data = if f.kind == FuncKind::Data { " [data]" } else { "" };
                    if f.arity == 0 {
                        out.push_str(&format!("const {}: {}{data}.\n", f.name, f.result_sort));
                    } else {
                        out.push_str(&format!(
                            "fun {}({}): {}{data}.\n",
                            f.name,
                            f.arg_sorts.join(", "),
                            f.result_sort
                        ));
                    }
                }
            }
        }
        for f in sig.functions.values() {
            if f.kind == FuncKind::Destructor {
                let mut rules = Vec::new();
                for r in &f.rules {
                    self.reset_scope();
                    let mut vars = Vec::new();
                    for p in &r.patterns {
                        p.vars_into(&mut vars);
                    }
                    r.result.vars_into(&mut vars);
                    let binders = self.binder_list(&vars);
                    let pats: Vec<String> = r.patterns.iter().map(|p| self.term(p)).collect();
                    let head = if binders.is_empty() {
                        String::new()
                    } else {
                        format!("forall {binders}; ")
                    };
                    rules.push(format!(
                        "{head}{}({}) = {}",
                        f.name,
                        pats.join(","),
                        self.term(&r.result)
                    ));
                }
                out.push_str(&format!("reduc {}.\n", rules.join(" otherwise ")));
            }
        }
        for n in sig.free_names.values() {
            let attr = if n.private { " [private]" } else { "" };
            out.push_str(&format!("free {}: {}{attr}.\n", n.name, n.sort));
        }
        for p in sig.predicates.values() {
            let attr = if p.blocking { " [block]" } else { "" };
            let sorts = vec!["bitstring"; p.arity].join(", ");
            out.push_str(&format!("pred {}({sorts}){attr}.\n", p.name));
        }
        for (e, arity) in &sig.events {
            let sorts = vec!["bitstring"; *arity].join(", ");
            out.push_str(&format!("event {e}({sorts}).\n"));
        }
        if !self.spec.user_clauses.is_empty() {
            let mut cls = Vec::new();
            for c in &self.spec.user_clauses {
                self.reset_scope();
                let mut vars = Vec::new();
                for h in &c.hyps {
                    h.vars_into(&mut vars);
                }
                c.concl.vars_into(&mut vars);
                for v in c.formula.vars() {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                let binders = self.binder_list(&vars);
                let head = if binders.is_empty() {
                    String::new()
                } else {
                    format!("forall {binders}; ")
                };
                if c.hyps.is_empty() && c.formula.is_true() {
                    cls.push(format!("{head}{}", self.fact(&c.concl.clone())));
                } else {
                    let body = self.conj(&c.hyps, &c.formula);
                    cls.push(format!("{head}{body} -> {}", self.fact(&c.concl.clone())));
                }
            }
            out.push_str(&format!("clauses\n  {}.\n", cls.join(";\n  ")));
        }
        if let Some(p) = &self.spec.process {
            self.reset_scope();
            let body = self.process(p, 1);
            out.push_str(&format!("process\n{body}.\n"));
        }
        for st in &self.spec.statements {
            self.reset_scope();
            let mut vars = st.premise_vars();
            for c in &st.conclusion {
                for f in &c.facts {
                    for v in f.vars() {
                        if !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                }
                for v in c.formula.vars() {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
            }
            let binders = self.binder_list(&vars);
            let prem = self.conj(&st.premises, &st.premise_formula);
            let disj: Vec<String> = {
                let mut items = Vec::new();
                for c in &st.conclusion {
                    items.push(self.conj(&c.facts, &c.formula));
                }
                items
            };
            let attr = if st.induction { " [induction]" } else { "" };
            let head = if binders.is_empty() {
                String::new()
            } else {
                format!("{binders}; ")
            };
            out.push_str(&format!(
                "{} {head}{prem} ==> {}{attr}.\n",
                st.kind,
                disj.join(" || ")
            ));
        }
        out
    }

    fn pattern(&mut self, p: &Pattern) -> String {
        match p {
            Pattern::Var(v) => {
                let sort = v.sort.clone();
                let n = self.var_name(v);
                match sort {
                    Some(s) => format!("{n}: {s}"),
                    None => n,
                }
            }
            Pattern::Eq(t) => format!("={}", self.term(t)),
            Pattern::Tuple(ps) => {
                let inner: Vec<String> = ps.iter().map(|q| self.pattern(q)).collect();
                format!("({})", inner.join(", "))
            }
        }
    }

    fn process(&mut self, p: &Process, depth: usize) -> String {
        let pad = "  ".repeat(depth);
        match p {
            Process::Nil => format!("{pad}0"),
            Process::Output(c, m, k) => {
                let head = format!("{pad}out({}, {})", self.term(c), self.term(m));
                self.with_continuation(head, k, depth)
            }
            Process::Input(c, pat, k) => {
                let head = format!("{pad}in({}, {})", self.term(c), self.pattern(pat));
                self.with_continuation(head, k, depth)
            }
            Process::Parallel(_, _) => {
                let mut branches = Vec::new();
                collect_parallel(p, &mut branches);
                let inner: Vec<String> = branches
                    .iter()
                    .map(|q| self.process(q, depth + 1))
                    .collect();
                format!("{pad}(\n{}\n{pad})", inner.join(&format!("\n{pad}|\n")))
            }
            Process::Repl(_, k) => {
                let body = self.process(k, depth);
                format!("{pad}!\n{body}", body = body)
            }
            Process::Restriction(n, s, k) => {
                let head = format!("{pad}new {n}: {s}");
                let body = self.process(k, depth);
                format!("{head};\n{body}")
            }
            Process::Let(pat, e, a, b) => {
                let head = format!("{pad}let {} = {} in", self.pattern(pat), self.term(e));
                let then = self.process(a, depth + 1);
                if matches!(**b, Process::Nil) {
                    format!("{head}\n{then}")
                } else {
                    let els = self.process(b, depth + 1);
                    format!("{head}\n{then}\n{pad}else\n{els}")
                }
            }
            Process::LetSuchThat(vs, atom, a, b) => {
                let head = if vs.is_empty() {
                    format!("{pad}if {} then", self.fact(atom))
                } else {
                    let names: Vec<String> = vs.iter().map(|v| self.var_name(v)).collect();
                    format!("{pad}let {} suchthat {} in", names.join(","), self.fact(atom))
                };
                let then = self.process(a, depth + 1);
                if matches!(**b, Process::Nil) {
                    format!("{head}\n{then}")
                } else {
                    let els = self.process(b, depth + 1);
                    format!("{head}\n{then}\n{pad}else\n{els}")
                }
            }
            Process::Event(e, args, k) => {
                let inner: Vec<String> = args.iter().map(|t| self.term(t)).collect();
                let head = format!("{pad}event {e}({})", inner.join(","));
                self.with_continuation(head, k, depth)
            }
        }
    }

    fn with_continuation(&mut self, head: String, k: &Process, depth: usize) -> String {
        if matches!(k, Process::Nil) {
            head
        } else {
            let body = self.process(k, depth);
            format!("{head};\n{body}")
        }
    }
}

fn collect_parallel<'p>(p: &'p Process, out: &mut Vec<&'p Process>) {
    match p {
        Process::Parallel(a, b) => {
            collect_parallel(a, out);
            collect_parallel(b, out);
        }
        other => out.push(other),
    }
}
