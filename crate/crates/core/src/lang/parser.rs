//! Recursive-descent parser for `.hsl` specifications.

use std::collections::HashMap;

use crate::fact::Fact;
use crate::formula::{Atom, Formula};
use crate::lang::ast::*;
use crate::lang::lexer::{lex, Pos, Tok, Token};
use crate::sig::{FreeName, PredDecl};
use crate::term::{FuncKind, FunctionSymbol, RewriteRule, Term, Var, SUCC};

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: [{code}] {msg}")]
pub struct Diagnostic {
    pub pos: Pos,
    pub code: &'static str,
    pub msg: String,
}

pub fn parse(src: &str) -> Result<Specification, Diagnostic> {
    let tokens = lex(src).map_err(|e| Diagnostic {
        pos: e.pos,
        code: "E-LEX",
        msg: e.msg,
    })?;
    let mut p = Parser {
        tokens,
        at: 0,
        spec: Specification::new(),
        used_names: std::collections::BTreeSet::new(),
    };
    p.parse_spec()?;
    Ok(p.spec)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    spec: Specification,
    used_names: std::collections::BTreeSet<String>,
}

type PResult<T> = Result<T, Diagnostic>;

/// Variable environment for one declaration's scope.
#[derive(Default, Clone)]
struct Env {
    vars: HashMap<String, Var>,
}

impl Env {
    fn bind(&mut self, name: &str, sort: Option<String>) -> Var {
        let v = Var::fresh(name, sort);
        self.vars.insert(name.to_string(), v.clone());
        v
    }
}

impl Parser {
    fn pos(&self) -> Pos {
        self.tokens
            .get(self.at)
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 0, col: 0 })
    }

    fn err<T>(&self, code: &'static str, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic {
            pos: self.pos(),
            code,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.at).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.at + 1).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> PResult<()> {
        match self.peek() {
            Some(x) if x == t => {
                self.at += 1;
                Ok(())
            }
            Some(x) => {
                let x = x.clone();
                self.err("E-SYNTAX", format!("expected `{t}`, found `{x}`"))
            }
            None => self.err("E-SYNTAX", format!("expected `{t}`, found end of input")),
        }
    }

    fn eat_kw(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.at += 1;
                Ok(())
            }
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err("E-SYNTAX", format!("expected `{kw}`, found `{found}`"))
            }
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err("E-SYNTAX", format!("expected identifier, found `{found}`"))
            }
        }
    }

    fn parse_spec(&mut self) -> PResult<()> {
        let mut n_queries = 0usize;
        while self.peek().is_some() {
            let kw = match self.peek() {
                Some(Tok::Ident(s)) => s.clone(),
                _ => return self.err("E-SYNTAX", "expected a declaration"),
            };
            match kw.as_str() {
                "type" => self.parse_type()?,
                "fun" => self.parse_fun()?,
                "const" => self.parse_const()?,
                "free" => self.parse_free()?,
                "reduc" => self.parse_reduc()?,
                "pred" => self.parse_pred()?,
                "event" => self.parse_event_decl()?,
                "clauses" => self.parse_clauses()?,
                "query" | "lemma" | "axiom" => {
                    n_queries += 1;
                    self.parse_statement(n_queries)?
                }
                "process" => self.parse_process_decl()?,
                other => {
                    return self.err("E-SYNTAX", format!("unknown declaration `{other}`"));
                }
            }
        }
        Ok(())
    }

    fn attrs(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.eat(&Tok::LBracket)?;
            out.push(self.ident()?);
            self.eat(&Tok::RBracket)?;
        }
        Ok(out)
    }

    fn check_sort(&self, s: &str) -> PResult<()> {
        if self.spec.sig.types.contains(s) {
            Ok(())
        } else {
            self.err("E-UNKNOWN-TYPE", format!("unknown type `{s}`"))
        }
    }

    fn parse_type(&mut self) -> PResult<()> {
        self.eat_kw("type")?;
        let name = self.ident()?;
        self.eat(&Tok::Dot)?;
        self.spec.sig.types.insert(name);
        Ok(())
    }

    fn parse_fun(&mut self) -> PResult<()> {
        self.eat_kw("fun")?;
        let name = self.ident()?;
        self.eat(&Tok::LParen)?;
        let mut arg_sorts = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let s = self.ident()?;
                self.check_sort(&s)?;
                arg_sorts.push(s);
                if self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(&Tok::RParen)?;
        self.eat(&Tok::Colon)?;
        let result_sort = self.ident()?;
        self.check_sort(&result_sort)?;
        let attrs = self.attrs()?;
        self.eat(&Tok::Dot)?;
        if self.spec.sig.functions.contains_key(&name) {
            return self.err("E-REDECL", format!("function `{name}` already declared"));
        }
        let kind = if attrs.iter().any(|a| a == "data") {
            FuncKind::Data
        } else {
            FuncKind::Constructor
        };
        self.spec.sig.functions.insert(
            name.clone(),
            FunctionSymbol {
                arity: arg_sorts.len(),
                name,
                kind,
                rules: vec![],
                arg_sorts,
                result_sort,
            },
        );
        Ok(())
    }

    fn parse_const(&mut self) -> PResult<()> {
        self.eat_kw("const")?;
        let name = self.ident()?;
        self.eat(&Tok::Colon)?;
        let sort = self.ident()?;
        self.check_sort(&sort)?;
        let attrs = self.attrs()?;
        self.eat(&Tok::Dot)?;
        let kind = if attrs.iter().any(|a| a == "data") {
            FuncKind::Data
        } else {
            FuncKind::Constructor
        };
        self.spec.sig.functions.insert(
            name.clone(),
            FunctionSymbol {
                arity: 0,
                name,
                kind,
                rules: vec![],
                arg_sorts: vec![],
                result_sort: sort,
            },
        );
        Ok(())
    }

    fn parse_free(&mut self) -> PResult<()> {
        self.eat_kw("free")?;
        let name = self.ident()?;
        self.eat(&Tok::Colon)?;
        let sort = self.ident()?;
        self.check_sort(&sort)?;
        let attrs = self.attrs()?;
        self.eat(&Tok::Dot)?;
        let private = attrs.iter().any(|a| a == "private");
        self.spec
            .sig
            .free_names
            .insert(name.clone(), FreeName { name, sort, private });
        Ok(())
    }

    fn parse_bindings(&mut self, env: &mut Env) -> PResult<Vec<Var>> {
        // group (, group)*   group := IDENT (, IDENT)* : SORT
        let mut vars = Vec::new();
        loop {
            let mut names = vec![self.ident()?];
            while self.peek() == Some(&Tok::Comma) {
                self.at += 1;
                names.push(self.ident()?);
            }
            self.eat(&Tok::Colon)?;
            let sort = self.ident()?;
            self.check_sort(&sort)?;
            for n in names {
                vars.push(env.bind(&n, Some(sort.clone())));
            }
            if self.peek() == Some(&Tok::Comma) {
                self.at += 1;
            } else {
                break;
            }
        }
        Ok(vars)
    }

    fn parse_reduc(&mut self) -> PResult<()> {
        self.eat_kw("reduc")?;
        let mut name: Option<String> = None;
        let mut rules = Vec::new();
        loop {
            let mut env = Env::default();
            if self.at_kw("forall") {
                self.at += 1;
                self.parse_bindings(&mut env)?;
                self.eat(&Tok::Semi)?;
            }
            let g = self.ident()?;
            self.eat(&Tok::LParen)?;
            let mut patterns = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    patterns.push(self.parse_term(&env)?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.at += 1;
                    } else {
                        break;
                    }
                }
            }
            self.eat(&Tok::RParen)?;
            self.eat(&Tok::Eq)?;
            let result = self.parse_term(&env)?;
            match &name {
                None => name = Some(g.clone()),
                Some(n) if *n == g => {}
                Some(n) => {
                    return self.err(
                        "E-REDUC",
                        format!("rewrite rules mix destructors `{n}` and `{g}`"),
                    );
                }
            }
            rules.push(RewriteRule { patterns, result });
            if self.at_kw("otherwise") {
                self.at += 1;
            } else {
                break;
            }
        }
        self.eat(&Tok::Dot)?;
        let name = name.unwrap();
        let arity = rules[0].patterns.len();
        if rules.iter().any(|r| r.patterns.len() != arity) {
            return self.err("E-ARITY", format!("destructor `{name}` rules disagree on arity"));
        }
        if self.spec.sig.functions.contains_key(&name) {
            return self.err("E-REDECL", format!("function `{name}` already declared"));
        }
        self.spec.sig.functions.insert(
            name.clone(),
            FunctionSymbol {
                arity,
                name,
                kind: FuncKind::Destructor,
                rules,
                arg_sorts: vec!["bitstring".into(); arity],
                result_sort: "bitstring".into(),
            },
        );
        Ok(())
    }

    fn parse_pred(&mut self) -> PResult<()> {
        self.eat_kw("pred")?;
        let name = self.ident()?;
        self.eat(&Tok::LParen)?;
        let mut arity = 0;
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let s = self.ident()?;
                self.check_sort(&s)?;
                arity += 1;
                if self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(&Tok::RParen)?;
        let attrs = self.attrs()?;
        self.eat(&Tok::Dot)?;
        let blocking = attrs.iter().any(|a| a == "block");
        self.spec
            .sig
            .predicates
            .insert(name.clone(), PredDecl { name, arity, blocking });
        Ok(())
    }

    fn parse_event_decl(&mut self) -> PResult<()> {
        self.eat_kw("event")?;
        let name = self.ident()?;
        self.eat(&Tok::LParen)?;
        let mut arity = 0;
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let s = self.ident()?;
                self.check_sort(&s)?;
                arity += 1;
                if self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(&Tok::RParen)?;
        self.eat(&Tok::Dot)?;
        self.spec.sig.events.insert(name, arity);
        Ok(())
    }

    /// Parses a term. Identifiers resolve to bound variables first, then free
    /// names, then nullary functions.
    fn parse_term(&mut self, env: &Env) -> PResult<Term> {
        let mut t = self.parse_term_atom(env)?;
        // successor suffix: `t + k`
        while self.peek() == Some(&Tok::Plus) {
            self.at += 1;
            match self.next() {
                Some(Tok::Int(k)) => {
                    for _ in 0..k {
                        t = Term::App(SUCC.to_string(), vec![t]);
                    }
                }
                _ => return self.err("E-SYNTAX", "expected integer after `+`"),
            }
        }
        Ok(t)
    }

    fn parse_term_atom(&mut self, env: &Env) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Term::nat(n))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let mut items = vec![self.parse_term(env)?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    items.push(self.parse_term(env)?);
                }
                self.eat(&Tok::RParen)?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Term::tuple(items))
                }
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.parse_term(env)?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.at += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.eat(&Tok::RParen)?;
                    match self.spec.sig.func_arity(&name) {
                        Some(a) if a == args.len() => Ok(Term::App(name, args)),
                        Some(a) => self.err(
                            "E-ARITY",
                            format!("`{name}` expects {a} arguments, got {}", args.len()),
                        ),
                        None => self.err("E-UNBOUND", format!("unknown function `{name}`")),
                    }
                } else if let Some(v) = env.vars.get(&name) {
                    Ok(Term::Var(v.clone()))
                } else if self.spec.sig.free_names.contains_key(&name) {
                    Ok(Term::Name(name, vec![]))
                } else if let Some(0) = self.spec.sig.func_arity(&name) {
                    Ok(Term::App(name, vec![]))
                } else {
                    self.err("E-UNBOUND", format!("unbound identifier `{name}`"))
                }
            }
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err("E-SYNTAX", format!("expected a term, found `{found}`"))
            }
        }
    }

    /// fact or constraint atom
    fn parse_atom(&mut self, env: &Env) -> PResult<Result<Fact, Atom>> {
        if self.at_kw("event") && self.peek2() == Some(&Tok::LParen) {
            self.at += 1;
            self.eat(&Tok::LParen)?;
            let ev = self.ident()?;
            let arity = match self.spec.sig.events.get(&ev) {
                Some(a) => *a,
                None => return self.err("E-UNBOUND", format!("unknown event `{ev}`")),
            };
            self.eat(&Tok::LParen)?;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.parse_term(env)?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.at += 1;
                    } else {
                        break;
                    }
                }
            }
            self.eat(&Tok::RParen)?;
            self.eat(&Tok::RParen)?;
            if args.len() != arity {
                return self.err("E-ARITY", format!("event `{ev}` expects {arity} arguments"));
            }
            return Ok(Ok(Fact::event(&ev, args)));
        }
        // attacker(..) / mess(..) / p(..) / term-relations
        if let Some(Tok::Ident(name)) = self.peek().cloned() {
            if self.peek2() == Some(&Tok::LParen)
                && (name == "attacker"
                    || name == "mess"
                    || self.spec.sig.predicates.contains_key(&name))
            {
                self.at += 1;
                self.eat(&Tok::LParen)?;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        args.push(self.parse_term(env)?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.at += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(&Tok::RParen)?;
                return match name.as_str() {
                    "attacker" => {
                        if args.len() != 1 {
                            return self.err("E-ARITY", "attacker() expects one argument");
                        }
                        Ok(Ok(Fact::att(args.pop().unwrap())))
                    }
                    "mess" => {
                        if args.len() != 2 {
                            return self.err("E-ARITY", "mess() expects two arguments");
                        }
                        let m = args.pop().unwrap();
                        let c = args.pop().unwrap();
                        Ok(Ok(Fact::mess(c, m)))
                    }
                    p => {
                        let decl = &self.spec.sig.predicates[p];
                        if args.len() != decl.arity {
                            return self.err(
                                "E-ARITY",
                                format!("predicate `{p}` expects {} arguments", decl.arity),
                            );
                        }
                        Ok(Ok(Fact::pred(p, args)))
                    }
                };
            }
        }
        let l = self.parse_term(env)?;
        match self.next() {
            Some(Tok::Eq) => Ok(Err(Atom::Equal(l, self.parse_term(env)?))),
            Some(Tok::Neq) => Ok(Err(Atom::Disequal(vec![], l, self.parse_term(env)?))),
            Some(Tok::Lt) => Ok(Err(Atom::NatLess(l, self.parse_term(env)?))),
            Some(Tok::Leq) => Ok(Err(Atom::NatLeq(l, self.parse_term(env)?))),
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err(
                    "E-SYNTAX",
                    format!("expected a fact or term relation, found `{found}`"),
                )
            }
        }
    }

    fn parse_clauses(&mut self) -> PResult<()> {
        self.eat_kw("clauses")?;
        loop {
            let mut env = Env::default();
            if self.at_kw("forall") {
                self.at += 1;
                self.parse_bindings(&mut env)?;
                self.eat(&Tok::Semi)?;
            }
            let mut facts = Vec::new();
            let mut formula = Formula::default();
            loop {
                match self.parse_atom(&env)? {
                    Ok(f) => facts.push(f),
                    Err(a) => formula.push(a),
                }
                if self.peek() == Some(&Tok::AndAnd) {
                    self.at += 1;
                } else {
                    break;
                }
            }
            let concl = if self.peek() == Some(&Tok::Arrow) {
                self.at += 1;
                match self.parse_atom(&env)? {
                    Ok(f) => f,
                    Err(_) => {
                        return self.err("E-CLAUSE", "clause conclusion must be a predicate fact")
                    }
                }
            } else {
                if facts.len() != 1 || !formula.is_true() {
                    return self.err("E-CLAUSE", "fact clause must be a single predicate atom");
                }
                facts.pop().unwrap()
            };
            self.spec.user_clauses.push(UserClause {
                hyps: facts,
                formula,
                concl,
            });
            if self.peek() == Some(&Tok::Semi) {
                self.at += 1;
            } else {
                break;
            }
        }
        self.eat(&Tok::Dot)?;
        Ok(())
    }

    fn parse_statement(&mut self, n: usize) -> PResult<()> {
        let kind_kw = self.ident()?;
        let mut kind = match kind_kw.as_str() {
            "query" => StatementKind::Query,
            "lemma" => StatementKind::Lemma,
            _ => StatementKind::Axiom,
        };
        let mut env = Env::default();
        // optional binder list terminated by `;`
        if let Some(Tok::Ident(_)) = self.peek() {
            // lookahead: a binder list starts with IDENT (",") ... ":" before any "("
            let mut j = self.at;
            let mut is_bindings = false;
            while let Some(t) = self.tokens.get(j) {
                match &t.tok {
                    Tok::Ident(_) | Tok::Comma => j += 1,
                    Tok::Colon => {
                        is_bindings = true;
                        break;
                    }
                    _ => break,
                }
            }
            if is_bindings {
                self.parse_bindings(&mut env)?;
                self.eat(&Tok::Semi)?;
            }
        }
        let mut premises = Vec::new();
        let mut premise_formula = Formula::default();
        loop {
            match self.parse_atom(&env)? {
                Ok(f) => premises.push(f),
                Err(a @ (Atom::NatLess(_, _) | Atom::NatLeq(_, _))) => premise_formula.push(a),
                Err(_) => {
                    return self.err(
                        "E-STATEMENT",
                        "statement premises admit facts and nat comparisons only",
                    )
                }
            }
            if self.peek() == Some(&Tok::AndAnd) {
                self.at += 1;
            } else {
                break;
            }
        }
        self.eat(&Tok::Implies)?;
        let mut conclusion = Vec::new();
        loop {
            let mut facts = Vec::new();
            let mut formula = Formula::default();
            loop {
                match self.parse_atom(&env)? {
                    Ok(f) => facts.push(f),
                    Err(a) => formula.push(a),
                }
                if self.peek() == Some(&Tok::AndAnd) {
                    self.at += 1;
                } else {
                    break;
                }
            }
            conclusion.push(Conjunct { facts, formula });
            if self.peek() == Some(&Tok::OrOr) {
                self.at += 1;
            } else {
                break;
            }
        }
        let attrs = self.attrs()?;
        self.eat(&Tok::Dot)?;
        let induction = attrs.iter().any(|a| a == "induction");
        if attrs.iter().any(|a| a == "axiom") {
            kind = StatementKind::Axiom;
        }
        let mut st = Statement {
            name: format!("{kind_kw}#{n}"),
            kind,
            premises,
            premise_formula,
            conclusion,
            induction,
            idx: 0,
        };
        st.canonicalize(&self.spec.sig);
        self.spec.statements.push(st);
        Ok(())
    }

    fn parse_process_decl(&mut self) -> PResult<()> {
        self.eat_kw("process")?;
        let mut env = Env::default();
        let p = self.parse_process(&mut env)?;
        self.eat(&Tok::Dot)?;
        if self.spec.process.is_some() {
            return self.err("E-REDECL", "duplicate process declaration");
        }
        self.spec.process = Some(p);
        Ok(())
    }

    fn parse_process(&mut self, env: &mut Env) -> PResult<Process> {
        let mut procs = vec![self.parse_seq(env)?];
        while self.peek() == Some(&Tok::Bar) {
            self.at += 1;
            procs.push(self.parse_seq(env)?);
        }
        let mut p = procs.pop().unwrap();
        while let Some(q) = procs.pop() {
            p = Process::Parallel(q.boxed(), p.boxed());
        }
        Ok(p)
    }

    fn parse_continuation(&mut self, env: &mut Env) -> PResult<Process> {
        if self.peek() == Some(&Tok::Semi) {
            self.at += 1;
            self.parse_seq(env)
        } else {
            Ok(Process::Nil)
        }
    }

    fn parse_seq(&mut self, env: &mut Env) -> PResult<Process> {
        match self.peek().cloned() {
            Some(Tok::Int(0)) => {
                self.at += 1;
                Ok(Process::Nil)
            }
            Some(Tok::Bang) => {
                self.at += 1;
                let p = self.parse_seq(env)?;
                Ok(Process::Repl(None, p.boxed()))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let p = self.parse_process(env)?;
                self.eat(&Tok::RParen)?;
                Ok(p)
            }
            Some(Tok::Ident(kw)) => match kw.as_str() {
                "out" => {
                    self.at += 1;
                    self.eat(&Tok::LParen)?;
                    let ch = self.parse_term(env)?;
                    self.eat(&Tok::Comma)?;
                    let m = self.parse_term(env)?;
                    self.eat(&Tok::RParen)?;
                    let k = self.parse_continuation(env)?;
                    Ok(Process::Output(ch, m, k.boxed()))
                }
                "in" => {
                    self.at += 1;
                    self.eat(&Tok::LParen)?;
                    let ch = self.parse_term(env)?;
                    self.eat(&Tok::Comma)?;
                    let pat = self.parse_pattern(env)?;
                    self.eat(&Tok::RParen)?;
                    let k = self.parse_continuation(env)?;
                    Ok(Process::Input(ch, pat, k.boxed()))
                }
                "new" => {
                    self.at += 1;
                    let name = self.ident()?;
                    let sort = if self.peek() == Some(&Tok::Colon) {
                        self.at += 1;
                        let s = self.ident()?;
                        self.check_sort(&s)?;
                        s
                    } else {
                        "bitstring".to_string()
                    };
                    self.eat(&Tok::Semi)?;
                    // restricted names shadow free names and variables; keep
                    // the surface name when it is globally unused so the
                    // pretty-printed form round-trips
                    let unique = self.fresh_name(&name);
                    let saved = env.vars.remove(&name);
                    self.spec.sig.bound_names.insert(unique.clone(), sort.clone());
                    let body = self.parse_seq_with_name(env, &name, &unique)?;
                    if let Some(v) = saved {
                        env.vars.insert(name, v);
                    }
                    Ok(Process::Restriction(unique, sort, body.boxed()))
                }
                "event" => {
                    self.at += 1;
                    let ev = self.ident()?;
                    let arity = match self.spec.sig.events.get(&ev) {
                        Some(a) => *a,
                        None => return self.err("E-UNBOUND", format!("unknown event `{ev}`")),
                    };
                    self.eat(&Tok::LParen)?;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.parse_term(env)?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.at += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.eat(&Tok::RParen)?;
                    if args.len() != arity {
                        return self
                            .err("E-ARITY", format!("event `{ev}` expects {arity} arguments"));
                    }
                    let k = self.parse_continuation(env)?;
                    Ok(Process::Event(ev, args, k.boxed()))
                }
                "if" => {
                    self.at += 1;
                    let atom = match self.parse_atom(env)? {
                        Ok(f) if f.is_pred() => f,
                        _ => {
                            return self.err(
                                "E-SYNTAX",
                                "if-condition must be a user predicate atom",
                            )
                        }
                    };
                    self.eat_kw("then")?;
                    let p = self.parse_seq(env)?;
                    let q = if self.at_kw("else") {
                        self.at += 1;
                        self.parse_seq(env)?
                    } else {
                        Process::Nil
                    };
                    Ok(Process::LetSuchThat(vec![], atom, p.boxed(), q.boxed()))
                }
                "let" => {
                    self.at += 1;
                    // lookahead for `suchthat`
                    let mut j = self.at;
                    let mut suchthat = false;
                    while let Some(t) = self.tokens.get(j) {
                        match &t.tok {
                            Tok::Ident(s) if s == "suchthat" => {
                                suchthat = true;
                                break;
                            }
                            Tok::Ident(_) | Tok::Comma => j += 1,
                            _ => break,
                        }
                    }
                    if suchthat {
                        let mut binders = Vec::new();
                        let mut names = vec![self.ident()?];
                        while self.peek() == Some(&Tok::Comma) {
                            self.at += 1;
                            names.push(self.ident()?);
                        }
                        self.eat_kw("suchthat")?;
                        let mut inner = env.clone();
                        for n in &names {
                            binders.push(inner.bind(n, None));
                        }
                        let atom = match self.parse_atom(&inner)? {
                            Ok(f) if f.is_pred() => f,
                            _ => {
                                return self.err(
                                    "E-SYNTAX",
                                    "suchthat condition must be a user predicate atom",
                                )
                            }
                        };
                        self.eat_kw("in")?;
                        let mut then_env = inner.clone();
                        let p = self.parse_seq(&mut then_env)?;
                        let q = if self.at_kw("else") {
                            self.at += 1;
                            self.parse_seq(env)?
                        } else {
                            Process::Nil
                        };
                        Ok(Process::LetSuchThat(binders, atom, p.boxed(), q.boxed()))
                    } else {
                        let mut inner = env.clone();
                        let pat = self.parse_pattern(&mut inner)?;
                        self.eat(&Tok::Eq)?;
                        let expr = self.parse_term(env)?;
                        self.eat_kw("in")?;
                        let p = self.parse_seq(&mut inner)?;
                        let q = if self.at_kw("else") {
                            self.at += 1;
                            self.parse_seq(env)?
                        } else {
                            Process::Nil
                        };
                        Ok(Process::Let(pat, expr, p.boxed(), q.boxed()))
                    }
                }
                other => self.err("E-SYNTAX", format!("unexpected `{other}` in process")),
            },
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err("E-SYNTAX", format!("expected a process, found `{found}`"))
            }
        }
    }

    /// Parses the body of a restriction with `name` resolving to the fresh
    /// private name `unique`. The binder is routed through the free-name
    /// table while the body parses, then occurrences are renamed to `unique`.
    fn parse_seq_with_name(&mut self, env: &mut Env, name: &str, unique: &str) -> PResult<Process> {
        let mut aliased = env.clone();
        aliased.vars.remove(name);
        let shadowed = self.spec.sig.free_names.insert(
            name.to_string(),
            FreeName {
                name: name.to_string(),
                sort: "bitstring".into(),
                private: true,
            },
        );
        let body = self.parse_seq(&mut aliased);
        match shadowed {
            Some(orig) => {
                self.spec.sig.free_names.insert(name.to_string(), orig);
            }
            None => {
                self.spec.sig.free_names.remove(name);
            }
        }
        Ok(rename_name(&body?, name, unique))
    }
}

/// Renames occurrences of name symbol `from[]` to `to[]` in a process.
fn rename_name(p: &Process, from: &str, to: &str) -> Process {
    let rt = |t: &Term| rename_name_term(t, from, to);
    let rf = |f: &Fact| {
        let mut f2 = f.clone();
        f2.kind = match &f.kind {
            crate::fact::FactKind::Att(t) => crate::fact::FactKind::Att(rt(t)),
            crate::fact::FactKind::Mess(c, m) => crate::fact::FactKind::Mess(rt(c), rt(m)),
            crate::fact::FactKind::Event(e, a) => {
                crate::fact::FactKind::Event(e.clone(), a.iter().map(rt).collect())
            }
            crate::fact::FactKind::Pred(q, a) => {
                crate::fact::FactKind::Pred(q.clone(), a.iter().map(rt).collect())
            }
        };
        f2
    };
    match p {
        Process::Nil => Process::Nil,
        Process::Output(c, m, k) => {
            Process::Output(rt(c), rt(m), rename_name(k, from, to).boxed())
        }
        Process::Input(c, pat, k) => Process::Input(
            rt(c),
            rename_name_pat(pat, from, to),
            rename_name(k, from, to).boxed(),
        ),
        Process::Parallel(a, b) => Process::Parallel(
            rename_name(a, from, to).boxed(),
            rename_name(b, from, to).boxed(),
        ),
        Process::Repl(v, k) => Process::Repl(v.clone(), rename_name(k, from, to).boxed()),
        Process::Restriction(n, s, k) => {
            Process::Restriction(n.clone(), s.clone(), rename_name(k, from, to).boxed())
        }
        Process::Let(pat, e, a, b) => Process::Let(
            rename_name_pat(pat, from, to),
            rt(e),
            rename_name(a, from, to).boxed(),
            rename_name(b, from, to).boxed(),
        ),
        Process::LetSuchThat(vs, f, a, b) => Process::LetSuchThat(
            vs.clone(),
            rf(f),
            rename_name(a, from, to).boxed(),
            rename_name(b, from, to).boxed(),
        ),
        Process::Event(e, args, k) => Process::Event(
            e.clone(),
            args.iter().map(rt).collect(),
            rename_name(k, from, to).boxed(),
        ),
    }
}

fn rename_name_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Name(n, args) if n == from => Term::Name(
            to.to_string(),
            args.iter().map(|a| rename_name_term(a, from, to)).collect(),
        ),
        Term::Name(n, args) => Term::Name(
            n.clone(),
            args.iter().map(|a| rename_name_term(a, from, to)).collect(),
        ),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| rename_name_term(a, from, to)).collect(),
        ),
        _ => t.clone(),
    }
}

fn rename_name_pat(p: &Pattern, from: &str, to: &str) -> Pattern {
    match p {
        Pattern::Var(v) => Pattern::Var(v.clone()),
        Pattern::Eq(t) => Pattern::Eq(rename_name_term(t, from, to)),
        Pattern::Tuple(ps) => {
            Pattern::Tuple(ps.iter().map(|q| rename_name_pat(q, from, to)).collect())
        }
    }
}

impl Parser {
    fn fresh_name(&mut self, base: &str) -> String {
        let taken = |p: &Parser, n: &str| {
            p.used_names.contains(n)
                || p.spec.sig.free_names.contains_key(n)
                || p.spec.sig.functions.contains_key(n)
                || p.spec.sig.bound_names.contains_key(n)
        };
        let mut candidate = base.to_string();
        let mut k = 0u32;
        while taken(self, &candidate) {
            k += 1;
            candidate = format!("{base}'{k}");
        }
        self.used_names.insert(candidate.clone());
        candidate
    }

    fn parse_pattern(&mut self, env: &mut Env) -> PResult<Pattern> {
        match self.peek().cloned() {
            Some(Tok::Eq) => {
                self.at += 1;
                let t = self.parse_term(env)?;
                Ok(Pattern::Eq(t))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let mut items = vec![self.parse_pattern(env)?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    items.push(self.parse_pattern(env)?);
                }
                self.eat(&Tok::RParen)?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Pattern::Tuple(items))
                }
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let sort = if self.peek() == Some(&Tok::Colon) {
                    self.at += 1;
                    let s = self.ident()?;
                    self.check_sort(&s)?;
                    Some(s)
                } else {
                    None
                };
                Ok(Pattern::Var(env.bind(&name, sort)))
            }
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("eof".into());
                self.err("E-SYNTAX", format!("expected a pattern, found `{found}`"))
            }
        }
    }
}
