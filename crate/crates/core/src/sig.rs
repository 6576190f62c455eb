//! Global signature: function symbols, predicates, events, free names.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{is_tuple_sym, FuncKind, FunctionSymbol, SUCC, ZERO};

/// A user predicate declaration. `blocking` predicates (declared with
/// `[block]`) have no defining clauses and are their own blocking counterpart.
#[derive(Debug, Clone)]
pub struct PredDecl {
    pub name: String,
    pub arity: usize,
    pub blocking: bool,
}

#[derive(Debug, Clone)]
pub struct FreeName {
    pub name: String,
    pub sort: String,
    pub private: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub types: BTreeSet<String>,
    pub functions: BTreeMap<String, FunctionSymbol>,
    pub predicates: BTreeMap<String, PredDecl>,
    pub events: BTreeMap<String, usize>,
    pub free_names: BTreeMap<String, FreeName>,
    /// Names bound by restrictions in the process, with their sorts.
    pub bound_names: BTreeMap<String, String>,
}

impl Signature {
    pub fn new() -> Signature {
        let mut sig = Signature::default();
        for t in ["bitstring", "channel", "nat", "bool"] {
            sig.types.insert(t.to_string());
        }
        sig
    }

    /// Kind of a function symbol, treating the built-in naturals and tuples
    /// as data constructors.
    pub fn func_kind(&self, name: &str) -> Option<FuncKind> {
        if name == ZERO || name == SUCC || is_tuple_sym(name) {
            return Some(FuncKind::Data);
        }
        self.functions.get(name).map(|f| f.kind)
    }

    pub fn func_arity(&self, name: &str) -> Option<usize> {
        if name == ZERO {
            return Some(0);
        }
        if name == SUCC {
            return Some(1);
        }
        if let Some(rest) = name.strip_prefix("@tup") {
            return rest.parse().ok();
        }
        self.functions.get(name).map(|f| f.arity)
    }

    pub fn is_destructor(&self, name: &str) -> bool {
        self.func_kind(name) == Some(FuncKind::Destructor)
    }

    /// Predicate is in F_ap (declared blocking; abstract semantics).
    pub fn is_abstract_pred(&self, p: &str) -> bool {
        self.predicates.get(p).map(|d| d.blocking).unwrap_or(false)
    }

    /// Predicate is in F_p (clause-defined user predicate).
    pub fn is_user_pred(&self, p: &str) -> bool {
        self.predicates.get(p).map(|d| !d.blocking).unwrap_or(false)
    }

    pub fn is_public_free(&self, n: &str) -> bool {
        self.free_names.get(n).map(|f| !f.private).unwrap_or(false)
    }

    /// All data constructors that occur in the signature (for C_std).
    pub fn data_constructors(&self) -> Vec<&FunctionSymbol> {
        self.functions
            .values()
            .filter(|f| f.kind == FuncKind::Data)
            .collect()
    }

    /// Inferred sort of a term; `None` when unknown (attacker names, fail,
    /// unsorted variables). Tuples count as bitstring.
    pub fn sort_of(&self, t: &crate::term::Term) -> Option<String> {
        use crate::term::Term;
        match t {
            Term::Var(v) => v.sort.clone(),
            Term::Fail => None,
            Term::Name(n, _) => self
                .free_names
                .get(n)
                .map(|f| f.sort.clone())
                .or_else(|| self.bound_names.get(n).cloned()),
            Term::App(f, _) => {
                if f == ZERO || f == SUCC {
                    Some("nat".to_string())
                } else if is_tuple_sym(f) {
                    Some("bitstring".to_string())
                } else {
                    self.functions.get(f).map(|d| d.result_sort.clone())
                }
            }
        }
    }
}
