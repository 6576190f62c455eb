//! Constraint formulas attached to clauses: equalities, universally quantified
//! disequalities, and comparisons over successor-encoded naturals.
//!
//! The solver is deliberately conservative: satisfiability may be
//! over-approximated and entailment under-approximated, never the reverse.

use std::collections::HashMap;

use crate::term::{mgu_terms, Subst, Term, Unifier, Var, ZERO};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Equal(Term, Term),
    /// `forall qvars. left != right`; quantified variables occur only here.
    Disequal(Vec<Var>, Term, Term),
    NatLess(Term, Term),
    NatLeq(Term, Term),
}

impl Atom {
    pub fn apply(&self, s: &Subst) -> Atom {
        match self {
            Atom::Equal(a, b) => Atom::Equal(s.apply(a), s.apply(b)),
            Atom::Disequal(q, a, b) => Atom::Disequal(q.clone(), s.apply(a), s.apply(b)),
            Atom::NatLess(a, b) => Atom::NatLess(s.apply(a), s.apply(b)),
            Atom::NatLeq(a, b) => Atom::NatLeq(s.apply(a), s.apply(b)),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Var>) {
        match self {
            Atom::Equal(a, b) | Atom::NatLess(a, b) | Atom::NatLeq(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Atom::Disequal(q, a, b) => {
                let mut all = Vec::new();
                a.vars_into(&mut all);
                b.vars_into(&mut all);
                for v in all {
                    if !q.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Atom::Equal(a, b) => write!(f, "{a} = {b}"),
            Atom::Disequal(q, a, b) => {
                if !q.is_empty() {
                    write!(f, "forall ")?;
                    for (i, v) in q.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, ". ")?;
                }
                write!(f, "{a} <> {b}")
            }
            Atom::NatLess(a, b) => write!(f, "{a} < {b}"),
            Atom::NatLeq(a, b) => write!(f, "{a} <= {b}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Formula {
    pub atoms: Vec<Atom>,
}

impl Formula {
    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn apply(&self, s: &Subst) -> Formula {
        Formula {
            atoms: self.atoms.iter().map(|a| a.apply(s)).collect(),
        }
    }

    pub fn and(&self, other: &Formula) -> Formula {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
        Formula { atoms }
    }

    pub fn push(&mut self, a: Atom) {
        if !self.atoms.contains(&a) {
            self.atoms.push(a);
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.atoms {
            a.vars_into(&mut out);
        }
        out
    }

    /// Solves all equality atoms into a substitution, simplifies what remains,
    /// and reports unsatisfiability. The returned substitution must be applied
    /// to the enclosing clause by the caller.
    pub fn normalize(&self) -> Option<(Subst, Formula)> {
        let mut unifier = Unifier::new();
        for a in &self.atoms {
            if let Atom::Equal(l, r) = a {
                if unifier.unify(l, r).is_err() {
                    return None;
                }
            }
        }
        let sigma = unifier.subst;
        let mut out = Formula::default();
        for a in &self.atoms {
            match a.apply(&sigma) {
                Atom::Equal(_, _) => {}
                Atom::Disequal(q, l, r) => {
                    if l == r {
                        return None;
                    }
                    // Holds for every instance when the two sides cannot be
                    // unified at all (quantified or free alike).
                    if mgu_terms(&l, &r).is_some() {
                        out.push(Atom::Disequal(q, l, r));
                    }
                }
                Atom::NatLess(l, r) => match nat_compare(&l, &r) {
                    Some(std::cmp::Ordering::Less) => {}
                    Some(_) => return None,
                    None => out.push(Atom::NatLess(l, r)),
                },
                Atom::NatLeq(l, r) => match nat_compare(&l, &r) {
                    Some(std::cmp::Ordering::Greater) => return None,
                    Some(_) => {}
                    None => out.push(Atom::NatLeq(l, r)),
                },
            }
        }
        if !nat_consistent(&out) {
            return None;
        }
        Some((sigma, out))
    }

    /// Conservative entailment `self |= other`: true answers are sound.
    pub fn implies(&self, other: &Formula) -> bool {
        let graph = DiffGraph::from_formula(self);
        'outer: for atom in &other.atoms {
            match atom {
                Atom::Equal(l, r) => {
                    if l != r {
                        return false;
                    }
                }
                Atom::Disequal(q, l, r) => {
                    if mgu_terms(l, r).is_none() {
                        continue;
                    }
                    for mine in &self.atoms {
                        if let Atom::Disequal(q2, l2, r2) = mine {
                            if diseq_alpha_eq(q, l, r, q2, l2, r2) {
                                continue 'outer;
                            }
                        }
                    }
                    return false;
                }
                Atom::NatLess(l, r) => {
                    if !graph.entails(l, r, -1) {
                        return false;
                    }
                }
                Atom::NatLeq(l, r) => {
                    if !graph.entails(l, r, 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Evaluates a ground formula (used by the derivation checker).
    pub fn eval_ground(&self) -> Option<bool> {
        for a in &self.atoms {
            match a {
                Atom::Equal(l, r) => {
                    if l != r {
                        return Some(false);
                    }
                }
                Atom::Disequal(q, l, r) => {
                    if q.is_empty() {
                        if l == r {
                            return Some(false);
                        }
                    } else if mgu_terms(l, r).is_some() {
                        // an instantiation of the quantified vars equates them
                        return Some(false);
                    }
                }
                Atom::NatLess(l, r) => match nat_compare(l, r) {
                    Some(std::cmp::Ordering::Less) => {}
                    Some(_) => return Some(false),
                    None => return None,
                },
                Atom::NatLeq(l, r) => match nat_compare(l, r) {
                    Some(std::cmp::Ordering::Greater) => return Some(false),
                    Some(_) => {}
                    None => return None,
                },
            }
        }
        Some(true)
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

fn diseq_alpha_eq(q1: &[Var], l1: &Term, r1: &Term, q2: &[Var], l2: &Term, r2: &Term) -> bool {
    if q1.is_empty() && q2.is_empty() {
        return l1 == l2 && r1 == r2;
    }
    if q1.len() != q2.len() {
        return false;
    }
    // rename q2 to q1 positionally
    let mut s = Subst::new();
    for (a, b) in q2.iter().zip(q1) {
        s.bind(a.clone(), Term::Var(b.clone()));
    }
    &s.apply(l2) == l1 && &s.apply(r2) == r1
}

/// Structural comparison of successor-encoded naturals; `None` when symbolic.
fn nat_compare(l: &Term, r: &Term) -> Option<std::cmp::Ordering> {
    let (a, ub) = l.strip_succ();
    let (b, vb) = r.strip_succ();
    let is_zero = |t: &Term| matches!(t, Term::App(f, _) if f == ZERO);
    if ub == vb {
        return Some(a.cmp(&b));
    }
    if is_zero(ub) && is_zero(vb) {
        return Some(a.cmp(&b));
    }
    // succ^a(u) vs succ^b(u) handled above; zero vs succ^b(w): zero <= anything
    if is_zero(ub) && a == 0 && (b > 0 || is_zero(vb)) {
        // 0 < succ^b(w) whenever b > 0; 0 <= anything
        return if b > 0 {
            Some(std::cmp::Ordering::Less)
        } else {
            None
        };
    }
    None
}

/// Difference-constraint graph over nat bases: an edge `u -> w` with weight c
/// encodes `u - w <= c`.
struct DiffGraph {
    nodes: Vec<Term>,
    index: HashMap<Term, usize>,
    dist: Vec<Vec<i64>>,
}

const INF: i64 = i64::MAX / 4;

impl DiffGraph {
    fn from_formula(phi: &Formula) -> DiffGraph {
        let mut g = DiffGraph {
            nodes: Vec::new(),
            index: HashMap::new(),
            dist: Vec::new(),
        };
        let zero = Term::App(ZERO.to_string(), vec![]);
        g.node(&zero);
        for a in &phi.atoms {
            match a {
                Atom::NatLess(l, r) => g.edge_from_atom(l, r, -1),
                Atom::NatLeq(l, r) => g.edge_from_atom(l, r, 0),
                _ => {}
            }
        }
        // every natural is >= 0: zero - u <= 0
        let zi = g.index[&zero];
        for i in 0..g.nodes.len() {
            if g.dist[zi][i] > 0 {
                g.dist[zi][i] = 0;
            }
        }
        let n = g.nodes.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = g.dist[i][k].saturating_add(g.dist[k][j]);
                    if via < g.dist[i][j] {
                        g.dist[i][j] = via;
                    }
                }
            }
        }
        g
    }

    fn node(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(t.clone());
        self.index.insert(t.clone(), i);
        for row in &mut self.dist {
            row.push(INF);
        }
        self.dist.push(vec![INF; i + 1]);
        self.dist[i][i] = 0;
        i
    }

    /// `succ^a(u) - succ^b(w) <= c`  ==  `u - w <= c + b - a`
    fn edge_from_atom(&mut self, l: &Term, r: &Term, c: i64) {
        let (a, ub) = l.strip_succ();
        let (b, wb) = r.strip_succ();
        let (ub, wb) = (ub.clone(), wb.clone());
        let i = self.node(&ub);
        let j = self.node(&wb);
        let w = c + b as i64 - a as i64;
        if w < self.dist[i][j] {
            self.dist[i][j] = w;
        }
    }

    fn entails(&self, l: &Term, r: &Term, c: i64) -> bool {
        if let Some(ord) = nat_compare(l, r) {
            return match c {
                -1 => ord == std::cmp::Ordering::Less,
                _ => ord != std::cmp::Ordering::Greater,
            };
        }
        let (a, ub) = l.strip_succ();
        let (b, wb) = r.strip_succ();
        let (i, j) = match (self.index.get(ub), self.index.get(wb)) {
            (Some(&i), Some(&j)) => (i, j),
            _ => return false,
        };
        // need: u - w <= c + b - a
        self.dist[i][j] <= c + b as i64 - a as i64
    }
}

fn nat_consistent(phi: &Formula) -> bool {
    let g = DiffGraph::from_formula(phi);
    for i in 0..g.nodes.len() {
        if g.dist[i][i] < 0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> Term {
        Term::Var(Var {
            name: n.into(),
            id: 0,
            sort: None,
        })
    }

    fn diseq(l: Term, r: Term) -> Atom {
        Atom::Disequal(vec![], l, r)
    }

    #[test]
    fn implication_reflexive_on_disequality() {
        let a = Term::app("a", vec![]);
        let phi = Formula {
            atoms: vec![diseq(var("x"), a.clone())],
        };
        assert!(phi.implies(&phi));
    }

    #[test]
    fn implication_distinct_disequalities() {
        let phi1 = Formula {
            atoms: vec![diseq(var("x"), Term::app("a", vec![]))],
        };
        let phi2 = Formula {
            atoms: vec![diseq(var("x"), Term::app("b", vec![]))],
        };
        assert!(!phi1.implies(&phi2));
    }

    #[test]
    fn nat_transitivity() {
        // (j < i && i < k) |= (j < k)
        let phi1 = Formula {
            atoms: vec![
                Atom::NatLess(var("j"), var("i")),
                Atom::NatLess(var("i"), var("k")),
            ],
        };
        let phi2 = Formula {
            atoms: vec![Atom::NatLess(var("j"), var("k"))],
        };
        assert!(phi1.implies(&phi2));
        assert!(!phi2.implies(&phi1));
    }

    #[test]
    fn nat_transitivity_exhaustive_oracle() {
        // brute-force check of the derived example over naturals <= 5
        for i in 0u64..=5 {
            for j in 0u64..=5 {
                for k in 0u64..=5 {
                    if j < i && i < k {
                        assert!(j < k);
                    }
                }
            }
        }
        // and the symbolic checker agrees on concrete instances
        for i in 0u64..=5 {
            for j in 0u64..=5 {
                let phi = Formula {
                    atoms: vec![Atom::NatLess(Term::nat(j), Term::nat(i))],
                };
                assert_eq!(phi.normalize().is_some(), j < i);
            }
        }
    }

    #[test]
    fn strict_self_successor() {
        // x < x + 1 entailed by the empty formula
        let phi = Formula::default();
        let goal = Formula {
            atoms: vec![Atom::NatLess(
                var("x"),
                Term::App(crate::term::SUCC.into(), vec![var("x")]),
            )],
        };
        assert!(phi.implies(&goal));
    }

    #[test]
    fn normalize_solves_equalities() {
        let phi = Formula {
            atoms: vec![Atom::Equal(var("x"), Term::app("a", vec![]))],
        };
        let (sigma, rest) = phi.normalize().unwrap();
        assert!(rest.is_true());
        assert_eq!(sigma.apply(&var("x")), Term::app("a", vec![]));
    }

    #[test]
    fn normalize_detects_nat_cycle() {
        let phi = Formula {
            atoms: vec![
                Atom::NatLess(var("i"), var("j")),
                Atom::NatLess(var("j"), var("i")),
            ],
        };
        assert!(phi.normalize().is_none());
    }

    #[test]
    fn identical_disequality_is_unsat() {
        let phi = Formula {
            atoms: vec![diseq(var("x"), var("x"))],
        };
        assert!(phi.normalize().is_none());
    }
}
