//! Side constraints on clauses: disequations, natural-number membership and
//! difference constraints `M >= N + n`.
//!
//! Difference constraints are decided with Bellman-Ford over the graph whose
//! vertices are the variables plus a zero vertex standing for the literal 0
//! (literal `k` is the zero vertex shifted by `k`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::signature::{Pretty, Signature};
use crate::term::{Subst, Term, Unifier, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// `forall universals. lhs <> rhs`
    Diseq {
        universals: Vec<Var>,
        lhs: Term,
        rhs: Term,
    },
    IsNat(Term),
    NotNat(Term),
    /// `lhs >= rhs + offset`; both sides natural numbers.
    Geq {
        lhs: Term,
        rhs: Term,
        offset: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfiability {
    Satisfiable(Vec<Constraint>),
    Unsatisfiable,
}

impl Satisfiability {
    pub fn is_unsat(&self) -> bool {
        matches!(self, Satisfiability::Unsatisfiable)
    }

    pub fn into_option(self) -> Option<Vec<Constraint>> {
        match self {
            Satisfiability::Satisfiable(cs) => Some(cs),
            Satisfiability::Unsatisfiable => None,
        }
    }
}

impl Constraint {
    pub fn is_nat_constraint(&self) -> bool {
        !matches!(self, Constraint::Diseq { .. })
    }

    /// Free variables (universals excluded).
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => {
                let mut vs = Vec::new();
                lhs.collect_vars(&mut vs);
                rhs.collect_vars(&mut vs);
                for v in vs {
                    if !universals.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Constraint::IsNat(t) | Constraint::NotNat(t) => t.collect_vars(out),
            Constraint::Geq { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => {
                [lhs.max_var(), rhs.max_var(), universals.iter().map(|v| v.0).max()]
                    .into_iter()
                    .flatten()
                    .max()
            }
            Constraint::IsNat(t) | Constraint::NotNat(t) => t.max_var(),
            Constraint::Geq { lhs, rhs, .. } => lhs.max_var().max(rhs.max_var()),
        }
    }

    /// Renames every variable, universals included.
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Constraint {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => Constraint::Diseq {
                universals: universals
                    .iter()
                    .map(|v| f(*v).as_var().expect("universals rename to variables"))
                    .collect(),
                lhs: lhs.map_vars(f),
                rhs: rhs.map_vars(f),
            },
            Constraint::IsNat(t) => Constraint::IsNat(t.map_vars(f)),
            Constraint::NotNat(t) => Constraint::NotNat(t.map_vars(f)),
            Constraint::Geq { lhs, rhs, offset } => Constraint::Geq {
                lhs: lhs.map_vars(f),
                rhs: rhs.map_vars(f),
                offset: *offset,
            },
        }
    }

    /// Applies `s` to the free variables. Callers keep universals out of
    /// `dom(s)` and out of its range by renaming clauses apart.
    pub fn apply(&self, s: &Subst) -> Constraint {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => {
                let s = s.restrict(|v| !universals.contains(&v));
                Constraint::Diseq {
                    universals: universals.clone(),
                    lhs: s.apply(lhs),
                    rhs: s.apply(rhs),
                }
            }
            Constraint::IsNat(t) => Constraint::IsNat(s.apply(t)),
            Constraint::NotNat(t) => Constraint::NotNat(s.apply(t)),
            Constraint::Geq { lhs, rhs, offset } => Constraint::Geq {
                lhs: s.apply(lhs),
                rhs: s.apply(rhs),
                offset: *offset,
            },
        }
    }

    /// Disequation with universals renumbered by first occurrence, so that
    /// alpha-equivalent disequations compare equal. Other constraints are
    /// returned unchanged.
    pub fn canonical(&self) -> Constraint {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => {
                let mut order = Vec::new();
                lhs.collect_vars(&mut order);
                rhs.collect_vars(&mut order);
                order.retain(|v| universals.contains(v));
                // Universals get ids above every free variable.
                let base = lhs.max_var().max(rhs.max_var()).map_or(0, |m| m + 1);
                let mut ren = |v: Var| match order.iter().position(|u| *u == v) {
                    Some(i) => Term::Var(Var(base + i as u32)),
                    None => Term::Var(v),
                };
                Constraint::Diseq {
                    universals: (0..order.len()).map(|i| Var(base + i as u32)).collect(),
                    lhs: lhs.map_vars(&mut ren),
                    rhs: rhs.map_vars(&mut ren),
                }
            }
            other => other.clone(),
        }
    }
}

impl Pretty for Constraint {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Diseq { universals, lhs, rhs } => {
                if !universals.is_empty() {
                    f.write_str("forall ")?;
                    for (i, v) in universals.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    f.write_str(". ")?;
                }
                write!(f, "{} <> {}", sig.show(lhs), sig.show(rhs))
            }
            Constraint::IsNat(t) => write!(f, "is_nat({})", sig.show(t)),
            Constraint::NotNat(t) => write!(f, "not is_nat({})", sig.show(t)),
            Constraint::Geq { lhs, rhs, offset } => {
                write!(f, "{} >= {}", sig.show(lhs), sig.show(rhs))?;
                match offset {
                    0 => Ok(()),
                    n if *n > 0 => write!(f, " + {n}"),
                    n => write!(f, " - {}", n.unsigned_abs()),
                }
            }
        }
    }
}

/// Simplifies disequations; other constraints pass through untouched.
///
/// A disequation whose sides cannot be unified always holds and is dropped.
/// If the unifier only binds universals, the sides are equal for some
/// choice of universals whatever the free variables are, so the set is
/// unsatisfiable. Anything else is kept.
pub fn simplify_diseqs(cs: &[Constraint]) -> Satisfiability {
    let mut out: Vec<Constraint> = Vec::with_capacity(cs.len());
    for c in cs {
        let Constraint::Diseq { universals, lhs, rhs } = c else {
            out.push(c.clone());
            continue;
        };
        let is_universal = |v: Var| universals.contains(&v);
        let mut u = Unifier::new();
        if !u.unify_preferring(lhs, rhs, &is_universal) {
            continue;
        }
        let mgu = u.finish();
        if mgu.domain().all(is_universal) {
            return Satisfiability::Unsatisfiable;
        }
        let mut used = Vec::new();
        lhs.collect_vars(&mut used);
        rhs.collect_vars(&mut used);
        let residual = Constraint::Diseq {
            universals: universals.iter().copied().filter(|v| used.contains(v)).collect(),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
        };
        if !out.iter().any(|d| d.canonical() == residual.canonical()) {
            out.push(residual);
        }
    }
    Satisfiability::Satisfiable(out)
}

/// Vertex of the difference graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Zero,
    Var(Var),
}

/// Value of a nat-constraint side: vertex plus constant shift.
fn node_of(t: &Term) -> Option<(Node, i64)> {
    match t {
        Term::Var(v) => Some((Node::Var(*v), 0)),
        Term::Nat(k) => Some((Node::Zero, *k as i64)),
        Term::App(..) => None,
    }
}

/// Difference constraints in "at least" form: `gap[(u, v)] = w` means
/// `u - v >= w`.
#[derive(Default)]
struct DiffGraph {
    nodes: BTreeSet<Node>,
    gaps: BTreeMap<(Node, Node), i64>,
}

impl DiffGraph {
    fn add(&mut self, u: Node, v: Node, w: i64) {
        self.nodes.insert(u);
        self.nodes.insert(v);
        let e = self.gaps.entry((u, v)).or_insert(w);
        *e = (*e).max(w);
    }

    /// Bellman-Ford from `src` on the "at most" graph: returns, for every
    /// vertex `v`, the least `d` with `v - src <= d` implied, or `None` if
    /// a negative cycle is reachable.
    fn bellman_ford(&self, src: Option<Node>) -> Option<BTreeMap<Node, i64>> {
        // `u - v >= w` is `v - u <= -w`: edge u -> v with weight -w.
        let edges: Vec<(Node, Node, i64)> = self.gaps.iter().map(|((u, v), w)| (*u, *v, -*w)).collect();
        let mut dist: BTreeMap<Node, i64> = match src {
            Some(s) => [(s, 0)].into_iter().collect(),
            None => self.nodes.iter().map(|n| (*n, 0)).collect(),
        };
        for _ in 0..self.nodes.len() {
            let mut changed = false;
            for (u, v, w) in &edges {
                if let Some(du) = dist.get(u).copied() {
                    let cand = du + w;
                    let dv = dist.entry(*v).or_insert(i64::MAX);
                    if cand < *dv {
                        *dv = cand;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Some(dist);
            }
        }
        let relaxes = edges.iter().any(|(u, v, w)| match (dist.get(u), dist.get(v)) {
            (Some(du), Some(dv)) => du + w < *dv,
            _ => false,
        });
        (!relaxes).then_some(dist)
    }
}

/// Simplifies natural-number constraints; disequations pass through.
///
/// Returns the constraints in canonical form: `is_nat` for every variable
/// forced natural, `not is_nat` facts, and for every ordered pair of
/// vertices the strongest implied difference bound.
pub fn simplify_nat(cs: &[Constraint]) -> Satisfiability {
    let mut out = Vec::new();
    let mut nat: BTreeSet<Var> = BTreeSet::new();
    let mut not_nat: BTreeSet<Var> = BTreeSet::new();
    let mut graph = DiffGraph::default();

    for c in cs {
        match c {
            Constraint::Diseq { .. } => out.push(c.clone()),
            Constraint::IsNat(t) => match t {
                Term::Var(v) => {
                    nat.insert(*v);
                }
                Term::Nat(_) => {}
                Term::App(..) => return Satisfiability::Unsatisfiable,
            },
            Constraint::NotNat(t) => match t {
                Term::Var(v) => {
                    not_nat.insert(*v);
                }
                Term::Nat(_) => return Satisfiability::Unsatisfiable,
                Term::App(..) => {}
            },
            Constraint::Geq { lhs, rhs, offset } => {
                let (Some((u, su)), Some((v, sv))) = (node_of(lhs), node_of(rhs)) else {
                    return Satisfiability::Unsatisfiable;
                };
                for n in [u, v] {
                    if let Node::Var(x) = n {
                        nat.insert(x);
                    }
                }
                // u + su >= v + sv + offset
                let w = sv + offset - su;
                if u == v {
                    if w > 0 {
                        return Satisfiability::Unsatisfiable;
                    }
                } else {
                    graph.add(u, v, w);
                }
            }
        }
    }

    if nat.intersection(&not_nat).next().is_some() {
        return Satisfiability::Unsatisfiable;
    }
    for v in &nat {
        graph.add(Node::Var(*v), Node::Zero, 0);
    }
    if graph.bellman_ford(None).is_none() {
        return Satisfiability::Unsatisfiable;
    }

    out.extend(nat.iter().map(|v| Constraint::IsNat(Term::Var(*v))));
    out.extend(not_nat.iter().map(|v| Constraint::NotNat(Term::Var(*v))));
    for &src in &graph.nodes {
        // Least upper bounds on `v - src`, i.e. `src >= v + (-d)`.
        let dist = graph.bellman_ford(Some(src)).expect("no negative cycle");
        for (&v, &d) in &dist {
            if v == src || d == i64::MAX {
                continue;
            }
            match (src, v) {
                (Node::Var(a), Node::Var(b)) => out.push(Constraint::Geq {
                    lhs: Term::Var(a),
                    rhs: Term::Var(b),
                    offset: -d,
                }),
                // b - 0 <= d: an upper bound on b.
                (Node::Zero, Node::Var(b)) => out.push(Constraint::Geq {
                    lhs: Term::Nat(d.max(0) as u64),
                    rhs: Term::Var(b),
                    offset: 0,
                }),
                // 0 - a <= d: a lower bound on a, only interesting when positive.
                (Node::Var(a), Node::Zero) if d < 0 => out.push(Constraint::Geq {
                    lhs: Term::Var(a),
                    rhs: Term::Nat(0),
                    offset: -d,
                }),
                _ => {}
            }
        }
    }
    Satisfiability::Satisfiable(out)
}

/// Both simplifiers in sequence.
pub fn simplify(cs: &[Constraint]) -> Satisfiability {
    if cs.is_empty() {
        return Satisfiability::Satisfiable(Vec::new());
    }
    match simplify_diseqs(cs) {
        Satisfiability::Satisfiable(cs) => simplify_nat(&cs),
        unsat => unsat,
    }
}

/// Whether every solution of `known` satisfies `c`.
///
/// Nat constraints are decided by refuting `known` plus the negation of
/// `c`; disequations are only recognised syntactically, up to renaming of
/// universals.
pub fn entails(known: &[Constraint], c: &Constraint) -> bool {
    let refutes = |extra: Constraint| {
        let mut cs: Vec<Constraint> = known.iter().filter(|k| k.is_nat_constraint()).cloned().collect();
        cs.push(extra);
        simplify_nat(&cs).is_unsat()
    };
    match c {
        Constraint::Diseq { .. } => {
            if simplify_diseqs(std::slice::from_ref(c)) == Satisfiability::Satisfiable(vec![]) {
                return true;
            }
            let canon = c.canonical();
            known.iter().any(|k| k.canonical() == canon)
        }
        Constraint::IsNat(t) => refutes(Constraint::NotNat(t.clone())),
        Constraint::NotNat(t) => refutes(Constraint::IsNat(t.clone())),
        Constraint::Geq { lhs, rhs, offset } => {
            refutes(Constraint::NotNat(lhs.clone()))
                && refutes(Constraint::NotNat(rhs.clone()))
                && refutes(Constraint::Geq {
                    lhs: rhs.clone(),
                    rhs: lhs.clone(),
                    offset: 1 - offset,
                })
        }
    }
}
