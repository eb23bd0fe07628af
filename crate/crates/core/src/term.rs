//! Terms of the free algebra, substitutions, unification and matching.
//!
//! Variables are plain numeric ids. Clauses are kept with their variables
//! numbered from zero, so renaming a clause apart from another one is a
//! single [`Term::shift`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::signature::{Pretty, Signature, SymbolId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Nat(u64),
    App(SymbolId, Arc<[Term]>),
}

impl Term {
    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    pub fn app(f: SymbolId, args: Vec<Term>) -> Term {
        Term::App(f, args.into())
    }

    pub fn constant(c: SymbolId) -> Term {
        Term::App(c, Arc::from([]))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Nat(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Height of the term tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) if !args.is_empty() => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Nat(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::Nat(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::Nat(_) => None,
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    pub fn shift(&self, offset: u32) -> Term {
        if offset == 0 {
            return self.clone();
        }
        self.map_vars(&mut |v| Term::Var(Var(v.0 + offset)))
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Nat(_) => self.clone(),
            Term::App(_, args) if args.is_empty() => self.clone(),
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    pub fn for_each_symbol(&self, f: &mut impl FnMut(SymbolId)) {
        if let Term::App(g, args) = self {
            f(*g);
            args.iter().for_each(|a| a.for_each_symbol(f));
        }
    }

    pub fn subterms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        out.push(self);
        if let Term::App(_, args) = self {
            args.iter().for_each(|a| a.subterms(out));
        }
    }
}

impl Pretty for Term {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Nat(n) => write!(f, "{n}"),
            Term::App(g, args) => {
                f.write_str(&sig.symbol(*g).ident)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    args.pretty(sig, f)?;
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A finite map from variables to terms, applied simultaneously.
///
/// Substitutions produced by [`unify`] are idempotent; matchers may bind a
/// variable to a term mentioning variables of the same id space, which is
/// fine because application never chases bindings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: Var, t: Term) -> Self {
        let mut s = Self::new();
        s.map.insert(v, t);
        s
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        Subst {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.map.keys().copied()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        self.apply_changed(t).unwrap_or_else(|| t.clone())
    }

    fn apply_changed(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Var(v) => self.map.get(v).cloned(),
            Term::Nat(_) => None,
            Term::App(g, args) => {
                let mut out: Option<Vec<Term>> = None;
                for (i, a) in args.iter().enumerate() {
                    if let Some(b) = self.apply_changed(a) {
                        out.get_or_insert_with(|| args[..i].to_vec()).push(b);
                    } else if let Some(v) = out.as_mut() {
                        v.push(a.clone());
                    }
                }
                out.map(|v| Term::App(*g, v.into()))
            }
        }
    }

    /// `self` followed by `other`: `x(self∘other) = (x self) other`.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut map: BTreeMap<Var, Term> = self.map.iter().map(|(v, t)| (*v, other.apply(t))).collect();
        for (v, t) in &other.map {
            map.entry(*v).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| t.as_var() != Some(*v));
        Subst { map }
    }

    pub fn restrict(&self, keep: impl Fn(Var) -> bool) -> Subst {
        Subst {
            map: self
                .map
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(v, t)| (*v, t.clone()))
                .collect(),
        }
    }
}

impl Pretty for Subst {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> ")?;
            t.pretty(sig, f)?;
        }
        f.write_str("}")
    }
}

/// Incremental syntactic unification with occur check.
///
/// Bindings are kept in triangular form while unifying and only resolved
/// into an idempotent [`Subst`] by [`Unifier::finish`].
#[derive(Clone, Debug, Default)]
pub struct Unifier {
    bindings: HashMap<Var, Term>,
}

impl Unifier {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from an existing (idempotent) substitution.
    pub fn from_subst(s: &Subst) -> Self {
        Unifier {
            bindings: s.map.iter().map(|(v, t)| (*v, t.clone())).collect(),
        }
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(u) => t = u,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => *w == v,
            Term::Nat(_) => false,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        self.unify_preferring(a, b, &|_| false)
    }

    /// Like [`Unifier::unify`], but when two unbound variables meet, a
    /// variable satisfying `prefer` is the one that gets bound.
    pub fn unify_preferring(&mut self, a: &Term, b: &Term, prefer: &dyn Fn(Var) -> bool) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = stack.pop() {
            let a = self.walk(&a).clone();
            let b = self.walk(&b).clone();
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) if x == y => {}
                (Term::Var(x), Term::Var(y)) => {
                    if prefer(*y) && !prefer(*x) {
                        self.bindings.insert(*y, a.clone());
                    } else {
                        self.bindings.insert(*x, b.clone());
                    }
                }
                (Term::Var(x), _) => {
                    if self.occurs(*x, &b) {
                        return false;
                    }
                    self.bindings.insert(*x, b.clone());
                }
                (_, Term::Var(y)) => {
                    if self.occurs(*y, &a) {
                        return false;
                    }
                    self.bindings.insert(*y, a.clone());
                }
                (Term::Nat(m), Term::Nat(n)) => {
                    if m != n {
                        return false;
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                _ => return false,
            }
        }
        true
    }

    pub fn unify_all<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> bool {
        pairs.into_iter().all(|(a, b)| self.unify(a, b))
    }

    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::App(g, args) if !args.is_empty() => Term::App(*g, args.iter().map(|a| self.resolve(a)).collect()),
            u => u.clone(),
        }
    }

    pub fn finish(self) -> Subst {
        let map = self
            .bindings
            .keys()
            .map(|v| (*v, self.resolve(&Term::Var(*v))))
            .filter(|(v, t)| t.as_var() != Some(*v))
            .collect();
        Subst { map }
    }
}

/// Most general unifier of two terms, or `None`.
pub fn unify(a: &Term, b: &Term) -> Option<Subst> {
    let mut u = Unifier::new();
    u.unify(a, b).then(|| u.finish())
}

/// One-sided unification: a substitution `s` with `s(pattern) == target`.
pub fn match_term(pattern: &Term, target: &Term) -> Option<Subst> {
    let mut m = Matcher::new();
    m.match_term(pattern, target).then(|| m.to_subst())
}

/// Backtrackable matching state. Variables of the target are treated as
/// constants, even when they share ids with pattern variables.
#[derive(Clone, Debug, Default)]
pub struct Matcher {
    bindings: Vec<(Var, Term)>,
}

impl Matcher {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pins each variable to itself, so it can only match itself.
    pub fn with_fixed(vars: impl IntoIterator<Item = Var>) -> Self {
        Matcher {
            bindings: vars.into_iter().map(|v| (v, Term::Var(v))).collect(),
        }
    }

    pub fn from_subst(s: &Subst) -> Self {
        Matcher {
            bindings: s.iter().map(|(v, t)| (*v, t.clone())).collect(),
        }
    }

    pub fn mark(&self) -> usize {
        self.bindings.len()
    }

    pub fn undo(&mut self, mark: usize) {
        self.bindings.truncate(mark);
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.bindings.iter().find(|(w, _)| *w == v).map(|(_, t)| t)
    }

    /// Extends the bindings; on failure the bindings are left as they were.
    pub fn match_term(&mut self, pattern: &Term, target: &Term) -> bool {
        let mark = self.mark();
        if self.go(pattern, target) {
            true
        } else {
            self.undo(mark);
            false
        }
    }

    fn go(&mut self, pattern: &Term, target: &Term) -> bool {
        match (pattern, target) {
            (Term::Var(v), _) => match self.get(*v) {
                Some(bound) => bound == target,
                None => {
                    self.bindings.push((*v, target.clone()));
                    true
                }
            },
            (Term::Nat(m), Term::Nat(n)) => m == n,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.go(x, y))
            }
            _ => false,
        }
    }

    pub fn to_subst(&self) -> Subst {
        Subst {
            map: self
                .bindings
                .iter()
                .filter(|(v, t)| t.as_var() != Some(*v))
                .cloned()
                .collect(),
        }
    }
}
