//! Candidate retrieval for subsumption and resolution partners.
//!
//! Both indexes over-approximate: every real partner is returned, along
//! with some that the exact check later rejects.

use std::collections::{BTreeMap, HashMap};

use crate::clause::{Clause, Fact};
use crate::signature::{PredicateId, Signature, SymbolId};
use crate::term::Term;

/// Number of symbols counted individually; the rest share one bucket.
pub const TOP_SYMBOLS: usize = 16;

/// Decides which features are computed. Fixed for the life of an index.
#[derive(Clone, Debug)]
pub struct FeatureSpec {
    predicates: usize,
    tracked: HashMap<SymbolId, usize>,
}

impl FeatureSpec {
    /// Tracks the [`TOP_SYMBOLS`] symbols occurring most often in `clauses`.
    pub fn new<'a>(sig: &Signature, clauses: impl IntoIterator<Item = &'a Clause>) -> Self {
        let mut counts: HashMap<SymbolId, usize> = HashMap::new();
        for c in clauses {
            for fact in c.hyps.iter().chain(std::iter::once(&c.concl)) {
                for t in &fact.args {
                    t.for_each_symbol(&mut |f| *counts.entry(f).or_default() += 1);
                }
            }
        }
        let mut ranked: Vec<(SymbolId, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let tracked = ranked
            .into_iter()
            .take(TOP_SYMBOLS)
            .enumerate()
            .map(|(i, (f, _))| (f, i))
            .collect();
        FeatureSpec {
            predicates: sig.predicates().count(),
            tracked,
        }
    }

    pub fn len(&self) -> usize {
        2 + self.predicates + self.tracked.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Hypothesis count, total size, hypotheses per predicate, occurrences
    /// of each tracked symbol, occurrences of all other symbols. Each
    /// feature can only grow from a subsuming clause to a subsumed one.
    pub fn features(&self, c: &Clause) -> Vec<u32> {
        let mut v = vec![0u32; self.len()];
        v[0] = c.hyps.len() as u32;
        let sym_base = 2 + self.predicates;
        let overflow = self.len() - 1;
        for fact in c.hyps.iter().chain(std::iter::once(&c.concl)) {
            v[1] += fact.size() as u32;
            for t in &fact.args {
                t.for_each_symbol(&mut |f| match self.tracked.get(&f) {
                    Some(i) => v[sym_base + i] += 1,
                    None => v[overflow] += 1,
                });
            }
        }
        for h in &c.hyps {
            v[2 + h.pred.0 as usize] += 1;
        }
        v
    }
}

#[derive(Debug, Default)]
struct FvNode {
    children: BTreeMap<u32, FvNode>,
    ids: Vec<usize>,
}

impl FvNode {
    fn is_empty(&self) -> bool {
        self.children.is_empty() && self.ids.is_empty()
    }
}

/// Feature-vector trie over stored clauses, partitioned by conclusion
/// predicate.
#[derive(Debug)]
pub struct FeatureIndex {
    spec: FeatureSpec,
    roots: HashMap<PredicateId, FvNode>,
    len: usize,
}

impl FeatureIndex {
    pub fn new(spec: FeatureSpec) -> Self {
        FeatureIndex {
            spec,
            roots: HashMap::new(),
            len: 0,
        }
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: usize, c: &Clause) {
        let fv = self.spec.features(c);
        let mut node = self.roots.entry(c.concl.pred).or_default();
        for x in fv {
            node = node.children.entry(x).or_default();
        }
        node.ids.push(id);
        self.len += 1;
    }

    /// Removes `id`, which must have been inserted with the same clause.
    pub fn remove(&mut self, id: usize, c: &Clause) -> bool {
        fn go(node: &mut FvNode, fv: &[u32], id: usize) -> bool {
            match fv.split_first() {
                None => match node.ids.iter().position(|&x| x == id) {
                    Some(i) => {
                        node.ids.swap_remove(i);
                        true
                    }
                    None => false,
                },
                Some((x, rest)) => {
                    let Some(child) = node.children.get_mut(x) else {
                        return false;
                    };
                    let hit = go(child, rest, id);
                    if child.is_empty() {
                        node.children.remove(x);
                    }
                    hit
                }
            }
        }
        let fv = self.spec.features(c);
        let Some(root) = self.roots.get_mut(&c.concl.pred) else {
            return false;
        };
        let hit = go(root, &fv, id);
        if hit {
            self.len -= 1;
        }
        hit
    }

    /// Stored clauses that may subsume `c`, in ascending id order.
    pub fn generalizations(&self, c: &Clause) -> Vec<usize> {
        self.collect(c, true)
    }

    /// Stored clauses that `c` may subsume, in ascending id order.
    pub fn instances(&self, c: &Clause) -> Vec<usize> {
        self.collect(c, false)
    }

    fn collect(&self, c: &Clause, below: bool) -> Vec<usize> {
        fn go(node: &FvNode, fv: &[u32], below: bool, out: &mut Vec<usize>) {
            match fv.split_first() {
                None => out.extend_from_slice(&node.ids),
                Some((&x, rest)) => {
                    let range: Box<dyn Iterator<Item = (&u32, &FvNode)>> = if below {
                        Box::new(node.children.range(..=x))
                    } else {
                        Box::new(node.children.range(x..))
                    };
                    for (_, child) in range {
                        go(child, rest, below, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        if let Some(root) = self.roots.get(&c.concl.pred) {
            go(root, &self.spec.features(c), below, &mut out);
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Pred(PredicateId),
    Sym(SymbolId, usize),
    Nat(u64),
    Var,
}

impl Key {
    fn arity(self) -> usize {
        match self {
            Key::Pred(_) | Key::Nat(_) | Key::Var => 0,
            Key::Sym(_, n) => n,
        }
    }
}

fn keys(fact: &Fact) -> Vec<Key> {
    fn go(t: &Term, out: &mut Vec<Key>) {
        match t {
            Term::Var(_) => out.push(Key::Var),
            Term::Nat(n) => out.push(Key::Nat(*n)),
            Term::App(f, args) => {
                out.push(Key::Sym(*f, args.len()));
                args.iter().for_each(|a| go(a, out));
            }
        }
    }
    let mut out = vec![Key::Pred(fact.pred)];
    fact.args.iter().for_each(|a| go(a, &mut out));
    out
}

#[derive(Debug, Default)]
struct PtNode {
    children: HashMap<Key, usize>,
    ids: Vec<usize>,
}

/// Discrimination tree over facts, flattened in preorder; variables are
/// stored as a wildcard.
#[derive(Debug)]
pub struct PrefixTree {
    nodes: Vec<PtNode>,
    len: usize,
}

impl Default for PrefixTree {
    fn default() -> Self {
        Self::new()
    }
}

impl PrefixTree {
    pub fn new() -> Self {
        PrefixTree {
            nodes: vec![PtNode::default()],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: usize, fact: &Fact) {
        let mut at = 0;
        for k in keys(fact) {
            at = match self.nodes[at].children.get(&k) {
                Some(&next) => next,
                None => {
                    self.nodes.push(PtNode::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[at].children.insert(k, next);
                    next
                }
            };
        }
        self.nodes[at].ids.push(id);
        self.len += 1;
    }

    /// Removes `id`, which must have been inserted under `fact`. Emptied
    /// branches are unlinked so later lookups skip them.
    pub fn remove(&mut self, id: usize, fact: &Fact) -> bool {
        let mut path = vec![0];
        for k in keys(fact) {
            match self.nodes[*path.last().unwrap()].children.get(&k) {
                Some(&next) => path.push(next),
                None => return false,
            }
        }
        let leaf = *path.last().unwrap();
        let Some(i) = self.nodes[leaf].ids.iter().position(|&x| x == id) else {
            return false;
        };
        self.nodes[leaf].ids.swap_remove(i);
        self.len -= 1;
        let ks = keys(fact);
        for depth in (1..path.len()).rev() {
            let node = &self.nodes[path[depth]];
            if !node.ids.is_empty() || !node.children.is_empty() {
                break;
            }
            self.nodes[path[depth - 1]].children.remove(&ks[depth - 1]);
        }
        true
    }

    /// Stored ids whose fact may unify with `fact`, ascending. Repeated
    /// variables are ignored, so the result can contain false positives.
    pub fn unifiable(&self, fact: &Fact) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(&root) = self.nodes[0].children.get(&Key::Pred(fact.pred)) {
            let todo: Vec<&Term> = fact.args.iter().rev().collect();
            self.walk(root, todo, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn walk(&self, at: usize, mut todo: Vec<&Term>, out: &mut Vec<usize>) {
        let Some(t) = todo.pop() else {
            out.extend_from_slice(&self.nodes[at].ids);
            return;
        };
        let node = &self.nodes[at];
        match t {
            Term::Var(_) => {
                for (k, &child) in &node.children {
                    self.skip(child, k.arity(), &todo, out);
                }
            }
            Term::App(f, args) => {
                if let Some(&child) = node.children.get(&Key::Sym(*f, args.len())) {
                    let mut next = todo.clone();
                    next.extend(args.iter().rev());
                    self.walk(child, next, out);
                }
                if let Some(&child) = node.children.get(&Key::Var) {
                    self.walk(child, todo, out);
                }
            }
            Term::Nat(n) => {
                if let Some(&child) = node.children.get(&Key::Nat(*n)) {
                    self.walk(child, todo.clone(), out);
                }
                if let Some(&child) = node.children.get(&Key::Var) {
                    self.walk(child, todo, out);
                }
            }
        }
    }

    /// Skips `pending` more stored subterms below `at`, then resumes.
    fn skip(&self, at: usize, pending: usize, todo: &[&Term], out: &mut Vec<usize>) {
        if pending == 0 {
            self.walk(at, todo.to_vec(), out);
            return;
        }
        for (k, &child) in &self.nodes[at].children {
            self.skip(child, pending - 1 + k.arity(), todo, out);
        }
    }
}
