//! Saturation: resolution on selected hypotheses until no new clause
//! survives subsumption.

mod strengthen;

use std::collections::VecDeque;
use std::fmt;

use crate::clause::{decompose_data, simplify, subsumes, Clause, DataTable, Provenance, Satisfiability, Step};
use crate::frontend::ClauseSet;
use crate::index::{FeatureIndex, FeatureSpec, PrefixTree};
use crate::signature::{Pretty, Signature};
use crate::term::{Term, Unifier};

pub use strengthen::{StrengthenResult, Strengthening};

#[derive(Clone, Copy, Debug)]
pub struct Config {
    /// Stop after this many resolvents have been generated.
    pub max_clauses: usize,
    /// Discard clauses containing a deeper term, and report that.
    pub max_depth: usize,
    pub use_index: bool,
    /// Drop `att(x)` hypotheses whose variable occurs nowhere else. Only
    /// sound when the adversary knows at least one term.
    pub drop_att_vars: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_clauses: 50_000,
            max_depth: 100,
            use_index: true,
            drop_att_vars: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub initial: usize,
    pub generated: usize,
    pub resolutions: usize,
    pub subsumption_checks: usize,
    pub index_candidates: usize,
    pub forward_subsumed: usize,
    pub backward_subsumed: usize,
    pub strengthened: usize,
    pub removed_by_assertion: usize,
    pub too_deep: usize,
    pub kept: usize,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial_clauses={}", self.initial)?;
        writeln!(f, "clauses_generated={}", self.generated)?;
        writeln!(f, "resolutions={}", self.resolutions)?;
        writeln!(f, "subsumption_checks={}", self.subsumption_checks)?;
        writeln!(f, "index_candidates={}", self.index_candidates)?;
        writeln!(f, "forward_subsumed={}", self.forward_subsumed)?;
        writeln!(f, "backward_subsumed={}", self.backward_subsumed)?;
        writeln!(f, "strengthened={}", self.strengthened)?;
        writeln!(f, "removed_by_assertion={}", self.removed_by_assertion)?;
        writeln!(f, "too_deep={}", self.too_deep)?;
        write!(f, "clauses_kept={}", self.kept)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// The clause budget ran out.
    ClauseLimit(usize),
    /// Some clause was discarded for exceeding the depth bound.
    DepthLimit(usize),
}

impl Outcome {
    pub fn is_complete(self) -> bool {
        self == Outcome::Complete
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Complete => f.write_str("complete"),
            Outcome::ClauseLimit(n) => write!(f, "stopped after {n} generated clauses"),
            Outcome::DepthLimit(d) => write!(f, "discarded clauses with terms deeper than {d}"),
        }
    }
}

/// Something that happened during saturation, for tracing.
#[derive(Debug)]
pub enum Event<'a> {
    Kept { id: usize, clause: &'a Clause },
    Resolvent(&'a Clause),
    ForwardSubsumed { clause: &'a Clause, by: usize },
    BackwardSubsumed { id: usize, by: usize },
    Strengthened { assertion: &'a str, clause: &'a Clause },
    RemovedByAssertion { assertion: &'a str, clause: &'a Clause },
    TooDeep(&'a Clause),
}

/// Index of the hypothesis resolution works on: the leftmost one that is
/// neither blocking nor `att` of a variable. `None` means the clause is
/// solved and only its conclusion is used.
pub fn select(sig: &Signature, c: &Clause) -> Option<usize> {
    c.hyps
        .iter()
        .position(|h| !sig.is_blocking(h.pred) && !matches!(h.att_arg(), Some(Term::Var(_))))
}

/// Resolves the conclusion of `solved` with hypothesis `at` of `target`.
/// The result is neither simplified nor normalized.
pub fn resolve(solved: &Clause, target: &Clause, at: usize) -> Option<Clause> {
    let solved = solved.shift(target.var_span());
    let selected = &target.hyps[at];
    let mut u = Unifier::new();
    if !solved.concl.unify_into(selected, &mut u) {
        return None;
    }
    let s = u.finish();
    let mut hyps = Vec::with_capacity(target.hyps.len() + solved.hyps.len());
    hyps.extend(target.hyps[..at].iter().map(|h| h.apply(&s)));
    hyps.extend(solved.hyps.iter().map(|h| h.apply(&s)));
    hyps.extend(target.hyps[at + 1..].iter().map(|h| h.apply(&s)));
    let constraints = target
        .constraints
        .iter()
        .chain(&solved.constraints)
        .map(|c| c.apply(&s))
        .collect();
    let history = target
        .history
        .map_leaves(&mut |leaf| {
            if leaf == selected {
                solved.history.clone()
            } else {
                Step::Open(leaf.clone())
            }
        })
        .apply(&s);
    let mut strengthened_by = target.strengthened_by.clone();
    for a in &solved.strengthened_by {
        if !strengthened_by.contains(a) {
            strengthened_by.push(*a);
        }
    }
    Some(Clause {
        hyps,
        constraints,
        concl: target.concl.apply(&s),
        exempt: false,
        provenance: Provenance::Resolved { solved: 0, target: 0 },
        strengthened_by,
        history,
    })
}

/// Final clause set.
#[derive(Debug)]
pub struct Saturation {
    /// Surviving clauses with their ids, ascending.
    pub clauses: Vec<(usize, Clause)>,
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Saturation {
    /// Surviving clauses with no selectable hypothesis.
    pub fn solved<'a>(&'a self, sig: &'a Signature) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses
            .iter()
            .map(|(_, c)| c)
            .filter(move |c| select(sig, c).is_none())
    }
}

struct Entry {
    clause: Clause,
    selected: Option<usize>,
}

type Observer<'a> = Box<dyn FnMut(Event<'_>) + 'a>;

pub struct Saturator<'a> {
    sig: &'a Signature,
    data: &'a DataTable,
    rules: &'a [Strengthening],
    config: Config,
    store: Vec<Option<Entry>>,
    fv: Option<FeatureIndex>,
    concl_index: PrefixTree,
    selected_index: PrefixTree,
    queue: VecDeque<Clause>,
    stats: Stats,
    outcome: Outcome,
    observer: Option<Observer<'a>>,
}

impl<'a> Saturator<'a> {
    pub fn new(sig: &'a Signature, initial: &'a ClauseSet, rules: &'a [Strengthening], config: Config) -> Self {
        let fv = config
            .use_index
            .then(|| FeatureIndex::new(FeatureSpec::new(sig, initial.iter().map(|c| &c.clause))));
        Saturator {
            sig,
            data: &initial.data,
            rules,
            config,
            store: Vec::new(),
            fv,
            concl_index: PrefixTree::new(),
            selected_index: PrefixTree::new(),
            queue: VecDeque::new(),
            stats: Stats {
                initial: initial.len(),
                ..Stats::default()
            },
            outcome: Outcome::Complete,
            observer: None,
        }
        .seeded(initial)
    }

    fn seeded(mut self, initial: &ClauseSet) -> Self {
        for c in initial.iter() {
            for s in self.simplify(c.clause.clone()) {
                self.queue.push_back(s);
            }
        }
        self
    }

    pub fn observe(mut self, observer: impl FnMut(Event<'_>) + 'a) -> Self {
        self.observer = Some(Box::new(observer));
        self
    }

    fn emit(&mut self, ev: Event<'_>) {
        if let Some(o) = self.observer.as_mut() {
            o(ev);
        }
    }

    pub fn run(mut self) -> Saturation {
        while let Some(c) = self.queue.pop_front() {
            if self.stats.generated > self.config.max_clauses {
                self.outcome = Outcome::ClauseLimit(self.stats.generated);
                break;
            }
            if let Some(by) = self.forward_subsumer(&c) {
                self.stats.forward_subsumed += 1;
                self.emit(Event::ForwardSubsumed { clause: &c, by });
                continue;
            }
            self.backward_subsume(&c);
            let id = self.insert(c);
            self.resolve_new(id);
        }
        let clauses: Vec<(usize, Clause)> = self
            .store
            .into_iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| (i, e.clause)))
            .collect();
        self.stats.kept = clauses.len();
        Saturation {
            clauses,
            outcome: self.outcome,
            stats: self.stats,
        }
    }

    fn live(&self) -> Vec<usize> {
        (0..self.store.len()).filter(|&i| self.store[i].is_some()).collect()
    }

    fn forward_subsumer(&mut self, c: &Clause) -> Option<usize> {
        let candidates = match &self.fv {
            Some(fv) => fv.generalizations(c),
            None => self.live(),
        };
        self.stats.index_candidates += candidates.len();
        for id in candidates {
            let stored = &self.store[id].as_ref().expect("live").clause;
            self.stats.subsumption_checks += 1;
            if subsumes(stored, c) {
                return Some(id);
            }
        }
        None
    }

    fn backward_subsume(&mut self, c: &Clause) {
        let candidates = match &self.fv {
            Some(fv) => fv.instances(c),
            None => self.live(),
        };
        self.stats.index_candidates += candidates.len();
        for id in candidates {
            let stored = &self.store[id].as_ref().expect("live").clause;
            self.stats.subsumption_checks += 1;
            if subsumes(c, stored) {
                self.remove(id);
                self.stats.backward_subsumed += 1;
                let by = self.store.len();
                self.emit(Event::BackwardSubsumed { id, by });
            }
        }
    }

    fn insert(&mut self, clause: Clause) -> usize {
        let id = self.store.len();
        let selected = select(self.sig, &clause);
        match selected {
            Some(i) => self.selected_index.insert(id, &clause.hyps[i]),
            None => self.concl_index.insert(id, &clause.concl),
        }
        if let Some(fv) = self.fv.as_mut() {
            fv.insert(id, &clause);
        }
        self.store.push(Some(Entry { clause, selected }));
        let entry = self.store[id].as_ref().expect("just inserted");
        if let Some(o) = self.observer.as_mut() {
            o(Event::Kept {
                id,
                clause: &entry.clause,
            });
        }
        id
    }

    fn remove(&mut self, id: usize) {
        let entry = self.store[id].take().expect("live");
        match entry.selected {
            Some(i) => self.selected_index.remove(id, &entry.clause.hyps[i]),
            None => self.concl_index.remove(id, &entry.clause.concl),
        };
        if let Some(fv) = self.fv.as_mut() {
            fv.remove(id, &entry.clause);
        }
    }

    /// Resolves the newly kept clause `id` with every live partner.
    fn resolve_new(&mut self, id: usize) {
        let entry = self.store[id].as_ref().expect("live");
        let pairs: Vec<(usize, usize)> = match entry.selected {
            None => {
                let concl = &entry.clause.concl;
                let candidates = if self.fv.is_some() {
                    self.selected_index.unifiable(concl)
                } else {
                    self.live()
                        .into_iter()
                        .filter(|&j| self.store[j].as_ref().is_some_and(|e| e.selected.is_some()))
                        .collect()
                };
                candidates.into_iter().map(|t| (id, t)).collect()
            }
            Some(i) => {
                let hyp = &entry.clause.hyps[i];
                let candidates = if self.fv.is_some() {
                    self.concl_index.unifiable(hyp)
                } else {
                    self.live()
                        .into_iter()
                        .filter(|&j| self.store[j].as_ref().is_some_and(|e| e.selected.is_none()))
                        .collect()
                };
                candidates.into_iter().map(|s| (s, id)).collect()
            }
        };
        self.stats.index_candidates += pairs.len();
        for (s, t) in pairs {
            let solved = &self.store[s].as_ref().expect("live").clause;
            let target = self.store[t].as_ref().expect("live");
            let Some(mut r) = resolve(solved, &target.clause, target.selected.expect("unsolved")) else {
                continue;
            };
            r.provenance = Provenance::Resolved { solved: s, target: t };
            self.stats.resolutions += 1;
            self.stats.generated += 1;
            self.emit(Event::Resolvent(&r));
            for c in self.simplify(r) {
                self.queue.push_back(c);
            }
        }
    }

    /// Decomposition, constraint simplification, strengthening,
    /// deduplication, elimination of redundant hypotheses and tautologies,
    /// the depth bound, and normalization.
    fn simplify(&mut self, c: Clause) -> Vec<Clause> {
        let mut work: Vec<Clause> = decompose_data(&c, self.data);
        work.reverse();
        let mut out = Vec::new();
        while let Some(mut c) = work.pop() {
            if !c.constraints.is_empty() {
                match simplify(&c.constraints) {
                    Satisfiability::Unsatisfiable => continue,
                    Satisfiability::Satisfiable(cs) => c.constraints = cs,
                }
            }
            if !self.rules.is_empty() {
                match strengthen::strengthen(&c, self.rules) {
                    StrengthenResult::Unchanged => {}
                    StrengthenResult::Removed(i) => {
                        self.stats.removed_by_assertion += 1;
                        let label = self.rules[i].label.clone();
                        self.emit(Event::RemovedByAssertion {
                            assertion: &label,
                            clause: &c,
                        });
                        continue;
                    }
                    StrengthenResult::Changed {
                        clause,
                        instantiated,
                        by,
                    } => {
                        self.stats.strengthened += 1;
                        let label = self.rules[by].label.clone();
                        self.emit(Event::Strengthened {
                            assertion: &label,
                            clause: &clause,
                        });
                        let mut parts = decompose_data(&clause, self.data);
                        if instantiated {
                            // New instances may match further assertions.
                            parts.reverse();
                            work.extend(parts);
                            continue;
                        }
                        c = parts.pop().expect("conclusion unchanged, so one clause");
                    }
                }
            }
            c.dedup_hyps();
            if self.config.drop_att_vars {
                c.drop_unconstrained_att_vars();
            }
            if c.is_tautology() {
                continue;
            }
            if c.depth() > self.config.max_depth {
                self.stats.too_deep += 1;
                if self.outcome.is_complete() {
                    self.outcome = Outcome::DepthLimit(self.config.max_depth);
                }
                self.emit(Event::TooDeep(&c));
                continue;
            }
            c.normalize();
            out.push(c);
        }
        out
    }
}

/// Saturates `initial` under `rules` with default observers.
pub fn saturate(sig: &Signature, initial: &ClauseSet, rules: &[Strengthening], config: Config) -> Saturation {
    Saturator::new(sig, initial, rules, config).run()
}

impl Pretty for Event<'_> {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Kept { id, clause } => write!(f, "kept #{id}: {}", sig.show(*clause)),
            Event::Resolvent(c) => write!(f, "resolvent: {}", sig.show(*c)),
            Event::ForwardSubsumed { clause, by } => {
                write!(f, "subsumed by #{by}: {}", sig.show(*clause))
            }
            Event::BackwardSubsumed { id, by } => write!(f, "removed #{id}, subsumed by #{by}"),
            Event::Strengthened { assertion, clause } => {
                write!(f, "strengthened by {assertion}: {}", sig.show(*clause))
            }
            Event::RemovedByAssertion { assertion, clause } => {
                write!(f, "removed by {assertion}: {}", sig.show(*clause))
            }
            Event::TooDeep(c) => write!(f, "too deep: {}", sig.show(*c)),
        }
    }
}
