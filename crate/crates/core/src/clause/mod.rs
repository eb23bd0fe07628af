//! Facts, Horn clauses, and the clause-level simplifications.

pub mod constraints;
mod subsume;

use std::collections::HashMap;
use std::fmt;

use crate::signature::{PredicateId, Pretty, Signature, SymbolId};
use crate::term::{Subst, Term, Unifier, Var};

pub use constraints::{entails, simplify, simplify_diseqs, simplify_nat, Constraint, Satisfiability};
pub use subsume::subsumes;

/// Index into the list of initial clauses.
pub type InitialId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: PredicateId,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(pred: PredicateId, args: Vec<Term>) -> Self {
        Fact { pred, args }
    }

    pub fn att(t: Term) -> Self {
        Fact {
            pred: Signature::ATTACKER,
            args: vec![t],
        }
    }

    pub fn is_att(&self) -> bool {
        self.pred == Signature::ATTACKER
    }

    /// The argument of an `att` fact.
    pub fn att_arg(&self) -> Option<&Term> {
        self.is_att().then(|| &self.args[0])
    }

    pub fn apply(&self, s: &Subst) -> Fact {
        Fact {
            pred: self.pred,
            args: self.args.iter().map(|t| s.apply(t)).collect(),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Fact {
        Fact {
            pred: self.pred,
            args: self.args.iter().map(|t| t.map_vars(f)).collect(),
        }
    }

    pub fn shift(&self, offset: u32) -> Fact {
        if offset == 0 {
            return self.clone();
        }
        self.map_vars(&mut |v| Term::Var(Var(v.0 + offset)))
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        self.args.iter().for_each(|t| t.collect_vars(out));
    }

    pub fn max_var(&self) -> Option<u32> {
        self.args.iter().filter_map(Term::max_var).max()
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Unifies the argument lists of two facts with the same predicate.
    pub fn unify_into(&self, other: &Fact, u: &mut Unifier) -> bool {
        self.pred == other.pred
            && self.args.len() == other.args.len()
            && u.unify_all(self.args.iter().zip(other.args.iter()))
    }

    pub fn unify(&self, other: &Fact) -> Option<Subst> {
        let mut u = Unifier::new();
        self.unify_into(other, &mut u).then(|| u.finish())
    }
}

impl Pretty for Fact {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sig.predicate(self.pred).ident)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            self.args.pretty(sig, f)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// How a clause's conclusion follows from initial clauses.
///
/// `Apply` nodes use an initial clause with one premise per hypothesis of
/// that clause. `Open` leaves are facts left to be established, normally
/// hypotheses of the clause carrying the history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Open(Fact),
    Apply(InitialId, Vec<Step>),
}

impl Step {
    pub fn initial(id: InitialId, hyps: &[Fact]) -> Step {
        Step::Apply(id, hyps.iter().cloned().map(Step::Open).collect())
    }

    pub fn map_leaves(&self, f: &mut impl FnMut(&Fact) -> Step) -> Step {
        match self {
            Step::Open(fact) => f(fact),
            Step::Apply(id, kids) => Step::Apply(*id, kids.iter().map(|k| k.map_leaves(f)).collect()),
        }
    }

    pub fn apply(&self, s: &Subst) -> Step {
        self.map_leaves(&mut |fact| Step::Open(fact.apply(s)))
    }

    pub fn leaves<'a>(&'a self, out: &mut Vec<&'a Fact>) {
        match self {
            Step::Open(fact) => out.push(fact),
            Step::Apply(_, kids) => kids.iter().for_each(|k| k.leaves(out)),
        }
    }

    pub fn uses(&self) -> usize {
        match self {
            Step::Open(_) => 0,
            Step::Apply(_, kids) => 1 + kids.iter().map(Step::uses).sum::<usize>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Initial(InitialId),
    /// Ids (in the saturation state) of the clause whose conclusion was
    /// used and of the clause whose hypothesis was resolved.
    Resolved {
        solved: usize,
        target: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Clause {
    pub hyps: Vec<Fact>,
    pub constraints: Vec<Constraint>,
    pub concl: Fact,
    /// Generator clauses of data constructors, left alone by decomposition.
    pub exempt: bool,
    pub provenance: Provenance,
    /// Assertions (by index) that added hypotheses or instantiated the clause.
    pub strengthened_by: Vec<usize>,
    pub history: Step,
}

impl Clause {
    /// A clause read from input: its history is a single use of itself.
    pub fn initial(id: InitialId, hyps: Vec<Fact>, constraints: Vec<Constraint>, concl: Fact) -> Self {
        let history = Step::initial(id, &hyps);
        let mut c = Clause {
            hyps,
            constraints,
            concl,
            exempt: false,
            provenance: Provenance::Initial(id),
            strengthened_by: Vec::new(),
            history,
        };
        c.normalize();
        c
    }

    /// Equality of the logical content, ignoring history and provenance.
    pub fn same_as(&self, other: &Clause) -> bool {
        self.hyps == other.hyps && self.constraints == other.constraints && self.concl == other.concl
    }

    pub fn max_var(&self) -> Option<u32> {
        let mut leaves = Vec::new();
        self.history.leaves(&mut leaves);
        self.hyps
            .iter()
            .chain(std::iter::once(&self.concl))
            .chain(leaves)
            .filter_map(Fact::max_var)
            .chain(self.constraints.iter().filter_map(Constraint::max_var))
            .max()
    }

    /// One past the largest variable id.
    pub fn var_span(&self) -> u32 {
        self.max_var().map_or(0, |m| m + 1)
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Clause {
        Clause {
            hyps: self.hyps.iter().map(|h| h.map_vars(f)).collect(),
            constraints: self.constraints.iter().map(|c| c.map_vars(f)).collect(),
            concl: self.concl.map_vars(f),
            exempt: self.exempt,
            provenance: self.provenance.clone(),
            strengthened_by: self.strengthened_by.clone(),
            history: self.history.map_leaves(&mut |fact| Step::Open(fact.map_vars(f))),
        }
    }

    pub fn shift(&self, offset: u32) -> Clause {
        if offset == 0 {
            return self.clone();
        }
        self.map_vars(&mut |v| Term::Var(Var(v.0 + offset)))
    }

    /// Applies `s` everywhere, history included. Constraints are not
    /// re-simplified here.
    pub fn apply(&self, s: &Subst) -> Clause {
        Clause {
            hyps: self.hyps.iter().map(|h| h.apply(s)).collect(),
            constraints: self.constraints.iter().map(|c| c.apply(s)).collect(),
            concl: self.concl.apply(s),
            exempt: self.exempt,
            provenance: self.provenance.clone(),
            strengthened_by: self.strengthened_by.clone(),
            history: self.history.apply(s),
        }
    }

    /// Renumbers variables from zero in order of first occurrence
    /// (hypotheses, conclusion, constraints, then history leaves).
    pub fn normalize(&mut self) {
        let mut order: Vec<Var> = Vec::new();
        for h in &self.hyps {
            h.collect_vars(&mut order);
        }
        self.concl.collect_vars(&mut order);
        for c in &self.constraints {
            collect_all_vars(c, &mut order);
        }
        let mut leaves = Vec::new();
        self.history.leaves(&mut leaves);
        for l in leaves {
            l.collect_vars(&mut order);
        }
        if order.iter().enumerate().all(|(i, v)| v.0 == i as u32) {
            return;
        }
        let map: HashMap<Var, u32> = order.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        *self = self.map_vars(&mut |v| Term::Var(Var(map[&v])));
    }

    pub fn is_tautology(&self) -> bool {
        self.hyps.contains(&self.concl)
    }

    /// Drops repeated hypotheses, keeping first occurrences.
    pub fn dedup_hyps(&mut self) {
        let mut seen: Vec<Fact> = Vec::with_capacity(self.hyps.len());
        self.hyps.retain(|h| {
            if seen.contains(h) {
                false
            } else {
                seen.push(h.clone());
                true
            }
        });
    }

    /// Removes hypotheses `att(x)` whose variable occurs nowhere else in
    /// the clause. Sound whenever the adversary knows at least one term.
    pub fn drop_unconstrained_att_vars(&mut self) {
        let mut elsewhere: Vec<Var> = Vec::new();
        self.concl.collect_vars(&mut elsewhere);
        for c in &self.constraints {
            collect_all_vars(c, &mut elsewhere);
        }
        let hyps = std::mem::take(&mut self.hyps);
        for (i, h) in hyps.iter().enumerate() {
            let lonely = match h.att_arg() {
                Some(Term::Var(x)) => {
                    !elsewhere.contains(x)
                        && !hyps
                            .iter()
                            .enumerate()
                            .any(|(j, g)| j != i && g.args.iter().any(|t| t.occurs(*x)))
                }
                _ => false,
            };
            if !lonely {
                self.hyps.push(h.clone());
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.hyps
            .iter()
            .chain(std::iter::once(&self.concl))
            .map(Fact::depth)
            .max()
            .unwrap_or(0)
    }
}

fn collect_all_vars(c: &Constraint, out: &mut Vec<Var>) {
    match c {
        Constraint::Diseq { universals, lhs, rhs } => {
            lhs.collect_vars(out);
            rhs.collect_vars(out);
            for u in universals {
                if !out.contains(u) {
                    out.push(*u);
                }
            }
        }
        other => other.collect_vars(out),
    }
}

impl Pretty for Clause {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hyps.is_empty() && self.constraints.is_empty() {
            f.write_str("true")?;
        }
        let mut first = true;
        for h in &self.hyps {
            if !first {
                f.write_str(" && ")?;
            }
            first = false;
            h.pretty(sig, f)?;
        }
        for c in &self.constraints {
            if !first {
                f.write_str(" && ")?;
            }
            first = false;
            c.pretty(sig, f)?;
        }
        f.write_str(" => ")?;
        self.concl.pretty(sig, f)
    }
}

/// Initial clauses of each data constructor, needed to record
/// decomposition steps in clause histories.
#[derive(Clone, Debug, Default)]
pub struct DataTable {
    entries: HashMap<SymbolId, DataClauses>,
}

#[derive(Clone, Debug)]
pub struct DataClauses {
    pub compose: InitialId,
    pub project: Vec<InitialId>,
}

impl DataTable {
    pub fn insert(&mut self, f: SymbolId, clauses: DataClauses) {
        self.entries.insert(f, clauses);
    }

    pub fn get(&self, f: SymbolId) -> Option<&DataClauses> {
        self.entries.get(&f)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn split<'a>(&self, fact: &'a Fact) -> Option<(SymbolId, &'a [Term])> {
        match fact.att_arg()? {
            Term::App(f, args) if self.entries.contains_key(f) => Some((*f, args)),
            _ => None,
        }
    }
}

/// Replaces `att(f(M1..Mn))` by `att(M1) .. att(Mn)` for data constructors
/// `f`: in hypotheses in place, and in the conclusion by splitting the
/// clause into one clause per argument. Nested data constructors are
/// flattened completely. Exempt clauses come back unchanged.
pub fn decompose_data(c: &Clause, data: &DataTable) -> Vec<Clause> {
    if c.exempt || data.is_empty() {
        return vec![c.clone()];
    }
    let mut base = c.clone();
    if base.hyps.iter().any(|h| data.split(h).is_some()) {
        let mut hyps = Vec::with_capacity(base.hyps.len());
        let mut work: Vec<Fact> = base.hyps.iter().rev().cloned().collect();
        while let Some(h) = work.pop() {
            match data.split(&h) {
                Some((_, args)) => work.extend(args.iter().rev().cloned().map(Fact::att)),
                None => hyps.push(h),
            }
        }
        base.hyps = hyps;
        base.history = expand_leaves(&base.history, data);
    }

    let mut out = Vec::new();
    let mut work = vec![base];
    while let Some(cl) = work.pop() {
        match data.split(&cl.concl) {
            Some((f, args)) => {
                let entry = data.get(f).expect("split implies entry");
                // Reverse so the first argument comes out first.
                for (i, a) in args.iter().enumerate().rev() {
                    let mut part = cl.clone();
                    part.concl = Fact::att(a.clone());
                    part.history = Step::Apply(entry.project[i], vec![cl.history.clone()]);
                    work.push(part);
                }
            }
            None => out.push(cl),
        }
    }
    out
}

fn expand_leaves(step: &Step, data: &DataTable) -> Step {
    step.map_leaves(&mut |fact| expand_fact(fact, data))
}

fn expand_fact(fact: &Fact, data: &DataTable) -> Step {
    match data.split(fact) {
        Some((f, args)) => Step::Apply(
            data.get(f).expect("split implies entry").compose,
            args.iter().map(|a| expand_fact(&Fact::att(a.clone()), data)).collect(),
        ),
        None => Step::Open(fact.clone()),
    }
}
