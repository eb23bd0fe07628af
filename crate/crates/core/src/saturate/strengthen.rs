//! Using axioms, restrictions and proven lemmas to prune clauses.

use crate::clause::{Clause, Fact};
use crate::frontend::{Assertion, Conclusion};
use crate::signature::Signature;
use crate::term::{Matcher, Subst, Term, Unifier};

/// An assertion in the form saturation uses it.
#[derive(Clone, Debug)]
pub struct Strengthening {
    pub label: String,
    pub premises: Vec<Fact>,
    pub facts: Vec<Fact>,
    pub equalities: Vec<(Term, Term)>,
    /// Premises only match hypotheses, never the conclusion. Needed while
    /// an inductive lemma is being proved.
    pub hyps_only: bool,
}

impl Strengthening {
    pub fn new(sig: &Signature, a: &Assertion, hyps_only: bool) -> Self {
        let mut facts = Vec::new();
        let mut equalities = Vec::new();
        for c in &a.conclusion {
            match c {
                Conclusion::Fact(f) => facts.push(f.clone()),
                Conclusion::Equal(l, r) => equalities.push((l.clone(), r.clone())),
            }
        }
        Strengthening {
            label: sig.show(a).to_string(),
            premises: a.premises.clone(),
            facts,
            equalities,
            hyps_only,
        }
    }

    fn shift(&self, offset: u32) -> Strengthening {
        Strengthening {
            label: String::new(),
            premises: self.premises.iter().map(|f| f.shift(offset)).collect(),
            facts: self.facts.iter().map(|f| f.shift(offset)).collect(),
            equalities: self
                .equalities
                .iter()
                .map(|(l, r)| (l.shift(offset), r.shift(offset)))
                .collect(),
            hyps_only: self.hyps_only,
        }
    }
}

#[derive(Debug)]
pub enum StrengthenResult {
    Unchanged,
    /// An equality failed: the clause can never apply. Carries the index
    /// of the responsible rule.
    Removed(usize),
    Changed {
        clause: Clause,
        /// The clause was instantiated by an equality, not only extended.
        instantiated: bool,
        /// First rule that contributed.
        by: usize,
    },
}

/// Matches every rule's premises against the facts of `c` in all possible
/// ways. Matched fact conclusions become extra hypotheses; matched
/// equalities are unified into the clause. Facts added here are not matched
/// again in the same call.
pub fn strengthen(c: &Clause, rules: &[Strengthening]) -> StrengthenResult {
    let offset = c.var_span();
    let mut added: Vec<Fact> = Vec::new();
    let mut u = Unifier::new();
    let mut contributors: Vec<usize> = Vec::new();
    let mut next_fresh = offset;
    for (i, rule) in rules.iter().enumerate() {
        // Rule variables live above the clause's, so unmatched
        // (existential) ones come out fresh.
        let shifted = rule.shift(next_fresh);
        let span = shifted
            .premises
            .iter()
            .chain(&shifted.facts)
            .filter_map(Fact::max_var)
            .chain(
                shifted
                    .equalities
                    .iter()
                    .flat_map(|(l, r)| l.max_var().into_iter().chain(r.max_var())),
            )
            .max()
            .map_or(next_fresh, |m| m + 1);
        let mut targets: Vec<&Fact> = c.hyps.iter().collect();
        if !rule.hyps_only {
            targets.push(&c.concl);
        }
        let mut matches = Vec::new();
        all_matches(&shifted.premises, &targets, &mut Matcher::new(), &mut matches);
        for s in matches {
            for f in &shifted.facts {
                let f = f.apply(&s);
                if !c.hyps.contains(&f) && !added.contains(&f) {
                    added.push(f);
                    if !contributors.contains(&i) {
                        contributors.push(i);
                    }
                }
            }
            for (l, r) in &shifted.equalities {
                let (l, r) = (s.apply(l), s.apply(r));
                if u.resolve(&l) == u.resolve(&r) {
                    continue;
                }
                if !u.unify(&l, &r) {
                    return StrengthenResult::Removed(i);
                }
                if !contributors.contains(&i) {
                    contributors.push(i);
                }
            }
        }
        next_fresh = span;
    }
    let Some(&by) = contributors.first() else {
        return StrengthenResult::Unchanged;
    };
    let s = u.finish();
    let mut out = c.clone();
    out.hyps.extend(added);
    let instantiated = !s.is_empty();
    if instantiated {
        out = out.apply(&s);
    }
    for i in contributors {
        if !out.strengthened_by.contains(&i) {
            out.strengthened_by.push(i);
        }
    }
    if out.same_as(c) {
        return StrengthenResult::Unchanged;
    }
    StrengthenResult::Changed {
        clause: out,
        instantiated,
        by,
    }
}

fn all_matches(premises: &[Fact], targets: &[&Fact], m: &mut Matcher, out: &mut Vec<Subst>) {
    let Some((first, rest)) = premises.split_first() else {
        out.push(m.to_subst());
        return;
    };
    for t in targets {
        if first.pred != t.pred {
            continue;
        }
        let mark = m.mark();
        if first.args.iter().zip(&t.args).all(|(p, x)| m.match_term(p, x)) {
            all_matches(rest, targets, m, out);
        }
        m.undo(mark);
    }
}
