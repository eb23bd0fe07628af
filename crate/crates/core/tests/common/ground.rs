//! Bottom-up evaluation of a full initial clause set, adversary clauses
//! included, keeping only facts up to a term depth.

use std::collections::{BTreeMap, BTreeSet};

use hornsat::clause::{Clause, Fact};
use hornsat::frontend::ClauseSet;
use hornsat::term::{Term, Var};

fn depth(t: &Term) -> usize {
    match t {
        Term::App(_, args) => args.iter().map(|a| 1 + depth(a)).max().unwrap_or(0),
        _ => 0,
    }
}

fn fact_depth(f: &Fact) -> usize {
    f.args.iter().map(depth).max().unwrap_or(0)
}

/// Depth at which each variable occurs in `t`, deepest first.
fn var_depths(t: &Term, at: usize, out: &mut BTreeMap<Var, usize>) {
    match t {
        Term::Var(v) => {
            let e = out.entry(*v).or_insert(at);
            *e = (*e).max(at);
        }
        Term::App(_, args) => args.iter().for_each(|a| var_depths(a, at + 1, out)),
        Term::Nat(_) => {}
    }
}

fn bind(p: &Term, g: &Term, env: &mut BTreeMap<Var, Term>) -> bool {
    match (p, g) {
        (Term::Var(v), _) => match env.get(v) {
            Some(t) => t == g,
            None => {
                env.insert(*v, g.clone());
                true
            }
        },
        (Term::Nat(a), Term::Nat(b)) => a == b,
        (Term::App(f, xs), Term::App(h, ys)) => {
            f == h && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| bind(x, y, env))
        }
        _ => false,
    }
}

fn inst(t: &Term, env: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => env[v].clone(),
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| inst(a, env)).collect()),
        Term::Nat(_) => t.clone(),
    }
}

/// Ground facts derivable using only facts of depth at most `cap`.
/// Clauses with constraints or with conclusion variables missing from the
/// hypotheses are not supported.
pub fn derivable(initial: &ClauseSet, cap: usize, max_facts: usize) -> Option<BTreeSet<Fact>> {
    let clauses: Vec<&Clause> = initial.iter().map(|c| &c.clause).collect();
    for c in &clauses {
        assert!(c.constraints.is_empty(), "constraints are not supported");
    }
    let mut facts: BTreeSet<Fact> = BTreeSet::new();
    loop {
        let mut fresh = BTreeSet::new();
        for c in &clauses {
            let mut limits = BTreeMap::new();
            c.concl.args.iter().for_each(|t| var_depths(t, 0, &mut limits));
            join(&c.hyps, &facts, &mut BTreeMap::new(), &limits, cap, &mut |env| {
                let concl = Fact {
                    pred: c.concl.pred,
                    args: c.concl.args.iter().map(|t| inst(t, env)).collect(),
                };
                if fact_depth(&concl) <= cap && !facts.contains(&concl) {
                    fresh.insert(concl);
                }
            });
        }
        if fresh.is_empty() {
            return Some(facts);
        }
        facts.extend(fresh);
        if facts.len() > max_facts {
            return None;
        }
    }
}

fn join(
    hyps: &[Fact],
    facts: &BTreeSet<Fact>,
    env: &mut BTreeMap<Var, Term>,
    limits: &BTreeMap<Var, usize>,
    cap: usize,
    emit: &mut impl FnMut(&BTreeMap<Var, Term>),
) {
    let Some((h, rest)) = hyps.split_first() else {
        emit(env);
        return;
    };
    for f in facts.iter().filter(|f| f.pred == h.pred) {
        let saved = env.clone();
        let ok = h.args.iter().zip(&f.args).all(|(p, g)| bind(p, g, env))
            && env
                .iter()
                .all(|(v, t)| limits.get(v).is_none_or(|d| d + depth(t) <= cap));
        if ok {
            join(rest, facts, env, limits, cap, emit);
        }
        *env = saved;
    }
}
