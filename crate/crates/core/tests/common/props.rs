//! Property bodies shared by the property suites and the acceptance run.

use hornsat::clause::{simplify_diseqs, simplify_nat, subsumes, Clause, Constraint};
use hornsat::term::{unify, Term, Var};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::strategies::{brute_force_subsumes, Ids};
use super::{diseq, nat};

/// Replaces the subterms picked by `cuts` (preorder positions) with fresh
/// variables from 100 upwards. Returns the generalization and the bindings
/// that undo it.
pub fn generalize(t: &Term, cuts: &[bool]) -> (Term, Vec<(u32, Term)>) {
    fn go(t: &Term, cuts: &[bool], pos: &mut usize, out: &mut Vec<(u32, Term)>) -> Term {
        let here = *pos;
        *pos += 1;
        if here > 0 && cuts.get(here).copied().unwrap_or(false) {
            let v = 100 + out.len() as u32;
            out.push((v, t.clone()));
            return Term::var(v);
        }
        match t {
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| go(a, cuts, pos, out)).collect()),
            _ => t.clone(),
        }
    }
    let mut out = Vec::new();
    let g = go(t, cuts, &mut 0, &mut out);
    (g, out)
}

/// Applies bindings given as a plain list, leaving other variables alone.
pub fn apply(t: &Term, bindings: &[(u32, Term)]) -> Term {
    match t {
        Term::Var(Var(v)) => bindings
            .iter()
            .find(|(w, _)| w == v)
            .map_or_else(|| t.clone(), |(_, s)| s.clone()),
        Term::Nat(_) => t.clone(),
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| apply(a, bindings)).collect()),
    }
}

pub fn unifier_equalizes(a: &Term, b: &Term) -> Result<(), TestCaseError> {
    if let Some(s) = unify(a, b) {
        let (sa, sb) = (s.apply(a), s.apply(b));
        prop_assert_eq!(&sa, &sb);
        prop_assert_eq!(s.apply(&sa), sa);
        for (v, t) in s.iter() {
            prop_assert!(!t.occurs(*v));
        }
    }
    Ok(())
}

/// `a` and its generalization are unified by the bindings undoing the
/// generalization, so an mgu must exist and those bindings must factor
/// through it.
pub fn unifier_is_most_general(a: &Term, cuts: &[bool], swap: bool) -> Result<(), TestCaseError> {
    let (b, theta) = generalize(a, cuts);
    let (l, r) = if swap { (&b, a) } else { (a, &b) };
    let s = unify(l, r);
    prop_assert!(s.is_some(), "no unifier for an instance pair");
    let s = s.unwrap();
    let mut vars = a.vars();
    vars.extend(b.vars());
    for v in vars {
        let x = Term::Var(v);
        prop_assert_eq!(apply(&s.apply(&x), &theta), apply(&x, &theta));
    }
    Ok(())
}

pub fn subsumption_agrees(general: &Clause, specific: &Clause) -> Result<(), TestCaseError> {
    prop_assert_eq!(subsumes(general, specific), brute_force_subsumes(general, specific));
    Ok(())
}

pub fn nat_agrees(cs: &[nat::NatC], ids: Ids) -> Result<(), TestCaseError> {
    let lib: Vec<Constraint> = cs.iter().map(|c| nat::to_library(*c, ids.a)).collect();
    let verdict = simplify_nat(&lib);
    prop_assert_eq!(verdict.is_unsat(), !nat::satisfiable(cs), "{:?}", verdict);
    Ok(())
}

pub fn diseq_agrees(l: &diseq::DT, r: &diseq::DT, ids: Ids) -> Result<(), TestCaseError> {
    let c = diseq::to_library(l, r, ids);
    prop_assert_eq!(simplify_diseqs(&[c]).is_unsat(), !diseq::satisfiable(l, r));
    Ok(())
}
