//! Natural-number constraints decided by exhaustive assignment.

use hornsat::clause::Constraint;
use hornsat::signature::SymbolId;
use hornsat::term::Term;
use proptest::prelude::*;

pub const VARS: u8 = 4;
pub const MAX_OFFSET: i64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Var(u8),
    Lit(u64),
    /// A name, which is never a natural number.
    Name,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NatC {
    IsNat(Side),
    NotNat(Side),
    /// `lhs >= rhs + offset`
    Geq(Side, Side, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Val {
    Nat(i64),
    Other,
}

fn value(s: Side, env: &[Val]) -> Val {
    match s {
        Side::Var(i) => env[i as usize],
        Side::Lit(k) => Val::Nat(k as i64),
        Side::Name => Val::Other,
    }
}

fn holds(c: NatC, env: &[Val]) -> bool {
    match c {
        NatC::IsNat(s) => matches!(value(s, env), Val::Nat(_)),
        NatC::NotNat(s) => value(s, env) == Val::Other,
        NatC::Geq(l, r, off) => match (value(l, env), value(r, env)) {
            (Val::Nat(x), Val::Nat(y)) => x >= y + off,
            _ => false,
        },
    }
}

fn vars_of(c: NatC) -> Vec<u8> {
    let sides = match c {
        NatC::IsNat(s) | NatC::NotNat(s) => vec![s],
        NatC::Geq(l, r, _) => vec![l, r],
    };
    sides
        .into_iter()
        .filter_map(|s| match s {
            Side::Var(i) => Some(i),
            _ => None,
        })
        .collect()
}

/// Largest value any variable needs in some solution, if one exists:
/// every bound is a sum of edge weights along a simple path.
fn value_bound(cs: &[NatC]) -> i64 {
    let lit = |s: Side| match s {
        Side::Lit(k) => k as i64,
        _ => 0,
    };
    cs.iter()
        .map(|c| match *c {
            NatC::Geq(l, r, off) => off.abs() + lit(l) + lit(r),
            _ => 0,
        })
        .sum()
}

/// Up to `limit` solutions, found by trying every value in `0..=bound`
/// plus a non-number for each variable.
pub fn solutions(cs: &[NatC], limit: usize) -> Vec<Vec<Option<i64>>> {
    let bound = value_bound(cs);
    let mut candidates: Vec<Val> = (0..=bound).map(Val::Nat).collect();
    candidates.push(Val::Other);
    let mut env = vec![Val::Other; VARS as usize];
    let mut out = Vec::new();
    search(cs, &candidates, 0, &mut env, limit, &mut out);
    out
}

fn search(cs: &[NatC], cands: &[Val], next: u8, env: &mut Vec<Val>, limit: usize, out: &mut Vec<Vec<Option<i64>>>) {
    // Check the constraints whose last variable was just assigned.
    let ready = |c: &NatC| vars_of(*c).iter().all(|v| *v < next);
    if cs.iter().filter(|c| ready(c)).any(|c| !holds(*c, env)) {
        return;
    }
    if next == VARS {
        out.push(
            env.iter()
                .map(|v| match v {
                    Val::Nat(n) => Some(*n),
                    Val::Other => None,
                })
                .collect(),
        );
        return;
    }
    for &v in cands {
        env[next as usize] = v;
        search(cs, cands, next + 1, env, limit, out);
        if out.len() >= limit {
            return;
        }
    }
}

pub fn satisfiable(cs: &[NatC]) -> bool {
    !solutions(cs, 1).is_empty()
}

/// Whether `c` holds under a solution as returned by [`solutions`].
pub fn holds_in(c: NatC, solution: &[Option<i64>]) -> bool {
    let env: Vec<Val> = solution.iter().map(|v| v.map_or(Val::Other, Val::Nat)).collect();
    holds(c, &env)
}

pub fn to_library(c: NatC, name: SymbolId) -> Constraint {
    let t = |s: Side| match s {
        Side::Var(i) => Term::var(i as u32),
        Side::Lit(k) => Term::Nat(k),
        Side::Name => Term::constant(name),
    };
    match c {
        NatC::IsNat(s) => Constraint::IsNat(t(s)),
        NatC::NotNat(s) => Constraint::NotNat(t(s)),
        NatC::Geq(l, r, offset) => Constraint::Geq {
            lhs: t(l),
            rhs: t(r),
            offset,
        },
    }
}

pub fn side() -> BoxedStrategy<Side> {
    prop_oneof![
        6 => (0..VARS).prop_map(Side::Var),
        2 => (0u64..=5).prop_map(Side::Lit),
        1 => Just(Side::Name),
    ]
    .boxed()
}

pub fn constraint() -> BoxedStrategy<NatC> {
    prop_oneof![
        1 => side().prop_map(NatC::IsNat),
        1 => side().prop_map(NatC::NotNat),
        5 => (side(), side(), -MAX_OFFSET..=MAX_OFFSET).prop_map(|(l, r, o)| NatC::Geq(l, r, o)),
    ]
    .boxed()
}

pub fn constraint_set() -> BoxedStrategy<Vec<NatC>> {
    prop::collection::vec(constraint(), 1..=6).boxed()
}
