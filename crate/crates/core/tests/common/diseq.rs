//! Single disequations decided by grounding: free variables range over the
//! two constants `a` and `b`, universal variables over every ground term of
//! depth at most two.

use hornsat::clause::Constraint;
use hornsat::term::{Term, Var};
use proptest::prelude::*;

use super::strategies::Ids;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DT {
    Free(u8),
    Univ(u8),
    A,
    B,
    F(Box<DT>),
    G(Box<DT>, Box<DT>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ground {
    A,
    B,
    F(Box<Ground>),
    G(Box<Ground>, Box<Ground>),
}

const FREE: u8 = 2;
const UNIV: u8 = 2;
/// Library variable ids of universals start here.
const UNIV_BASE: u32 = 10;

fn universe() -> Vec<Ground> {
    let mut all = vec![Ground::A, Ground::B];
    for _ in 0..2 {
        let prev = all.clone();
        let mut next = vec![Ground::A, Ground::B];
        for x in &prev {
            next.push(Ground::F(Box::new(x.clone())));
        }
        for x in &prev {
            for y in &prev {
                next.push(Ground::G(Box::new(x.clone()), Box::new(y.clone())));
            }
        }
        all = next;
    }
    all
}

fn eval(t: &DT, free: &[Ground], univ: &[Ground]) -> Ground {
    match t {
        DT::Free(i) => free[*i as usize].clone(),
        DT::Univ(i) => univ[*i as usize].clone(),
        DT::A => Ground::A,
        DT::B => Ground::B,
        DT::F(x) => Ground::F(Box::new(eval(x, free, univ))),
        DT::G(x, y) => Ground::G(Box::new(eval(x, free, univ)), Box::new(eval(y, free, univ))),
    }
}

/// Is there a choice of free variables making `lhs` and `rhs` differ for
/// every choice of universals?
pub fn satisfiable(lhs: &DT, rhs: &DT) -> bool {
    let consts = [Ground::A, Ground::B];
    let univ = universe();
    let frees: Vec<Vec<Ground>> = (0..consts.len().pow(FREE as u32))
        .map(|k| (0..FREE).map(|i| consts[(k >> i) & 1].clone()).collect())
        .collect();
    frees.iter().any(|free| {
        (0..univ.len()).all(|i| {
            (0..univ.len()).all(|j| {
                let u = [univ[i].clone(), univ[j].clone()];
                eval(lhs, free, &u) != eval(rhs, free, &u)
            })
        })
    })
}

pub fn to_library(lhs: &DT, rhs: &DT, ids: Ids) -> Constraint {
    fn conv(t: &DT, ids: Ids, univ: &mut Vec<Var>) -> Term {
        match t {
            DT::Free(i) => Term::var(*i as u32),
            DT::Univ(i) => {
                let v = Var(UNIV_BASE + *i as u32);
                if !univ.contains(&v) {
                    univ.push(v);
                }
                Term::Var(v)
            }
            DT::A => Term::constant(ids.a),
            DT::B => Term::constant(ids.b),
            DT::F(x) => Term::app(ids.f, vec![conv(x, ids, univ)]),
            DT::G(x, y) => Term::app(ids.g, vec![conv(x, ids, univ), conv(y, ids, univ)]),
        }
    }
    let mut universals = Vec::new();
    let lhs = conv(lhs, ids, &mut universals);
    let rhs = conv(rhs, ids, &mut universals);
    universals.sort();
    Constraint::Diseq { universals, lhs, rhs }
}

pub fn term() -> BoxedStrategy<DT> {
    let leaf = prop_oneof![
        (0..FREE).prop_map(DT::Free),
        (0..UNIV).prop_map(DT::Univ),
        Just(DT::A),
        Just(DT::B),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| DT::F(Box::new(x))),
            (inner.clone(), inner).prop_map(|(x, y)| DT::G(Box::new(x), Box::new(y))),
        ]
    })
    .boxed()
}

pub fn disequation() -> BoxedStrategy<(DT, DT)> {
    (term(), term()).boxed()
}
