//! Proptest strategies over a small fixed signature, and a brute-force
//! subsumption check.

use hornsat::clause::{Clause, Fact};
use hornsat::frontend::parse_spec;
use hornsat::signature::{PredicateId, Signature, SymbolId};
use hornsat::term::{Term, Var};
use proptest::prelude::*;

/// `a`, `b` public names, `f/1`, `g/2` constructors, `pair/2` data,
/// `p/1`, `q/2` predicates.
#[derive(Clone, Copy, Debug)]
pub struct Ids {
    pub a: SymbolId,
    pub b: SymbolId,
    pub f: SymbolId,
    pub g: SymbolId,
    pub pair: SymbolId,
    pub p: PredicateId,
    pub q: PredicateId,
}

pub const SIGNATURE: &str = "name a.\nname b.\nfun f/1.\nfun g/2.\ndata pair/2.\npred p/1.\npred q/2.\n";

pub fn signature() -> (Signature, Ids) {
    let spec = parse_spec(SIGNATURE).expect("fixed signature parses");
    let sig = spec.sig;
    let s = |n: &str| sig.symbol_id(n).unwrap();
    let ids = Ids {
        a: s("a"),
        b: s("b"),
        f: s("f"),
        g: s("g"),
        pair: s("pair"),
        p: sig.predicate_id("p").unwrap(),
        q: sig.predicate_id("q").unwrap(),
    };
    (sig, ids)
}

/// Terms over `a`, `b`, `f`, `g` and variables `0..vars`, of depth at most
/// `depth`.
pub fn term(ids: Ids, vars: u32, depth: u32) -> BoxedStrategy<Term> {
    let leaf = if vars == 0 {
        prop_oneof![Just(Term::constant(ids.a)), Just(Term::constant(ids.b))].boxed()
    } else {
        prop_oneof![
            2 => (0..vars).prop_map(Term::var),
            1 => Just(Term::constant(ids.a)),
            1 => Just(Term::constant(ids.b)),
        ]
        .boxed()
    };
    leaf.prop_recursive(depth, 16, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(move |t| Term::app(ids.f, vec![t])),
            (inner.clone(), inner).prop_map(move |(x, y)| Term::app(ids.g, vec![x, y])),
        ]
    })
    .boxed()
}

pub fn fact(ids: Ids, vars: u32, depth: u32) -> BoxedStrategy<Fact> {
    prop_oneof![
        term(ids, vars, depth).prop_map(Fact::att),
        term(ids, vars, depth).prop_map(move |t| Fact::new(ids.p, vec![t])),
        (term(ids, vars, depth), term(ids, vars, depth)).prop_map(move |(x, y)| Fact::new(ids.q, vec![x, y])),
    ]
    .boxed()
}

pub fn clause(ids: Ids, vars: u32, depth: u32, max_hyps: usize) -> BoxedStrategy<Clause> {
    (
        prop::collection::vec(fact(ids, vars, depth), 0..=max_hyps),
        fact(ids, vars, depth),
    )
        .prop_map(|(hyps, concl)| Clause::initial(0, hyps, vec![], concl))
        .boxed()
}

/// A pair `(general, specific)` where `specific` is often an instance of
/// `general` with extra hypotheses, shuffled.
pub fn subsumption_pair(ids: Ids) -> BoxedStrategy<(Clause, Clause)> {
    let related = (
        clause(ids, 3, 2, 3),
        prop::collection::vec(term(ids, 2, 1), 3),
        prop::collection::vec(fact(ids, 2, 2), 0..=2),
        any::<prop::sample::Index>(),
        any::<bool>(),
    )
        .prop_map(move |(general, images, extra, rot, mutate)| {
            let inst = |f: &Fact| f.map_vars(&mut |v: Var| images[v.0 as usize % images.len()].clone());
            let mut hyps: Vec<Fact> = general.hyps.iter().map(inst).chain(extra).collect();
            if !hyps.is_empty() {
                let k = rot.index(hyps.len());
                hyps.rotate_left(k);
            }
            let mut concl = inst(&general.concl);
            if mutate {
                // Sometimes break the instance so negatives are near misses.
                if let Some(h) = hyps.first_mut() {
                    *h = Fact::att(Term::app(ids.f, vec![h.args[0].clone()]));
                } else {
                    concl = Fact::att(Term::app(ids.f, vec![concl.args[0].clone()]));
                }
            }
            (general, Clause::initial(0, hyps, vec![], concl))
        });
    prop_oneof![
        3 => related,
        1 => (clause(ids, 2, 2, 2), clause(ids, 2, 2, 3)),
    ]
    .boxed()
}

/// Subsumption by exhaustive search: each variable of `general` is mapped
/// to some subterm of `specific`, and the hypotheses are checked for an
/// injective embedding. A partial assignment is abandoned as soon as a fact
/// whose variables are all assigned has no counterpart. Constraints are not
/// considered.
pub fn brute_force_subsumes(general: &Clause, specific: &Clause) -> bool {
    let mut vars = Vec::new();
    for h in general.hyps.iter().chain(std::iter::once(&general.concl)) {
        for t in &h.args {
            collect(t, &mut vars);
        }
    }
    let mut pool: Vec<Term> = Vec::new();
    for h in specific.hyps.iter().chain(std::iter::once(&specific.concl)) {
        for t in &h.args {
            subterms(t, &mut pool);
        }
    }
    pool.sort();
    pool.dedup();
    let mut assigned: Vec<Term> = Vec::new();
    assign(general, specific, &vars, &pool, &mut assigned)
}

fn assign(general: &Clause, specific: &Clause, vars: &[u32], pool: &[Term], assigned: &mut Vec<Term>) -> bool {
    let known = &vars[..assigned.len()];
    let ready = |f: &Fact| {
        let mut vs = Vec::new();
        f.args.iter().for_each(|t| collect(t, &mut vs));
        vs.iter().all(|v| known.contains(v))
    };
    let lookup = |v: u32| -> Term {
        let i = vars.iter().position(|w| *w == v).unwrap();
        assigned[i].clone()
    };
    let apply = |f: &Fact| Fact {
        pred: f.pred,
        args: f.args.iter().map(|t| subst(t, &lookup)).collect(),
    };
    if ready(&general.concl) && apply(&general.concl) != specific.concl {
        return false;
    }
    if general
        .hyps
        .iter()
        .any(|h| ready(h) && !specific.hyps.contains(&apply(h)))
    {
        return false;
    }
    if assigned.len() == vars.len() {
        let hyps: Vec<Fact> = general.hyps.iter().map(apply).collect();
        return embeds(&hyps, &specific.hyps);
    }
    for t in pool {
        assigned.push(t.clone());
        if assign(general, specific, vars, pool, assigned) {
            return true;
        }
        assigned.pop();
    }
    false
}

fn embeds(small: &[Fact], big: &[Fact]) -> bool {
    let mut used = vec![false; big.len()];
    small
        .iter()
        .all(|h| match (0..big.len()).find(|&j| !used[j] && big[j] == *h) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
}

fn collect(t: &Term, out: &mut Vec<u32>) {
    match t {
        Term::Var(v) => {
            if !out.contains(&v.0) {
                out.push(v.0)
            }
        }
        Term::Nat(_) => {}
        Term::App(_, args) => args.iter().for_each(|a| collect(a, out)),
    }
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    out.push(t.clone());
    if let Term::App(_, args) = t {
        args.iter().for_each(|a| subterms(a, out));
    }
}

fn subst(t: &Term, lookup: &impl Fn(u32) -> Term) -> Term {
    match t {
        Term::Var(v) => lookup(v.0),
        Term::Nat(_) => t.clone(),
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| subst(a, lookup)).collect()),
    }
}
