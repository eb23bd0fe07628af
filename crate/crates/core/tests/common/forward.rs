//! Random range-restricted Horn clause sets over user predicates, a
//! bottom-up forward-chaining oracle, and the comparison against
//! saturation followed by backward search.

use std::collections::BTreeSet;
use std::fmt;

use hornsat::clause::Fact;
use hornsat::frontend::{initial_clauses, parse_spec, ClauseSet, Specification};
use hornsat::query::{check_derivation, expand, Prover, Search};
use hornsat::saturate::{saturate, Config, Saturation};
use hornsat::signature::Signature;
use hornsat::term::Term;
use rand::seq::SliceRandom;
use rand::Rng;

const FUNCS: [(&str, usize); 3] = [("f", 1), ("g", 2), ("h", 1)];
const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 1), ("r", 2)];
const CONSTS: [&str; 2] = ["a", "b"];
const VARS: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum T {
    V(u8),
    F(&'static str, Vec<T>),
}

impl T {
    fn depth(&self) -> usize {
        match self {
            T::V(_) => 0,
            T::F(_, args) => args.iter().map(|a| 1 + a.depth()).max().unwrap_or(0),
        }
    }

    fn vars(&self, out: &mut Vec<u8>) {
        match self {
            T::V(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            T::F(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn subst(&self, env: &[Option<T>]) -> T {
        match self {
            T::V(v) => env[*v as usize].clone().expect("range restricted"),
            T::F(f, args) => T::F(f, args.iter().map(|a| a.subst(env)).collect()),
        }
    }
}

impl fmt::Display for T {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            T::V(v) => write!(f, "x{v}"),
            T::F(name, args) if args.is_empty() => write!(f, "{name}"),
            T::F(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: &'static str,
    pub args: Vec<T>,
}

impl Atom {
    pub fn depth(&self) -> usize {
        self.args.iter().map(T::depth).max().unwrap_or(0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct Horn {
    pub hyps: Vec<Atom>,
    pub concl: Atom,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub funcs: Vec<(&'static str, usize)>,
    pub clauses: Vec<Horn>,
}

impl Problem {
    /// At most 12 clauses, at most 3 function symbols of arity at most 2,
    /// two constants, term depth at most 3. Every conclusion variable
    /// occurs in a hypothesis, so every fact clause is ground.
    pub fn random(rng: &mut impl Rng) -> Problem {
        let mut funcs = FUNCS.to_vec();
        funcs.shuffle(rng);
        funcs.truncate(rng.gen_range(1..=3));
        funcs.sort();
        let n = rng.gen_range(2..=12);
        let mut clauses = Vec::with_capacity(n);
        for i in 0..n {
            // Make sure something is derivable.
            let nhyps = if i < 3 {
                0
            } else {
                [0, 1, 1, 1, 2, 2][rng.gen_range(0..6)]
            };
            let hyps: Vec<Atom> = (0..nhyps)
                .map(|_| {
                    let depth = [0, 1, 1, 2][rng.gen_range(0..4)];
                    random_atom(rng, &funcs, depth, VARS)
                })
                .collect();
            let mut vars = Vec::new();
            hyps.iter().flat_map(|h| &h.args).for_each(|t| t.vars(&mut vars));
            let depth = [0, 1, 1, 2, 3][rng.gen_range(0..5)];
            let concl = random_atom_over(rng, &funcs, depth, &vars);
            clauses.push(Horn { hyps, concl });
        }
        Problem { funcs, clauses }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in CONSTS {
            s += &format!("name {c}.\n");
        }
        for (f, n) in &self.funcs {
            s += &format!("fun {f}/{n}.\n");
        }
        for (p, n) in PREDS {
            s += &format!("pred {p}/{n}.\n");
        }
        for c in &self.clauses {
            let hyps = if c.hyps.is_empty() {
                "true".to_string()
            } else {
                c.hyps.iter().map(Atom::to_string).collect::<Vec<_>>().join(" && ")
            };
            s += &format!("clause {hyps} => {}.\n", c.concl);
        }
        s
    }

    pub fn random_ground(&self, rng: &mut impl Rng, depth: usize) -> Atom {
        random_atom_over(rng, &self.funcs, depth, &[])
    }
}

fn random_term(rng: &mut impl Rng, funcs: &[(&'static str, usize)], depth: usize, vars: &[u8]) -> T {
    if depth == 0 || rng.gen_bool(0.4) {
        if !vars.is_empty() && rng.gen_bool(0.6) {
            T::V(vars[rng.gen_range(0..vars.len())])
        } else {
            T::F(CONSTS[rng.gen_range(0..2)], vec![])
        }
    } else {
        let (f, n) = funcs[rng.gen_range(0..funcs.len())];
        T::F(f, (0..n).map(|_| random_term(rng, funcs, depth - 1, vars)).collect())
    }
}

fn random_atom(rng: &mut impl Rng, funcs: &[(&'static str, usize)], depth: usize, vars: u8) -> Atom {
    let pool: Vec<u8> = (0..vars).collect();
    random_atom_over(rng, funcs, depth, &pool)
}

fn random_atom_over(rng: &mut impl Rng, funcs: &[(&'static str, usize)], depth: usize, vars: &[u8]) -> Atom {
    let (pred, n) = PREDS[rng.gen_range(0..PREDS.len())];
    Atom {
        pred,
        args: (0..n).map(|_| random_term(rng, funcs, depth, vars)).collect(),
    }
}

fn match_term(p: &T, g: &T, env: &mut [Option<T>]) -> bool {
    match p {
        T::V(v) => match &env[*v as usize] {
            Some(bound) => bound == g,
            None => {
                env[*v as usize] = Some(g.clone());
                true
            }
        },
        T::F(f, args) => match g {
            T::F(h, gargs) => {
                f == h && args.len() == gargs.len() && args.iter().zip(gargs).all(|(a, b)| match_term(a, b, env))
            }
            T::V(_) => false,
        },
    }
}

pub struct ForwardLimits {
    /// Facts deeper than this are discarded.
    pub term_depth: usize,
    pub max_facts: usize,
    pub max_rounds: usize,
}

pub const FORWARD: ForwardLimits = ForwardLimits {
    term_depth: 6,
    max_facts: 20_000,
    max_rounds: 64,
};

/// Naive bottom-up evaluation to a fixpoint. `None` if a cap on facts or
/// rounds was hit.
pub fn forward(p: &Problem, limits: &ForwardLimits) -> Option<BTreeSet<Atom>> {
    let mut facts: BTreeSet<Atom> = BTreeSet::new();
    for _ in 0..limits.max_rounds {
        let mut fresh = Vec::new();
        for c in &p.clauses {
            let mut env = vec![None; VARS as usize];
            join(&c.hyps, &facts, &mut env, &mut |env| {
                let concl = Atom {
                    pred: c.concl.pred,
                    args: c.concl.args.iter().map(|t| t.subst(env)).collect(),
                };
                if concl.depth() <= limits.term_depth && !facts.contains(&concl) {
                    fresh.push(concl);
                }
            });
        }
        if fresh.is_empty() {
            return Some(facts);
        }
        facts.extend(fresh);
        if facts.len() > limits.max_facts {
            return None;
        }
    }
    None
}

fn join(hyps: &[Atom], facts: &BTreeSet<Atom>, env: &mut Vec<Option<T>>, emit: &mut impl FnMut(&[Option<T>])) {
    let Some((h, rest)) = hyps.split_first() else {
        emit(env);
        return;
    };
    for f in facts.iter().filter(|f| f.pred == h.pred) {
        let saved = env.clone();
        if h.args.iter().zip(&f.args).all(|(a, b)| match_term(a, b, env)) {
            join(rest, facts, env, emit);
        }
        *env = saved;
    }
}

pub fn to_fact(sig: &Signature, a: &Atom) -> Fact {
    fn term(sig: &Signature, t: &T) -> Term {
        match t {
            T::V(v) => Term::var(*v as u32),
            T::F(f, args) => Term::app(sig.symbol_id(f).unwrap(), args.iter().map(|x| term(sig, x)).collect()),
        }
    }
    Fact::new(
        sig.predicate_id(a.pred).unwrap(),
        a.args.iter().map(|t| term(sig, t)).collect(),
    )
}

/// Ground library facts back into oracle atoms; `None` for anything else.
pub fn from_fact(sig: &Signature, f: &Fact) -> Option<Atom> {
    fn name(ident: &str) -> Option<&'static str> {
        CONSTS
            .iter()
            .chain(FUNCS.iter().map(|(f, _)| f))
            .chain(PREDS.iter().map(|(p, _)| p))
            .find(|n| **n == ident)
            .copied()
    }
    fn term(sig: &Signature, t: &Term) -> Option<T> {
        match t {
            Term::App(f, args) => Some(T::F(
                name(&sig.symbol(*f).ident)?,
                args.iter().map(|a| term(sig, a)).collect::<Option<_>>()?,
            )),
            _ => None,
        }
    }
    Some(Atom {
        pred: name(&sig.predicate(f.pred).ident)?,
        args: f.args.iter().map(|t| term(sig, t)).collect::<Option<_>>()?,
    })
}

pub struct Limits {
    pub saturation: Config,
    /// Ground facts compared are at most this deep.
    pub query_depth: usize,
    /// Random ground facts tried per problem, besides the derivable ones.
    pub samples: usize,
    pub forward: ForwardLimits,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            saturation: Config {
                max_clauses: 400,
                max_depth: 12,
                ..Config::default()
            },
            query_depth: 4,
            samples: 60,
            forward: FORWARD,
        }
    }
}

#[derive(Debug)]
pub enum Case {
    /// Saturation hit a limit; the problem says nothing.
    NoFixpoint,
    /// The oracle hit one of its caps.
    OracleCapped,
    Checked {
        derivable: usize,
        sampled: usize,
        certificates: usize,
    },
    Mismatch(String),
}

pub struct Prepared {
    pub spec: Specification,
    pub initial: ClauseSet,
}

pub fn prepare(p: &Problem) -> Prepared {
    let spec = parse_spec(&p.render()).unwrap_or_else(|e| panic!("{e}\n{}", p.render()));
    let initial = initial_clauses(&spec);
    Prepared { spec, initial }
}

pub fn run_saturation(prep: &Prepared, config: Config) -> Saturation {
    saturate(&prep.spec.sig, &prep.initial, &[], config)
}

/// Compares ground derivability up to `query_depth` between the oracle and
/// backward search over the saturated clauses, and checks a derivation
/// certificate for every derivable fact.
pub fn check(p: &Problem, rng: &mut impl Rng, limits: &Limits) -> Case {
    let prep = prepare(p);
    let sat = run_saturation(&prep, limits.saturation);
    if !sat.outcome.is_complete() {
        return Case::NoFixpoint;
    }
    let Some(model) = forward(p, &limits.forward) else {
        return Case::OracleCapped;
    };
    let sig = &prep.spec.sig;
    let mut prover = Prover::new(sig, sat.solved(sig), 200);
    let fail = |what: String| Case::Mismatch(format!("{what}\n{}", p.render()));

    let mut certificates = 0;
    let derivable: Vec<&Atom> = model.iter().filter(|a| a.depth() <= limits.query_depth).collect();
    for a in &derivable {
        match prover.prove(&to_fact(sig, a)) {
            Search::Found(proof) => {
                let d = match expand(sig, &prep.initial, &mut prover, &proof) {
                    Ok(d) => d,
                    Err(e) => return fail(format!("{a}: {e}")),
                };
                if let Err(e) = check_derivation(sig, &prep.initial, &d) {
                    return fail(format!("{a}: {e}"));
                }
                if from_fact(sig, &d.fact).as_ref() != Some(*a) {
                    return fail(format!("{a}: derivation concludes {}", sig.show(&d.fact)));
                }
                certificates += 1;
            }
            other => return fail(format!("{a} is derivable but backward search says {other:?}")),
        }
    }
    // Conclusions of solved clauses that are facts must be in the model.
    for c in sat.solved(sig).filter(|c| !c.concl.is_att()) {
        if !c.hyps.is_empty() || !c.constraints.is_empty() {
            return fail(format!("solved clause with hypotheses: {}", sig.show(c)));
        }
        match from_fact(sig, &c.concl) {
            Some(a) if a.depth() > limits.forward.term_depth || model.contains(&a) => {}
            Some(a) => return fail(format!("{a} is a solved fact but not derivable")),
            None => return fail(format!("non-ground solved fact {}", sig.show(c))),
        }
    }
    // Random ground facts, half of them near misses of derivable ones.
    let mut sampled = 0;
    for i in 0..limits.samples {
        let a = if i % 2 == 0 || derivable.is_empty() {
            let depth = rng.gen_range(0..=limits.query_depth);
            p.random_ground(rng, depth)
        } else {
            let k = rng.gen_range(0..derivable.len());
            perturb(p, rng, derivable[k], limits.query_depth)
        };
        if a.depth() > limits.query_depth {
            continue;
        }
        sampled += 1;
        let expected = model.contains(&a);
        match prover.prove(&to_fact(sig, &a)) {
            Search::Found(_) if expected => {}
            Search::Exhausted if !expected => {}
            other => return fail(format!("{a}: oracle says {expected}, backward search says {other:?}")),
        }
    }
    Case::Checked {
        derivable: derivable.len(),
        sampled,
        certificates,
    }
}

fn perturb(p: &Problem, rng: &mut impl Rng, a: &Atom, depth: usize) -> Atom {
    fn go(p: &Problem, rng: &mut impl Rng, t: &T) -> T {
        match t {
            T::F(f, args) if !args.is_empty() && rng.gen_bool(0.6) => {
                let k = rng.gen_range(0..args.len());
                let mut args = args.clone();
                args[k] = go(p, rng, &args[k]);
                T::F(f, args)
            }
            _ => random_term(rng, &p.funcs, 1, &[]),
        }
    }
    let mut out = a.clone();
    let k = rng.gen_range(0..out.args.len());
    out.args[k] = go(p, rng, &out.args[k]);
    if out.depth() > depth {
        a.clone()
    } else {
        out
    }
}

/// Saturates with and without the index; the final clause sets must agree
/// up to renaming. Returns the subsumption check counters (indexed,
/// unindexed).
pub fn compare_index(prep: &Prepared, config: Config) -> Result<(usize, usize), String> {
    let sig = &prep.spec.sig;
    let with = run_saturation(
        prep,
        Config {
            use_index: true,
            ..config
        },
    );
    let without = run_saturation(
        prep,
        Config {
            use_index: false,
            ..config
        },
    );
    if with.outcome != without.outcome {
        return Err(format!("outcomes differ: {} vs {}", with.outcome, without.outcome));
    }
    let render = |s: &Saturation| {
        let mut v: Vec<String> = s.clauses.iter().map(|(_, c)| sig.show(c).to_string()).collect();
        v.sort();
        v
    };
    let (a, b) = (render(&with), render(&without));
    if a != b {
        return Err(format!("clause sets differ:\n{}\n---\n{}", a.join("\n"), b.join("\n")));
    }
    Ok((with.stats.subsumption_checks, without.stats.subsumption_checks))
}
