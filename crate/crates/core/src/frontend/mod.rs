//! The input language: protocol specifications, the clauses generated from
//! them, and the `[precise]` annotation.

mod parse;

use std::collections::HashMap;
use std::fmt;

use crate::clause::{Clause, Constraint, DataClauses, DataTable, Fact, InitialId};
use crate::signature::{PredicateKind, Pretty, Signature, SymbolId, SymbolKind};
use crate::term::{Term, Var};

pub use parse::{parse_spec, Diagnostic, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub destructor: SymbolId,
    pub lhs_args: Vec<Term>,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub fact: Fact,
    pub precise: bool,
}

#[derive(Clone, Debug)]
pub struct ProtocolClause {
    pub hyps: Vec<Hypothesis>,
    pub constraints: Vec<Constraint>,
    pub concl: Fact,
    /// Source line, 0 when built programmatically.
    pub line: usize,
}

// Source positions do not take part in equality.
impl PartialEq for ProtocolClause {
    fn eq(&self, other: &Self) -> bool {
        self.hyps == other.hyps && self.constraints == other.constraints && self.concl == other.concl
    }
}

impl Eq for ProtocolClause {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssertionKind {
    Axiom,
    Restriction,
    Lemma,
    InductiveLemma,
}

impl AssertionKind {
    pub fn is_lemma(self) -> bool {
        matches!(self, AssertionKind::Lemma | AssertionKind::InductiveLemma)
    }

    fn keyword(self) -> &'static str {
        match self {
            AssertionKind::Axiom => "axiom",
            AssertionKind::Restriction => "restriction",
            AssertionKind::Lemma => "lemma",
            AssertionKind::InductiveLemma => "lemma inductive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Fact(Fact),
    Equal(Term, Term),
}

/// `premises ==> conclusion`, read as: whenever all premises hold, so does
/// every conjunct of the conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub kind: AssertionKind,
    pub premises: Vec<Fact>,
    pub conclusion: Vec<Conclusion>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Secrecy(Fact),
    Correspondence { premise: Fact, required: Vec<Fact> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specification {
    pub sig: Signature,
    pub rules: Vec<RewriteRule>,
    pub clauses: Vec<ProtocolClause>,
    pub assertions: Vec<Assertion>,
    pub queries: Vec<Query>,
}

/// Where an initial clause comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Constructor(SymbolId),
    Rewrite(usize),
    DataCompose(SymbolId),
    Projection(SymbolId, usize),
    PublicName(SymbolId),
    Protocol {
        index: usize,
        line: usize,
    },
    /// Internal clause used to prove a lemma.
    Goal(usize),
}

#[derive(Clone, Debug)]
pub struct InitialClause {
    pub clause: Clause,
    pub origin: Origin,
}

/// The clauses saturation starts from, indexed by [`InitialId`].
#[derive(Clone, Debug, Default)]
pub struct ClauseSet {
    pub clauses: Vec<InitialClause>,
    pub data: DataTable,
}

impl ClauseSet {
    pub fn push(
        &mut self,
        origin: Origin,
        hyps: Vec<Fact>,
        constraints: Vec<Constraint>,
        concl: Fact,
        exempt: bool,
    ) -> InitialId {
        let id = self.clauses.len();
        let mut clause = Clause::initial(id, hyps, constraints, concl);
        clause.exempt = exempt;
        self.clauses.push(InitialClause { clause, origin });
        id
    }

    pub fn get(&self, id: InitialId) -> &InitialClause {
        &self.clauses[id]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InitialClause> {
        self.clauses.iter()
    }

    pub fn describe(&self, sig: &Signature, id: InitialId) -> String {
        let name = |f: &SymbolId| sig.symbol(*f).ident.clone();
        match &self.clauses[id].origin {
            Origin::Constructor(f) => format!("constructor {}", name(f)),
            Origin::Rewrite(i) => format!("rewrite rule {}", i + 1),
            Origin::DataCompose(f) => format!("data {}", name(f)),
            Origin::Projection(f, i) => format!("projection {} of {}", i + 1, name(f)),
            Origin::PublicName(f) => format!("public name {}", name(f)),
            Origin::Protocol { index, line } if *line > 0 => {
                format!("protocol clause {} (line {line})", index + 1)
            }
            Origin::Protocol { index, .. } => format!("protocol clause {}", index + 1),
            Origin::Goal(i) => format!("goal {}", i + 1),
        }
    }
}

fn vars(n: usize) -> Vec<Term> {
    (0..n as u32).map(Term::var).collect()
}

/// Clauses describing what the adversary can compute: one per constructor,
/// one per rewrite rule, composition and projections for each data
/// constructor, and `att(c)` for each public name.
pub fn generate_adversary_clauses(spec: &Specification) -> ClauseSet {
    let mut set = ClauseSet::default();
    for (f, sym) in spec.sig.symbols() {
        let xs = vars(sym.arity);
        let hyps: Vec<Fact> = xs.iter().cloned().map(Fact::att).collect();
        match sym.kind {
            SymbolKind::Constructor => {
                set.push(Origin::Constructor(f), hyps, vec![], Fact::att(Term::app(f, xs)), false);
            }
            SymbolKind::Data => {
                let whole = Fact::att(Term::app(f, xs.clone()));
                let compose = set.push(Origin::DataCompose(f), hyps, vec![], whole.clone(), true);
                let project = xs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        set.push(
                            Origin::Projection(f, i),
                            vec![whole.clone()],
                            vec![],
                            Fact::att(x.clone()),
                            true,
                        )
                    })
                    .collect();
                set.data.insert(f, DataClauses { compose, project });
            }
            SymbolKind::Name { private: false } => {
                set.push(
                    Origin::PublicName(f),
                    vec![],
                    vec![],
                    Fact::att(Term::constant(f)),
                    false,
                );
            }
            SymbolKind::Name { private: true } | SymbolKind::Destructor => {}
        }
    }
    for (i, rule) in spec.rules.iter().enumerate() {
        let hyps = rule.lhs_args.iter().cloned().map(Fact::att).collect();
        set.push(Origin::Rewrite(i), hyps, vec![], Fact::att(rule.rhs.clone()), false);
    }
    set
}

/// Adversary clauses followed by the protocol clauses. Expects precise
/// annotations to be desugared already; any left are ignored.
pub fn initial_clauses(spec: &Specification) -> ClauseSet {
    let mut set = generate_adversary_clauses(spec);
    for (index, pc) in spec.clauses.iter().enumerate() {
        set.push(
            Origin::Protocol { index, line: pc.line },
            pc.hyps.iter().map(|h| h.fact.clone()).collect(),
            pc.constraints.clone(),
            pc.concl.clone(),
            false,
        );
    }
    set
}

/// Replaces every `[precise]` hypothesis `att(M)` by the pair
/// `event(Precise(occ, M)) && att(M)` with a fresh private name `occ` per
/// annotation, and registers the axiom
/// `event(Precise(o, x1)) && event(Precise(o, x2)) ==> x1 = x2` once.
pub fn desugar_precise(spec: &Specification) -> Specification {
    let mut out = spec.clone();
    if !spec.clauses.iter().any(|c| c.hyps.iter().any(|h| h.precise)) {
        return out;
    }
    let event = match out.sig.predicate_id("event") {
        Some(p) if out.sig.is_blocking(p) && out.sig.predicate(p).arity == 1 => p,
        _ => {
            let name = out.sig.fresh_ident("event");
            out.sig
                .add_predicate(&name, 1, PredicateKind::Blocking)
                .expect("fresh identifier")
        }
    };
    let precise = match out.sig.symbol_id("Precise") {
        Some(f) if out.sig.symbol(f).kind == SymbolKind::Constructor && out.sig.symbol(f).arity == 2 => f,
        _ => {
            let name = out.sig.fresh_ident("Precise");
            out.sig
                .add_symbol(&name, 2, SymbolKind::Constructor)
                .expect("fresh identifier")
        }
    };
    for clause in &mut out.clauses {
        let mut hyps = Vec::with_capacity(clause.hyps.len() + 1);
        for h in std::mem::take(&mut clause.hyps) {
            if h.precise {
                let occ_name = (1..)
                    .map(|n| format!("occ{n}"))
                    .find(|s| out.sig.lookup(s).is_none())
                    .expect("unbounded");
                let occ = out
                    .sig
                    .add_symbol(&occ_name, 0, SymbolKind::Name { private: true })
                    .expect("fresh identifier");
                let arg = h.fact.args[0].clone();
                hyps.push(Hypothesis {
                    fact: Fact::new(event, vec![Term::app(precise, vec![Term::constant(occ), arg])]),
                    precise: false,
                });
                hyps.push(Hypothesis {
                    fact: h.fact,
                    precise: false,
                });
            } else {
                hyps.push(h);
            }
        }
        clause.hyps = hyps;
    }
    let premise = |x: u32| Fact::new(event, vec![Term::app(precise, vec![Term::var(0), Term::var(x)])]);
    out.assertions.push(Assertion {
        kind: AssertionKind::Axiom,
        premises: vec![premise(1), premise(2)],
        conclusion: vec![Conclusion::Equal(Term::var(1), Term::var(2))],
    });
    out
}

impl Specification {
    pub fn public_names(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.sig
            .symbols()
            .filter(|(_, s)| s.kind == SymbolKind::Name { private: false })
            .map(|(id, _)| id)
    }

    pub fn count(&self, kind: SymbolKind) -> usize {
        self.sig.symbols().filter(|(_, s)| s.kind == kind).count()
    }

    pub fn precise_count(&self) -> usize {
        self.clauses
            .iter()
            .flat_map(|c| c.hyps.iter())
            .filter(|h| h.precise)
            .count()
    }
}

/// Renumbers variables by first occurrence across the given facts and
/// constraints, in order.
pub(crate) struct Renumber {
    map: HashMap<Var, u32>,
}

impl Renumber {
    pub(crate) fn new() -> Self {
        Renumber { map: HashMap::new() }
    }

    fn see_term(&mut self, t: &Term) {
        for v in t.vars() {
            let next = self.map.len() as u32;
            self.map.entry(v).or_insert(next);
        }
    }

    pub(crate) fn see_fact(&mut self, f: &Fact) {
        f.args.iter().for_each(|t| self.see_term(t));
    }

    pub(crate) fn see_constraint(&mut self, c: &Constraint) {
        match c {
            Constraint::Diseq { universals, lhs, rhs } => {
                for u in universals {
                    self.see_term(&Term::Var(*u));
                }
                self.see_term(lhs);
                self.see_term(rhs);
            }
            Constraint::IsNat(t) | Constraint::NotNat(t) => self.see_term(t),
            Constraint::Geq { lhs, rhs, .. } => {
                self.see_term(lhs);
                self.see_term(rhs);
            }
        }
    }

    pub(crate) fn see_conclusion(&mut self, c: &Conclusion) {
        match c {
            Conclusion::Fact(f) => self.see_fact(f),
            Conclusion::Equal(a, b) => {
                self.see_term(a);
                self.see_term(b);
            }
        }
    }

    fn ren(&self) -> impl FnMut(Var) -> Term + '_ {
        |v| Term::Var(Var(self.map[&v]))
    }

    pub(crate) fn term(&self, t: &Term) -> Term {
        t.map_vars(&mut self.ren())
    }

    pub(crate) fn fact(&self, f: &Fact) -> Fact {
        f.map_vars(&mut self.ren())
    }

    pub(crate) fn constraint(&self, c: &Constraint) -> Constraint {
        c.map_vars(&mut self.ren())
    }

    pub(crate) fn conclusion(&self, c: &Conclusion) -> Conclusion {
        match c {
            Conclusion::Fact(f) => Conclusion::Fact(self.fact(f)),
            Conclusion::Equal(a, b) => Conclusion::Equal(self.term(a), self.term(b)),
        }
    }
}

impl Pretty for Hypothesis {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fact.pretty(sig, f)?;
        if self.precise {
            f.write_str(" [precise]")?;
        }
        Ok(())
    }
}

impl Pretty for ProtocolClause {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .hyps
            .iter()
            .map(|h| sig.show(h).to_string())
            .chain(self.constraints.iter().map(|c| sig.show(c).to_string()))
            .collect();
        if items.is_empty() {
            f.write_str("true")?;
        } else {
            f.write_str(&items.join(" && "))?;
        }
        write!(f, " => {}", sig.show(&self.concl))
    }
}

impl Pretty for Conclusion {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Fact(x) => x.pretty(sig, f),
            Conclusion::Equal(a, b) => write!(f, "{} = {}", sig.show(a), sig.show(b)),
        }
    }
}

fn join<T: Pretty>(sig: &Signature, xs: &[T]) -> String {
    xs.iter()
        .map(|x| sig.show(x).to_string())
        .collect::<Vec<_>>()
        .join(" && ")
}

impl Pretty for Assertion {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ==> {}",
            self.kind.keyword(),
            join(sig, &self.premises),
            join(sig, &self.conclusion)
        )
    }
}

impl Pretty for Query {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Secrecy(goal) => goal.pretty(sig, f),
            Query::Correspondence { premise, required } => {
                write!(f, "{} ==> {}", sig.show(premise), join(sig, required))
            }
        }
    }
}

/// Prints a specification in the input syntax; parsing the output gives
/// back an equal specification.
impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = &self.sig;
        for (id, sym) in sig.symbols() {
            match sym.kind {
                SymbolKind::Constructor => writeln!(f, "fun {}/{}.", sym.ident, sym.arity)?,
                SymbolKind::Data => writeln!(f, "data {}/{}.", sym.ident, sym.arity)?,
                SymbolKind::Name { private } => {
                    writeln!(f, "name {}{}.", sym.ident, if private { " private" } else { "" })?
                }
                SymbolKind::Destructor => {
                    for rule in self.rules.iter().filter(|r| r.destructor == id) {
                        let lhs = Term::app(id, rule.lhs_args.clone());
                        writeln!(f, "reduc {} -> {}.", sig.show(&lhs), sig.show(&rule.rhs))?;
                    }
                }
            }
        }
        for (_, p) in sig.predicates() {
            match p.kind {
                PredicateKind::Attacker => {}
                PredicateKind::Blocking => writeln!(f, "pred {}/{} blocking.", p.ident, p.arity)?,
                PredicateKind::Event => writeln!(f, "pred {}/{}.", p.ident, p.arity)?,
            }
        }
        for c in &self.clauses {
            writeln!(f, "clause {}.", sig.show(c))?;
        }
        for a in &self.assertions {
            writeln!(f, "{}.", sig.show(a))?;
        }
        for q in &self.queries {
            writeln!(f, "query {}.", sig.show(q))?;
        }
        Ok(())
    }
}
