//! Derivations from initial clauses: reconstruction from saturated-level
//! proofs, an independent checker, and text and DOT output.

use std::fmt::Write as _;

use super::search::{Proof, ProofStep, Prover, Search};
use crate::clause::{simplify, Clause, Constraint, Fact, InitialId, Step};
use crate::frontend::ClauseSet;
use crate::signature::Signature;
use crate::term::{Matcher, Term, Unifier, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Initial(InitialId),
    /// A blocking fact, taken as given.
    Assumed,
}

/// A derivation tree whose nodes are instances of initial clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub fact: Fact,
    pub rule: Rule,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Derivation {
        Derivation {
            fact: self.fact.map_vars(f),
            rule: self.rule.clone(),
            children: self.children.iter().map(|c| c.map_vars(f)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("no derivation found for a dropped hypothesis {0}")]
    MissingLeaf(String),
    #[error("clause history does not fit the proof")]
    Inconsistent,
}

/// Rebuilds a derivation from initial clauses out of a proof over
/// saturated clauses, using each saturated clause's history.
pub fn expand(
    sig: &Signature,
    initial: &ClauseSet,
    prover: &mut Prover<'_>,
    proof: &Proof,
) -> Result<Derivation, ExpandError> {
    let mut ex = Expander {
        sig,
        initial,
        u: Unifier::new(),
    };
    let d = ex.proof(prover, proof)?;
    let u = ex.u;
    Ok(d.map_vars(&mut |v| u.resolve(&Term::Var(v))))
}

struct Expander<'s> {
    sig: &'s Signature,
    initial: &'s ClauseSet,
    u: Unifier,
}

impl Expander<'_> {
    fn proof(&mut self, prover: &mut Prover<'_>, p: &Proof) -> Result<Derivation, ExpandError> {
        match &p.step {
            ProofStep::Assumed => Ok(Derivation {
                fact: p.fact.clone(),
                rule: Rule::Assumed,
                children: vec![],
            }),
            ProofStep::Clause { instance, children, .. } => {
                let d = self.step(prover, &instance.history, instance, children)?;
                self.unify(&d.fact, &p.fact)?;
                Ok(d)
            }
        }
    }

    fn step(
        &mut self,
        prover: &mut Prover<'_>,
        step: &Step,
        instance: &Clause,
        children: &[Proof],
    ) -> Result<Derivation, ExpandError> {
        match step {
            Step::Apply(id, kids) => {
                let clause = &self.initial.get(*id).clause;
                let base = prover.reserve(clause.var_span());
                let c = clause.shift(base);
                if c.hyps.len() != kids.len() {
                    return Err(ExpandError::Inconsistent);
                }
                let mut out = Vec::with_capacity(kids.len());
                for (h, k) in c.hyps.iter().zip(kids) {
                    let d = self.step(prover, k, instance, children)?;
                    self.unify(h, &d.fact)?;
                    out.push(d);
                }
                Ok(Derivation {
                    fact: c.concl.clone(),
                    rule: Rule::Initial(*id),
                    children: out,
                })
            }
            Step::Open(leaf) => {
                if let Some(j) = instance.hyps.iter().position(|h| h == leaf) {
                    let d = self.proof(prover, &children[j])?;
                    self.unify(leaf, &d.fact)?;
                    return Ok(d);
                }
                if self.sig.is_blocking(leaf.pred) {
                    return Ok(Derivation {
                        fact: leaf.clone(),
                        rule: Rule::Assumed,
                        children: vec![],
                    });
                }
                // Hypotheses dropped during simplification still need a
                // derivation; any instance will do.
                let goal = Fact {
                    pred: leaf.pred,
                    args: leaf.args.iter().map(|t| self.u.resolve(t)).collect(),
                };
                match prover.prove(&goal) {
                    Search::Found(p) => {
                        let d = self.proof(prover, &p)?;
                        self.unify(leaf, &d.fact)?;
                        Ok(d)
                    }
                    _ => Err(ExpandError::MissingLeaf(self.sig.show(&goal).to_string())),
                }
            }
        }
    }

    fn unify(&mut self, a: &Fact, b: &Fact) -> Result<(), ExpandError> {
        if a.unify_into(b, &mut self.u) {
            Ok(())
        } else {
            Err(ExpandError::Inconsistent)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid derivation: {0}")]
pub struct CheckError(pub String);

/// Checks that every node is an instance of the initial clause it names,
/// that assumed facts are blocking, and that the collected constraints are
/// jointly satisfiable.
pub fn check_derivation(sig: &Signature, initial: &ClauseSet, d: &Derivation) -> Result<(), CheckError> {
    let mut constraints = Vec::new();
    let mut base = derivation_span(d);
    check_node(sig, initial, d, &mut constraints, &mut base)?;
    if simplify(&constraints).is_unsat() {
        return Err(CheckError("constraints are unsatisfiable".into()));
    }
    Ok(())
}

fn derivation_span(d: &Derivation) -> u32 {
    let own = d.fact.max_var().map_or(0, |m| m + 1);
    d.children.iter().map(derivation_span).fold(own, u32::max)
}

fn check_node(
    sig: &Signature,
    initial: &ClauseSet,
    d: &Derivation,
    constraints: &mut Vec<Constraint>,
    base: &mut u32,
) -> Result<(), CheckError> {
    let id = match d.rule {
        Rule::Assumed => {
            return if sig.is_blocking(d.fact.pred) && d.children.is_empty() {
                Ok(())
            } else {
                Err(CheckError(format!("{} is assumed but not blocking", sig.show(&d.fact))))
            };
        }
        Rule::Initial(id) => id,
    };
    if id >= initial.len() {
        return Err(CheckError(format!("unknown clause {id}")));
    }
    let clause = &initial.get(id).clause;
    if clause.hyps.len() != d.children.len() {
        return Err(CheckError(format!(
            "{} uses {} with {} premises, expected {}",
            sig.show(&d.fact),
            initial.describe(sig, id),
            d.children.len(),
            clause.hyps.len()
        )));
    }
    let mut m = Matcher::new();
    let pairs =
        std::iter::once((&clause.concl, &d.fact)).chain(clause.hyps.iter().zip(d.children.iter().map(|c| &c.fact)));
    for (pattern, target) in pairs {
        let ok = pattern.pred == target.pred
            && pattern.args.len() == target.args.len()
            && pattern.args.iter().zip(&target.args).all(|(p, t)| m.match_term(p, t));
        if !ok {
            return Err(CheckError(format!(
                "{} is not an instance of {}",
                sig.show(target),
                initial.describe(sig, id)
            )));
        }
    }
    if !clause.constraints.is_empty() {
        // Variables of the clause not fixed by matching stay free, renamed
        // apart from the rest of the derivation.
        let s = m.to_subst();
        let offset = *base;
        *base += clause.var_span();
        for c in &clause.constraints {
            constraints.push(c.map_vars(&mut |v| match s.get(v) {
                Some(t) => t.clone(),
                None => Term::Var(Var(v.0 + offset)),
            }));
        }
    }
    for c in &d.children {
        check_node(sig, initial, c, constraints, base)?;
    }
    Ok(())
}

/// Indented tree, one node per line.
pub fn render_text(sig: &Signature, initial: &ClauseSet, d: &Derivation) -> String {
    fn go(sig: &Signature, initial: &ClauseSet, d: &Derivation, depth: usize, out: &mut String) {
        let by = match d.rule {
            Rule::Initial(id) => initial.describe(sig, id),
            Rule::Assumed => "assumed".to_string(),
        };
        let _ = writeln!(out, "{:indent$}{}  [{}]", "", sig.show(&d.fact), by, indent = 2 * depth);
        for c in &d.children {
            go(sig, initial, c, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(sig, initial, d, 0, &mut out);
    out
}

/// Graphviz digraph with edges from premises to conclusions.
pub fn render_dot(sig: &Signature, initial: &ClauseSet, d: &Derivation) -> String {
    fn go(sig: &Signature, initial: &ClauseSet, d: &Derivation, next: &mut usize, out: &mut String) -> usize {
        let me = *next;
        *next += 1;
        let by = match d.rule {
            Rule::Initial(id) => initial.describe(sig, id),
            Rule::Assumed => "assumed".to_string(),
        };
        let label = format!("{}\\n{}", sig.show(&d.fact), by).replace('"', "\\\"");
        let _ = writeln!(out, "  n{me} [label=\"{label}\"];");
        for c in &d.children {
            let child = go(sig, initial, c, next, out);
            let _ = writeln!(out, "  n{child} -> n{me};");
        }
        me
    }
    let mut out = String::from("digraph derivation {\n  node [shape=box];\n");
    go(sig, initial, d, &mut 0, &mut out);
    out.push_str("}\n");
    out
}
