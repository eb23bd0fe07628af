//! Answering secrecy and correspondence queries, and proving lemmas, on top
//! of saturation.

mod derivation;
mod search;

use std::fmt;
use std::sync::Arc;

use crate::clause::{simplify, Clause, Fact, Satisfiability};
use crate::frontend::{
    desugar_precise, initial_clauses, Assertion, AssertionKind, ClauseSet, Conclusion, Origin, Query, Specification,
};
use crate::saturate::{Config, Event, Outcome, Saturation, Saturator, Stats, Strengthening};
use crate::signature::{PredicateKind, Signature};
use crate::term::{Matcher, Term, Var};

pub use derivation::{check_derivation, expand, render_dot, render_text, CheckError, Derivation, ExpandError, Rule};
pub use search::{Proof, ProofStep, Prover, Search};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    /// A derivation exists at the clause level. Clauses over-approximate
    /// the protocol, so this may be a false attack.
    Derivable,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "PROVED",
            Verdict::Derivable => "DERIVABLE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    Lemma,
    Query,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub subject: Subject,
    /// The query or lemma as written in the input syntax.
    pub text: String,
    pub verdict: Verdict,
    pub derivation: Option<Witness>,
    /// Why the verdict is not stronger, when there is something to say.
    pub note: Option<String>,
}

/// A checked derivation with its renderings, made while the clause set it
/// refers to is at hand.
#[derive(Clone, Debug)]
pub struct Witness {
    pub tree: Derivation,
    pub text: String,
    pub dot: String,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub saturation: Config,
    /// Largest proof height tried when searching for derivations.
    pub max_proof_height: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            saturation: Config::default(),
            max_proof_height: 200,
        }
    }
}

pub struct Analysis {
    /// The input after desugaring.
    pub spec: Specification,
    pub initial: ClauseSet,
    pub saturation: Saturation,
    /// Lemmas first, in input order, then queries.
    pub reports: Vec<Report>,
    /// Summed over the main saturation and every lemma saturation.
    pub stats: Stats,
}

/// Desugars, proves lemmas in order, saturates, and answers every query.
/// `observer` sees every saturation event, lemma saturations included.
pub fn analyze(spec: &Specification, opts: &Options, observer: &mut dyn FnMut(Event<'_>)) -> Analysis {
    let spec = desugar_precise(spec);
    let initial = initial_clauses(&spec);
    let mut rules: Vec<Strengthening> = spec
        .assertions
        .iter()
        .filter(|a| !a.kind.is_lemma())
        .map(|a| Strengthening::new(&spec.sig, a, false))
        .collect();
    let mut reports = Vec::new();
    let mut total = Stats::default();

    for (k, lemma) in spec.assertions.iter().enumerate().filter(|(_, a)| a.kind.is_lemma()) {
        let (report, stats) = prove_lemma(&spec, &initial, &rules, k, lemma, opts, &mut *observer);
        add_stats(&mut total, &stats);
        if report.verdict == Verdict::Proved {
            rules.push(Strengthening::new(&spec.sig, lemma, false));
        }
        reports.push(report);
    }

    let saturation = Saturator::new(&spec.sig, &initial, &rules, opts.saturation)
        .observe(observer)
        .run();
    add_stats(&mut total, &saturation.stats);

    for q in &spec.queries {
        let text = spec.sig.show(q).to_string();
        let report = match q {
            Query::Secrecy(goal) => check_secrecy(&spec.sig, &initial, &saturation, goal, opts, text),
            Query::Correspondence { premise, required } => {
                let mut prover = Prover::new(&spec.sig, saturation.solved(&spec.sig), opts.max_proof_height);
                check_correspondence(
                    &spec.sig,
                    &initial,
                    &saturation,
                    &mut prover,
                    Claim {
                        premise,
                        required,
                        equalities: &[],
                    },
                    Subject::Query,
                    text,
                )
            }
        };
        reports.push(report);
    }
    Analysis {
        spec,
        initial,
        saturation,
        reports,
        stats: total,
    }
}

fn add_stats(total: &mut Stats, s: &Stats) {
    total.initial = total.initial.max(s.initial);
    total.generated += s.generated;
    total.resolutions += s.resolutions;
    total.subsumption_checks += s.subsumption_checks;
    total.index_candidates += s.index_candidates;
    total.forward_subsumed += s.forward_subsumed;
    total.backward_subsumed += s.backward_subsumed;
    total.strengthened += s.strengthened;
    total.removed_by_assertion += s.removed_by_assertion;
    total.too_deep += s.too_deep;
    total.kept += s.kept;
}

fn incomplete_note(outcome: Outcome) -> Option<String> {
    (!outcome.is_complete()).then(|| format!("saturation incomplete: {outcome}"))
}

/// Whether `goal` is derivable from the saturated clauses.
pub fn check_secrecy(
    sig: &Signature,
    initial: &ClauseSet,
    sat: &Saturation,
    goal: &Fact,
    opts: &Options,
    text: String,
) -> Report {
    let mut prover = Prover::new(sig, sat.solved(sig), opts.max_proof_height);
    let (verdict, derivation, note) = match prover.prove(goal) {
        Search::Found(p) => derivable(sig, initial, &mut prover, &p),
        Search::Exhausted if sat.outcome.is_complete() => (Verdict::Proved, None, None),
        Search::Exhausted => (Verdict::Inconclusive, None, incomplete_note(sat.outcome)),
        Search::Cut => (
            Verdict::Inconclusive,
            None,
            Some(format!(
                "no derivation of height at most {} found",
                opts.max_proof_height
            )),
        ),
    };
    Report {
        subject: Subject::Query,
        text,
        verdict,
        derivation,
        note,
    }
}

/// Turns a saturated-level proof into a checked derivation from initial
/// clauses. A proof that does not survive the check is not reported as an
/// attack.
fn derivable(
    sig: &Signature,
    initial: &ClauseSet,
    prover: &mut Prover<'_>,
    proof: &Proof,
) -> (Verdict, Option<Witness>, Option<String>) {
    match expand(sig, initial, prover, proof) {
        Ok(d) => match check_derivation(sig, initial, &d) {
            Ok(()) => {
                let witness = Witness {
                    text: render_text(sig, initial, &d),
                    dot: render_dot(sig, initial, &d),
                    tree: d,
                };
                (Verdict::Derivable, Some(witness), None)
            }
            Err(e) => (Verdict::Inconclusive, None, Some(e.to_string())),
        },
        Err(e) => (Verdict::Inconclusive, None, Some(e.to_string())),
    }
}

/// `premise ==> required && equalities`.
#[derive(Clone, Copy)]
pub struct Claim<'a> {
    pub premise: &'a Fact,
    pub required: &'a [Fact],
    pub equalities: &'a [(Term, Term)],
}

/// Checks that every saturated clause concluding an instance of the
/// premise carries the required facts among its hypotheses. A clause that
/// does not is a violation only if its hypotheses are derivable.
pub fn check_correspondence(
    sig: &Signature,
    initial: &ClauseSet,
    sat: &Saturation,
    prover: &mut Prover<'_>,
    claim: Claim<'_>,
    subject: Subject,
    text: String,
) -> Report {
    let mut report = Report {
        subject,
        text,
        verdict: Verdict::Proved,
        derivation: None,
        note: None,
    };
    if sig.is_blocking(claim.premise.pred) {
        report.verdict = Verdict::Inconclusive;
        report.note = Some("blocking facts are never concluded, so the premise cannot be checked".into());
        return report;
    }
    let mut cut = false;
    for (index, clause) in sat.solved(sig).enumerate() {
        if clause.concl.pred != claim.premise.pred {
            continue;
        }
        let Some(instance) = violation(clause, claim) else {
            continue;
        };
        match prover.prove_all(&instance.hyps, &instance.constraints) {
            Search::Found((s, children)) => {
                let instance = instance.apply(&s);
                let proof = Proof {
                    fact: instance.concl.clone(),
                    step: ProofStep::Clause {
                        index,
                        instance: Arc::new(instance),
                        children,
                    },
                };
                let (verdict, derivation, note) = derivable(sig, initial, prover, &proof);
                if verdict == Verdict::Derivable {
                    report.verdict = verdict;
                    report.derivation = derivation;
                    report.note = None;
                    return report;
                }
                cut = true;
                report.note = note;
            }
            Search::Exhausted => {}
            Search::Cut => cut = true,
        }
    }
    if cut {
        report.verdict = Verdict::Inconclusive;
        report
            .note
            .get_or_insert_with(|| "a violating clause could be neither derived nor refuted".into());
    } else if !sat.outcome.is_complete() {
        report.verdict = Verdict::Inconclusive;
        report.note = incomplete_note(sat.outcome);
    }
    report
}

/// The instance of `clause` at which `claim` fails, if any.
fn violation(clause: &Clause, claim: Claim<'_>) -> Option<Clause> {
    let offset = clause.var_span();
    let premise = claim.premise.shift(offset);
    let s = clause.concl.unify(&premise)?;
    let mut inst = clause.apply(&s);
    if !inst.constraints.is_empty() {
        match simplify(&inst.constraints) {
            Satisfiability::Unsatisfiable => return None,
            Satisfiability::Satisfiable(cs) => inst.constraints = cs,
        }
    }
    let required: Vec<Fact> = claim.required.iter().map(|f| f.shift(offset).apply(&s)).collect();
    let equalities: Vec<(Term, Term)> = claim
        .equalities
        .iter()
        .map(|(l, r)| (s.apply(&l.shift(offset)), s.apply(&r.shift(offset))))
        .collect();
    let mut fixed: Vec<Var> = Vec::new();
    inst.hyps.iter().for_each(|h| h.collect_vars(&mut fixed));
    inst.concl.collect_vars(&mut fixed);
    let mut m = Matcher::with_fixed(fixed);
    if satisfied(&required, &equalities, &inst.hyps, &mut m) {
        None
    } else {
        Some(inst)
    }
}

fn satisfied(required: &[Fact], equalities: &[(Term, Term)], hyps: &[Fact], m: &mut Matcher) -> bool {
    let Some((first, rest)) = required.split_first() else {
        let s = m.to_subst();
        return equalities.iter().all(|(l, r)| s.apply(l) == s.apply(r));
    };
    for h in hyps {
        if h.pred != first.pred {
            continue;
        }
        let mark = m.mark();
        if first.args.iter().zip(&h.args).all(|(p, t)| m.match_term(p, t)) && satisfied(rest, equalities, hyps, m) {
            return true;
        }
        m.undo(mark);
    }
    false
}

/// Saturates with an extra clause `premises => goal(vars)` and checks the
/// lemma's conclusion on every clause concluding `goal`.
fn prove_lemma(
    spec: &Specification,
    initial: &ClauseSet,
    rules: &[Strengthening],
    k: usize,
    lemma: &Assertion,
    opts: &Options,
    observer: &mut dyn FnMut(Event<'_>),
) -> (Report, Stats) {
    let text = spec.sig.show(lemma).to_string();
    if let Some(p) = lemma.premises.iter().find(|p| spec.sig.is_blocking(p.pred)) {
        let note = format!(
            "premise {} is blocking; lemmas over blocking premises are not checked",
            spec.sig.show(p)
        );
        let report = Report {
            subject: Subject::Lemma,
            text,
            verdict: Verdict::Inconclusive,
            derivation: None,
            note: Some(note),
        };
        return (report, Stats::default());
    }
    let mut sig = spec.sig.clone();
    let mut vars: Vec<Var> = Vec::new();
    lemma.premises.iter().for_each(|p| p.collect_vars(&mut vars));
    let goal_name = sig.fresh_ident(&format!("lemma_goal{}", k + 1));
    let goal_pred = sig
        .add_predicate(&goal_name, vars.len(), PredicateKind::Event)
        .expect("fresh identifier");
    let goal = Fact::new(goal_pred, vars.iter().map(|v| Term::Var(*v)).collect());
    let mut set = initial.clone();
    set.push(Origin::Goal(k), lemma.premises.clone(), vec![], goal.clone(), false);

    let mut rules = rules.to_vec();
    if lemma.kind == AssertionKind::InductiveLemma {
        rules.push(Strengthening::new(&spec.sig, lemma, true));
    }
    let sat = Saturator::new(&sig, &set, &rules, opts.saturation)
        .observe(observer)
        .run();
    let mut required = Vec::new();
    let mut equalities = Vec::new();
    for c in &lemma.conclusion {
        match c {
            Conclusion::Fact(f) => required.push(f.clone()),
            Conclusion::Equal(l, r) => equalities.push((l.clone(), r.clone())),
        }
    }
    let mut prover = Prover::new(&sig, sat.solved(&sig), opts.max_proof_height);
    let claim = Claim {
        premise: &goal,
        required: &required,
        equalities: &equalities,
    };
    let report = check_correspondence(&sig, &set, &sat, &mut prover, claim, Subject::Lemma, text);
    (report, sat.stats)
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.subject {
            Subject::Lemma => "lemma",
            Subject::Query => "query",
        };
        let text = self.text.strip_prefix("lemma ").unwrap_or(&self.text);
        write!(f, "{what} {text}: {}", self.verdict)
    }
}
