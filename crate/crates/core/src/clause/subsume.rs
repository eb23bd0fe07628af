use super::constraints::{entails, simplify, Satisfiability};
use super::{Clause, Fact};
use crate::term::{Matcher, Subst};

/// `general` subsumes `specific` when one substitution maps the conclusion
/// of `general` onto that of `specific`, its hypotheses into those of
/// `specific` (as multisets), and turns its constraints into consequences
/// of the constraints of `specific`.
pub fn subsumes(general: &Clause, specific: &Clause) -> bool {
    if general.hyps.len() > specific.hyps.len() || general.concl.pred != specific.concl.pred {
        return false;
    }
    // Constraints compare by variable identity, so separate the id spaces.
    let shifted;
    let general = if general.constraints.is_empty() {
        general
    } else {
        shifted = general.shift(specific.var_span());
        &shifted
    };

    let mut m = Matcher::new();
    if !match_fact(&mut m, &general.concl, &specific.concl) {
        return false;
    }
    let mut order: Vec<&Fact> = general.hyps.iter().collect();
    order.sort_by_key(|h| std::cmp::Reverse(h.size()));
    let mut used = vec![false; specific.hyps.len()];
    search(&order, specific, &mut used, &mut m, &|m| {
        constraints_follow(general, specific, &m.to_subst())
    })
}

fn match_fact(m: &mut Matcher, p: &Fact, t: &Fact) -> bool {
    if p.pred != t.pred || p.args.len() != t.args.len() {
        return false;
    }
    let mark = m.mark();
    for (a, b) in p.args.iter().zip(t.args.iter()) {
        if !m.match_term(a, b) {
            m.undo(mark);
            return false;
        }
    }
    true
}

fn search(
    todo: &[&Fact],
    specific: &Clause,
    used: &mut [bool],
    m: &mut Matcher,
    finish: &dyn Fn(&Matcher) -> bool,
) -> bool {
    let Some((first, rest)) = todo.split_first() else {
        return finish(m);
    };
    for (i, h) in specific.hyps.iter().enumerate() {
        if used[i] {
            continue;
        }
        let mark = m.mark();
        if match_fact(m, first, h) {
            used[i] = true;
            if search(rest, specific, used, m, finish) {
                return true;
            }
            used[i] = false;
            m.undo(mark);
        }
    }
    false
}

fn constraints_follow(general: &Clause, specific: &Clause, s: &Subst) -> bool {
    if general.constraints.is_empty() {
        return true;
    }
    let instantiated: Vec<_> = general.constraints.iter().map(|c| c.apply(s)).collect();
    match simplify(&instantiated) {
        Satisfiability::Unsatisfiable => false,
        Satisfiability::Satisfiable(cs) => cs.iter().all(|c| entails(&specific.constraints, c)),
    }
}
