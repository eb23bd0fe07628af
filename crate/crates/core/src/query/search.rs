//! Backward search for derivations over a saturated clause set.

use std::collections::HashMap;
use std::sync::Arc;

use crate::clause::{simplify, Clause, Constraint, Fact};
use crate::index::PrefixTree;
use crate::signature::Signature;
use crate::term::{Subst, Term, Unifier, Var};

/// Result of a bounded search.
#[derive(Clone, Debug)]
pub enum Search<T> {
    Found(T),
    /// The whole search space was explored without a depth cut.
    Exhausted,
    /// Nothing found, but the bound was hit somewhere.
    Cut,
}

/// Derivation over saturated clauses.
#[derive(Clone, Debug)]
pub struct Proof {
    pub fact: Fact,
    pub step: ProofStep,
}

#[derive(Clone, Debug)]
pub enum ProofStep {
    /// `instance` is the used clause under the final substitution; one
    /// child per hypothesis.
    Clause {
        index: usize,
        instance: Arc<Clause>,
        children: Vec<Proof>,
    },
    /// Blocking fact, taken as given.
    Assumed,
}

impl Proof {
    /// Nodes on the longest path; a leaf has height 1.
    pub fn height(&self) -> usize {
        match &self.step {
            ProofStep::Assumed => 1,
            ProofStep::Clause { children, .. } => 1 + children.iter().map(Proof::height).max().unwrap_or(0),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Proof {
        Proof {
            fact: self.fact.map_vars(f),
            step: match &self.step {
                ProofStep::Assumed => ProofStep::Assumed,
                ProofStep::Clause {
                    index,
                    instance,
                    children,
                } => ProofStep::Clause {
                    index: *index,
                    instance: Arc::new(instance.map_vars(f)),
                    children: children.iter().map(|c| c.map_vars(f)).collect(),
                },
            },
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Open(Fact),
    Assumed(Fact),
    Clause {
        fact: Fact,
        index: usize,
        offset: u32,
        children: Vec<usize>,
    },
    Graft(Proof),
}

#[derive(Clone)]
struct State {
    u: Unifier,
    constraints: Vec<Constraint>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Goal {
    node: usize,
    /// Remaining height available for this node's subproof.
    budget: usize,
}

#[derive(Clone, Copy)]
struct Failure {
    budget: usize,
    cut: bool,
}

/// Depth-first search with iterative deepening. Ground subgoals are solved
/// on their own and memoized; a proof's height is what the bound limits.
pub struct Prover<'a> {
    sig: &'a Signature,
    solved: Vec<&'a Clause>,
    index: PrefixTree,
    next_var: u32,
    proved: HashMap<Fact, Proof>,
    failed: HashMap<Fact, Failure>,
    cut: bool,
    steps: u64,
    pub max_height: usize,
    /// Expansion budget per top-level call; running out counts as a cut.
    pub max_steps: u64,
}

impl<'a> Prover<'a> {
    pub fn new(sig: &'a Signature, solved: impl IntoIterator<Item = &'a Clause>, max_height: usize) -> Self {
        let solved: Vec<&Clause> = solved.into_iter().collect();
        let mut index = PrefixTree::new();
        for (i, c) in solved.iter().enumerate() {
            index.insert(i, &c.concl);
        }
        Prover {
            sig,
            solved,
            index,
            next_var: 0,
            proved: HashMap::new(),
            failed: HashMap::new(),
            cut: false,
            steps: 0,
            max_height,
            max_steps: 2_000_000,
        }
    }

    pub fn clause(&self, index: usize) -> &'a Clause {
        self.solved[index]
    }

    /// Searches for a derivation of `goal`; variables of the goal may get
    /// instantiated.
    pub fn prove(&mut self, goal: &Fact) -> Search<Proof> {
        match self.prove_all(std::slice::from_ref(goal), &[]) {
            Search::Found((_, mut proofs)) => Search::Found(proofs.pop().expect("one goal")),
            Search::Exhausted => Search::Exhausted,
            Search::Cut => Search::Cut,
        }
    }

    /// Proves all `goals` together, under `constraints`. Returns the
    /// substitution applied to their variables and one proof per goal.
    pub fn prove_all(&mut self, goals: &[Fact], constraints: &[Constraint]) -> Search<(Subst, Vec<Proof>)> {
        let span = goals
            .iter()
            .filter_map(Fact::max_var)
            .chain(constraints.iter().filter_map(Constraint::max_var))
            .max()
            .map_or(0, |m| m + 1);
        self.next_var = self.next_var.max(span);
        self.steps = 0;
        for bound in 1..=self.max_height {
            let outer_cut = std::mem::replace(&mut self.cut, false);
            let state = State {
                u: Unifier::new(),
                constraints: constraints.to_vec(),
                nodes: goals.iter().cloned().map(Node::Open).collect(),
            };
            let todo: Vec<Goal> = (0..goals.len())
                .rev()
                .map(|node| Goal { node, budget: bound })
                .collect();
            let found = self.solve(state, todo);
            let cut = self.cut;
            self.cut = outer_cut;
            if let Some(state) = found {
                let mut vars = Vec::new();
                goals.iter().for_each(|g| g.collect_vars(&mut vars));
                constraints.iter().for_each(|c| c.collect_vars(&mut vars));
                let subst = Subst::from_pairs(vars.into_iter().map(|v| (v, state.u.resolve(&Term::Var(v)))));
                let proofs = (0..goals.len()).map(|i| self.extract(&state, i)).collect();
                return Search::Found((subst, proofs));
            }
            if !cut {
                return Search::Exhausted;
            }
            if self.steps > self.max_steps {
                break;
            }
        }
        Search::Cut
    }

    fn fresh(&mut self, c: &Clause) -> u32 {
        let offset = self.next_var;
        self.next_var += c.var_span();
        offset
    }

    fn solve(&mut self, mut state: State, mut todo: Vec<Goal>) -> Option<State> {
        let Some(goal) = todo.pop() else {
            return Some(state);
        };
        self.steps += 1;
        if self.steps > self.max_steps {
            self.cut = true;
            return None;
        }
        let Node::Open(fact) = &state.nodes[goal.node] else {
            unreachable!("goals are open nodes");
        };
        let fact = resolve_fact(&state.u, fact);
        if self.sig.is_blocking(fact.pred) {
            state.nodes[goal.node] = Node::Assumed(fact);
            return self.solve(state, todo);
        }
        if fact.is_ground() {
            let proof = self.isolated(&fact, goal.budget)?;
            state.nodes[goal.node] = Node::Graft(proof);
            return self.solve(state, todo);
        }
        if goal.budget == 0 {
            self.cut = true;
            return None;
        }
        for index in self.index.unifiable(&fact) {
            let clause = self.solved[index];
            let offset = self.fresh(clause);
            let c = clause.shift(offset);
            let mut st = state.clone();
            if !c.concl.unify_into(&fact, &mut st.u) {
                continue;
            }
            if !c.constraints.is_empty() || !st.constraints.is_empty() {
                st.constraints.extend(c.constraints.iter().cloned());
                let resolved: Vec<Constraint> = st
                    .constraints
                    .iter()
                    .map(|k| k.map_vars(&mut |v| st.u.resolve(&Term::Var(v))))
                    .collect();
                match simplify(&resolved) {
                    crate::clause::Satisfiability::Unsatisfiable => continue,
                    crate::clause::Satisfiability::Satisfiable(cs) => st.constraints = cs,
                }
            }
            let first = st.nodes.len();
            st.nodes.extend(c.hyps.iter().cloned().map(Node::Open));
            let children: Vec<usize> = (first..st.nodes.len()).collect();
            st.nodes[goal.node] = Node::Clause {
                fact: fact.clone(),
                index,
                offset,
                children: children.clone(),
            };
            let mut next = todo.clone();
            next.extend(children.iter().rev().map(|&node| Goal {
                node,
                budget: goal.budget - 1,
            }));
            if let Some(done) = self.solve(st, next) {
                return Some(done);
            }
            if self.steps > self.max_steps {
                return None;
            }
        }
        None
    }

    /// Ground goals cannot interact with the rest of the search, so their
    /// outcome is cached.
    fn isolated(&mut self, fact: &Fact, budget: usize) -> Option<Proof> {
        if let Some(p) = self.proved.get(fact) {
            if p.height() <= budget {
                return Some(p.clone());
            }
        }
        if let Some(f) = self.failed.get(fact) {
            if !f.cut || budget <= f.budget {
                self.cut |= f.cut;
                return None;
            }
        }
        let outer_cut = std::mem::replace(&mut self.cut, false);
        let state = State {
            u: Unifier::new(),
            constraints: Vec::new(),
            nodes: vec![Node::Open(fact.clone())],
        };
        // A ground fact needs at least one clause, so budget 0 only cuts.
        let result = if budget == 0 {
            self.cut = true;
            None
        } else {
            self.solve_clause_level(state, budget)
        };
        let cut = self.cut;
        self.cut = outer_cut || cut;
        match result {
            Some(p) => {
                self.proved.insert(fact.clone(), p.clone());
                Some(p)
            }
            None => {
                if self.steps <= self.max_steps {
                    self.failed.insert(fact.clone(), Failure { budget, cut });
                }
                None
            }
        }
    }

    /// Like [`Prover::solve`] on a single ground goal, without recursing
    /// into [`Prover::isolated`] for the goal itself.
    fn solve_clause_level(&mut self, state: State, budget: usize) -> Option<Proof> {
        let Node::Open(fact) = &state.nodes[0] else {
            unreachable!()
        };
        let fact = fact.clone();
        for index in self.index.unifiable(&fact) {
            let clause = self.solved[index];
            let offset = self.fresh(clause);
            let c = clause.shift(offset);
            let mut st = state.clone();
            if !c.concl.unify_into(&fact, &mut st.u) {
                continue;
            }
            if !c.constraints.is_empty() {
                let resolved: Vec<Constraint> = c
                    .constraints
                    .iter()
                    .map(|k| k.map_vars(&mut |v| st.u.resolve(&Term::Var(v))))
                    .collect();
                match simplify(&resolved) {
                    crate::clause::Satisfiability::Unsatisfiable => continue,
                    crate::clause::Satisfiability::Satisfiable(cs) => st.constraints = cs,
                }
            }
            let first = st.nodes.len();
            st.nodes.extend(c.hyps.iter().cloned().map(Node::Open));
            let children: Vec<usize> = (first..st.nodes.len()).collect();
            st.nodes[0] = Node::Clause {
                fact: fact.clone(),
                index,
                offset,
                children: children.clone(),
            };
            let todo = children
                .iter()
                .rev()
                .map(|&node| Goal {
                    node,
                    budget: budget - 1,
                })
                .collect();
            if let Some(done) = self.solve(st, todo) {
                return Some(self.extract(&done, 0));
            }
            if self.steps > self.max_steps {
                return None;
            }
        }
        None
    }

    fn extract(&self, state: &State, node: usize) -> Proof {
        let mut ren = |v: Var| state.u.resolve(&Term::Var(v));
        match &state.nodes[node] {
            Node::Open(_) => unreachable!("every goal was solved"),
            Node::Assumed(f) => Proof {
                fact: f.map_vars(&mut ren),
                step: ProofStep::Assumed,
            },
            Node::Graft(p) => p.map_vars(&mut ren),
            Node::Clause {
                fact,
                index,
                offset,
                children,
            } => Proof {
                fact: fact.map_vars(&mut ren),
                step: ProofStep::Clause {
                    index: *index,
                    instance: Arc::new(self.solved[*index].shift(*offset).map_vars(&mut ren)),
                    children: children.iter().map(|&c| self.extract(state, c)).collect(),
                },
            },
        }
    }

    /// Variables above every id used so far, for callers that rename.
    pub fn reserve(&mut self, span: u32) -> u32 {
        let base = self.next_var;
        self.next_var += span;
        base
    }
}

fn resolve_fact(u: &Unifier, f: &Fact) -> Fact {
    Fact {
        pred: f.pred,
        args: f.args.iter().map(|t| u.resolve(t)).collect(),
    }
}
