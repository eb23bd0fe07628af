use std::collections::HashMap;
use std::fmt;

use super::{
    Assertion, AssertionKind, Conclusion, Hypothesis, ProtocolClause, Query, Renumber, RewriteRule, Specification,
};
use crate::clause::{Constraint, Fact};
use crate::signature::{Ident, PredicateId, PredicateKind, Signature, SymbolKind};
use crate::term::{Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError(pub Vec<Diagnostic>);

const KEYWORDS: &[&str] = &[
    "fun",
    "data",
    "reduc",
    "name",
    "private",
    "pred",
    "blocking",
    "clause",
    "true",
    "axiom",
    "restriction",
    "lemma",
    "inductive",
    "query",
    "forall",
    "is_nat",
    "not",
    "precise",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "==>", "=>", "->", "&&", "<>", ">=", "(", ")", "[", "]", ",", ".", "/", "+", "-", "=",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        let pos = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '#' {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        let len = if c.is_ascii_alphabetic() || c == '_' {
            let n = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '\''))
                .unwrap_or(rest.len());
            out.push((Tok::Ident(rest[..n].to_string()), pos));
            n
        } else if c.is_ascii_digit() {
            let n = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let value = rest[..n].parse().map_err(|_| Diagnostic {
                line,
                col,
                message: format!("number `{}` is too large", &rest[..n]),
            })?;
            out.push((Tok::Nat(value), pos));
            n
        } else if let Some(s) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            out.push((Tok::Sym(s), pos));
            s.len()
        } else {
            return Err(Diagnostic {
                line,
                col,
                message: format!("unexpected character `{c}`"),
            });
        };
        col += rest[..len].chars().count();
        rest = &rest[len..];
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Identifier application or number as written, before name resolution.
#[derive(Clone, Debug)]
enum Raw {
    Nat(u64, Pos),
    App(String, Option<Vec<Raw>>, Pos),
}

impl Raw {
    fn pos(&self) -> Pos {
        match self {
            Raw::Nat(_, p) | Raw::App(_, _, p) => *p,
        }
    }
}

/// Variables of one statement. Universals of a disequation shadow
/// ordinary variables while that disequation is read.
#[derive(Default)]
struct Scope {
    vars: HashMap<String, Var>,
    universals: Vec<(String, Var)>,
    universal_names: Vec<(String, Pos)>,
    next: u32,
}

impl Scope {
    fn fresh(&mut self) -> Var {
        self.next += 1;
        Var(self.next - 1)
    }

    fn lookup(&mut self, name: &str) -> Var {
        if let Some((_, v)) = self.universals.iter().rev().find(|(n, _)| n == name) {
            return *v;
        }
        if let Some(v) = self.vars.get(name) {
            return *v;
        }
        let v = self.fresh();
        self.vars.insert(name.to_string(), v);
        v
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    toks: &'a [(Tok, Pos)],
    at: usize,
    sig: Signature,
    spec_rules: Vec<RewriteRule>,
    clauses: Vec<ProtocolClause>,
    assertions: Vec<Assertion>,
    queries: Vec<Query>,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> PResult<T> {
    Err(Diagnostic {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            err(self.pos(), format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            err(self.pos(), format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => err(p, format!("expected an identifier, found {t}")),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match self.bump() {
            (Tok::Nat(n), _) => Ok(n),
            (t, p) => err(p, format!("expected a number, found {t}")),
        }
    }

    fn new_ident(&mut self) -> PResult<(String, Pos)> {
        let (name, pos) = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return err(pos, format!("`{name}` is a keyword"));
        }
        if self.sig.lookup(&name).is_some() {
            return err(pos, format!("`{name}` is already declared"));
        }
        Ok((name, pos))
    }

    fn arity_decl(&mut self) -> PResult<(String, usize)> {
        let (name, _) = self.new_ident()?;
        self.expect_sym("/")?;
        let n = self.nat()?;
        Ok((name, n as usize))
    }

    /// Skips past the next statement-ending `.`.
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Sym(".") => {
                    self.bump();
                    if matches!(self.peek(), Tok::Eof)
                        || matches!(self.peek(), Tok::Ident(k) if is_statement_keyword(k))
                    {
                        return;
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let (kw, pos) = self.ident()?;
        match kw.as_str() {
            "fun" | "data" => {
                let (name, arity) = self.arity_decl()?;
                let kind = if kw == "fun" {
                    SymbolKind::Constructor
                } else {
                    SymbolKind::Data
                };
                self.sig.add_symbol(&name, arity, kind).expect("checked");
            }
            "name" => {
                let (name, _) = self.new_ident()?;
                let private = self.eat_kw("private");
                self.sig
                    .add_symbol(&name, 0, SymbolKind::Name { private })
                    .expect("checked");
            }
            "pred" => {
                let (name, arity) = self.arity_decl()?;
                let kind = if self.eat_kw("blocking") {
                    PredicateKind::Blocking
                } else {
                    PredicateKind::Event
                };
                self.sig.add_predicate(&name, arity, kind).expect("checked");
            }
            "reduc" => self.reduc()?,
            "clause" => self.clause(pos)?,
            "axiom" => self.assertion(AssertionKind::Axiom)?,
            "restriction" => self.assertion(AssertionKind::Restriction)?,
            "lemma" => {
                let kind = if self.eat_kw("inductive") {
                    AssertionKind::InductiveLemma
                } else {
                    AssertionKind::Lemma
                };
                self.assertion(kind)?
            }
            "query" => self.query()?,
            _ => return err(pos, format!("unknown statement `{kw}`")),
        }
        self.expect_sym(".")
    }

    fn reduc(&mut self) -> PResult<()> {
        let (name, pos) = self.ident()?;
        let mut scope = Scope::default();
        self.expect_sym("(")?;
        let raw_args = self.raw_list()?;
        self.expect_sym(")")?;
        self.expect_sym("->")?;
        let rhs_raw = self.raw()?;
        let f = match self.sig.lookup(&name) {
            None if KEYWORDS.contains(&name.as_str()) => return err(pos, format!("`{name}` is a keyword")),
            None => self
                .sig
                .add_symbol(&name, raw_args.len(), SymbolKind::Destructor)
                .expect("checked"),
            Some(Ident::Symbol(f)) if self.sig.symbol(f).kind == SymbolKind::Destructor => {
                if self.sig.symbol(f).arity != raw_args.len() {
                    return err(
                        pos,
                        format!(
                            "destructor `{name}` has arity {}, used with {} arguments",
                            self.sig.symbol(f).arity,
                            raw_args.len()
                        ),
                    );
                }
                f
            }
            Some(_) => return err(pos, format!("`{name}` is already declared and is not a destructor")),
        };
        let lhs_args = raw_args
            .iter()
            .map(|r| self.term(r, &mut scope))
            .collect::<PResult<Vec<_>>>()?;
        let lhs_vars: Vec<Var> = scope.vars.values().copied().collect();
        let rhs = self.term(&rhs_raw, &mut scope)?;
        if let Some(v) = rhs.vars().into_iter().find(|v| !lhs_vars.contains(v)) {
            let name = scope.vars.iter().find(|(_, x)| **x == v).map(|(n, _)| n.clone());
            return err(
                rhs_raw.pos(),
                format!(
                    "variable `{}` of the right-hand side does not occur on the left",
                    name.unwrap_or_default()
                ),
            );
        }
        let mut r = Renumber::new();
        lhs_args.iter().for_each(|t| r.see_fact(&Fact::att(t.clone())));
        self.spec_rules.push(RewriteRule {
            destructor: f,
            lhs_args: lhs_args.iter().map(|t| r.term(t)).collect(),
            rhs: r.term(&rhs),
        });
        Ok(())
    }

    fn raw(&mut self) -> PResult<Raw> {
        match self.bump() {
            (Tok::Nat(n), p) => Ok(Raw::Nat(n, p)),
            (Tok::Ident(name), p) => {
                if self.eat_sym("(") {
                    let args = if self.at_sym(")") { Vec::new() } else { self.raw_list()? };
                    self.expect_sym(")")?;
                    Ok(Raw::App(name, Some(args), p))
                } else {
                    Ok(Raw::App(name, None, p))
                }
            }
            (t, p) => err(p, format!("expected a term, found {t}")),
        }
    }

    fn raw_list(&mut self) -> PResult<Vec<Raw>> {
        let mut out = vec![self.raw()?];
        while self.eat_sym(",") {
            out.push(self.raw()?);
        }
        Ok(out)
    }

    fn term(&self, raw: &Raw, scope: &mut Scope) -> PResult<Term> {
        match raw {
            Raw::Nat(n, _) => Ok(Term::Nat(*n)),
            Raw::App(name, args, pos) => match self.sig.lookup(name) {
                Some(Ident::Symbol(f)) => {
                    let sym = self.sig.symbol(f);
                    if sym.kind == SymbolKind::Destructor {
                        return err(*pos, format!("destructor `{name}` cannot occur in a clause term"));
                    }
                    let args = args.as_deref().unwrap_or(&[]);
                    if args.len() != sym.arity {
                        return err(
                            *pos,
                            format!("`{name}` expects {} arguments, got {}", sym.arity, args.len()),
                        );
                    }
                    let args = args.iter().map(|a| self.term(a, scope)).collect::<PResult<Vec<_>>>()?;
                    Ok(Term::app(f, args))
                }
                Some(Ident::Predicate(_)) => err(*pos, format!("predicate `{name}` used as a term")),
                None if args.is_some() => err(*pos, format!("unknown function symbol `{name}`")),
                None if KEYWORDS.contains(&name.as_str()) => err(*pos, format!("keyword `{name}` used as a term")),
                None => Ok(Term::Var(scope.lookup(name))),
            },
        }
    }

    fn fact_of(&self, raw: &Raw, scope: &mut Scope) -> PResult<Fact> {
        let Raw::App(name, args, pos) = raw else {
            return err(raw.pos(), "expected a fact");
        };
        let pred: PredicateId = match self.sig.lookup(name) {
            Some(Ident::Predicate(p)) => p,
            Some(Ident::Symbol(_)) => return err(*pos, format!("`{name}` is a function symbol, not a predicate")),
            None => return err(*pos, format!("unknown predicate `{name}`")),
        };
        let args = args.as_deref().unwrap_or(&[]);
        let arity = self.sig.predicate(pred).arity;
        if args.len() != arity {
            return err(*pos, format!("`{name}` expects {arity} arguments, got {}", args.len()));
        }
        let args = args.iter().map(|a| self.term(a, scope)).collect::<PResult<Vec<_>>>()?;
        Ok(Fact::new(pred, args))
    }

    fn fact(&mut self, scope: &mut Scope) -> PResult<Fact> {
        let raw = self.raw()?;
        self.fact_of(&raw, scope)
    }

    fn clause(&mut self, kw_pos: Pos) -> PResult<()> {
        let mut scope = Scope::default();
        let mut hyps = Vec::new();
        let mut constraints = Vec::new();
        if !self.eat_kw("true") {
            loop {
                self.hypothesis(&mut scope, &mut hyps, &mut constraints)?;
                if !self.eat_sym("&&") {
                    break;
                }
            }
        }
        self.expect_sym("=>")?;
        let concl_pos = self.pos();
        let concl = self.fact(&mut scope)?;
        if self.sig.is_blocking(concl.pred) {
            return err(concl_pos, "a blocking predicate cannot be concluded");
        }
        for (name, pos) in &scope.universal_names {
            if scope.vars.contains_key(name) {
                return err(
                    *pos,
                    format!("universal variable `{name}` also occurs outside its disequation"),
                );
            }
        }
        let mut r = Renumber::new();
        hyps.iter().for_each(|h: &Hypothesis| r.see_fact(&h.fact));
        constraints.iter().for_each(|c| r.see_constraint(c));
        r.see_fact(&concl);
        self.clauses.push(ProtocolClause {
            hyps: hyps
                .iter()
                .map(|h| Hypothesis {
                    fact: r.fact(&h.fact),
                    precise: h.precise,
                })
                .collect(),
            constraints: constraints.iter().map(|c| r.constraint(c)).collect(),
            concl: r.fact(&concl),
            line: kw_pos.line,
        });
        Ok(())
    }

    fn hypothesis(
        &mut self,
        scope: &mut Scope,
        hyps: &mut Vec<Hypothesis>,
        constraints: &mut Vec<Constraint>,
    ) -> PResult<()> {
        if self.eat_kw("forall") {
            let mut names = Vec::new();
            loop {
                let (name, pos) = self.ident()?;
                let v = scope.fresh();
                names.push((name.clone(), v));
                scope.universal_names.push((name, pos));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(".")?;
            let lhs = self.raw()?;
            self.expect_sym("<>")?;
            let rhs = self.raw()?;
            let depth = scope.universals.len();
            scope.universals.extend(names.iter().cloned());
            let lhs = self.term(&lhs, scope);
            let rhs = self.term(&rhs, scope);
            scope.universals.truncate(depth);
            constraints.push(Constraint::Diseq {
                universals: names.into_iter().map(|(_, v)| v).collect(),
                lhs: lhs?,
                rhs: rhs?,
            });
            return Ok(());
        }
        if self.eat_kw("not") {
            self.expect_kw("is_nat")?;
            let t = self.paren_term(scope)?;
            constraints.push(Constraint::NotNat(t));
            return Ok(());
        }
        if self.eat_kw("is_nat") {
            let t = self.paren_term(scope)?;
            constraints.push(Constraint::IsNat(t));
            return Ok(());
        }
        let raw = self.raw()?;
        if self.eat_sym("<>") {
            let lhs = self.term(&raw, scope)?;
            let rhs = self.raw()?;
            let rhs = self.term(&rhs, scope)?;
            constraints.push(Constraint::Diseq {
                universals: vec![],
                lhs,
                rhs,
            });
        } else if self.eat_sym(">=") {
            let lhs = self.term(&raw, scope)?;
            let rhs = self.raw()?;
            let rhs = self.term(&rhs, scope)?;
            let offset = if self.eat_sym("+") {
                self.offset()?
            } else if self.eat_sym("-") {
                -self.offset()?
            } else {
                0
            };
            constraints.push(Constraint::Geq { lhs, rhs, offset });
        } else {
            let pos = raw.pos();
            let fact = self.fact_of(&raw, scope)?;
            let precise = if self.eat_sym("[") {
                self.expect_kw("precise")?;
                self.expect_sym("]")?;
                if !fact.is_att() {
                    return err(pos, "only `att` hypotheses can be marked precise");
                }
                true
            } else {
                false
            };
            hyps.push(Hypothesis { fact, precise });
        }
        Ok(())
    }

    fn offset(&mut self) -> PResult<i64> {
        let pos = self.pos();
        let n = self.nat()?;
        i64::try_from(n).or_else(|_| err(pos, "offset out of range"))
    }

    fn paren_term(&mut self, scope: &mut Scope) -> PResult<Term> {
        self.expect_sym("(")?;
        let raw = self.raw()?;
        self.expect_sym(")")?;
        self.term(&raw, scope)
    }

    fn facts(&mut self, scope: &mut Scope) -> PResult<Vec<Fact>> {
        let mut out = vec![self.fact(scope)?];
        while self.eat_sym("&&") {
            out.push(self.fact(scope)?);
        }
        Ok(out)
    }

    fn assertion(&mut self, kind: AssertionKind) -> PResult<()> {
        let mut scope = Scope::default();
        let premises = self.facts(&mut scope)?;
        self.expect_sym("==>")?;
        let premise_vars: Vec<Var> = scope.vars.values().copied().collect();
        let mut conclusion = Vec::new();
        loop {
            let pos = self.pos();
            let raw = self.raw()?;
            let item = if self.eat_sym("=") {
                let rhs = self.raw()?;
                Conclusion::Equal(self.term(&raw, &mut scope)?, self.term(&rhs, &mut scope)?)
            } else {
                Conclusion::Fact(self.fact_of(&raw, &mut scope)?)
            };
            // Lemma conclusions may introduce existential variables.
            if !kind.is_lemma() {
                let mut vs = Vec::new();
                match &item {
                    Conclusion::Fact(f) => f.collect_vars(&mut vs),
                    Conclusion::Equal(a, b) => {
                        a.collect_vars(&mut vs);
                        b.collect_vars(&mut vs);
                    }
                }
                if vs.iter().any(|v| !premise_vars.contains(v)) {
                    return err(pos, "conclusion uses a variable that does not occur in the premises");
                }
            }
            conclusion.push(item);
            if !self.eat_sym("&&") {
                break;
            }
        }
        let mut r = Renumber::new();
        premises.iter().for_each(|f| r.see_fact(f));
        conclusion.iter().for_each(|c| r.see_conclusion(c));
        self.assertions.push(Assertion {
            kind,
            premises: premises.iter().map(|f| r.fact(f)).collect(),
            conclusion: conclusion.iter().map(|c| r.conclusion(c)).collect(),
        });
        Ok(())
    }

    fn query(&mut self) -> PResult<()> {
        let mut scope = Scope::default();
        let pos = self.pos();
        let premise = self.fact(&mut scope)?;
        let mut r = Renumber::new();
        r.see_fact(&premise);
        if self.eat_sym("==>") {
            let required = self.facts(&mut scope)?;
            required.iter().for_each(|f| r.see_fact(f));
            self.queries.push(Query::Correspondence {
                premise: r.fact(&premise),
                required: required.iter().map(|f| r.fact(f)).collect(),
            });
        } else {
            if !premise.is_att() {
                return err(pos, "a query without `==>` must be an attacker fact");
            }
            self.queries.push(Query::Secrecy(r.fact(&premise)));
        }
        Ok(())
    }
}

fn is_statement_keyword(k: &str) -> bool {
    matches!(
        k,
        "fun" | "data" | "reduc" | "name" | "pred" | "clause" | "axiom" | "restriction" | "lemma" | "query"
    )
}

/// Parses and validates a specification. Identifiers not declared as
/// symbols or predicates are variables, scoped to their statement. When no
/// public name is declared, a fresh one (`b0` unless taken) is added so the
/// adversary always knows at least one constant.
pub fn parse_spec(src: &str) -> Result<Specification, ParseError> {
    let toks = lex(src).map_err(|d| ParseError(vec![d]))?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        sig: Signature::new(),
        spec_rules: Vec::new(),
        clauses: Vec::new(),
        assertions: Vec::new(),
        queries: Vec::new(),
    };
    let mut diags = Vec::new();
    while !matches!(p.peek(), Tok::Eof) {
        if let Err(d) = p.statement() {
            diags.push(d);
            p.recover();
        }
    }
    if !diags.is_empty() {
        return Err(ParseError(diags));
    }
    let mut sig = p.sig;
    if !sig
        .symbols()
        .any(|(_, s)| s.kind == SymbolKind::Name { private: false })
    {
        let name = sig.fresh_ident("b0");
        sig.add_symbol(&name, 0, SymbolKind::Name { private: false })
            .expect("fresh identifier");
    }
    Ok(Specification {
        sig,
        rules: p.spec_rules,
        clauses: p.clauses,
        assertions: p.assertions,
        queries: p.queries,
    })
}
