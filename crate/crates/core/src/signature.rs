//! Function symbols, predicates, and the shared namespace they live in.

use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    /// Free function symbol; the adversary may apply it.
    Constructor,
    /// Constructor with implicit projections.
    Data,
    /// Nullary name.
    Name { private: bool },
    /// Defined by rewrite rules; never appears inside clause terms.
    Destructor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub ident: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredicateKind {
    /// The built-in `att`.
    Attacker,
    /// Never selected, never concluded.
    Blocking,
    /// Ordinary user predicate, typically used as a correspondence conclusion.
    Event,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub ident: String,
    pub arity: usize,
    pub kind: PredicateKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ident {
    Symbol(SymbolId),
    Predicate(PredicateId),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("identifier `{0}` is already declared")]
pub struct DuplicateIdent(pub String);

/// Symbols and predicates share one namespace, so a bare identifier in a
/// clause always resolves unambiguously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<Symbol>,
    predicates: Vec<Predicate>,
    names: HashMap<String, Ident>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    pub const ATTACKER: PredicateId = PredicateId(0);

    pub fn new() -> Self {
        let mut sig = Signature {
            symbols: Vec::new(),
            predicates: Vec::new(),
            names: HashMap::new(),
        };
        sig.add_predicate("att", 1, PredicateKind::Attacker)
            .expect("fresh signature");
        sig
    }

    pub fn add_symbol(&mut self, ident: &str, arity: usize, kind: SymbolKind) -> Result<SymbolId, DuplicateIdent> {
        if self.names.contains_key(ident) {
            return Err(DuplicateIdent(ident.to_string()));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            ident: ident.to_string(),
            arity,
            kind,
        });
        self.names.insert(ident.to_string(), Ident::Symbol(id));
        Ok(id)
    }

    pub fn add_predicate(
        &mut self,
        ident: &str,
        arity: usize,
        kind: PredicateKind,
    ) -> Result<PredicateId, DuplicateIdent> {
        if self.names.contains_key(ident) {
            return Err(DuplicateIdent(ident.to_string()));
        }
        let id = PredicateId(self.predicates.len() as u32);
        self.predicates.push(Predicate {
            ident: ident.to_string(),
            arity,
            kind,
        });
        self.names.insert(ident.to_string(), Ident::Predicate(id));
        Ok(id)
    }

    pub fn lookup(&self, ident: &str) -> Option<Ident> {
        self.names.get(ident).copied()
    }

    pub fn symbol_id(&self, ident: &str) -> Option<SymbolId> {
        match self.lookup(ident) {
            Some(Ident::Symbol(id)) => Some(id),
            _ => None,
        }
    }

    pub fn predicate_id(&self, ident: &str) -> Option<PredicateId> {
        match self.lookup(ident) {
            Some(Ident::Predicate(id)) => Some(id),
            _ => None,
        }
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn predicate(&self, id: PredicateId) -> &Predicate {
        &self.predicates[id.0 as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &Symbol)> {
        self.symbols.iter().enumerate().map(|(i, s)| (SymbolId(i as u32), s))
    }

    pub fn predicates(&self) -> impl Iterator<Item = (PredicateId, &Predicate)> {
        self.predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (PredicateId(i as u32), p))
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_blocking(&self, id: PredicateId) -> bool {
        self.predicate(id).kind == PredicateKind::Blocking
    }

    pub fn is_data(&self, id: SymbolId) -> bool {
        self.symbol(id).kind == SymbolKind::Data
    }

    /// First identifier of the form `{base}{n}` (or `base` itself) that is
    /// not yet declared.
    pub fn fresh_ident(&self, base: &str) -> String {
        if !self.names.contains_key(base) {
            return base.to_string();
        }
        (1..)
            .map(|n| format!("{base}{n}"))
            .find(|s| !self.names.contains_key(s))
            .expect("unbounded")
    }

    pub fn show<'a, T: Pretty + ?Sized>(&'a self, value: &'a T) -> Shown<'a, T> {
        Shown { sig: self, value }
    }
}

/// Formatting that needs symbol names.
pub trait Pretty {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

pub struct Shown<'a, T: ?Sized> {
    sig: &'a Signature,
    value: &'a T,
}

impl<T: Pretty + ?Sized> fmt::Display for Shown<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.pretty(self.sig, f)
    }
}

impl<T: Pretty> Pretty for [T] {
    fn pretty(&self, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            x.pretty(sig, f)?;
        }
        Ok(())
    }
}
