//! Boolean guard formulas over symbol atoms.
//!
//! Guard text uses `0`, `1`, identifiers, `!` (negation), `*` (product) and
//! `+` (sum) with parentheses. `!` binds tighter than `*`, which binds
//! tighter than `+`; binary operators are left-associative.
//!
//! An atom is true exactly when its symbol is present in the set being
//! evaluated against. Satisfiability and tautology checks enumerate every
//! assignment of the formula's atoms, bounded by an atom cap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FormulaError;

/// Default bound on the number of distinct atoms an exhaustive check may enumerate.
pub const DEFAULT_ATOM_CAP: usize = 20;

/// A named input or output symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Self {
        Symbol(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol(s.to_string())
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(s)
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// True if `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A set of symbols, e.g. the symbols present in one broadcast instant.
pub type SymbolSet = BTreeSet<Symbol>;

/// A (possibly partial) truth assignment.
pub type Assignment = BTreeMap<Symbol, bool>;

/// Builds a symbol set from string names.
pub fn symbols<I, S>(names: I) -> SymbolSet
where
    I: IntoIterator<Item = S>,
    S: Into<Symbol>,
{
    names.into_iter().map(Into::into).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Symbol),
    Not(Box<Formula>),
    /// Product; always holds at least two children when built through [`Formula::and`].
    And(Vec<Formula>),
    /// Sum; always holds at least two children when built through [`Formula::or`].
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<Symbol>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Product without folding. Zero children give `1`, one child is returned as is.
    pub fn and(mut children: Vec<Formula>) -> Self {
        match children.len() {
            0 => Formula::True,
            1 => children.pop().unwrap(),
            _ => Formula::And(children),
        }
    }

    /// Sum without folding. Zero children give `0`, one child is returned as is.
    pub fn or(mut children: Vec<Formula>) -> Self {
        match children.len() {
            0 => Formula::False,
            1 => children.pop().unwrap(),
            _ => Formula::Or(children),
        }
    }

    pub fn is_const_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_const_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    pub fn atoms(&self) -> SymbolSet {
        let mut out = SymbolSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut SymbolSet) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(s) => {
                out.insert(s.clone());
            }
            Formula::Not(c) => c.collect_atoms(out),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Evaluates with atoms true iff present in `present`.
    pub fn eval(&self, present: &SymbolSet) -> bool {
        self.eval_with(&|s| present.contains(s))
    }

    pub fn eval_with(&self, value: &dyn Fn(&Symbol) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(s) => value(s),
            Formula::Not(c) => !c.eval_with(value),
            Formula::And(cs) => cs.iter().all(|c| c.eval_with(value)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval_with(value)),
        }
    }

    /// Replaces assigned atoms by constants and folds constants away.
    pub fn restrict(&self, partial: &Assignment) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(s) => match partial.get(s) {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => self.clone(),
            },
            Formula::Not(c) => negate(c.restrict(partial)),
            Formula::And(cs) => conjoin(cs.iter().map(|c| c.restrict(partial))),
            Formula::Or(cs) => disjoin(cs.iter().map(|c| c.restrict(partial))),
        }
    }

    pub fn is_satisfiable(&self) -> Result<bool, FormulaError> {
        self.is_satisfiable_capped(DEFAULT_ATOM_CAP)
    }

    pub fn is_satisfiable_capped(&self, cap: usize) -> Result<bool, FormulaError> {
        Ok(TruthTable::new(self, cap)?.any(true))
    }

    pub fn is_tautology(&self) -> Result<bool, FormulaError> {
        self.is_tautology_capped(DEFAULT_ATOM_CAP)
    }

    pub fn is_tautology_capped(&self, cap: usize) -> Result<bool, FormulaError> {
        Ok(!TruthTable::new(self, cap)?.any(false))
    }

    /// Truth-table equivalence over the union of both atom sets.
    pub fn equivalent(&self, other: &Formula, cap: usize) -> Result<bool, FormulaError> {
        let iff_violated = Formula::or(vec![
            Formula::and(vec![self.clone(), Formula::not(other.clone())]),
            Formula::and(vec![Formula::not(self.clone()), other.clone()]),
        ]);
        Ok(!iff_violated.is_satisfiable_capped(cap)?)
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            _ => 3,
        }
    }
}

/// Negation with constant folding and double-negation removal.
pub fn negate(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

/// Folded product of `fs`. The empty product is `1`.
pub fn conjoin<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
    let mut kept = Vec::new();
    for f in fs {
        match f {
            Formula::True => {}
            Formula::False => return Formula::False,
            Formula::And(cs) => kept.extend(cs),
            other => kept.push(other),
        }
    }
    Formula::and(kept)
}

/// Folded sum of `fs`. The empty sum is `0`.
pub fn disjoin<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
    let mut kept = Vec::new();
    for f in fs {
        match f {
            Formula::False => {}
            Formula::True => return Formula::True,
            Formula::Or(cs) => kept.extend(cs),
            other => kept.push(other),
        }
    }
    Formula::or(kept)
}

/// Formula compiled against a fixed atom order, for enumeration.
struct TruthTable {
    atoms: usize,
    root: Compiled,
}

enum Compiled {
    Const(bool),
    Var(usize),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
}

impl Compiled {
    fn eval(&self, bits: u64) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Var(i) => bits >> i & 1 == 1,
            Compiled::Not(c) => !c.eval(bits),
            Compiled::And(cs) => cs.iter().all(|c| c.eval(bits)),
            Compiled::Or(cs) => cs.iter().any(|c| c.eval(bits)),
        }
    }
}

impl TruthTable {
    fn new(f: &Formula, cap: usize) -> Result<Self, FormulaError> {
        let atoms: Vec<Symbol> = f.atoms().into_iter().collect();
        // u64 masks bound the enumeration regardless of the configured cap
        if atoms.len() > cap.min(63) {
            return Err(FormulaError::AtomCapExceeded {
                atoms: atoms.len(),
                cap,
            });
        }
        let index: BTreeMap<&Symbol, usize> =
            atoms.iter().enumerate().map(|(i, s)| (s, i)).collect();
        fn compile(f: &Formula, index: &BTreeMap<&Symbol, usize>) -> Compiled {
            match f {
                Formula::True => Compiled::Const(true),
                Formula::False => Compiled::Const(false),
                Formula::Atom(s) => Compiled::Var(index[s]),
                Formula::Not(c) => Compiled::Not(Box::new(compile(c, index))),
                Formula::And(cs) => Compiled::And(cs.iter().map(|c| compile(c, index)).collect()),
                Formula::Or(cs) => Compiled::Or(cs.iter().map(|c| compile(c, index)).collect()),
            }
        }
        Ok(TruthTable {
            atoms: atoms.len(),
            root: compile(f, &index),
        })
    }

    /// True if some assignment evaluates to `target`.
    fn any(&self, target: bool) -> bool {
        (0..1u64 << self.atoms).any(|bits| self.root.eval(bits) == target)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(out: &mut fmt::Formatter<'_>, c: &Formula, min_prec: u8) -> fmt::Result {
            if c.precedence() < min_prec {
                write!(out, "({c})")
            } else {
                write!(out, "{c}")
            }
        }
        match self {
            Formula::True => f.write_str("1"),
            Formula::False => f.write_str("0"),
            Formula::Atom(s) => f.write_str(s.as_str()),
            Formula::Not(c) => {
                f.write_str("!")?;
                child(f, c, 3)
            }
            // nested products and sums keep their parentheses so that
            // parsing the rendered text rebuilds the same tree
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    child(f, c, 3)?;
                }
                Ok(())
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    child(f, c, 2)?;
                }
                Ok(())
            }
        }
    }
}

pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}

pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    Parser::new(text).parse()
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn parse(mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        if self.pos == self.src.len() {
            return Err(FormulaError::Empty);
        }
        let f = self.sum()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.error(format!("unexpected `{}`", self.peek().unwrap())));
        }
        Ok(f)
    }

    fn error(&self, message: impl Into<String>) -> FormulaError {
        FormulaError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Formula, FormulaError> {
        let mut terms = vec![self.product()?];
        while self.eat('+') {
            terms.push(self.product()?);
        }
        Ok(Formula::or(terms))
    }

    fn product(&mut self) -> Result<Formula, FormulaError> {
        let mut factors = vec![self.factor()?];
        while self.eat('*') {
            factors.push(self.factor()?);
        }
        Ok(Formula::and(factors))
    }

    fn factor(&mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('!') => {
                self.pos += 1;
                Ok(Formula::not(self.factor()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let len = self.src[start..]
                    .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                    .unwrap_or(self.src.len() - start);
                let lit = &self.src[start..start + len];
                match lit {
                    "0" => {
                        self.pos += 1;
                        Ok(Formula::False)
                    }
                    "1" => {
                        self.pos += 1;
                        Ok(Formula::True)
                    }
                    _ => Err(self.error(format!("invalid constant `{lit}`"))),
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let len = self.src[start..]
                    .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                    .unwrap_or(self.src.len() - start);
                self.pos += len;
                Ok(Formula::atom(&self.src[start..start + len]))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }
}
