//! Index-notation expressions: `2 g^{l m} W_l^{a b} W_m^{c a} phi^{b} phibar_{c}`.
//!
//! A factor is a symbol name followed by `^{...}` / `_{...}` groups of
//! single-letter indices; `A'` is a dotted index. The groups list indices in
//! slot order. For declared symbols the variance of each slot comes from the
//! declaration; for the builtin pairing objects (`g`, `eps`, `epsS`,
//! `epsSbar`, `delta`, `deltaS`, `deltaSbar`) it comes from the group.

use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::tensor::{Slot, TensorError};

mod check;
mod eval;
mod parser;
mod symbols;

pub use check::{check_expression, parse_expression, CheckedExpression, CheckedTerm};
pub use eval::{
    bind_symbols, brute_force_expression, evaluate, evaluate_with_plans, left_fold_plans, plan_expression,
    TermPlan,
};
pub use parser::{parse_file, parse_syntax};
pub use symbols::{builtin, parse_slot, BindFile, SymbolDecl, SymbolSource, SymbolTable, BUILTINS};

/// Byte offset into the source text. Ignored by equality so that a printed
/// and reparsed expression compares equal to the original.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span(pub usize);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index {
    pub letter: char,
    pub dotted: bool,
    pub at: Span,
}

impl Index {
    pub fn label(&self) -> crate::tensor::einsum::Label {
        self.letter as u32 + if self.dotted { 0x1_0000 } else { 0 }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, if self.dotted { "'" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexGroup {
    pub upper: bool,
    pub indices: Vec<Index>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub groups: Vec<IndexGroup>,
    pub at: Span,
}

impl Factor {
    /// Indices in slot order with the variance as written.
    pub fn indices(&self) -> impl Iterator<Item = (&Index, bool)> {
        self.groups.iter().flat_map(|g| g.indices.iter().map(move |i| (i, g.upper)))
    }

    pub fn rank(&self) -> usize {
        self.groups.iter().map(|g| g.indices.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational64,
    pub factors: Vec<Factor>,
}

/// A sum of terms; the empty sum is zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expression {
    pub terms: Vec<Term>,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for g in &self.groups {
            let idx: Vec<String> = g.indices.iter().map(|i| i.to_string()).collect();
            write!(f, "{}{{{}}}", if g.upper { '^' } else { '_' }, idx.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let neg = *t.coeff.numer() < 0;
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = if neg { -t.coeff } else { t.coeff };
            let factors: Vec<String> = t.factors.iter().map(|x| x.to_string()).collect();
            if mag != Rational64::from_integer(1) || factors.is_empty() {
                write!(f, "{mag}")?;
                if !factors.is_empty() {
                    write!(f, " ")?;
                }
            }
            write!(f, "{}", factors.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("at byte {at}: {message}")]
    Syntax { at: usize, message: String },
    #[error("at byte {at}: unknown symbol '{name}'")]
    UnknownSymbol { at: usize, name: String },
    #[error("at byte {at}: '{name}' takes {expected} indices, got {got}")]
    Arity { at: usize, name: String, expected: usize, got: usize },
    #[error("at byte {at}: index {index} is used as {second} here but as {first} earlier")]
    SpeciesClash { at: usize, index: String, first: &'static str, second: &'static str },
    #[error("at byte {at}: index {index} sits on a {species} slot; dotted slots take primed indices and only they do")]
    Dotted { at: usize, index: String, species: &'static str },
    #[error("at byte {at}: index {index} appears once and is not declared free")]
    Dangling { at: usize, index: String },
    #[error("at byte {at}: index {index} appears {count} times")]
    Repeated { at: usize, index: String, count: usize },
    #[error("at byte {at}: index {index} appears twice in the same variance")]
    SameVariance { at: usize, index: String },
    #[error("at byte {at}: free index {index} is contracted")]
    FreeContracted { at: usize, index: String },
    #[error("term {term}: free index {index} is missing")]
    FreeMissing { term: usize, index: String },
    #[error("free index {index} has slot {first} in one term and {second} in another")]
    FreeSlotMismatch { index: String, first: Slot, second: Slot },
    #[error("symbol {name}: {message}")]
    Binding { name: String, message: String },
    #[error("symbol {name}: declared {declared} but bound values are {bound}")]
    ParityMismatch { name: String, declared: &'static str, bound: &'static str },
    #[error("symbol {name}: expected {expected} values, got {got}")]
    ShapeMismatch { name: String, expected: usize, got: usize },
    #[error("bind file: {0}")]
    BindFile(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

