//! Declared symbols and concrete bindings for them.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::expr::{seeded_cell, Expr};

/// A declared integer parameter with its assumed facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    /// Boolean facts from the declaration's `where` clause.
    pub facts: Vec<Expr>,
}

/// A declared integer array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
}

/// Declared parameters and arrays of one source file.
///
/// Names are unique across both namespaces; parameter facts may only refer
/// to parameters declared no later than their own declaration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    params: Vec<ParamDecl>,
    arrays: Vec<ArrayDecl>,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    pub fn declare_param(&mut self, decl: ParamDecl) -> Result<(), String> {
        if self.is_declared(&decl.name) {
            return Err(format!("`{}` is already declared", decl.name));
        }
        self.params.push(decl);
        Ok(())
    }

    pub fn declare_array(&mut self, decl: ArrayDecl) -> Result<(), String> {
        if self.is_declared(&decl.name) {
            return Err(format!("`{}` is already declared", decl.name));
        }
        self.arrays.push(decl);
        Ok(())
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.is_param(name) || self.is_array(name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p.name == name)
    }

    pub fn is_array(&self, name: &str) -> bool {
        self.arrays.iter().any(|a| a.name == name)
    }

    pub fn params(&self) -> &[ParamDecl] {
        &self.params
    }

    pub fn arrays(&self) -> &[ArrayDecl] {
        &self.arrays
    }

    /// All `where` facts in declaration order.
    pub fn facts(&self) -> Vec<Expr> {
        self.params
            .iter()
            .flat_map(|p| p.facts.iter().cloned())
            .collect()
    }

    /// All declared names, for fresh-name generation.
    pub fn names(&self) -> Vec<String> {
        self.params
            .iter()
            .map(|p| p.name.clone())
            .chain(self.arrays.iter().map(|a| a.name.clone()))
            .collect()
    }
}

/// Integer contents of one array during evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrayModel {
    /// Deterministic pseudo-random contents derived from a seed.
    Seeded(u64),
    /// Explicit cells with a default for everything else.
    Table {
        cells: BTreeMap<BigInt, BigInt>,
        default: BigInt,
    },
}

impl ArrayModel {
    pub fn value(&self, name: &str, index: &BigInt) -> BigInt {
        match self {
            ArrayModel::Seeded(seed) => seeded_cell(*seed, name, index),
            ArrayModel::Table { cells, default } => {
                cells.get(index).cloned().unwrap_or_else(|| default.clone())
            }
        }
    }
}

/// Concrete values for parameters plus a model for every array.
///
/// A binding used for evaluation must cover every free symbol of the
/// expression at hand; a missing symbol is an evaluation error, not a
/// default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    params: BTreeMap<String, BigInt>,
    arrays: BTreeMap<String, ArrayModel>,
    /// Fallback model applied to arrays without an explicit entry.
    fallback: Option<ArrayModel>,
}

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn with_param(mut self, name: &str, value: i64) -> Binding {
        self.params.insert(name.to_string(), BigInt::from(value));
        self
    }

    pub fn set_param(&mut self, name: &str, value: BigInt) {
        self.params.insert(name.to_string(), value);
    }

    pub fn with_seed(mut self, seed: u64) -> Binding {
        self.fallback = Some(ArrayModel::Seeded(seed));
        self
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.fallback = Some(ArrayModel::Seeded(seed));
    }

    pub fn set_array(&mut self, name: &str, model: ArrayModel) {
        self.arrays.insert(name.to_string(), model);
    }

    pub fn param(&self, name: &str) -> Option<&BigInt> {
        self.params.get(name)
    }

    pub fn params(&self) -> &BTreeMap<String, BigInt> {
        &self.params
    }

    pub fn array_model(&self, name: &str) -> Option<&ArrayModel> {
        self.arrays.get(name).or(self.fallback.as_ref())
    }
}

/// Outcome of a symbolic check.
///
/// `Refuted` verdicts produced by enumeration always carry a witness;
/// `Unknown` carries the first goal that could not be discharged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proven,
    Refuted(Option<String>),
    Unknown(Option<String>),
}

impl Verdict {
    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::Proven)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proven => "proven",
            Verdict::Refuted(_) => "refuted",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            Verdict::Proven => None,
            Verdict::Refuted(d) | Verdict::Unknown(d) => d.as_deref(),
        }
    }
}
