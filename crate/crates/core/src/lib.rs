//! Rewrites quantifiers over linearly indexed arrays into forms whose array
//! accesses can serve as instantiation patterns, checks the side conditions
//! that justify the rewrite, validates results with a brute-force oracle,
//! and type-checks alias qualifiers on a small C-like surface language.

pub mod conditions;
pub mod dsl;
pub mod entails;
pub mod expr;
pub mod normal;
pub mod oracle;
pub mod pattern;
pub mod pipeline;
pub mod qualifiers;
pub mod rewrite;
pub mod simplify;
pub mod smt;
pub mod symtab;
