//! Syntax tree for the annotation language and its embedded C-like
//! `typecheck` sections.

use num_bigint::BigInt;

use crate::expr::Expr;
use crate::symtab::{ArrayDecl, ParamDecl, SymbolTable};

/// Half-open byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    /// 1-based line and column of the span start.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for (i, ch) in src.char_indices() {
            if i >= self.start {
                break;
            }
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Info,
}

/// A reported problem with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: Option<Span>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn info(code: &str, message: impl Into<String>, span: Option<Span>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Info,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    /// `line:col: severity[code] message` against the given source.
    pub fn render(&self, src: &str) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Info => "info",
        };
        match self.span {
            Some(span) => {
                let (line, col) = span.line_col(src);
                format!("{line}:{col}: {sev}[{}] {}", self.code, self.message)
            }
            None => format!("{sev}[{}] {}", self.code, self.message),
        }
    }
}

/// One universally quantified formula: variables, domain, body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifiedFormula {
    pub vars: Vec<String>,
    pub domain: Expr,
    pub body: Expr,
    pub span: Span,
}

/// Top-level item of a source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Param {
        decl: ParamDecl,
        span: Span,
    },
    Array {
        decl: ArrayDecl,
        span: Span,
    },
    Quantifier(QuantifiedFormula),
    /// The fixed `define acc1d(x, b, n, a) = x * a + b;` stanza.
    Acc1dDef(Span),
    Typecheck(MiniProgram),
}

/// A parsed source file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub items: Vec<Item>,
}

impl SourceFile {
    /// Declared parameters and arrays, in declaration order.
    pub fn symbol_table(&self) -> SymbolTable {
        let mut tab = SymbolTable::new();
        for item in &self.items {
            match item {
                Item::Param { decl, .. } => {
                    let _ = tab.declare_param(decl.clone());
                }
                Item::Array { decl, .. } => {
                    let _ = tab.declare_array(decl.clone());
                }
                _ => {}
            }
        }
        tab
    }

    pub fn quantifiers(&self) -> Vec<&QuantifiedFormula> {
        self.items
            .iter()
            .filter_map(|i| match i {
                Item::Quantifier(q) => Some(q),
                _ => None,
            })
            .collect()
    }

    pub fn typecheck_sections(&self) -> Vec<&MiniProgram> {
        self.items
            .iter()
            .filter_map(|i| match i {
                Item::Typecheck(p) => Some(p),
                _ => None,
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// C-like `typecheck` sections
// ---------------------------------------------------------------------------

/// Alias qualifier as written: `unique<N>` or `immutable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualSyntax {
    Unique(u64),
    Immutable,
}

/// Base of a declared type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseTypeSyntax {
    Int,
    Void,
    Struct(String),
}

/// A declared type as written: qualifiers bind to the item on their left,
/// qualifiers before the base bind to the base itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSyntax {
    pub base: BaseTypeSyntax,
    /// Qualifiers written before or directly after the base type.
    pub base_quals: Vec<QualSyntax>,
    /// One entry per `*`, innermost first, each with the qualifiers written
    /// after that star.
    pub stars: Vec<Vec<QualSyntax>>,
    pub span: Span,
}

/// Per-instance marker requesting fresh uniqueness numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstanceMarkers {
    pub unique_field: bool,
    pub unique_pointer_field: bool,
}

/// Expression inside a `typecheck` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiniExpr {
    Name(String, Span),
    Int(BigInt, Span),
    /// `&name`
    AddrOf(String, Span),
    /// `*name`
    Deref(String, Span),
    /// `name.field`
    Field(String, String, Span),
}

impl MiniExpr {
    pub fn span(&self) -> Span {
        match self {
            MiniExpr::Name(_, s)
            | MiniExpr::Int(_, s)
            | MiniExpr::AddrOf(_, s)
            | MiniExpr::Deref(_, s)
            | MiniExpr::Field(_, _, s) => *s,
        }
    }
}

/// Statement inside a `typecheck` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiniStmt {
    StructDecl {
        name: String,
        members: Vec<(TypeSyntax, String)>,
        span: Span,
    },
    VarDecl {
        markers: InstanceMarkers,
        ty: TypeSyntax,
        name: String,
        init: Option<MiniExpr>,
        span: Span,
    },
    FnDecl {
        ret: TypeSyntax,
        name: String,
        params: Vec<(TypeSyntax, Option<String>)>,
        span: Span,
    },
    Assign {
        target: MiniExpr,
        value: MiniExpr,
        span: Span,
    },
    Call {
        name: String,
        args: Vec<MiniExpr>,
        span: Span,
    },
}

impl MiniStmt {
    pub fn span(&self) -> Span {
        match self {
            MiniStmt::StructDecl { span, .. }
            | MiniStmt::VarDecl { span, .. }
            | MiniStmt::FnDecl { span, .. }
            | MiniStmt::Assign { span, .. }
            | MiniStmt::Call { span, .. } => *span,
        }
    }
}

/// One `typecheck { ... }` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniProgram {
    pub stmts: Vec<MiniStmt>,
    pub span: Span,
}
