//! Recursive-descent parser producing a [`SourceFile`].
//!
//! Operator precedence follows C: unary `-`/`!` bind tightest, then
//! `* / %`, then `+ -`, then comparisons, then `&&`, `||`, and finally
//! `==>` (right-associative).  `a > b` and `a >= b` are stored as the
//! flipped `b < a` / `b <= a`, so printing normalizes them.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::expr::{BinOp, CmpOp, Expr, Sort};
use crate::normal::normalize;
use crate::symtab::{ArrayDecl, ParamDecl};

use super::ast::*;
use super::lexer::{lex, Tok};

/// Parse a complete source file; the first error aborts the parse.
pub fn parse(src: &str) -> Result<SourceFile, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        params: BTreeSet::new(),
        arrays: BTreeSet::new(),
    };
    p.source_file()
}

/// Parse a single boolean expression against the given declarations.
///
/// Convenience entry point for tests and ad-hoc goals: `params` and
/// `arrays` name the free symbols, `vars` the bound variables.
pub fn parse_expr_with(
    src: &str,
    params: &[&str],
    arrays: &[&str],
    vars: &[&str],
) -> Result<Expr, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        params: params.iter().map(|s| s.to_string()).collect(),
        arrays: arrays.iter().map(|s| s.to_string()).collect(),
    };
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let e = p.expr(&vars)?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("trailing-input", "trailing input after expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    params: BTreeSet<String>,
    arrays: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn span_here(&self) -> Span {
        match self.toks.get(self.pos) {
            Some((_, s)) => *s,
            None => self
                .toks
                .last()
                .map(|(_, s)| Span::new(s.end, s.end))
                .unwrap_or_default(),
        }
    }

    fn bump(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, code: &str, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(code, msg, Some(self.span_here()))
    }

    fn expect(&mut self, want: &Tok) -> Result<Span, Diagnostic> {
        match self.peek() {
            Some(t) if t == want => Ok(self.bump().unwrap().1),
            Some(t) => Err(self.err_here(
                "expected-token",
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(self.err_here(
                "expected-token",
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span), Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (tok, span) = self.bump().unwrap();
                match tok {
                    Tok::Ident(name) => Ok((name, span)),
                    _ => unreachable!(),
                }
            }
            Some(t) => Err(self.err_here(
                "expected-token",
                format!("expected identifier, found {}", t.describe()),
            )),
            None => Err(self.err_here("expected-token", "expected identifier, found end of input")),
        }
    }

    fn expect_num(&mut self) -> Result<(BigInt, Span), Diagnostic> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let (tok, span) = self.bump().unwrap();
                match tok {
                    Tok::Num(v) => Ok((v, span)),
                    _ => unreachable!(),
                }
            }
            Some(t) => Err(self.err_here(
                "expected-token",
                format!("expected number, found {}", t.describe()),
            )),
            None => Err(self.err_here("expected-token", "expected number, found end of input")),
        }
    }

    // -- items ------------------------------------------------------------

    fn source_file(&mut self) -> Result<SourceFile, Diagnostic> {
        let mut items = Vec::new();
        while let Some(tok) = self.peek() {
            let item = match tok {
                Tok::Param => self.param_item()?,
                Tok::Array => self.array_item()?,
                Tok::Forall => self.forall_item()?,
                Tok::Define => self.define_item()?,
                Tok::Typecheck => self.typecheck_item()?,
                t => {
                    return Err(self.err_here(
                        "expected-item",
                        format!(
                            "expected `param`, `array`, `forall`, `define`, or `typecheck`, found {}",
                            t.describe()
                        ),
                    ));
                }
            };
            items.push(item);
        }
        Ok(SourceFile { items })
    }

    fn declare_name(&mut self, name: &str, span: Span) -> Result<(), Diagnostic> {
        if self.params.contains(name) || self.arrays.contains(name) {
            return Err(Diagnostic::error(
                "duplicate-declaration",
                format!("`{name}` is already declared"),
                Some(span),
            ));
        }
        Ok(())
    }

    fn param_item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.expect(&Tok::Param)?;
        self.expect(&Tok::Int)?;
        let (name, name_span) = self.expect_ident()?;
        self.declare_name(&name, name_span)?;
        // The parameter is in scope inside its own `where` clause.
        self.params.insert(name.clone());
        let mut facts = Vec::new();
        if self.peek() == Some(&Tok::Where) {
            self.bump();
            let cond = self.expr(&[])?;
            self.require_bool(&cond, start, "`where` condition")?;
            facts = cond.conjuncts().into_iter().cloned().collect();
        }
        let end = self.expect(&Tok::Semi)?;
        Ok(Item::Param {
            decl: ParamDecl { name, facts },
            span: start.merge(end),
        })
    }

    fn array_item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.expect(&Tok::Array)?;
        self.expect(&Tok::Int)?;
        let (name, name_span) = self.expect_ident()?;
        self.declare_name(&name, name_span)?;
        self.arrays.insert(name.clone());
        let end = self.expect(&Tok::Semi)?;
        Ok(Item::Array {
            decl: ArrayDecl { name },
            span: start.merge(end),
        })
    }

    fn forall_item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.expect(&Tok::Forall)?;
        let mut vars: Vec<String> = Vec::new();
        loop {
            self.expect(&Tok::Int)?;
            let (name, name_span) = self.expect_ident()?;
            if vars.contains(&name) {
                return Err(Diagnostic::error(
                    "duplicate-declaration",
                    format!("variable `{name}` is bound twice"),
                    Some(name_span),
                ));
            }
            if self.params.contains(&name) || self.arrays.contains(&name) {
                return Err(Diagnostic::error(
                    "duplicate-declaration",
                    format!("variable `{name}` shadows a declared symbol"),
                    Some(name_span),
                ));
            }
            vars.push(name);
            if self.peek() == Some(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(&Tok::Semi)?;
        let domain = self.expr(&vars)?;
        self.require_bool(&domain, start, "quantifier domain")?;
        self.expect(&Tok::Semi)?;
        let body = self.expr(&vars)?;
        self.require_bool(&body, start, "quantifier body")?;
        let end = self.expect(&Tok::Semi)?;
        Ok(Item::Quantifier(QuantifiedFormula {
            vars,
            domain,
            body,
            span: start.merge(end),
        }))
    }

    fn define_item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.expect(&Tok::Define)?;
        let (fname, fspan) = self.expect_ident()?;
        if fname != "acc1d" {
            return Err(Diagnostic::error(
                "bad-define",
                format!("only `acc1d` can be defined, found `{fname}`"),
                Some(fspan),
            ));
        }
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        for i in 0..4 {
            if i > 0 {
                self.expect(&Tok::Comma)?;
            }
            let (name, _) = self.expect_ident()?;
            args.push(name);
        }
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::Assign)?;
        let body = self.expr(&args)?;
        let end = self.expect(&Tok::Semi)?;
        // The body must mean `x * a + b` for arguments (x, b, n, a).
        let expected = Expr::add(
            Expr::mul(Expr::var(&args[0]), Expr::var(&args[3])),
            Expr::var(&args[1]),
        );
        if normalize(&body) != normalize(&expected) {
            return Err(Diagnostic::error(
                "bad-define",
                "`acc1d` must be defined as the linear form `x * a + b`",
                Some(start.merge(end)),
            ));
        }
        Ok(Item::Acc1dDef(start.merge(end)))
    }

    // -- expressions ------------------------------------------------------

    fn require_bool(&self, e: &Expr, span: Span, what: &str) -> Result<(), Diagnostic> {
        match e.sort_check() {
            Ok(Sort::Bool) => Ok(()),
            Ok(Sort::Int) => Err(Diagnostic::error(
                "sort-error",
                format!("{what} must be a boolean expression"),
                Some(span),
            )),
            Err(err) => Err(Diagnostic::error(
                "sort-error",
                format!("{what}: {err}"),
                Some(span),
            )),
        }
    }

    fn expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        self.implies_expr(vars)
    }

    fn implies_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let lhs = self.or_expr(vars)?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies_expr(vars)?;
            Ok(Expr::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let mut acc = self.and_expr(vars)?;
        while self.peek() == Some(&Tok::OrOr) {
            self.bump();
            let rhs = self.and_expr(vars)?;
            acc = Expr::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let mut acc = self.cmp_expr(vars)?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.bump();
            let rhs = self.cmp_expr(vars)?;
            acc = Expr::and(acc, rhs);
        }
        Ok(acc)
    }

    fn cmp_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let lhs = self.add_expr(vars)?;
        let op = match self.peek() {
            Some(Tok::Lt) => Some((CmpOp::Lt, false)),
            Some(Tok::Le) => Some((CmpOp::Le, false)),
            Some(Tok::Gt) => Some((CmpOp::Lt, true)),
            Some(Tok::Ge) => Some((CmpOp::Le, true)),
            Some(Tok::EqEq) => Some((CmpOp::Eq, false)),
            Some(Tok::Ne) => Some((CmpOp::Ne, false)),
            _ => None,
        };
        let Some((op, flip)) = op else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.add_expr(vars)?;
        if matches!(
            self.peek(),
            Some(Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::EqEq | Tok::Ne)
        ) {
            return Err(self.err_here(
                "chained-comparison",
                "comparisons cannot be chained; use `&&`",
            ));
        }
        Ok(if flip {
            Expr::cmp(op, rhs, lhs)
        } else {
            Expr::cmp(op, lhs, rhs)
        })
    }

    fn add_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let mut acc = self.mul_expr(vars)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.mul_expr(vars)?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn mul_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        let mut acc = self.unary_expr(vars)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                Some(Tok::Percent) => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let rhs = self.unary_expr(vars)?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn unary_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                let e = self.unary_expr(vars)?;
                Ok(Expr::neg(e))
            }
            Some(Tok::Bang) => {
                self.bump();
                let e = self.unary_expr(vars)?;
                Ok(Expr::not(e))
            }
            _ => self.primary_expr(vars),
        }
    }

    fn primary_expr(&mut self, vars: &[String]) -> Result<Expr, Diagnostic> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let (v, _) = self.expect_num()?;
                Ok(Expr::Int(v))
            }
            Some(Tok::True) => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Some(Tok::False) => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Some(Tok::Abs) => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let e = self.expr(vars)?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::abs(e))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr(vars)?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::TrigOpen) => {
                self.bump();
                let (name, name_span) = self.expect_ident()?;
                if !self.arrays.contains(&name) {
                    return Err(Diagnostic::error(
                        "undeclared-name",
                        format!("trigger marker must wrap an access to a declared array, found `{name}`"),
                        Some(name_span),
                    ));
                }
                self.expect(&Tok::LBrack)?;
                let index = self.expr(vars)?;
                self.expect(&Tok::RBrack)?;
                self.expect(&Tok::TrigClose)?;
                Ok(Expr::Access {
                    array: name,
                    index: Box::new(index),
                    trigger: true,
                })
            }
            Some(Tok::Ident(_)) => {
                let (name, name_span) = self.expect_ident()?;
                match self.peek() {
                    Some(Tok::LBrack) => {
                        if !self.arrays.contains(&name) {
                            return Err(Diagnostic::error(
                                "undeclared-name",
                                format!("`{name}` is not a declared array"),
                                Some(name_span),
                            ));
                        }
                        self.bump();
                        let index = self.expr(vars)?;
                        self.expect(&Tok::RBrack)?;
                        Ok(Expr::access(&name, index))
                    }
                    Some(Tok::LParen) => {
                        if name != "acc1d" {
                            return Err(Diagnostic::error(
                                "undeclared-name",
                                format!("unknown function `{name}`"),
                                Some(name_span),
                            ));
                        }
                        self.bump();
                        let mut args = Vec::new();
                        for i in 0..4 {
                            if i > 0 {
                                self.expect(&Tok::Comma)?;
                            }
                            args.push(self.expr(vars)?);
                        }
                        self.expect(&Tok::RParen)?;
                        let mut it = args.into_iter();
                        Ok(Expr::acc1d(
                            it.next().unwrap(),
                            it.next().unwrap(),
                            it.next().unwrap(),
                            it.next().unwrap(),
                        ))
                    }
                    _ => {
                        if vars.iter().any(|v| v == &name) {
                            Ok(Expr::var(&name))
                        } else if self.params.contains(&name) {
                            Ok(Expr::param(&name))
                        } else if self.arrays.contains(&name) {
                            Err(Diagnostic::error(
                                "undeclared-name",
                                format!("array `{name}` must be indexed"),
                                Some(name_span),
                            ))
                        } else {
                            Err(Diagnostic::error(
                                "undeclared-name",
                                format!("`{name}` is not declared"),
                                Some(name_span),
                            ))
                        }
                    }
                }
            }
            Some(t) => Err(self.err_here(
                "expected-expression",
                format!("expected an expression, found {}", t.describe()),
            )),
            None => Err(self.err_here("expected-expression", "expected an expression, found end of input")),
        }
    }

    // -- typecheck sections ----------------------------------------------

    fn typecheck_item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.expect(&Tok::Typecheck)?;
        self.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => break,
                Some(_) => stmts.push(self.mini_stmt()?),
                None => {
                    return Err(self.err_here("expected-token", "expected `}`, found end of input"));
                }
            }
        }
        let end = self.expect(&Tok::RBrace)?;
        Ok(Item::Typecheck(MiniProgram {
            stmts,
            span: start.merge(end),
        }))
    }

    fn starts_type(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Int | Tok::Void | Tok::Struct | Tok::Unique | Tok::Immutable
        )
    }

    fn mini_stmt(&mut self) -> Result<MiniStmt, Diagnostic> {
        match self.peek() {
            Some(Tok::Struct) if matches!(self.peek2(), Some(Tok::Ident(_)))
                && self.toks.get(self.pos + 2).map(|(t, _)| t) == Some(&Tok::LBrace) =>
            {
                self.struct_decl()
            }
            Some(Tok::UniqueField | Tok::UniquePointerField) => {
                let start = self.span_here();
                let mut markers = InstanceMarkers::default();
                while let Some(tok) = self.peek() {
                    match tok {
                        Tok::UniqueField => {
                            markers.unique_field = true;
                            self.bump();
                        }
                        Tok::UniquePointerField => {
                            markers.unique_pointer_field = true;
                            self.bump();
                        }
                        _ => break,
                    }
                }
                self.typed_decl(markers, start)
            }
            Some(t) if Self::starts_type(t) => {
                let start = self.span_here();
                self.typed_decl(InstanceMarkers::default(), start)
            }
            Some(Tok::Star) => {
                let start = self.span_here();
                self.bump();
                let (name, name_span) = self.expect_ident()?;
                self.expect(&Tok::Assign)?;
                let value = self.mini_expr()?;
                let end = self.expect(&Tok::Semi)?;
                Ok(MiniStmt::Assign {
                    target: MiniExpr::Deref(name, start.merge(name_span)),
                    value,
                    span: start.merge(end),
                })
            }
            Some(Tok::Ident(_)) => {
                let (name, name_span) = self.expect_ident()?;
                match self.peek() {
                    Some(Tok::LParen) => {
                        self.bump();
                        let mut args = Vec::new();
                        if self.peek() != Some(&Tok::RParen) {
                            loop {
                                args.push(self.mini_expr()?);
                                if self.peek() == Some(&Tok::Comma) {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(&Tok::RParen)?;
                        let end = self.expect(&Tok::Semi)?;
                        Ok(MiniStmt::Call {
                            name,
                            args,
                            span: name_span.merge(end),
                        })
                    }
                    Some(Tok::Dot) => {
                        self.bump();
                        let (field, field_span) = self.expect_ident()?;
                        self.expect(&Tok::Assign)?;
                        let value = self.mini_expr()?;
                        let end = self.expect(&Tok::Semi)?;
                        Ok(MiniStmt::Assign {
                            target: MiniExpr::Field(name, field, name_span.merge(field_span)),
                            value,
                            span: name_span.merge(end),
                        })
                    }
                    Some(Tok::Assign) => {
                        self.bump();
                        let value = self.mini_expr()?;
                        let end = self.expect(&Tok::Semi)?;
                        Ok(MiniStmt::Assign {
                            target: MiniExpr::Name(name, name_span),
                            value,
                            span: name_span.merge(end),
                        })
                    }
                    _ => Err(self.err_here(
                        "expected-token",
                        "expected `(`, `.`, or `=` after name in statement",
                    )),
                }
            }
            Some(t) => Err(self.err_here(
                "expected-statement",
                format!("expected a declaration or statement, found {}", t.describe()),
            )),
            None => Err(self.err_here("expected-statement", "expected a statement, found end of input")),
        }
    }

    fn struct_decl(&mut self) -> Result<MiniStmt, Diagnostic> {
        let start = self.expect(&Tok::Struct)?;
        let (name, _) = self.expect_ident()?;
        self.expect(&Tok::LBrace)?;
        let mut members = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            let ty = self.type_syntax()?;
            let (mname, _) = self.expect_ident()?;
            self.expect(&Tok::Semi)?;
            members.push((ty, mname));
        }
        self.expect(&Tok::RBrace)?;
        let end = self.expect(&Tok::Semi)?;
        Ok(MiniStmt::StructDecl {
            name,
            members,
            span: start.merge(end),
        })
    }

    /// Parse a declaration that begins with a type: a variable (possibly
    /// initialized) or a function signature.
    fn typed_decl(&mut self, markers: InstanceMarkers, start: Span) -> Result<MiniStmt, Diagnostic> {
        let ty = self.type_syntax()?;
        let (name, _) = self.expect_ident()?;
        match self.peek() {
            Some(Tok::LParen) => {
                if markers != InstanceMarkers::default() {
                    return Err(self.err_here(
                        "bad-marker",
                        "instance markers apply to variable declarations, not functions",
                    ));
                }
                self.bump();
                let mut params = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        let pty = self.type_syntax()?;
                        let pname = match self.peek() {
                            Some(Tok::Ident(_)) => Some(self.expect_ident()?.0),
                            _ => None,
                        };
                        params.push((pty, pname));
                        if self.peek() == Some(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RParen)?;
                let end = self.expect(&Tok::Semi)?;
                Ok(MiniStmt::FnDecl {
                    ret: ty,
                    name,
                    params,
                    span: start.merge(end),
                })
            }
            Some(Tok::Assign) => {
                self.bump();
                let init = self.mini_expr()?;
                let end = self.expect(&Tok::Semi)?;
                Ok(MiniStmt::VarDecl {
                    markers,
                    ty,
                    name,
                    init: Some(init),
                    span: start.merge(end),
                })
            }
            _ => {
                let end = self.expect(&Tok::Semi)?;
                Ok(MiniStmt::VarDecl {
                    markers,
                    ty,
                    name,
                    init: None,
                    span: start.merge(end),
                })
            }
        }
    }

    fn quals(&mut self) -> Result<Vec<QualSyntax>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Unique) => {
                    self.bump();
                    self.expect(&Tok::Lt)?;
                    let (num, num_span) = self.expect_num()?;
                    let value = num.to_u64().ok_or_else(|| {
                        Diagnostic::error(
                            "bad-qualifier",
                            "uniqueness number is too large",
                            Some(num_span),
                        )
                    })?;
                    self.expect(&Tok::Gt)?;
                    out.push(QualSyntax::Unique(value));
                }
                Some(Tok::Immutable) => {
                    self.bump();
                    out.push(QualSyntax::Immutable);
                }
                _ => break,
            }
        }
        Ok(out)
    }

    fn type_syntax(&mut self) -> Result<TypeSyntax, Diagnostic> {
        let start = self.span_here();
        let base_quals = self.quals()?;
        let base = match self.peek() {
            Some(Tok::Int) => {
                self.bump();
                BaseTypeSyntax::Int
            }
            Some(Tok::Void) => {
                self.bump();
                BaseTypeSyntax::Void
            }
            Some(Tok::Struct) => {
                self.bump();
                let (name, _) = self.expect_ident()?;
                BaseTypeSyntax::Struct(name)
            }
            Some(t) => {
                return Err(self.err_here(
                    "expected-type",
                    format!("expected a type, found {}", t.describe()),
                ));
            }
            None => {
                return Err(self.err_here("expected-type", "expected a type, found end of input"));
            }
        };
        let mut stars = Vec::new();
        let mut end = self.toks[self.pos - 1].1;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let star_quals = self.quals()?;
            end = self.toks[self.pos - 1].1;
            stars.push(star_quals);
        }
        Ok(TypeSyntax {
            base,
            base_quals,
            stars,
            span: start.merge(end),
        })
    }

    fn mini_expr(&mut self) -> Result<MiniExpr, Diagnostic> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let (v, span) = self.expect_num()?;
                Ok(MiniExpr::Int(v, span))
            }
            Some(Tok::Minus) => {
                let start = self.span_here();
                self.bump();
                let (v, span) = self.expect_num()?;
                Ok(MiniExpr::Int(-v, start.merge(span)))
            }
            Some(Tok::Amp) => {
                let start = self.span_here();
                self.bump();
                let (name, span) = self.expect_ident()?;
                Ok(MiniExpr::AddrOf(name, start.merge(span)))
            }
            Some(Tok::Star) => {
                let start = self.span_here();
                self.bump();
                let (name, span) = self.expect_ident()?;
                Ok(MiniExpr::Deref(name, start.merge(span)))
            }
            Some(Tok::Ident(_)) => {
                let (name, span) = self.expect_ident()?;
                if self.peek() == Some(&Tok::Dot) {
                    self.bump();
                    let (field, fspan) = self.expect_ident()?;
                    Ok(MiniExpr::Field(name, field, span.merge(fspan)))
                } else {
                    Ok(MiniExpr::Name(name, span))
                }
            }
            Some(t) => Err(self.err_here(
                "expected-expression",
                format!("expected a value expression, found {}", t.describe()),
            )),
            None => Err(self.err_here("expected-expression", "expected a value, found end of input")),
        }
    }
}
