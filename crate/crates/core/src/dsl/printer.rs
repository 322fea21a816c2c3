//! Source printer.  Emits the minimal parentheses needed so that parsing
//! the output reproduces the same tree.

use crate::expr::{BinOp, CmpOp, Expr};
use crate::symtab::ParamDecl;

use super::ast::*;

/// Binding strength; larger binds tighter.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Implies(..) => 0,
        Expr::Or(..) => 1,
        Expr::And(..) => 2,
        Expr::Cmp(..) => 3,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 4,
        Expr::Bin(BinOp::Mul | BinOp::Div | BinOp::Mod, ..) => 5,
        Expr::Neg(..) | Expr::Not(..) => 6,
        _ => 7,
    }
}

fn bin_op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Mod => "%",
    }
}

fn cmp_op_str(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Eq => "==",
        CmpOp::Ne => "!=",
    }
}

fn write_child(out: &mut String, child: &Expr, min_level: u8) {
    if level(child) < min_level {
        out.push('(');
        write_expr(out, child);
        out.push(')');
    } else {
        write_expr(out, child);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Param(name) | Expr::Var(name) => out.push_str(name),
        Expr::Access {
            array,
            index,
            trigger,
        } => {
            if *trigger {
                out.push_str("{: ");
            }
            out.push_str(array);
            out.push('[');
            write_expr(out, index);
            out.push(']');
            if *trigger {
                out.push_str(" :}");
            }
        }
        Expr::Neg(inner) => {
            out.push('-');
            write_child(out, inner, 6);
        }
        Expr::Not(inner) => {
            out.push('!');
            write_child(out, inner, 6);
        }
        Expr::Abs(inner) => {
            out.push_str("abs(");
            write_expr(out, inner);
            out.push(')');
        }
        Expr::Bin(op, l, r) => {
            let lv = level(e);
            write_child(out, l, lv);
            out.push(' ');
            out.push_str(bin_op_str(*op));
            out.push(' ');
            write_child(out, r, lv + 1);
        }
        Expr::Cmp(op, l, r) => {
            write_child(out, l, 4);
            out.push(' ');
            out.push_str(cmp_op_str(*op));
            out.push(' ');
            write_child(out, r, 4);
        }
        Expr::And(l, r) => {
            write_child(out, l, 2);
            out.push_str(" && ");
            write_child(out, r, 3);
        }
        Expr::Or(l, r) => {
            write_child(out, l, 1);
            out.push_str(" || ");
            write_child(out, r, 2);
        }
        Expr::Implies(l, r) => {
            write_child(out, l, 1);
            out.push_str(" ==> ");
            write_child(out, r, 0);
        }
        Expr::Acc1d(args) => {
            out.push_str("acc1d(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

/// Print one expression.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

/// Print a quantifier as the single line `forall int x, int y; dom; body;`.
pub fn print_quantifier(q: &QuantifiedFormula) -> String {
    let mut out = String::from("forall ");
    for (i, v) in q.vars.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str("int ");
        out.push_str(v);
    }
    out.push_str("; ");
    write_expr(&mut out, &q.domain);
    out.push_str("; ");
    write_expr(&mut out, &q.body);
    out.push(';');
    out
}

fn print_param(decl: &ParamDecl) -> String {
    let mut out = format!("param int {}", decl.name);
    if !decl.facts.is_empty() {
        out.push_str(" where ");
        for (i, f) in decl.facts.iter().enumerate() {
            if i > 0 {
                out.push_str(" && ");
            }
            write_child(&mut out, f, 2);
        }
    }
    out.push(';');
    out
}

fn print_qual(q: &QualSyntax) -> String {
    match q {
        QualSyntax::Unique(n) => format!("unique<{n}>"),
        QualSyntax::Immutable => "immutable".to_string(),
    }
}

/// Print a declared type, e.g. `unique<1> int* immutable`.
pub fn print_type(ty: &TypeSyntax) -> String {
    let mut out = String::new();
    for q in &ty.base_quals {
        out.push_str(&print_qual(q));
        out.push(' ');
    }
    match &ty.base {
        BaseTypeSyntax::Int => out.push_str("int"),
        BaseTypeSyntax::Void => out.push_str("void"),
        BaseTypeSyntax::Struct(name) => {
            out.push_str("struct ");
            out.push_str(name);
        }
    }
    for star in &ty.stars {
        out.push('*');
        for q in star {
            out.push(' ');
            out.push_str(&print_qual(q));
        }
    }
    out
}

fn print_mini_expr(e: &MiniExpr) -> String {
    match e {
        MiniExpr::Name(n, _) => n.clone(),
        MiniExpr::Int(v, _) => v.to_string(),
        MiniExpr::AddrOf(n, _) => format!("&{n}"),
        MiniExpr::Deref(n, _) => format!("*{n}"),
        MiniExpr::Field(base, field, _) => format!("{base}.{field}"),
    }
}

fn print_mini_stmt(out: &mut String, stmt: &MiniStmt, indent: &str) {
    match stmt {
        MiniStmt::StructDecl { name, members, .. } => {
            out.push_str(indent);
            out.push_str(&format!("struct {name} {{\n"));
            for (ty, mname) in members {
                out.push_str(indent);
                out.push_str("    ");
                out.push_str(&print_type(ty));
                out.push(' ');
                out.push_str(mname);
                out.push_str(";\n");
            }
            out.push_str(indent);
            out.push_str("};\n");
        }
        MiniStmt::VarDecl {
            markers,
            ty,
            name,
            init,
            ..
        } => {
            out.push_str(indent);
            if markers.unique_field {
                out.push_str("unique_field ");
            }
            if markers.unique_pointer_field {
                out.push_str("unique_pointer_field ");
            }
            out.push_str(&print_type(ty));
            out.push(' ');
            out.push_str(name);
            if let Some(e) = init {
                out.push_str(" = ");
                out.push_str(&print_mini_expr(e));
            }
            out.push_str(";\n");
        }
        MiniStmt::FnDecl {
            ret, name, params, ..
        } => {
            out.push_str(indent);
            out.push_str(&print_type(ret));
            out.push(' ');
            out.push_str(name);
            out.push('(');
            for (i, (ty, pname)) in params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&print_type(ty));
                if let Some(p) = pname {
                    out.push(' ');
                    out.push_str(p);
                }
            }
            out.push_str(");\n");
        }
        MiniStmt::Assign { target, value, .. } => {
            out.push_str(indent);
            out.push_str(&print_mini_expr(target));
            out.push_str(" = ");
            out.push_str(&print_mini_expr(value));
            out.push_str(";\n");
        }
        MiniStmt::Call { name, args, .. } => {
            out.push_str(indent);
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&print_mini_expr(a));
            }
            out.push_str(");\n");
        }
    }
}

/// Print a whole file; one item per line, `typecheck` sections indented.
pub fn print_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for item in &file.items {
        match item {
            Item::Param { decl, .. } => {
                out.push_str(&print_param(decl));
                out.push('\n');
            }
            Item::Array { decl, .. } => {
                out.push_str(&format!("array int {};\n", decl.name));
            }
            Item::Quantifier(q) => {
                out.push_str(&print_quantifier(q));
                out.push('\n');
            }
            Item::Acc1dDef(_) => {
                out.push_str("define acc1d(x, b, n, a) = x * a + b;\n");
            }
            Item::Typecheck(prog) => {
                out.push_str("typecheck {\n");
                for stmt in &prog.stmts {
                    print_mini_stmt(&mut out, stmt, "    ");
                }
                out.push_str("}\n");
            }
        }
    }
    out
}
