//! SMT-LIB 2 emission with trigger annotations.
//!
//! Parameters become integer constants with their facts asserted, arrays
//! become uninterpreted `Int -> Int` functions, and each quantifier is
//! asserted with a `:pattern` on a trigger-pure array access.  A quantifier
//! that still indexes arrays through arithmetic has no such access and is
//! refused — emitting it would reintroduce exactly the instantiation problem
//! the rewrite removes — unless patterns are disabled wholesale.
//!
//! Note on semantics: SMT-LIB `div`/`mod` are Euclidean while this crate
//! evaluates truncated.  Every division the rewriter itself emits has a
//! nonnegative dividend and positive divisor, where the two agree.

use std::fmt::Write;

use crate::dsl::{QuantifiedFormula, SourceFile, Span};
use crate::expr::{BinOp, CmpOp, Expr};

/// Why a file could not be emitted with patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtError {
    pub message: String,
    pub span: Span,
}

impl std::fmt::Display for SmtError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// True when `index` can serve as a pattern argument: the bare quantified
/// variable, or an `acc1d` application led by it whose remaining arguments
/// are free of quantified variables.
pub fn pure_index(index: &Expr, vars: &[String]) -> bool {
    match index {
        Expr::Var(v) => vars.iter().any(|w| w == v),
        Expr::Acc1d(args) => {
            matches!(&args[0], Expr::Var(v) if vars.iter().any(|w| w == v))
                && args[1..].iter().all(|a| !a.mentions_any_var(vars))
        }
        _ => false,
    }
}

/// The access this quantifier's pattern is built from: the first marked
/// trigger-pure access, else the first trigger-pure access in reading order.
pub fn pattern_site<'a>(f: &'a QuantifiedFormula) -> Option<&'a Expr> {
    let mut marked = None;
    let mut first = None;
    f.body.for_each_access(&mut |acc| {
        if let Expr::Access { index, trigger, .. } = acc {
            if index.mentions_any_var(&f.vars) && pure_index(index, &f.vars) {
                if *trigger && marked.is_none() {
                    marked = Some(acc);
                }
                if first.is_none() {
                    first = Some(acc);
                }
            }
        }
    });
    marked.or(first)
}

fn sexpr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) => {
            write!(out, "{v}").unwrap();
        }
        Expr::Bool(v) => {
            write!(out, "{v}").unwrap();
        }
        Expr::Param(n) | Expr::Var(n) => out.push_str(n),
        Expr::Access { array, index, .. } => {
            out.push('(');
            out.push_str(array);
            out.push(' ');
            sexpr(index, out);
            out.push(')');
        }
        Expr::Neg(a) => {
            if let Expr::Int(v) = &**a {
                // Negative literal.
                write!(out, "(- {v})").unwrap();
                return;
            }
            out.push_str("(- ");
            sexpr(a, out);
            out.push(')');
        }
        Expr::Abs(a) => {
            out.push_str("(abs ");
            sexpr(a, out);
            out.push(')');
        }
        Expr::Bin(op, l, r) => {
            let name = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "div",
                BinOp::Mod => "mod",
            };
            binary(name, l, r, out);
        }
        Expr::Cmp(op, l, r) => {
            let name = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
            };
            binary(name, l, r, out);
        }
        Expr::And(l, r) => binary("and", l, r, out),
        Expr::Or(l, r) => binary("or", l, r, out),
        Expr::Implies(l, r) => binary("=>", l, r, out),
        Expr::Not(a) => {
            out.push_str("(not ");
            sexpr(a, out);
            out.push(')');
        }
        Expr::Acc1d(args) => {
            out.push_str("(acc1d");
            for a in &**args {
                out.push(' ');
                sexpr(a, out);
            }
            out.push(')');
        }
    }
}

fn binary(name: &str, l: &Expr, r: &Expr, out: &mut String) {
    out.push('(');
    out.push_str(name);
    out.push(' ');
    sexpr(l, out);
    out.push(' ');
    sexpr(r, out);
    out.push(')');
}

fn to_sexpr(e: &Expr) -> String {
    let mut s = String::new();
    sexpr(e, &mut s);
    s
}

fn uses_acc1d(f: &SourceFile) -> bool {
    fn scan(e: &Expr) -> bool {
        matches!(e, Expr::Acc1d(_)) || e.children().iter().any(|c| scan(c))
    }
    f.quantifiers()
        .iter()
        .any(|q| scan(&q.domain) || scan(&q.body))
}

/// Renders the whole file as an SMT-LIB 2 script.  With `with_patterns`,
/// every quantifier must have a trigger-pure access to annotate.
pub fn emit_smt(file: &SourceFile, with_patterns: bool) -> Result<String, SmtError> {
    let tab = file.symbol_table();
    let mut out = String::new();
    out.push_str("(set-logic ALL)\n");
    for p in tab.params() {
        writeln!(out, "(declare-const {} Int)", p.name).unwrap();
        for fact in &p.facts {
            writeln!(out, "(assert {})", to_sexpr(fact)).unwrap();
        }
    }
    for a in tab.arrays() {
        writeln!(out, "(declare-fun {} (Int) Int)", a.name).unwrap();
    }
    if uses_acc1d(file) {
        out.push_str("(declare-fun acc1d (Int Int Int Int) Int)\n");
        out.push_str(
            "(assert (forall ((x Int) (b Int) (n Int) (a Int)) \
             (! (= (acc1d x b n a) (+ (* x a) b)) :pattern ((acc1d x b n a)))))\n",
        );
    }
    for q in file.quantifiers() {
        let binders = q
            .vars
            .iter()
            .map(|v| format!("({v} Int)"))
            .collect::<Vec<_>>()
            .join(" ");
        let formula = format!("(=> {} {})", to_sexpr(&q.domain), to_sexpr(&q.body));
        if with_patterns {
            let Some(site) = pattern_site(q) else {
                return Err(SmtError {
                    message: "no trigger-pure array access to build a pattern from; \
                              rewrite first or pass --no-pattern"
                        .to_string(),
                    span: q.span,
                });
            };
            writeln!(
                out,
                "(assert (forall ({binders}) (! {formula} :pattern ({}))))",
                to_sexpr(site)
            )
            .unwrap();
        } else {
            writeln!(out, "(assert (forall ({binders}) {formula}))").unwrap();
        }
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

/// Checks the emitted-pattern invariant for one quantifier: every operator
/// on a path from the pattern's root to a quantified variable is an array
/// access, the variable itself, or an `acc1d` application.
pub fn pattern_is_pure(f: &QuantifiedFormula) -> bool {
    fn ok(e: &Expr, vars: &[String]) -> bool {
        if !e.mentions_any_var(vars) {
            return true; // ground subterm
        }
        match e {
            Expr::Var(_) => true,
            Expr::Access { index, .. } => ok(index, vars),
            Expr::Acc1d(args) => args.iter().all(|a| ok(a, vars)),
            _ => false,
        }
    }
    pattern_site(f).is_some_and(|site| ok(site, &f.vars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn rewritten_file_gets_a_pattern() {
        let src = "param int n where n > 0;\n\
                   array int A;\narray int B;\n\
                   forall int x; 0 <= x && x < 20; A[x] == B[x];\n";
        let out = emit_smt(&parse(src).unwrap(), true).unwrap();
        assert!(out.contains("(declare-const n Int)"), "{out}");
        assert!(out.contains("(assert (< 0 n))"), "{out}");
        assert!(out.contains("(declare-fun A (Int) Int)"), "{out}");
        assert!(out.contains(":pattern ((A x))"), "{out}");
        assert!(out.ends_with("(check-sat)\n"));
        let opens = out.matches('(').count();
        let closes = out.matches(')').count();
        assert_eq!(opens, closes, "unbalanced script:\n{out}");
    }

    #[test]
    fn arithmetic_triggers_are_refused_unless_disabled() {
        let src = "param int n;\narray int A;\n\
                   forall int i; 0 <= i && i < n; A[2 * i] == 0;\n";
        let file = parse(src).unwrap();
        let err = emit_smt(&file, true).unwrap_err();
        assert!(err.message.contains("no trigger-pure"), "{}", err.message);
        let out = emit_smt(&file, false).unwrap();
        assert!(!out.contains(":pattern"));
        assert!(out.contains("(assert (forall ((i Int))"));
    }

    #[test]
    fn wrapped_accesses_are_pattern_worthy() {
        let src = "param int n where n > 0;\nparam int b;\narray int A;\n\
                   define acc1d(x, b, n, a) = x * a + b;\n\
                   forall int i; 0 <= i && i < n; A[acc1d(i, b, n, 2)] == 0;\n";
        let file = parse(src).unwrap();
        let out = emit_smt(&file, true).unwrap();
        assert!(out.contains("(declare-fun acc1d (Int Int Int Int) Int)"), "{out}");
        assert!(
            out.contains(":pattern ((A (acc1d i b n 2)))"),
            "{out}"
        );
        assert!(file.quantifiers().iter().all(|q| pattern_is_pure(q)));
    }

    #[test]
    fn marked_sites_win_pattern_selection() {
        let src = "array int A;\narray int B;\n\
                   forall int x; 0 <= x && x < 4; A[x] == {: B[x] :};\n";
        let file = parse(src).unwrap();
        let out = emit_smt(&file, true).unwrap();
        assert!(out.contains(":pattern ((B x))"), "{out}");
    }

    #[test]
    fn bodies_without_accesses_are_refused() {
        let src = "forall int i; 0 <= i && i < 4; i + 1 <= 5;\n";
        let file = parse(src).unwrap();
        assert!(emit_smt(&file, true).is_err());
        assert!(emit_smt(&file, false).is_ok());
    }
}
