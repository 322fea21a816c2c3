//! Surface language: lexer, parser, syntax tree, and printer.
//!
//! A source file is a sequence of `;`-terminated items: `param` and
//! `array` declarations, `forall` formulas, the `acc1d` definition
//! stanza, and `typecheck { ... }` sections holding a C-like fragment
//! checked by the alias-qualifier analysis.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::{
    BaseTypeSyntax, Diagnostic, InstanceMarkers, Item, MiniExpr, MiniProgram, MiniStmt,
    QualSyntax, QuantifiedFormula, Severity, SourceFile, Span, TypeSyntax,
};
pub use parser::{parse, parse_expr_with};
pub use printer::{print_expr, print_file, print_quantifier};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{CmpOp, Expr};

    fn roundtrip(src: &str) {
        let file = parse(src).expect("first parse");
        let printed = print_file(&file);
        let reparsed = parse(&printed).expect("reparse of printed output");
        assert_eq!(file, reparsed, "print/parse round-trip changed the tree:\n{printed}");
    }

    #[test]
    fn parses_a_full_annotation_file() {
        let src = "\
param int n where n > 0 && n % gsize == 0;
param int gsize where gsize > 0;
param int gtid where 0 <= gtid && gtid < gsize;
array int A;
array int B;
forall int i; 0 <= i && i < n / gsize; A[i * gsize + gtid] == B[i * gsize + gtid];
";
        // `gsize` is referenced in the first where clause before its own
        // declaration; declarations are file-ordered, so that is an error.
        let err = parse(src).unwrap_err();
        assert_eq!(err.code, "undeclared-name");

        let src = "\
param int gsize where gsize > 0;
param int n where n > 0 && n % gsize == 0;
param int gtid where 0 <= gtid && gtid < gsize;
array int A;
array int B;
forall int i; 0 <= i && i < n / gsize; A[i * gsize + gtid] == B[i * gsize + gtid];
";
        let file = parse(src).expect("parse");
        let tab = file.symbol_table();
        assert_eq!(tab.params().len(), 3);
        assert_eq!(tab.arrays().len(), 2);
        let qs = file.quantifiers();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].vars, vec!["i".to_string()]);
        roundtrip(src);
    }

    #[test]
    fn greater_than_is_stored_flipped() {
        let e = parse_expr_with("n > 0", &["n"], &[], &[]).unwrap();
        assert_eq!(e, Expr::lt(Expr::int(0), Expr::param("n")));
        let e = parse_expr_with("n >= m", &["n", "m"], &[], &[]).unwrap();
        assert_eq!(e, Expr::le(Expr::param("m"), Expr::param("n")));
        assert_eq!(print_expr(&e), "m <= n");
    }

    #[test]
    fn precedence_matches_c() {
        let e = parse_expr_with("a + b * c % d == 0", &["a", "b", "c", "d"], &[], &[]).unwrap();
        // a + ((b * c) % d) == 0
        let expected = Expr::eq(
            Expr::add(
                Expr::param("a"),
                Expr::rem(Expr::mul(Expr::param("b"), Expr::param("c")), Expr::param("d")),
            ),
            Expr::int(0),
        );
        assert_eq!(e, expected);

        let e = parse_expr_with(
            "a < b && c < d || e < f ==> a < f",
            &["a", "b", "c", "d", "e", "f"],
            &[],
            &[],
        )
        .unwrap();
        match e {
            Expr::Implies(lhs, _) => match *lhs {
                Expr::Or(l, _) => assert!(matches!(*l, Expr::And(..))),
                other => panic!("expected || under ==>, got {other:?}"),
            },
            other => panic!("expected ==> at top, got {other:?}"),
        }
    }

    #[test]
    fn implies_is_right_associative() {
        let e = parse_expr_with("a < b ==> b < c ==> a < c", &["a", "b", "c"], &[], &[]).unwrap();
        match e {
            Expr::Implies(_, rhs) => assert!(matches!(*rhs, Expr::Implies(..))),
            other => panic!("expected nested ==> on the right, got {other:?}"),
        }
    }

    #[test]
    fn printer_parenthesizes_only_when_needed() {
        let cases = [
            "a * (b / c)",
            "a - (b - c)",
            "a - b - c",
            "(a + b) * c",
            "-(a + b)",
            "a % b % c",
            "(a < b || b < c) && c < d",
            "!(a < b)",
        ];
        for src in cases {
            let e = parse_expr_with(src, &["a", "b", "c", "d"], &[], &[]).unwrap();
            assert_eq!(print_expr(&e), src, "canonical form should match input");
            let back = parse_expr_with(&print_expr(&e), &["a", "b", "c", "d"], &[], &[]).unwrap();
            assert_eq!(e, back);
        }
    }

    #[test]
    fn trigger_markers_set_the_flag() {
        let src = "\
array int A;
forall int i; 0 <= i; {: A[i * 2] :} == 0;
";
        let file = parse(src).unwrap();
        let q = file.quantifiers()[0].clone();
        match &q.body {
            Expr::Cmp(CmpOp::Eq, l, _) => match l.as_ref() {
                Expr::Access { trigger, .. } => assert!(*trigger),
                other => panic!("expected access, got {other:?}"),
            },
            other => panic!("expected ==, got {other:?}"),
        }
        roundtrip(src);
    }

    #[test]
    fn define_stanza_and_acc1d_calls() {
        let src = "\
param int n where n > 0;
array int A;
define acc1d(x, b, n, a) = x * a + b;
forall int i; 0 <= i && i < n; A[acc1d(i, 3, n, 2)] == 0;
";
        let file = parse(src).unwrap();
        assert!(matches!(file.items[2], Item::Acc1dDef(_)));
        roundtrip(src);

        let bad = "define acc1d(x, b, n, a) = x * a + n;";
        let err = parse(bad).unwrap_err();
        assert_eq!(err.code, "bad-define");
    }

    #[test]
    fn rejects_unknown_names_and_arrays_as_scalars() {
        let err = parse("forall int i; 0 <= i; i == m;").unwrap_err();
        assert_eq!(err.code, "undeclared-name");

        let err = parse("array int A;\nforall int i; 0 <= i; A == 0;").unwrap_err();
        assert_eq!(err.code, "undeclared-name");

        let err = parse("param int n;\nforall int i; 0 <= i; n[i] == 0;").unwrap_err();
        assert_eq!(err.code, "undeclared-name");
    }

    #[test]
    fn rejects_sort_confusion() {
        let err = parse("param int n;\nforall int i; i; i == 0;").unwrap_err();
        assert_eq!(err.code, "sort-error");

        let err = parse("param int n where n + (n < 3);").unwrap_err();
        assert_eq!(err.code, "sort-error");

        let err = parse("forall int i; 0 <= i < 3; i == 0;").unwrap_err();
        assert_eq!(err.code, "chained-comparison");
    }

    #[test]
    fn diagnostics_carry_line_and_column() {
        let src = "param int n;\nforall int i; 0 <= i; bogus == 0;";
        let err = parse(src).unwrap_err();
        let (line, col) = err.span.unwrap().line_col(src);
        assert_eq!(line, 2);
        assert_eq!(col, 23);
        assert!(err.render(src).starts_with("2:23: error[undeclared-name]"));
    }

    #[test]
    fn parses_typecheck_sections() {
        let src = "\
typecheck {
    struct S {
        int tag;
        unique<3> int* data;
    };
    unique_field struct S s1;
    unique<1> int* p;
    unique<2> int* q;
    immutable int* r;
    int x;
    int y = 5;
    p = q;
    *p = 7;
    s1.tag = 0;
    void sort(int* a, int n);
    sort(p, x);
    p = &x;
}
";
        let file = parse(src).unwrap();
        let progs = file.typecheck_sections();
        assert_eq!(progs.len(), 1);
        assert_eq!(progs[0].stmts.len(), 13);
        roundtrip(src);
    }

    #[test]
    fn qualifier_positions_are_kept() {
        use super::ast::{BaseTypeSyntax, MiniStmt, QualSyntax};
        let src = "typecheck { unique<1> int* immutable p; }";
        let file = parse(src).unwrap();
        let prog = file.typecheck_sections()[0].clone();
        match &prog.stmts[0] {
            MiniStmt::VarDecl { ty, name, .. } => {
                assert_eq!(name, "p");
                assert_eq!(ty.base, BaseTypeSyntax::Int);
                assert_eq!(ty.base_quals, vec![QualSyntax::Unique(1)]);
                assert_eq!(ty.stars, vec![vec![QualSyntax::Immutable]]);
            }
            other => panic!("expected a variable declaration, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let err = parse("param int n;\nparam int n;").unwrap_err();
        assert_eq!(err.code, "duplicate-declaration");
        let err = parse("param int n;\narray int n;").unwrap_err();
        assert_eq!(err.code, "duplicate-declaration");
        let err = parse("param int n;\nforall int n; 0 <= n; n == 0;").unwrap_err();
        assert_eq!(err.code, "duplicate-declaration");
        let err = parse("forall int i, int i; 0 <= i; i == 0;").unwrap_err();
        assert_eq!(err.code, "duplicate-declaration");
    }
}
