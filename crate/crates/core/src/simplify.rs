//! Fact-aware simplification of rewritten formulas.
//!
//! The rewriter produces domains full of `div`/`mod`/`abs` scaffolding that
//! is often redundant under the quantifier's side facts.  This module applies
//! a small, sound rule set to a fixpoint and records which rules fired.  All
//! guards are discharged by [`FactSet::entails_nonneg`], so a rule only fires
//! when the surrounding facts actually justify it.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::entails::FactSet;
use crate::expr::{BinOp, CmpOp, Expr};
use crate::normal::normalize;

/// Simplifies `e` under `facts`.
pub fn simplify(e: &Expr, facts: &FactSet) -> Expr {
    simplify_traced(e, facts).0
}

/// Simplifies `e` under `facts`, also returning the names of the rules that
/// fired, in first-use order.
pub fn simplify_traced(e: &Expr, facts: &FactSet) -> (Expr, Vec<&'static str>) {
    let mut s = Simplifier {
        facts,
        used: Vec::new(),
    };
    let mut cur = e.clone();
    // A single bottom-up pass closes every chain we build, but rules can in
    // principle re-enable each other across levels; iterate defensively.
    for _ in 0..8 {
        let next = s.walk(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    (cur, s.used)
}

struct Simplifier<'a> {
    facts: &'a FactSet,
    used: Vec<&'static str>,
}

impl Simplifier<'_> {
    fn note(&mut self, rule: &'static str) {
        if !self.used.contains(&rule) {
            self.used.push(rule);
        }
    }

    /// Simplifies children first, then applies node-level rules to a fixpoint.
    fn walk(&mut self, e: &Expr) -> Expr {
        let mut cur = self.rebuild(e);
        while let Some((next, rule)) = self.step(&cur) {
            if next == cur {
                break;
            }
            self.note(rule);
            cur = next;
        }
        cur
    }

    fn walk_box(&mut self, e: &Expr) -> Box<Expr> {
        Box::new(self.walk(e))
    }

    fn rebuild(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Int(_) | Expr::Bool(_) | Expr::Param(_) | Expr::Var(_) => e.clone(),
            Expr::Access {
                array,
                index,
                trigger,
            } => Expr::Access {
                array: array.clone(),
                index: self.walk_box(index),
                trigger: *trigger,
            },
            Expr::Neg(a) => Expr::Neg(self.walk_box(a)),
            Expr::Abs(a) => Expr::Abs(self.walk_box(a)),
            Expr::Bin(op, l, r) => Expr::Bin(*op, self.walk_box(l), self.walk_box(r)),
            Expr::Cmp(op, l, r) => Expr::Cmp(*op, self.walk_box(l), self.walk_box(r)),
            Expr::And(l, r) => Expr::And(self.walk_box(l), self.walk_box(r)),
            Expr::Or(l, r) => Expr::Or(self.walk_box(l), self.walk_box(r)),
            Expr::Implies(l, r) => Expr::Implies(self.walk_box(l), self.walk_box(r)),
            Expr::Not(a) => Expr::Not(self.walk_box(a)),
            Expr::Acc1d(args) => {
                let [x, b, n, a] = &**args;
                Expr::acc1d(self.walk(x), self.walk(b), self.walk(n), self.walk(a))
            }
        }
    }

    /// One rule application at this node, if any rule fires.
    fn step(&self, e: &Expr) -> Option<(Expr, &'static str)> {
        match e {
            Expr::Bin(op, l, r) => self.step_bin(*op, l, r),
            Expr::Cmp(op, l, r) => self.step_cmp(*op, l, r),
            Expr::Neg(_) => {
                let v = constant(e)?;
                Some((Expr::big(v), "const-fold"))
            }
            Expr::Abs(inner) => {
                if let Some(v) = constant(inner) {
                    return Some((Expr::big(v.abs()), "const-fold"));
                }
                if self.nonneg(inner, false) {
                    return Some(((**inner).clone(), "abs-nonneg"));
                }
                None
            }
            Expr::And(l, r) => {
                if **l == Expr::Bool(true) {
                    Some(((**r).clone(), "true-absorb"))
                } else if **r == Expr::Bool(true) {
                    Some(((**l).clone(), "true-absorb"))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn step_bin(&self, op: BinOp, l: &Expr, r: &Expr) -> Option<(Expr, &'static str)> {
        match op {
            BinOp::Mod if constant(r).is_some_and(|c| c.is_one()) => {
                return Some((Expr::int(0), "mod-one"));
            }
            BinOp::Div if constant(r).is_some_and(|c| c.is_one()) => {
                return Some((l.clone(), "div-one"));
            }
            _ => {}
        }
        if let (Some(a), Some(b)) = (constant(l), constant(r)) {
            let folded = match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div if !b.is_zero() => Some(a / b),
                BinOp::Mod if !b.is_zero() => Some(a % b),
                _ => None,
            };
            if let Some(v) = folded {
                return Some((Expr::big(v), "const-fold"));
            }
        }
        let zero = |e: &Expr| constant(e).is_some_and(|c| c.is_zero());
        let one = |e: &Expr| constant(e).is_some_and(|c| c.is_one());
        match op {
            BinOp::Add if zero(r) => return Some((l.clone(), "const-fold")),
            BinOp::Add if zero(l) => return Some((r.clone(), "const-fold")),
            BinOp::Sub if zero(r) => return Some((l.clone(), "const-fold")),
            BinOp::Mul if one(r) => return Some((l.clone(), "const-fold")),
            BinOp::Mul if one(l) => return Some((r.clone(), "const-fold")),
            _ => {}
        }
        if op == BinOp::Add {
            if let Some(e) = self
                .try_recombine(l, r)
                .or_else(|| self.try_recombine(r, l))
            {
                return Some((e, "recombine"));
            }
        }
        None
    }

    /// `c * (E div c) + (E mod c)  →  E` for a positive constant `c` when the
    /// facts give `E >= 0`.  `scaled` is the multiplication half, `modded`
    /// the remainder half.
    fn try_recombine(&self, scaled: &Expr, modded: &Expr) -> Option<Expr> {
        let Expr::Bin(BinOp::Mod, e2, c2) = modded else {
            return None;
        };
        let Expr::Bin(BinOp::Mul, p, q) = scaled else {
            return None;
        };
        let (c1, quot) = match (constant(p), constant(q)) {
            (Some(c), None) => (c, q),
            (None, Some(c)) => (c, p),
            _ => return None,
        };
        let Expr::Bin(BinOp::Div, e1, c3) = &**quot else {
            return None;
        };
        if !c1.is_positive() {
            return None;
        }
        if constant(c2).as_ref() != Some(&c1) || constant(c3).as_ref() != Some(&c1) {
            return None;
        }
        if normalize(e1) != normalize(e2) {
            return None;
        }
        if !self.nonneg(e1, false) {
            return None;
        }
        Some((**e1).clone())
    }

    fn step_cmp(&self, op: CmpOp, l: &Expr, r: &Expr) -> Option<(Expr, &'static str)> {
        if let (Some(a), Some(b)) = (constant(l), constant(r)) {
            let v = match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
            };
            return Some((Expr::Bool(v), "const-fold"));
        }
        match (op, l, r) {
            // `E mod c < d` holds outright once `0 <= E`, `0 < c`, `c <= d`.
            (CmpOp::Lt, Expr::Bin(BinOp::Mod, e, c), d)
                if self.nonneg(c, true)
                    && self.nonneg(e, false)
                    && self.le_holds(c, d) =>
            {
                Some((Expr::Bool(true), "mod-upper"))
            }
            // `E div c < d` holds once `0 <= E`, `0 < c`, `E < c * d`.
            (CmpOp::Lt, Expr::Bin(BinOp::Div, e, c), d)
                if self.nonneg(c, true) && self.nonneg(e, false) && {
                    let gap = normalize(c).mul(&normalize(d)).sub(&normalize(e));
                    self.facts.entails_nonneg(&gap, true)
                } =>
            {
                Some((Expr::Bool(true), "div-upper"))
            }
            // `0 <= E mod c` holds once `0 <= E`, `0 < c`.
            (CmpOp::Le, lhs, Expr::Bin(BinOp::Mod, e, c))
                if constant(lhs).is_some_and(|v| v.is_zero())
                    && self.nonneg(c, true)
                    && self.nonneg(e, false) =>
            {
                Some((Expr::Bool(true), "mod-lower"))
            }
            _ => None,
        }
    }

    fn nonneg(&self, e: &Expr, strict: bool) -> bool {
        self.facts.entails_nonneg(&normalize(e), strict)
    }

    fn le_holds(&self, l: &Expr, r: &Expr) -> bool {
        self.facts
            .entails_nonneg(&normalize(r).sub(&normalize(l)), false)
    }
}

/// Constant value of a literal, looking through unary minus.
fn constant(e: &Expr) -> Option<BigInt> {
    match e {
        Expr::Int(v) => Some(v.clone()),
        Expr::Neg(inner) => constant(inner).map(|v| -v),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expr_with, print_expr};
    use crate::expr::evaluate;
    use crate::symtab::Binding;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn expr(src: &str) -> Expr {
        parse_expr_with(src, &["n", "gtid", "gsize"], &["A"], &["x"]).unwrap()
    }

    fn facts(srcs: &[&str]) -> FactSet {
        let mut fs = FactSet::new();
        for s in srcs {
            fs.assume(&expr(s));
        }
        fs
    }

    fn run(src: &str, fact_srcs: &[&str]) -> (String, Vec<&'static str>) {
        let (out, used) = simplify_traced(&expr(src), &facts(fact_srcs));
        (print_expr(&out), used)
    }

    #[test]
    fn folds_mod_and_div_by_one() {
        let (out, used) = run("x % 1 == 0", &[]);
        assert_eq!(out, "true");
        assert_eq!(used, vec!["mod-one", "const-fold"]);
        assert_eq!(run("x / 1", &[]).0, "x");
    }

    #[test]
    fn folds_constants_and_identities() {
        assert_eq!(run("x + 0", &[]).0, "x");
        assert_eq!(run("x - 0", &[]).0, "x");
        assert_eq!(run("1 * x", &[]).0, "x");
        assert_eq!(run("(2 + 3) * 4", &[]).0, "20");
        assert_eq!(run("7 / 2", &[]).0, "3");
        assert_eq!(run("3 < 5", &[]).0, "true");
        assert_eq!(run("x + (4 - 4)", &[]).0, "x");
    }

    #[test]
    fn recombines_division_and_remainder() {
        let (out, used) = run("4 * (abs(x) % 10 / 4) + abs(x) % 10 % 4 < 10", &[]);
        assert_eq!(out, "true");
        assert!(used.contains(&"recombine"), "{used:?}");
        assert!(used.contains(&"mod-upper"), "{used:?}");
    }

    #[test]
    fn recombine_requires_matching_constants() {
        let (out, _) = run("4 * (abs(x) % 10 / 5) + abs(x) % 10 % 4", &[]);
        assert!(out.contains('/'), "must not fire: {out}");
    }

    #[test]
    fn mod_upper_needs_all_guards() {
        // Bound too small.
        assert_eq!(run("x % 5 < 3", &["0 <= x"]).0, "x % 5 < 3");
        // Left operand not provably nonnegative.
        assert_eq!(run("x % 5 < 7", &[]).0, "x % 5 < 7");
        // All guards in place.
        assert_eq!(run("x % 5 < 7", &["0 <= x"]).0, "true");
        assert_eq!(run("abs(x) % 5 < 5", &[]).0, "true");
    }

    #[test]
    fn div_upper_uses_remainder_interval() {
        let (out, used) = run("abs(x) % 10 / 4 < 3", &[]);
        assert_eq!(out, "true");
        assert_eq!(used, vec!["div-upper"]);
        // 10 / 4 can reach 2, so a bound of 2 must survive.
        assert_eq!(run("abs(x) % 10 / 4 < 2", &[]).0, "abs(x) % 10 / 4 < 2");
    }

    #[test]
    fn mod_lower_folds_to_true() {
        let (out, used) = run("0 <= x % 4", &["0 <= x"]);
        assert_eq!(out, "true");
        assert_eq!(used, vec!["mod-lower"]);
        assert_eq!(run("0 <= x % 4", &[]).0, "0 <= x % 4");
    }

    #[test]
    fn abs_drops_only_with_facts() {
        assert_eq!(run("abs(x - gtid)", &["gtid <= x"]).0, "x - gtid");
        assert_eq!(run("abs(x - gtid)", &[]).0, "abs(x - gtid)");
        assert_eq!(run("abs(0 - 5)", &[]).0, "5");
    }

    #[test]
    fn true_conjuncts_are_absorbed() {
        let (out, _) = run("x % 1 == 0 && 0 <= x % 5 && x < 4", &["0 <= x"]);
        assert_eq!(out, "x < 4");
        let (out, _) = run("x % 1 == 0 && 0 <= abs(x)", &["0 <= x"]);
        assert_eq!(out, "0 <= x");
    }

    /// The flattened-layout cleanup from a three-level rewrite, end to end.
    #[test]
    fn collapses_layout_scaffolding() {
        let src = "4 * (abs(x) % 10 / 4) + abs(x) % 10 % 4 < 10 \
                   && abs(x) % 10 % 4 / 1 < 4 \
                   && abs(x) % 10 / 4 < 3 \
                   && abs(x) % 10 % 4 % 1 == 0 \
                   && 0 <= x - 0 && x - 0 < 20";
        let (out, used) = run(src, &[]);
        assert_eq!(out, "0 <= x && x < 20");
        for rule in ["recombine", "mod-upper", "div-upper", "mod-one", "div-one", "const-fold", "true-absorb"] {
            assert!(used.contains(&rule), "missing {rule} in {used:?}");
        }
    }

    /// Random expressions evaluate identically before and after
    /// simplification at every point satisfying the assumed facts.
    #[test]
    fn simplification_preserves_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51f7);
        let fs = facts(&["0 <= x"]);
        let bdg = Binding::new()
            .with_param("n", 7)
            .with_param("gtid", 2)
            .with_param("gsize", 3);

        fn gen_int(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
            if depth == 0 || rng.gen_bool(0.3) {
                return match rng.gen_range(0..3) {
                    0 => Expr::var("x"),
                    1 => Expr::int(rng.gen_range(-3..=3)),
                    _ => Expr::param("n"),
                };
            }
            let a = gen_int(rng, depth - 1);
            let b = gen_int(rng, depth - 1);
            match rng.gen_range(0..7) {
                0 => Expr::add(a, b),
                1 => Expr::sub(a, b),
                2 => Expr::mul(a, b),
                3 => Expr::div(a, Expr::int(rng.gen_range(1..=5))),
                4 => Expr::rem(a, Expr::int(rng.gen_range(1..=5))),
                5 => Expr::abs(a),
                _ => Expr::neg(a),
            }
        }

        for _ in 0..300 {
            let l = gen_int(&mut rng, 3);
            let r = gen_int(&mut rng, 3);
            let e = match rng.gen_range(0..5) {
                0 => Expr::lt(l, r),
                1 => Expr::le(l, r),
                2 => Expr::eq(l, r),
                3 => Expr::and(Expr::lt(l.clone(), r.clone()), Expr::le(r, l)),
                _ => Expr::add(l, r),
            };
            let simplified = simplify(&e, &fs);
            for xv in 0..=10i64 {
                let mut env = std::collections::BTreeMap::new();
                env.insert("x".to_string(), BigInt::from(xv));
                let orig = evaluate(&e, &bdg, &env).unwrap();
                let news = evaluate(&simplified, &bdg, &env).unwrap();
                assert_eq!(
                    orig,
                    news,
                    "x={xv}: `{}` became `{}`",
                    print_expr(&e),
                    print_expr(&simplified)
                );
            }
        }
    }
}
