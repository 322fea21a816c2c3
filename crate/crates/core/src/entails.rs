//! Conservative entailment of integer facts.
//!
//! A [`FactSet`] holds assumptions as linear constraints over
//! monomials-as-atoms: each affine fact states that a normal form is
//! nonnegative (or strictly positive), and disequalities are kept
//! separately.  Queries are answered `Proven`, `Refuted`, or `Unknown`;
//! the engine is deliberately incomplete but never unsoundly `Proven`.
//!
//! Proof search combines three mechanisms:
//!
//! * constant decision after normalization;
//! * interval bounds computed per monomial, with derived bounds for
//!   `abs` (nonnegative), `mod` (in `[0, c)` when `c > 0` and the left
//!   operand is nonnegative), division positivity (`a ≥ b > 0` gives
//!   `a/b ≥ 1`), and sign propagation through products;
//! * bounded-depth subtraction chains: to show `g ≥ 0`, pick a fact
//!   `f ≥ 0`, a positive integer multiplier, and recurse on `g − λ·f`.
//!
//! Everything is valid over any ordered ring: the engine never rounds a
//! strict bound to the next integer (`x < n` is not strengthened to
//! `x ≤ n − 1`), so strictness flags are carried through every step.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::expr::{CmpOp, Expr};
use crate::normal::{normalize, Atom, NormalForm};
use crate::symtab::{SymbolTable, Verdict};

/// Search depth for subtraction chains and derived-bound premises.
const MAX_DEPTH: usize = 4;

/// A set of assumed boolean facts in normalized affine form.
#[derive(Debug, Clone, Default)]
pub struct FactSet {
    /// `(nf, strict)`: `nf ≥ 0`, or `nf > 0` when strict.
    affine: Vec<(NormalForm, bool)>,
    /// `nf ≠ 0`.
    nonzero: Vec<NormalForm>,
}

impl FactSet {
    pub fn new() -> FactSet {
        FactSet::default()
    }

    /// Start from every parameter `where` fact in the table.
    pub fn from_symtab(tab: &SymbolTable) -> FactSet {
        let mut fs = FactSet::new();
        for fact in tab.facts() {
            fs.assume(&fact);
        }
        fs
    }

    /// Record `nf ≥ 0` (strict: `nf > 0`) directly.
    pub fn push_nonneg(&mut self, nf: NormalForm, strict: bool) {
        if let Some(c) = nf.as_constant() {
            // Constant facts carry no information worth chaining on; a
            // false one would make the set inconsistent, which we do not
            // exploit.
            let _ = c;
            return;
        }
        for entry in &mut self.affine {
            if entry.0 == nf {
                entry.1 |= strict;
                return;
            }
        }
        self.affine.push((nf, strict));
    }

    /// Record `nf ≠ 0`.
    pub fn push_nonzero(&mut self, nf: NormalForm) {
        if nf.as_constant().is_some() {
            return;
        }
        if !self.nonzero.contains(&nf) && !self.nonzero.contains(&nf.neg()) {
            self.nonzero.push(nf);
        }
    }

    /// Assume a boolean expression, decomposing conjunctions and
    /// comparisons.  Shapes that cannot be used (disjunctions,
    /// implications) are ignored, which only weakens the set.
    pub fn assume(&mut self, e: &Expr) {
        match e {
            Expr::And(l, r) => {
                self.assume(l);
                self.assume(r);
            }
            Expr::Bool(_) => {}
            Expr::Not(inner) => {
                if let Expr::Cmp(op, l, r) = inner.as_ref() {
                    self.assume(&negate_cmp(*op, l, r));
                }
            }
            Expr::Cmp(op, l, r) => {
                let ln = normalize(l);
                let rn = normalize(r);
                match op {
                    CmpOp::Lt => self.push_nonneg(rn.sub(&ln), true),
                    CmpOp::Le => self.push_nonneg(rn.sub(&ln), false),
                    CmpOp::Eq => {
                        self.push_nonneg(rn.sub(&ln), false);
                        self.push_nonneg(ln.sub(&rn), false);
                    }
                    CmpOp::Ne => self.push_nonzero(rn.sub(&ln)),
                }
            }
            _ => {}
        }
    }

    pub fn assume_all<'a>(&mut self, facts: impl IntoIterator<Item = &'a Expr>) {
        for f in facts {
            self.assume(f);
        }
    }

    /// Is `nf ≠ 0` recorded or derivable from a strict bound?
    pub fn is_nonzero(&self, nf: &NormalForm) -> bool {
        if let Some(c) = nf.as_constant() {
            return !c.is_zero();
        }
        if self.nonzero.contains(nf) || self.nonzero.contains(&nf.neg()) {
            return true;
        }
        let mut prover = Prover::new(self);
        prover.prove(nf, true, MAX_DEPTH) || prover.prove(&nf.neg(), true, MAX_DEPTH)
    }

    /// Prove `nf ≥ 0` (strict: `nf > 0`).
    pub fn entails_nonneg(&self, nf: &NormalForm, strict: bool) -> bool {
        Prover::new(self).prove(nf, strict, MAX_DEPTH)
    }

    /// Decide a boolean goal conservatively.
    pub fn entails(&self, goal: &Expr) -> Verdict {
        match goal {
            Expr::Bool(true) => Verdict::Proven,
            Expr::Bool(false) => Verdict::Refuted(None),
            Expr::And(l, r) => match (self.entails(l), self.entails(r)) {
                (Verdict::Refuted(d), _) | (_, Verdict::Refuted(d)) => Verdict::Refuted(d),
                (Verdict::Proven, Verdict::Proven) => Verdict::Proven,
                _ => Verdict::Unknown(None),
            },
            Expr::Or(l, r) => match (self.entails(l), self.entails(r)) {
                (Verdict::Proven, _) | (_, Verdict::Proven) => Verdict::Proven,
                (Verdict::Refuted(d), Verdict::Refuted(_)) => Verdict::Refuted(d),
                _ => Verdict::Unknown(None),
            },
            Expr::Implies(l, r) => {
                let mut extended = self.clone();
                extended.assume(l);
                match extended.entails(r) {
                    Verdict::Proven => Verdict::Proven,
                    // The premise may be unsatisfiable, so a refuted
                    // conclusion does not refute the implication.
                    _ => Verdict::Unknown(None),
                }
            }
            Expr::Not(inner) => match inner.as_ref() {
                Expr::Cmp(op, l, r) => self.entails(&negate_cmp(*op, l, r)),
                _ => match self.entails(inner) {
                    Verdict::Proven => Verdict::Refuted(None),
                    Verdict::Refuted(_) => Verdict::Proven,
                    Verdict::Unknown(d) => Verdict::Unknown(d),
                },
            },
            Expr::Cmp(op, l, r) => {
                let ln = normalize(l);
                let rn = normalize(r);
                let fwd = rn.sub(&ln); // r − l
                let bwd = ln.sub(&rn); // l − r
                let mut prover = Prover::new(self);
                match op {
                    CmpOp::Lt => {
                        if prover.prove(&fwd, true, MAX_DEPTH) {
                            Verdict::Proven
                        } else if prover.prove(&bwd, false, MAX_DEPTH) {
                            Verdict::Refuted(None)
                        } else {
                            Verdict::Unknown(None)
                        }
                    }
                    CmpOp::Le => {
                        if prover.prove(&fwd, false, MAX_DEPTH) {
                            Verdict::Proven
                        } else if prover.prove(&bwd, true, MAX_DEPTH) {
                            Verdict::Refuted(None)
                        } else {
                            Verdict::Unknown(None)
                        }
                    }
                    CmpOp::Eq => {
                        if fwd.is_zero()
                            || (prover.prove(&fwd, false, MAX_DEPTH)
                                && prover.prove(&bwd, false, MAX_DEPTH))
                        {
                            Verdict::Proven
                        } else if self.nonzero.contains(&fwd)
                            || self.nonzero.contains(&bwd)
                            || prover.prove(&fwd, true, MAX_DEPTH)
                            || prover.prove(&bwd, true, MAX_DEPTH)
                        {
                            Verdict::Refuted(None)
                        } else {
                            Verdict::Unknown(None)
                        }
                    }
                    CmpOp::Ne => {
                        if self.nonzero.contains(&fwd)
                            || self.nonzero.contains(&bwd)
                            || prover.prove(&fwd, true, MAX_DEPTH)
                            || prover.prove(&bwd, true, MAX_DEPTH)
                        {
                            Verdict::Proven
                        } else if fwd.is_zero()
                            || (prover.prove(&fwd, false, MAX_DEPTH)
                                && prover.prove(&bwd, false, MAX_DEPTH))
                        {
                            Verdict::Refuted(None)
                        } else {
                            Verdict::Unknown(None)
                        }
                    }
                }
            }
            _ => Verdict::Unknown(None),
        }
    }
}

fn negate_cmp(op: CmpOp, l: &Expr, r: &Expr) -> Expr {
    match op {
        CmpOp::Lt => Expr::le(r.clone(), l.clone()),
        CmpOp::Le => Expr::lt(r.clone(), l.clone()),
        CmpOp::Eq => Expr::ne(l.clone(), r.clone()),
        CmpOp::Ne => Expr::eq(l.clone(), r.clone()),
    }
}

/// One-sided bound on a normal form: `nf ≥ value` / `nf > value` for
/// lower bounds, `nf ≤ value` / `nf < value` for upper bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bound {
    value: BigInt,
    strict: bool,
}

impl Bound {
    fn at(value: BigInt, strict: bool) -> Bound {
        Bound { value, strict }
    }
}

fn better_lower(a: Option<Bound>, b: Option<Bound>) -> Option<Bound> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if (y.value > x.value) || (y.value == x.value && y.strict) {
            y
        } else {
            x
        }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn better_upper(a: Option<Bound>, b: Option<Bound>) -> Option<Bound> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if (y.value < x.value) || (y.value == x.value && y.strict) {
            y
        } else {
            x
        }),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Prover<'a> {
    facts: &'a FactSet,
    memo: HashMap<(NormalForm, bool, usize), bool>,
}

impl<'a> Prover<'a> {
    fn new(facts: &'a FactSet) -> Prover<'a> {
        Prover {
            facts,
            memo: HashMap::new(),
        }
    }

    /// Prove `nf ≥ 0` (strict: `nf > 0`).
    fn prove(&mut self, nf: &NormalForm, strict: bool, depth: usize) -> bool {
        if let Some(c) = nf.as_constant() {
            return if strict { c.is_positive() } else { !c.is_negative() };
        }
        let key = (nf.clone(), strict, depth);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        // Block re-entry along this path; refined below on success.
        self.memo.insert(key.clone(), false);
        let result = self.prove_uncached(nf, strict, depth);
        self.memo.insert(key, result);
        result
    }

    fn prove_uncached(&mut self, nf: &NormalForm, strict: bool, depth: usize) -> bool {
        if let Some(lb) = self.nf_lower(nf, depth) {
            let ok = if strict {
                lb.value.is_positive() || (lb.value.is_zero() && lb.strict)
            } else {
                !lb.value.is_negative()
            };
            if ok {
                return true;
            }
        }
        // A nonstrict bound plus a recorded disequality is strict.
        if strict
            && (self.facts.nonzero.contains(nf) || self.facts.nonzero.contains(&nf.neg()))
            && self.prove(&nf.clone(), false, depth)
        {
            return true;
        }
        if depth == 0 {
            return false;
        }
        // Subtraction chains: g ≥ 0 follows from g − λ·f ≥ 0 and f ≥ 0.
        for (fact, fact_strict) in &self.facts.affine {
            let mut lambdas: Vec<BigInt> = vec![BigInt::from(1)];
            for (bag, cg) in nf.terms() {
                if bag.is_empty() {
                    continue;
                }
                for (fbag, cf) in fact.terms() {
                    if fbag == bag && !cf.is_zero() && (cg.is_positive() == cf.is_positive()) {
                        let (q, r) = (cg / cf, cg % cf);
                        if r.is_zero() && q.is_positive() && q > BigInt::from(1) {
                            lambdas.push(q);
                        }
                    }
                }
            }
            lambdas.dedup();
            lambdas.truncate(4);
            for lambda in lambdas {
                let rest = nf.sub(&fact.scale(&lambda));
                let rest_strict = strict && !fact_strict;
                if self.prove(&rest, rest_strict, depth - 1) {
                    return true;
                }
            }
        }
        false
    }

    fn nf_lower(&mut self, nf: &NormalForm, depth: usize) -> Option<Bound> {
        let mut total = BigInt::zero();
        let mut strict = false;
        for (bag, coeff) in nf.terms() {
            let b = self.mono_lower(bag, coeff, depth)?;
            total += b.value;
            strict |= b.strict;
        }
        Some(Bound::at(total, strict))
    }

    /// Lower bound of `coeff · Π bag`.
    fn mono_lower(&mut self, bag: &[Atom], coeff: &BigInt, depth: usize) -> Option<Bound> {
        if bag.is_empty() {
            return Some(Bound::at(coeff.clone(), false));
        }
        if bag.len() == 1 {
            let b = if coeff.is_positive() {
                self.atom_lower(&bag[0], depth)?
            } else {
                self.atom_upper(&bag[0], depth)?
            };
            return Some(Bound::at(coeff * b.value, b.strict));
        }
        // Products: sign propagation only.
        let sign = self.product_sign(bag, depth)?;
        match (coeff.is_positive(), sign) {
            (true, ProductSign::Positive) => Some(Bound::at(BigInt::zero(), true)),
            (true, ProductSign::NonNegative) => Some(Bound::at(BigInt::zero(), false)),
            _ => None,
        }
    }

    fn product_sign(&mut self, bag: &[Atom], depth: usize) -> Option<ProductSign> {
        let mut all_strict = true;
        for atom in bag {
            let lb = self.atom_lower(atom, depth)?;
            if lb.value.is_negative() {
                return None;
            }
            let strictly_positive = lb.value.is_positive() || (lb.value.is_zero() && lb.strict);
            all_strict &= strictly_positive;
        }
        Some(if all_strict {
            ProductSign::Positive
        } else {
            ProductSign::NonNegative
        })
    }

    fn atom_lower(&mut self, atom: &Atom, depth: usize) -> Option<Bound> {
        let mut best = self.scan_atom_facts(atom, true);
        match atom {
            Atom::Abs(_) => {
                best = better_lower(best, Some(Bound::at(BigInt::zero(), false)));
            }
            Atom::Mod(e, c) => {
                if depth > 0
                    && self.prove(&c.clone(), true, depth - 1)
                    && self.prove(&e.clone(), false, depth - 1)
                {
                    best = better_lower(best, Some(Bound::at(BigInt::zero(), false)));
                }
            }
            Atom::Div(e, d) => {
                if depth > 0 && self.prove(&d.clone(), true, depth - 1) {
                    if self.prove(&e.sub(d), false, depth - 1) {
                        // a ≥ b > 0 gives a/b ≥ 1.
                        best = better_lower(best, Some(Bound::at(BigInt::from(1), false)));
                    } else if self.prove(&e.clone(), false, depth - 1) {
                        best = better_lower(best, Some(Bound::at(BigInt::zero(), false)));
                    }
                }
            }
            _ => {}
        }
        best
    }

    fn atom_upper(&mut self, atom: &Atom, depth: usize) -> Option<Bound> {
        let mut best = self.scan_atom_facts(atom, false);
        if let Atom::Mod(e, c) = atom {
            if let Some(cv) = c.as_constant() {
                if depth > 0
                    && cv.is_positive()
                    && self.prove(&e.clone(), false, depth - 1)
                {
                    best = better_upper(best, Some(Bound::at(cv, true)));
                }
            }
        }
        best
    }

    /// Constant bounds from unit-coefficient facts about exactly this atom:
    /// a fact `±atom + d ≥ 0` yields `atom ≥ −d` or `atom ≤ d`.
    fn scan_atom_facts(&self, atom: &Atom, want_lower: bool) -> Option<Bound> {
        let mut best: Option<Bound> = None;
        for (fact, strict) in &self.facts.affine {
            let Some((fatom, sign, d)) = as_unit_atom_fact(fact) else {
                continue;
            };
            if fatom != atom {
                continue;
            }
            if sign > 0 && want_lower {
                // atom + d ≥ 0  ⇒  atom ≥ −d.
                best = better_lower(best, Some(Bound::at(-d, *strict)));
            } else if sign < 0 && !want_lower {
                // −atom + d ≥ 0  ⇒  atom ≤ d.
                best = better_upper(best, Some(Bound::at(d, *strict)));
            }
        }
        best
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ProductSign {
    Positive,
    NonNegative,
}

/// Match `nf` as `sign·atom + d` with unit coefficient.
fn as_unit_atom_fact(nf: &NormalForm) -> Option<(&Atom, i8, BigInt)> {
    let terms = nf.terms();
    let (atom_term, constant) = match terms {
        [(bag, c)] if bag.len() == 1 => ((bag, c), BigInt::zero()),
        [(cbag, d), (bag, c)] if cbag.is_empty() && bag.len() == 1 => ((bag, c), d.clone()),
        _ => return None,
    };
    let (bag, c) = atom_term;
    let sign = if *c == BigInt::from(1) {
        1
    } else if *c == BigInt::from(-1) {
        -1
    } else {
        return None;
    };
    Some((&bag[0], sign, constant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr_with;
    use crate::expr::{evaluate, Value};
    use crate::symtab::Binding;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn facts_of(srcs: &[&str], params: &[&str], vars: &[&str]) -> FactSet {
        let mut fs = FactSet::new();
        for s in srcs {
            fs.assume(&parse_expr_with(s, params, &[], vars).unwrap());
        }
        fs
    }

    fn goal(src: &str, params: &[&str], vars: &[&str]) -> Expr {
        parse_expr_with(src, params, &[], vars).unwrap()
    }

    #[test]
    fn division_positivity_holds_and_is_proven() {
        // Independent check first: the implication is true on a box.
        for n in 1i64..=50 {
            for g in 1i64..=50 {
                if n >= g {
                    assert!(n / g > 0, "counterexample n={n} g={g}");
                }
            }
        }
        let fs = facts_of(&["gsize <= n", "0 < gsize"], &["n", "gsize"], &[]);
        assert_eq!(fs.entails(&goal("n / gsize > 0", &["n", "gsize"], &[])), Verdict::Proven);
    }

    #[test]
    fn normalization_equality_closes_the_goal() {
        let fs = facts_of(&["4 * x2 + x1 < 10"], &[], &["x1", "x2"]);
        let g = goal("1 * (x1 - 0) + 4 * (x2 - 0) < 10", &[], &["x1", "x2"]);
        assert_eq!(fs.entails(&g), Verdict::Proven);
    }

    #[test]
    fn nothing_derivable_from_empty_facts() {
        let fs = FactSet::new();
        assert_eq!(fs.entails(&goal("n > 0", &["n"], &[])), Verdict::Unknown(None));
    }

    #[test]
    fn strict_bounds_are_not_rounded_to_integers() {
        // From 0 ≤ x1 < 2 an integer-aware engine could conclude
        // 2*x1 ≤ 2 < 3; this engine must not.
        let fs = facts_of(&["0 <= x1", "x1 < 2"], &[], &["x1"]);
        assert_eq!(
            fs.entails(&goal("2 * x1 < 3", &[], &["x1"])),
            Verdict::Unknown(None)
        );
        // The ordered-ring consequence is still available.
        assert_eq!(fs.entails(&goal("2 * x1 < 4", &[], &["x1"])), Verdict::Proven);
    }

    #[test]
    fn derived_bounds_for_abs_and_mod() {
        let fs = FactSet::new();
        assert_eq!(fs.entails(&goal("0 <= abs(x)", &[], &["x"])), Verdict::Proven);
        assert_eq!(
            fs.entails(&goal("abs(x) % 10 < 12", &[], &["x"])),
            Verdict::Proven
        );
        assert_eq!(
            fs.entails(&goal("0 <= abs(x) % 10", &[], &["x"])),
            Verdict::Proven
        );
        // Without a nonnegative left operand the lower mod bound is
        // unavailable.
        assert_eq!(
            fs.entails(&goal("0 <= x % 10", &[], &["x"])),
            Verdict::Unknown(None)
        );
        // Nested remainders resolve through the same rules.
        assert_eq!(
            fs.entails(&goal("abs(x) % 10 % 4 < 4", &[], &["x"])),
            Verdict::Proven
        );
    }

    #[test]
    fn refutes_reversed_facts_and_false_constants() {
        let fs = facts_of(&["0 < n"], &["n"], &[]);
        assert_eq!(fs.entails(&goal("n <= 0", &["n"], &[])), Verdict::Refuted(None));
        assert_eq!(fs.entails(&goal("n == 0", &["n"], &[])), Verdict::Refuted(None));
        assert_eq!(
            FactSet::new().entails(&goal("0 > 1", &[], &[])),
            Verdict::Refuted(None)
        );
        assert_eq!(
            FactSet::new().entails(&goal("1 > 0", &[], &[])),
            Verdict::Proven
        );
    }

    #[test]
    fn disequalities_sharpen_nonstrict_bounds() {
        let fs = facts_of(&["n != 0", "0 <= n"], &["n"], &[]);
        assert_eq!(fs.entails(&goal("n > 0", &["n"], &[])), Verdict::Proven);
        let fs = facts_of(&["0 < n"], &["n"], &[]);
        assert_eq!(fs.entails(&goal("n != 0", &["n"], &[])), Verdict::Proven);
    }

    #[test]
    fn transitivity_through_chains() {
        let fs = facts_of(&["a <= b", "b <= c"], &["a", "b", "c"], &[]);
        assert_eq!(fs.entails(&goal("a <= c", &["a", "b", "c"], &[])), Verdict::Proven);
        let fs = facts_of(&["a < b", "b <= c"], &["a", "b", "c"], &[]);
        assert_eq!(fs.entails(&goal("a < c", &["a", "b", "c"], &[])), Verdict::Proven);
    }

    #[test]
    fn implication_goals_extend_the_facts() {
        let fs = FactSet::new();
        assert_eq!(
            fs.entails(&goal("a < b ==> a < b + 1", &["a", "b"], &[])),
            Verdict::Proven
        );
    }

    #[test]
    fn product_sign_propagation() {
        let fs = facts_of(&["0 < w", "0 < h"], &["w", "h"], &[]);
        assert_eq!(fs.entails(&goal("0 < w * h", &["w", "h"], &[])), Verdict::Proven);
        let fs = facts_of(&["0 <= w", "0 < h"], &["w", "h"], &[]);
        assert_eq!(fs.entails(&goal("0 <= w * h", &["w", "h"], &[])), Verdict::Proven);
        assert_eq!(
            fs.entails(&goal("0 < w * h", &["w", "h"], &[])),
            Verdict::Unknown(None)
        );
    }

    /// Random soundness check: whenever the engine proves a goal, a
    /// brute-force sweep over a finite box agrees, and adding facts
    /// never loses the proof.
    #[test]
    fn proven_goals_survive_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let names = ["p", "q"];
        let mut proven_seen = 0usize;
        for _ in 0..400 {
            let mut srcs: Vec<String> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                srcs.push(random_cmp(&mut rng));
            }
            let goal_src = random_cmp(&mut rng);
            let refs: Vec<&str> = srcs.iter().map(|s| s.as_str()).collect();
            let fs = facts_of(&refs, &names, &[]);
            let g = goal(&goal_src, &names, &[]);
            let verdict = fs.entails(&g);
            if verdict == Verdict::Unknown(None) {
                continue;
            }
            proven_seen += 1;
            let expect = match verdict {
                Verdict::Proven => true,
                Verdict::Refuted(_) => false,
                Verdict::Unknown(_) => unreachable!(),
            };
            for p in -6i64..=6 {
                for q in -6i64..=6 {
                    let mut b = Binding::new();
                    b.set_param("p", BigInt::from(p));
                    b.set_param("q", BigInt::from(q));
                    let env = Default::default();
                    let facts_hold = srcs.iter().all(|s| {
                        let f = goal(s, &names, &[]);
                        matches!(evaluate(&f, &b, &env), Ok(Value::Bool(true)))
                    });
                    if !facts_hold {
                        continue;
                    }
                    match evaluate(&g, &b, &env) {
                        Ok(Value::Bool(actual)) => assert_eq!(
                            actual, expect,
                            "unsound verdict {verdict:?} for {goal_src} under {srcs:?} at p={p} q={q}"
                        ),
                        _ => {}
                    }
                }
            }
            // Monotonicity: an extra fact must not lose the verdict.
            if expect {
                let mut more = fs.clone();
                more.assume(&goal("p <= 100", &names, &[]));
                assert_eq!(more.entails(&g), Verdict::Proven);
            }
        }
        assert!(proven_seen > 30, "engine decided only {proven_seen} goals");
    }

    fn random_cmp(rng: &mut ChaCha8Rng) -> String {
        let term = |rng: &mut ChaCha8Rng| -> String {
            let c: i64 = rng.gen_range(-3..=3);
            let k: i64 = rng.gen_range(-2..=2);
            match rng.gen_range(0..3) {
                0 => format!("{c}"),
                1 => format!("{k} * p + {c}"),
                _ => format!("{k} * p + {} * q + {c}", rng.gen_range(-2..=2i64)),
            }
        };
        let l = term(rng);
        let r = term(rng);
        let op = match rng.gen_range(0..4) {
            0 => "<",
            1 => "<=",
            2 => "==",
            _ => "!=",
        };
        format!("{l} {op} {r}")
    }
}
