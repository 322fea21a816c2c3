//! Canonical normal form for integer expressions.
//!
//! A [`NormalForm`] is a sum of monomials; each monomial is an integer
//! coefficient times a sorted multiset of atomic factors. Ring reasoning
//! only: addition, subtraction, negation and multiplication are folded, so
//! two expressions equal under ring axioms map to the same normal form.
//! `/`, `%`, `abs`, array accesses and `acc1d` become opaque atoms whose
//! operands are themselves normalized; no division or remainder algebra is
//! performed here. In particular `n / gsize * gsize` keeps its division
//! atom and is not collapsed to `n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::expr::{BinOp, Expr};

/// Opaque factor inside a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Param(String),
    Var(String),
    /// Truncated division, operands normalized.
    Div(Box<NormalForm>, Box<NormalForm>),
    /// Truncated remainder, operands normalized.
    Mod(Box<NormalForm>, Box<NormalForm>),
    Abs(Box<NormalForm>),
    Access(String, Box<NormalForm>),
    Acc1d(Box<[NormalForm; 4]>),
}

impl Atom {
    /// True if the atom or any operand inside it mentions one of `vars`.
    pub fn mentions_any_var(&self, vars: &[String]) -> bool {
        match self {
            Atom::Param(_) => false,
            Atom::Var(v) => vars.iter().any(|n| n == v),
            Atom::Div(a, b) | Atom::Mod(a, b) => {
                a.mentions_any_var(vars) || b.mentions_any_var(vars)
            }
            Atom::Abs(a) => a.mentions_any_var(vars),
            Atom::Access(_, idx) => idx.mentions_any_var(vars),
            Atom::Acc1d(args) => args.iter().any(|a| a.mentions_any_var(vars)),
        }
    }

    fn to_expr(&self) -> Expr {
        match self {
            Atom::Param(n) => Expr::Param(n.clone()),
            Atom::Var(n) => Expr::Var(n.clone()),
            Atom::Div(a, b) => Expr::div(a.to_expr(), b.to_expr()),
            Atom::Mod(a, b) => Expr::rem(a.to_expr(), b.to_expr()),
            Atom::Abs(a) => Expr::abs(a.to_expr()),
            Atom::Access(name, idx) => Expr::access(name, idx.to_expr()),
            Atom::Acc1d(args) => Expr::Acc1d(Box::new([
                args[0].to_expr(),
                args[1].to_expr(),
                args[2].to_expr(),
                args[3].to_expr(),
            ])),
        }
    }
}

/// Sorted multiset of atoms; the empty bag is the constant monomial.
pub type FactorBag = Vec<Atom>;

/// Sum of monomials in canonical order with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NormalForm {
    terms: Vec<(FactorBag, BigInt)>,
}

impl NormalForm {
    pub fn zero() -> NormalForm {
        NormalForm { terms: vec![] }
    }

    pub fn constant(v: BigInt) -> NormalForm {
        if v.is_zero() {
            NormalForm::zero()
        } else {
            NormalForm {
                terms: vec![(vec![], v)],
            }
        }
    }

    pub fn atom(a: Atom) -> NormalForm {
        NormalForm {
            terms: vec![(vec![a], BigInt::one())],
        }
    }

    pub fn var(name: &str) -> NormalForm {
        NormalForm::atom(Atom::Var(name.to_string()))
    }

    pub fn param(name: &str) -> NormalForm {
        NormalForm::atom(Atom::Param(name.to_string()))
    }

    pub fn terms(&self) -> &[(FactorBag, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if no monomial has factors.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.as_slice() {
            [] => Some(BigInt::zero()),
            [(bag, coeff)] if bag.is_empty() => Some(coeff.clone()),
            _ => None,
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        let mut map: BTreeMap<FactorBag, BigInt> = BTreeMap::new();
        for (bag, c) in self.terms.iter().chain(other.terms.iter()) {
            *map.entry(bag.clone()).or_insert_with(BigInt::zero) += c;
        }
        NormalForm::from_map(map)
    }

    pub fn neg(&self) -> NormalForm {
        NormalForm {
            terms: self
                .terms
                .iter()
                .map(|(bag, c)| (bag.clone(), -c))
                .collect(),
        }
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let mut map: BTreeMap<FactorBag, BigInt> = BTreeMap::new();
        for (bag_a, ca) in &self.terms {
            for (bag_b, cb) in &other.terms {
                let mut bag = bag_a.clone();
                bag.extend(bag_b.iter().cloned());
                bag.sort();
                *map.entry(bag).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        NormalForm::from_map(map)
    }

    pub fn scale(&self, k: &BigInt) -> NormalForm {
        if k.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: self
                .terms
                .iter()
                .map(|(bag, c)| (bag.clone(), c * k))
                .collect(),
        }
    }

    fn from_map(map: BTreeMap<FactorBag, BigInt>) -> NormalForm {
        NormalForm {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn mentions_any_var(&self, vars: &[String]) -> bool {
        self.terms
            .iter()
            .any(|(bag, _)| bag.iter().any(|a| a.mentions_any_var(vars)))
    }

    /// Splits into (coefficient normal form per variable, variable-free rest).
    ///
    /// Returns `None` when some monomial mixes two of the given variables,
    /// has a variable of degree two or more, or hides one inside an opaque
    /// atom — exactly the shapes with no linear reading.
    pub fn split_linear(
        &self,
        vars: &[String],
    ) -> Option<(BTreeMap<String, NormalForm>, NormalForm)> {
        let mut coeffs: BTreeMap<String, NormalForm> = BTreeMap::new();
        let mut rest = NormalForm::zero();
        for (bag, c) in &self.terms {
            let mut seen: Option<&str> = None;
            let mut residual: FactorBag = Vec::new();
            for a in bag {
                match a {
                    Atom::Var(v) if vars.iter().any(|n| n == v) => {
                        if seen.is_some() {
                            return None; // degree two or a product of variables
                        }
                        seen = Some(v);
                    }
                    _ => {
                        if a.mentions_any_var(vars) {
                            return None; // variable inside an opaque atom
                        }
                        residual.push(a.clone());
                    }
                }
            }
            let part = NormalForm {
                terms: vec![(residual, c.clone())],
            };
            match seen {
                Some(v) => {
                    let entry = coeffs
                        .entry(v.to_string())
                        .or_insert_with(NormalForm::zero);
                    *entry = entry.add(&part);
                }
                None => rest = rest.add(&part),
            }
        }
        Some((coeffs, rest))
    }

    /// Rebuilds a printable expression; `normalize` of the result is `self`.
    pub fn to_expr(&self) -> Expr {
        if self.terms.is_empty() {
            return Expr::int(0);
        }
        let mut acc: Option<Expr> = None;
        for (bag, coeff) in &self.terms {
            let positive = coeff.sign() != num_bigint::Sign::Minus;
            let magnitude = coeff.abs();
            let term = monomial_expr(bag, &magnitude);
            acc = Some(match acc {
                None => {
                    if positive {
                        term
                    } else {
                        Expr::neg(term)
                    }
                }
                Some(prev) => {
                    if positive {
                        Expr::add(prev, term)
                    } else {
                        Expr::sub(prev, term)
                    }
                }
            });
        }
        acc.unwrap()
    }
}

fn monomial_expr(bag: &FactorBag, magnitude: &BigInt) -> Expr {
    let mut parts: Vec<Expr> = Vec::new();
    if !magnitude.is_one() || bag.is_empty() {
        parts.push(Expr::Int(magnitude.clone()));
    }
    parts.extend(bag.iter().map(Atom::to_expr));
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    it.fold(first, Expr::mul)
}

/// Normalizes an integer-sorted expression.
///
/// Total on integer-sorted input; idempotent through printing, i.e.
/// `normalize(normalize(e).to_expr()) == normalize(e)`.
pub fn normalize(e: &Expr) -> NormalForm {
    match e {
        Expr::Int(v) => NormalForm::constant(v.clone()),
        Expr::Param(n) => NormalForm::param(n),
        Expr::Var(n) => NormalForm::var(n),
        Expr::Neg(a) => normalize(a).neg(),
        Expr::Abs(a) => NormalForm::atom(Atom::Abs(Box::new(normalize(a)))),
        Expr::Access { array, index, .. } => {
            NormalForm::atom(Atom::Access(array.clone(), Box::new(normalize(index))))
        }
        Expr::Bin(op, l, r) => {
            let (a, b) = (normalize(l), normalize(r));
            match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => NormalForm::atom(Atom::Div(Box::new(a), Box::new(b))),
                BinOp::Mod => NormalForm::atom(Atom::Mod(Box::new(a), Box::new(b))),
            }
        }
        Expr::Acc1d(args) => NormalForm::atom(Atom::Acc1d(Box::new([
            normalize(&args[0]),
            normalize(&args[1]),
            normalize(&args[2]),
            normalize(&args[3]),
        ]))),
        Expr::Bool(_)
        | Expr::Cmp(..)
        | Expr::And(..)
        | Expr::Or(..)
        | Expr::Implies(..)
        | Expr::Not(_) => {
            unreachable!("normalize is only defined on integer-sorted expressions")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_commutes() {
        // 4*x2 + x1 and x1 + 4*x2 meet in one normal form.
        let a = Expr::add(
            Expr::mul(Expr::int(4), Expr::var("x2")),
            Expr::var("x1"),
        );
        let b = Expr::add(
            Expr::var("x1"),
            Expr::mul(Expr::int(4), Expr::var("x2")),
        );
        assert_eq!(normalize(&a), normalize(&b));
    }

    #[test]
    fn division_stays_opaque() {
        // n / gsize * gsize does not collapse to n.
        let e = Expr::mul(
            Expr::div(Expr::param("n"), Expr::param("gsize")),
            Expr::param("gsize"),
        );
        assert_ne!(normalize(&e), normalize(&Expr::param("n")));
    }

    #[test]
    fn constant_multiplication_folds() {
        let e = Expr::mul(Expr::mul(Expr::int(3), Expr::int(1)), Expr::var("x"));
        let expected = Expr::mul(Expr::int(3), Expr::var("x"));
        assert_eq!(normalize(&e), normalize(&expected));
        assert_eq!(normalize(&e).terms().len(), 1);
    }

    #[test]
    fn to_expr_round_trips() {
        let e = Expr::sub(
            Expr::add(
                Expr::mul(Expr::int(4), Expr::var("x2")),
                Expr::div(Expr::param("n"), Expr::int(3)),
            ),
            Expr::int(7),
        );
        let nf = normalize(&e);
        assert_eq!(normalize(&nf.to_expr()), nf);
    }

    #[test]
    fn split_linear_reads_coefficients() {
        // 10*x3 + 4*x2 + x1 over (x1, x2, x3)
        let e = Expr::add(
            Expr::add(
                Expr::mul(Expr::int(10), Expr::var("x3")),
                Expr::mul(Expr::int(4), Expr::var("x2")),
            ),
            Expr::var("x1"),
        );
        let vars: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
        let (coeffs, rest) = normalize(&e).split_linear(&vars).unwrap();
        assert_eq!(coeffs["x1"], NormalForm::constant(BigInt::from(1)));
        assert_eq!(coeffs["x2"], NormalForm::constant(BigInt::from(4)));
        assert_eq!(coeffs["x3"], NormalForm::constant(BigInt::from(10)));
        assert!(rest.is_zero());
    }

    #[test]
    fn split_linear_rejects_products_and_hidden_variables() {
        let vars: Vec<String> = ["x1", "x2"].iter().map(|s| s.to_string()).collect();
        let product = Expr::mul(Expr::var("x1"), Expr::var("x2"));
        assert!(normalize(&product).split_linear(&vars).is_none());
        let hidden = Expr::rem(Expr::var("x1"), Expr::int(16));
        assert!(normalize(&hidden).split_linear(&vars).is_none());
    }
}
