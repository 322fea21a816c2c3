//! Expression trees for the annotation language.
//!
//! Two sorts exist, integer and boolean, and every constructor is sorted by
//! shape: arithmetic nodes are integer-sorted, comparisons and connectives
//! boolean-sorted. Integers are arbitrary precision. `/` and `%` follow C
//! semantics: division truncates toward zero and the remainder takes the
//! sign of the dividend, so `7 / 2 == 3`, `-7 / 2 == -3`, `7 % 2 == 1`.
//! Division or remainder by zero is an explicit evaluation error, never a
//! silent default.
//!
//! `acc1d` is the one interpreted helper function: `acc1d(x, b, n, a)`
//! denotes `x * a + b` (the `n` argument is carried for documentation of the
//! range and does not affect the value).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::symtab::Binding;

/// Sort of an expression: integer or boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Int,
    Bool,
}

/// Binary arithmetic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

/// Comparison operator. `>` and `>=` are parsed as flipped `<` and `<=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Nonnegative integer literal; negative constants print as `-(literal)`.
    Int(BigInt),
    /// Boolean literal.
    Bool(bool),
    /// Declared parameter (free symbolic constant).
    Param(String),
    /// Quantifier-bound variable.
    Var(String),
    /// Array access `A[e]`; `trigger` marks a user-annotated trigger site.
    Access {
        array: String,
        index: Box<Expr>,
        trigger: bool,
    },
    /// Unary minus.
    Neg(Box<Expr>),
    /// Absolute value, written `abs(e)`.
    Abs(Box<Expr>),
    /// Binary arithmetic.
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Integer comparison.
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// `acc1d(x, b, n, a)` with value `x * a + b`.
    Acc1d(Box<[Expr; 4]>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        if v < 0 {
            Expr::Neg(Box::new(Expr::Int(BigInt::from(-(v as i128)))))
        } else {
            Expr::Int(BigInt::from(v))
        }
    }

    /// Literal from a big integer, negative values as `-(literal)`.
    pub fn big(v: BigInt) -> Expr {
        if v.sign() == num_bigint::Sign::Minus {
            Expr::Neg(Box::new(Expr::Int(-v)))
        } else {
            Expr::Int(v)
        }
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn access(array: &str, index: Expr) -> Expr {
        Expr::Access {
            array: array.to_string(),
            index: Box::new(index),
            trigger: false,
        }
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    /// `acc1d(x, b, n, a)`, evaluating to `x * a + b`.
    pub fn acc1d(x: Expr, b: Expr, n: Expr, a: Expr) -> Expr {
        Expr::Acc1d(Box::new([x, b, n, a]))
    }

    pub fn abs(e: Expr) -> Expr {
        Expr::Abs(Box::new(e))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Add, l, r)
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Sub, l, r)
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Mul, l, r)
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Div, l, r)
    }

    pub fn rem(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Mod, l, r)
    }

    pub fn cmp(op: CmpOp, l: Expr, r: Expr) -> Expr {
        Expr::Cmp(op, Box::new(l), Box::new(r))
    }

    pub fn lt(l: Expr, r: Expr) -> Expr {
        Expr::cmp(CmpOp::Lt, l, r)
    }

    pub fn le(l: Expr, r: Expr) -> Expr {
        Expr::cmp(CmpOp::Le, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::cmp(CmpOp::Eq, l, r)
    }

    pub fn ne(l: Expr, r: Expr) -> Expr {
        Expr::cmp(CmpOp::Ne, l, r)
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Expr, r: Expr) -> Expr {
        Expr::Implies(Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Left-associated conjunction of `parts`; `true` for an empty list.
    pub fn conjoin(parts: Vec<Expr>) -> Expr {
        let mut it = parts.into_iter();
        match it.next() {
            None => Expr::Bool(true),
            Some(first) => it.fold(first, Expr::and),
        }
    }

    /// Sort determined by node shape.
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Int(_)
            | Expr::Param(_)
            | Expr::Var(_)
            | Expr::Access { .. }
            | Expr::Neg(_)
            | Expr::Abs(_)
            | Expr::Bin(..)
            | Expr::Acc1d(_) => Sort::Int,
            Expr::Bool(_)
            | Expr::Cmp(..)
            | Expr::And(..)
            | Expr::Or(..)
            | Expr::Implies(..)
            | Expr::Not(_) => Sort::Bool,
        }
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Param(_) | Expr::Var(_) => vec![],
            Expr::Access { index, .. } => vec![index],
            Expr::Neg(e) | Expr::Abs(e) | Expr::Not(e) => vec![e],
            Expr::Bin(_, l, r) | Expr::Cmp(_, l, r) => vec![l, r],
            Expr::And(l, r) | Expr::Or(l, r) | Expr::Implies(l, r) => vec![l, r],
            Expr::Acc1d(args) => args.iter().collect(),
        }
    }

    /// Checks that every child has the sort its position requires.
    pub fn sort_check(&self) -> Result<Sort, SortError> {
        let need_int = |e: &Expr| -> Result<(), SortError> {
            if e.sort_check()? == Sort::Int {
                Ok(())
            } else {
                Err(SortError {
                    context: describe(e),
                    expected: Sort::Int,
                })
            }
        };
        let need_bool = |e: &Expr| -> Result<(), SortError> {
            if e.sort_check()? == Sort::Bool {
                Ok(())
            } else {
                Err(SortError {
                    context: describe(e),
                    expected: Sort::Bool,
                })
            }
        };
        match self {
            Expr::Access { index, .. } => need_int(index)?,
            Expr::Neg(e) | Expr::Abs(e) => need_int(e)?,
            Expr::Bin(_, l, r) | Expr::Cmp(_, l, r) => {
                need_int(l)?;
                need_int(r)?;
            }
            Expr::And(l, r) | Expr::Or(l, r) | Expr::Implies(l, r) => {
                need_bool(l)?;
                need_bool(r)?;
            }
            Expr::Not(e) => need_bool(e)?,
            Expr::Acc1d(args) => {
                for a in args.iter() {
                    need_int(a)?;
                }
            }
            _ => {}
        }
        Ok(self.sort())
    }

    /// Collects bound-variable names into `out`.
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Expr::Var(n) = self {
            out.insert(n.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Collects parameter names into `out`.
    pub fn collect_params(&self, out: &mut BTreeSet<String>) {
        if let Expr::Param(n) = self {
            out.insert(n.clone());
        }
        for c in self.children() {
            c.collect_params(out);
        }
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            Expr::Var(n) => n == name,
            _ => self.children().iter().any(|c| c.mentions_var(name)),
        }
    }

    pub fn mentions_any_var(&self, names: &[String]) -> bool {
        match self {
            Expr::Var(n) => names.iter().any(|v| v == n),
            _ => self.children().iter().any(|c| c.mentions_any_var(names)),
        }
    }

    /// Visits every array access in source order (depth-first, left to right).
    pub fn for_each_access<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        if let Expr::Access { index, .. } = self {
            f(self);
            index.for_each_access(f);
        } else {
            for c in self.children() {
                c.for_each_access(f);
            }
        }
    }

    /// Rebuilds the tree, letting `f` replace each access node bottom-up.
    pub fn map_accesses(self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Access {
                array,
                index,
                trigger,
            } => Expr::Access {
                array,
                index: Box::new(index.map_accesses(f)),
                trigger,
            },
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_accesses(f))),
            Expr::Abs(e) => Expr::Abs(Box::new(e.map_accesses(f))),
            Expr::Not(e) => Expr::Not(Box::new(e.map_accesses(f))),
            Expr::Bin(op, l, r) => {
                Expr::Bin(op, Box::new(l.map_accesses(f)), Box::new(r.map_accesses(f)))
            }
            Expr::Cmp(op, l, r) => {
                Expr::Cmp(op, Box::new(l.map_accesses(f)), Box::new(r.map_accesses(f)))
            }
            Expr::And(l, r) => Expr::and(l.map_accesses(f), r.map_accesses(f)),
            Expr::Or(l, r) => Expr::or(l.map_accesses(f), r.map_accesses(f)),
            Expr::Implies(l, r) => Expr::implies(l.map_accesses(f), r.map_accesses(f)),
            Expr::Acc1d(args) => {
                let [a, b, c, d] = *args;
                Expr::Acc1d(Box::new([
                    a.map_accesses(f),
                    b.map_accesses(f),
                    c.map_accesses(f),
                    d.map_accesses(f),
                ]))
            }
            leaf => leaf,
        };
        if matches!(rebuilt, Expr::Access { .. }) {
            f(rebuilt)
        } else {
            rebuilt
        }
    }

    /// Flattens a conjunction into its leaves.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            if let Expr::And(l, r) = e {
                walk(l, out);
                walk(r, out);
            } else {
                out.push(e);
            }
        }
        walk(self, &mut out);
        out
    }
}

fn describe(e: &Expr) -> String {
    match e {
        Expr::Int(v) => format!("literal {v}"),
        Expr::Bool(b) => format!("literal {b}"),
        Expr::Param(n) => format!("parameter {n}"),
        Expr::Var(n) => format!("variable {n}"),
        Expr::Access { array, .. } => format!("access to {array}"),
        Expr::Neg(_) => "unary minus".to_string(),
        Expr::Abs(_) => "abs".to_string(),
        Expr::Bin(..) => "arithmetic".to_string(),
        Expr::Cmp(..) => "comparison".to_string(),
        Expr::And(..) | Expr::Or(..) | Expr::Implies(..) | Expr::Not(_) => {
            "connective".to_string()
        }
        Expr::Acc1d(_) => "acc1d".to_string(),
    }
}

/// A child expression does not have the sort its position requires.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected {expected:?} sort at {context}")]
pub struct SortError {
    pub context: String,
    pub expected: Sort,
}

/// Simultaneous substitution of expressions for bound variables.
///
/// The map is applied once; variables introduced by a replacement are not
/// substituted again. Every replacement must be integer-sorted.
pub fn substitute(e: &Expr, map: &BTreeMap<String, Expr>) -> Result<Expr, SortError> {
    Ok(match e {
        Expr::Var(n) => match map.get(n) {
            Some(rep) => {
                if rep.sort() != Sort::Int {
                    return Err(SortError {
                        context: format!("replacement for {n}"),
                        expected: Sort::Int,
                    });
                }
                rep.clone()
            }
            None => e.clone(),
        },
        Expr::Int(_) | Expr::Bool(_) | Expr::Param(_) => e.clone(),
        Expr::Access {
            array,
            index,
            trigger,
        } => Expr::Access {
            array: array.clone(),
            index: Box::new(substitute(index, map)?),
            trigger: *trigger,
        },
        Expr::Neg(a) => Expr::neg(substitute(a, map)?),
        Expr::Abs(a) => Expr::abs(substitute(a, map)?),
        Expr::Not(a) => Expr::not(substitute(a, map)?),
        Expr::Bin(op, l, r) => Expr::bin(*op, substitute(l, map)?, substitute(r, map)?),
        Expr::Cmp(op, l, r) => Expr::cmp(*op, substitute(l, map)?, substitute(r, map)?),
        Expr::And(l, r) => Expr::and(substitute(l, map)?, substitute(r, map)?),
        Expr::Or(l, r) => Expr::or(substitute(l, map)?, substitute(r, map)?),
        Expr::Implies(l, r) => Expr::implies(substitute(l, map)?, substitute(r, map)?),
        Expr::Acc1d(args) => Expr::Acc1d(Box::new([
            substitute(&args[0], map)?,
            substitute(&args[1], map)?,
            substitute(&args[2], map)?,
            substitute(&args[3], map)?,
        ])),
    })
}

/// Result of evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

/// Evaluation failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("no model for array `{0}`")]
    UnboundArray(String),
}

/// Values for the quantified variables during evaluation.
pub type VarEnv = BTreeMap<String, BigInt>;

/// Evaluates `e` under parameter/array values from `b` and variable values
/// from `env`. Total except for division by zero and unbound symbols.
pub fn evaluate(e: &Expr, b: &Binding, env: &VarEnv) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Int(v) => Value::Int(v.clone()),
        Expr::Bool(v) => Value::Bool(*v),
        Expr::Param(n) => Value::Int(
            b.param(n)
                .ok_or_else(|| EvalError::UnboundParam(n.clone()))?
                .clone(),
        ),
        Expr::Var(n) => Value::Int(
            env.get(n)
                .ok_or_else(|| EvalError::UnboundVar(n.clone()))?
                .clone(),
        ),
        Expr::Access { array, index, .. } => {
            let idx = eval_int(index, b, env)?;
            match b.array_model(array) {
                Some(model) => Value::Int(model.value(array, &idx)),
                None => return Err(EvalError::UnboundArray(array.clone())),
            }
        }
        Expr::Neg(a) => Value::Int(-eval_int(a, b, env)?),
        Expr::Abs(a) => {
            let v = eval_int(a, b, env)?;
            Value::Int(if v.sign() == num_bigint::Sign::Minus {
                -v
            } else {
                v
            })
        }
        Expr::Bin(op, l, r) => {
            let a = eval_int(l, b, env)?;
            let c = eval_int(r, b, env)?;
            Value::Int(match op {
                BinOp::Add => a + c,
                BinOp::Sub => a - c,
                BinOp::Mul => a * c,
                BinOp::Div => {
                    if c.is_zero() {
                        return Err(EvalError::DivisionByZero(format!("{a} / 0")));
                    }
                    a / c
                }
                BinOp::Mod => {
                    if c.is_zero() {
                        return Err(EvalError::DivisionByZero(format!("{a} % 0")));
                    }
                    a % c
                }
            })
        }
        Expr::Cmp(op, l, r) => {
            let a = eval_int(l, b, env)?;
            let c = eval_int(r, b, env)?;
            Value::Bool(match op {
                CmpOp::Lt => a < c,
                CmpOp::Le => a <= c,
                CmpOp::Eq => a == c,
                CmpOp::Ne => a != c,
            })
        }
        Expr::And(l, r) => Value::Bool(eval_bool(l, b, env)? && eval_bool(r, b, env)?),
        Expr::Or(l, r) => Value::Bool(eval_bool(l, b, env)? || eval_bool(r, b, env)?),
        Expr::Implies(l, r) => Value::Bool(!eval_bool(l, b, env)? || eval_bool(r, b, env)?),
        Expr::Not(a) => Value::Bool(!eval_bool(a, b, env)?),
        Expr::Acc1d(args) => {
            let x = eval_int(&args[0], b, env)?;
            let off = eval_int(&args[1], b, env)?;
            let _n = eval_int(&args[2], b, env)?;
            let stride = eval_int(&args[3], b, env)?;
            Value::Int(x * stride + off)
        }
    })
}

/// Evaluates an integer-sorted expression.
pub fn eval_int(e: &Expr, b: &Binding, env: &VarEnv) -> Result<BigInt, EvalError> {
    match evaluate(e, b, env)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => unreachable!("sort checking rejects boolean operands"),
    }
}

/// Evaluates a boolean-sorted expression.
pub fn eval_bool(e: &Expr, b: &Binding, env: &VarEnv) -> Result<bool, EvalError> {
    match evaluate(e, b, env)? {
        Value::Bool(v) => Ok(v),
        Value::Int(_) => unreachable!("sort checking rejects integer operands"),
    }
}

/// Deterministic array model value; exported for the oracle's seeded models.
pub(crate) fn seeded_cell(seed: u64, name: &str, index: &BigInt) -> BigInt {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for byte in name.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    let (sign, bytes) = index.to_bytes_le();
    h ^= match sign {
        num_bigint::Sign::Minus => 0x5bf0_3635,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 0x9e37_79b9,
    };
    for byte in bytes {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    // splitmix64 finisher for avalanche
    h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    // Small range so different cells collide often; equalities between two
    // arrays then take both truth values across seeds.
    BigInt::from((h % 9) as i64 - 4)
}
