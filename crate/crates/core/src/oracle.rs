//! Brute-force validation of rewrites under concrete parameter bindings.
//!
//! The symbolic checks in [`crate::conditions`] justify a rewrite once; this
//! module is the ground truth they are measured against.  Given concrete
//! values for every parameter it enumerates the original tuple domain and the
//! new one-variable domain, verifies that the index map is a bijection
//! between them with the recovered indices as its inverse, re-checks the
//! prefix-bound condition pointwise, and compares the truth values of the two
//! quantifiers under seeded array models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::conditions::{abs_nf, SignClass};
use crate::dsl::QuantifiedFormula;
use crate::expr::{eval_bool, eval_int, EvalError, Expr, VarEnv};
use crate::normal::normalize;
use crate::pattern::{DomainSpec, LinearPattern};
use crate::rewrite::RewriteResult;
use crate::symtab::Binding;

/// Default ceiling on enumerated points per instance.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Why an enumeration could not be carried out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// A quantified variable has no recognizable finite range.
    UnboundedDomain(String),
    /// The instance would enumerate more points than allowed.
    CapExceeded { needed: BigInt, cap: usize },
    /// Evaluation failed outside a body check (e.g. division by zero).
    Eval(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnboundedDomain(v) => {
                write!(f, "variable `{v}` has no finite range under this binding")
            }
            OracleError::CapExceeded { needed, cap } => {
                write!(f, "instance needs {needed} points, cap is {cap}")
            }
            OracleError::Eval(msg) => write!(f, "evaluation failed: {msg}"),
        }
    }
}

impl From<EvalError> for OracleError {
    fn from(e: EvalError) -> OracleError {
        OracleError::Eval(e.to_string())
    }
}

/// Everything one oracle run learned about one instance.
#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Parameter values this instance was run under.
    pub description: String,
    pub x_size: usize,
    pub y_size: usize,
    /// The index map hits no value twice on the original domain.
    pub injective: bool,
    /// The image of the original domain is exactly the new domain.
    pub image_matches: bool,
    /// Recovered indices invert the map in both directions.
    pub inverses_hold: bool,
    /// The prefix-bound condition holds at every tuple.
    pub eq4_holds: bool,
    /// Truth equality of the two quantifiers, per array seed.
    pub seed_results: Vec<(u64, bool)>,
    /// First failure witness, if any check failed.
    pub counterexample: Option<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.injective
            && self.image_matches
            && self.inverses_hold
            && self.eq4_holds
            && self.seed_results.iter().all(|(_, ok)| *ok)
    }
}

fn describe(b: &Binding) -> String {
    if b.params().is_empty() {
        return "no parameters".to_string();
    }
    b.params()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn to_i64(v: &BigInt, what: &str) -> Result<i64, OracleError> {
    v.to_i64()
        .ok_or_else(|| OracleError::Eval(format!("{what} out of range: {v}")))
}

/// Per-variable half-open ranges `[lo, hi)`, resolving missing upper bounds
/// by scanning residual constraints whose other variables are already
/// bounded.
fn variable_ranges(
    d: &DomainSpec,
    vars: &[String],
    b: &Binding,
) -> Result<Vec<(i64, i64)>, OracleError> {
    let empty = VarEnv::new();
    let mut ranges: Vec<Option<(i64, i64)>> = Vec::new();
    for v in vars {
        let lo = to_i64(&eval_int(&d.lower(v).to_expr(), b, &empty)?, "lower bound")?;
        let hi = match d.upper(v) {
            Some(nf) => Some(to_i64(&eval_int(&nf.to_expr(), b, &empty)?, "upper bound")?),
            None => None,
        };
        ranges.push(hi.map(|h| (lo, h.max(lo))));
    }
    // Derive missing uppers from residual conjuncts, repeatedly, so chains of
    // dependencies resolve in any order.
    for _ in 0..vars.len() {
        for (vi, v) in vars.iter().enumerate() {
            if ranges[vi].is_some() {
                continue;
            }
            let lo = to_i64(&eval_int(&d.lower(v).to_expr(), b, &empty)?, "lower bound")?;
            if let Some(hi) = derived_upper(d, vars, &ranges, v, b)? {
                ranges[vi] = Some((lo, hi.max(lo)));
            }
        }
    }
    ranges
        .into_iter()
        .zip(vars)
        .map(|(r, v)| r.ok_or_else(|| OracleError::UnboundedDomain(v.clone())))
        .collect()
}

/// Tries to read an exclusive upper bound for `v` out of a residual conjunct
/// `l < r` / `l <= r`, maximizing over the known ranges of the other
/// variables.  Conservative over-approximations are fine: enumeration
/// filters with the real constraint afterwards.
fn derived_upper(
    d: &DomainSpec,
    vars: &[String],
    ranges: &[Option<(i64, i64)>],
    v: &str,
    b: &Binding,
) -> Result<Option<i64>, OracleError> {
    use crate::expr::CmpOp;
    let empty = VarEnv::new();
    let mut best: Option<i64> = None;
    for c in &d.residual {
        let Expr::Cmp(op @ (CmpOp::Lt | CmpOp::Le), l, r) = c else {
            continue;
        };
        // conjunct  ⟺  slack > 0 (strict) or slack >= 0
        let slack = normalize(r).sub(&normalize(l));
        let all: Vec<String> = vars.to_vec();
        let Some((coeffs, rest)) = slack.split_linear(&all) else {
            continue;
        };
        if rest.mentions_any_var(&all) {
            continue;
        }
        let Some(cv) = coeffs.get(v) else { continue };
        let cv = eval_int(&cv.to_expr(), b, &empty)?;
        if !cv.is_negative() {
            continue;
        }
        let mut max_rhs = eval_int(&rest.to_expr(), b, &empty)?;
        let mut ok = true;
        for (name, cj) in &coeffs {
            if name == v {
                continue;
            }
            let Some(Some((lo, hi))) = vars
                .iter()
                .position(|w| w == name)
                .map(|i| ranges[i])
            else {
                ok = false;
                break;
            };
            if lo >= hi {
                // Empty range elsewhere: the whole domain is empty anyway.
                continue;
            }
            let cj = eval_int(&cj.to_expr(), b, &empty)?;
            let at_lo = &cj * BigInt::from(lo);
            let at_hi = &cj * BigInt::from(hi - 1);
            max_rhs += at_lo.max(at_hi);
        }
        if !ok {
            continue;
        }
        // |cv| * v <= max_rhs (minus one when strict): v < floor(...) + 1
        let budget = if *op == CmpOp::Lt {
            max_rhs - 1
        } else {
            max_rhs
        };
        let cv_abs = -cv;
        // Floor division with a positive divisor.
        let mut q = &budget / &cv_abs;
        if budget.is_negative() && !(&budget % &cv_abs).is_zero() {
            q -= 1;
        }
        let hi_excl = to_i64(&(q + 1), "derived bound")?;
        best = Some(best.map_or(hi_excl, |b: i64| b.min(hi_excl)));
    }
    Ok(best)
}

/// Enumerates every assignment of `vars` satisfying the full domain under
/// `b`, in ascending odometer order.
pub fn enumerate_x(
    d: &DomainSpec,
    vars: &[String],
    b: &Binding,
    cap: usize,
) -> Result<Vec<VarEnv>, OracleError> {
    let ranges = variable_ranges(d, vars, b)?;
    let mut total = BigInt::from(1);
    for (lo, hi) in &ranges {
        total *= BigInt::from((hi - lo).max(0));
    }
    if total > BigInt::from(cap) {
        return Err(OracleError::CapExceeded { needed: total, cap });
    }
    let mut out = Vec::new();
    let mut point: Vec<i64> = ranges.iter().map(|(lo, _)| *lo).collect();
    if ranges.iter().any(|(lo, hi)| lo >= hi) {
        return Ok(out);
    }
    loop {
        let env: VarEnv = vars
            .iter()
            .cloned()
            .zip(point.iter().map(|v| BigInt::from(*v)))
            .collect();
        let mut keep = true;
        for c in &d.residual {
            if !eval_bool(c, b, &env)? {
                keep = false;
                break;
            }
        }
        if keep {
            out.push(env);
        }
        // Advance the odometer, last variable fastest.
        let mut i = point.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            point[i] += 1;
            if point[i] < ranges[i].1 {
                break;
            }
            point[i] = ranges[i].0;
        }
    }
}

/// The scan window for the new domain: `off` plus the signed extent, in
/// whichever order puts the smaller end first.
fn image_window(
    p: &LinearPattern,
    d: &DomainSpec,
    rr: &RewriteResult,
    b: &Binding,
) -> Result<(BigInt, BigInt), OracleError> {
    let empty = VarEnv::new();
    let off = eval_int(&rr.offset, b, &empty)?;
    let k = p.k();
    let size = d
        .size(&p.vars[k - 1])
        .ok_or_else(|| OracleError::UnboundedDomain(p.vars[k - 1].clone()))?;
    let extent = eval_int(&p.coeffs[k - 1].mul(&size).to_expr(), b, &empty)?;
    let zero = BigInt::from(0);
    let lo = &off + extent.clone().min(zero.clone());
    let hi = &off + extent.max(zero);
    Ok((lo, hi))
}

/// Enumerates the integers accepted by the rewritten domain within its scan
/// window, for one assignment of the non-pattern variables.
pub fn enumerate_y(
    rr: &RewriteResult,
    p: &LinearPattern,
    d: &DomainSpec,
    b: &Binding,
    extra_env: &VarEnv,
    cap: usize,
) -> Result<Vec<BigInt>, OracleError> {
    let (lo, hi) = image_window(p, d, rr, b)?;
    let width = &hi - &lo + 1;
    if width > BigInt::from(cap) {
        return Err(OracleError::CapExceeded { needed: width, cap });
    }
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        let mut env = extra_env.clone();
        env.insert(rr.fresh.clone(), x.clone());
        if eval_bool(&rr.domain, b, &env)? {
            out.push(x.clone());
        }
        x += 1;
    }
    Ok(out)
}

/// Pointwise re-check of the prefix-bound condition over the enumerated
/// domain.  Returns the first violating tuple, if any.
pub fn brute_eq4(
    p: &LinearPattern,
    d: &DomainSpec,
    full_x: &[VarEnv],
    sign: SignClass,
    b: &Binding,
) -> Result<Option<String>, OracleError> {
    let empty = VarEnv::new();
    let k = p.k();
    let abs_a: Vec<BigInt> = (0..k)
        .map(|j| eval_int(&abs_nf(&p.coeffs[j], sign).to_expr(), b, &empty))
        .collect::<Result<_, _>>()?;
    let lows: Vec<BigInt> = (0..k)
        .map(|j| eval_int(&d.lower(&p.vars[j]).to_expr(), b, &empty))
        .collect::<Result<_, _>>()?;
    let mut seen = BTreeSet::new();
    for env in full_x {
        let tuple: Vec<BigInt> = p.vars.iter().map(|v| env[v].clone()).collect();
        if !seen.insert(tuple.clone()) {
            continue;
        }
        let mut prefix = BigInt::zero();
        for i in 0..k - 1 {
            prefix += &abs_a[i] * (&tuple[i] - &lows[i]);
            if prefix >= abs_a[i + 1] {
                return Ok(Some(format!(
                    "prefix sum {prefix} not below |a_{}| = {} at ({})",
                    i + 2,
                    abs_a[i + 1],
                    tuple
                        .iter()
                        .map(|t| t.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
        }
    }
    Ok(None)
}

struct BijectionOutcome {
    x_size: usize,
    y_size: usize,
    injective: bool,
    image_matches: bool,
    inverses_hold: bool,
    counterexample: Option<String>,
}

/// Splits the full enumeration into slices sharing the same values of the
/// non-pattern variables.
fn slices(
    full_x: &[VarEnv],
    extra: &[String],
) -> Vec<(VarEnv, Vec<VarEnv>)> {
    let mut map: BTreeMap<Vec<BigInt>, (VarEnv, Vec<VarEnv>)> = BTreeMap::new();
    for env in full_x {
        let key: Vec<BigInt> = extra.iter().map(|v| env[v].clone()).collect();
        let entry = map.entry(key).or_insert_with(|| {
            let slice_env: VarEnv = extra
                .iter()
                .map(|v| (v.clone(), env[v].clone()))
                .collect();
            (slice_env, Vec::new())
        });
        entry.1.push(env.clone());
    }
    if map.is_empty() && extra.is_empty() {
        return vec![(VarEnv::new(), Vec::new())];
    }
    map.into_values().collect()
}

fn check_bijection(
    p: &LinearPattern,
    d: &DomainSpec,
    rr: &RewriteResult,
    full_x: &[VarEnv],
    b: &Binding,
    cap: usize,
) -> Result<BijectionOutcome, OracleError> {
    let extra: Vec<String> = rr.formula.vars[1..].to_vec();
    let index = p.to_nf().to_expr();
    let mut out = BijectionOutcome {
        x_size: full_x.len(),
        y_size: 0,
        injective: true,
        image_matches: true,
        inverses_hold: true,
        counterexample: None,
    };
    let note = |slot: &mut bool, cex: &mut Option<String>, msg: String| {
        *slot = false;
        if cex.is_none() {
            *cex = Some(msg);
        }
    };
    for (slice_env, members) in slices(full_x, &extra) {
        let mut image = BTreeMap::new();
        for env in &members {
            let v = eval_int(&index, b, env)?;
            if let Some(prev) = image.insert(v.clone(), env.clone()) {
                note(
                    &mut out.injective,
                    &mut out.counterexample,
                    format!("index value {v} reached twice (earlier tuple {prev:?})"),
                );
            }
        }
        let y = enumerate_y(rr, p, d, b, &slice_env, cap)?;
        out.y_size += y.len();
        let y_set: BTreeSet<&BigInt> = y.iter().collect();
        for v in image.keys() {
            if !y_set.contains(v) {
                note(
                    &mut out.image_matches,
                    &mut out.counterexample,
                    format!("image value {v} rejected by the new domain"),
                );
            }
        }
        for v in &y {
            if !image.contains_key(v) {
                note(
                    &mut out.image_matches,
                    &mut out.counterexample,
                    format!("domain member {v} is not the image of any tuple"),
                );
            }
        }
        // Recovered indices must send f(t) back to t ...
        for env in &members {
            let v = eval_int(&index, b, env)?;
            let mut back_env = slice_env.clone();
            back_env.insert(rr.fresh.clone(), v.clone());
            for (j, var) in p.vars.iter().enumerate() {
                let got = eval_int(&rr.inverses[j], b, &back_env)?;
                if got != env[var] {
                    note(
                        &mut out.inverses_hold,
                        &mut out.counterexample,
                        format!(
                            "recovering `{var}` from {v} gave {got}, expected {}",
                            env[var]
                        ),
                    );
                }
            }
        }
        // ... and the map must send recovered tuples back to the member.
        for v in &y {
            let mut back_env = slice_env.clone();
            back_env.insert(rr.fresh.clone(), v.clone());
            let mut env = slice_env.clone();
            for (j, var) in p.vars.iter().enumerate() {
                env.insert(var.clone(), eval_int(&rr.inverses[j], b, &back_env)?);
            }
            let round = eval_int(&index, b, &env)?;
            if round != *v {
                note(
                    &mut out.inverses_hold,
                    &mut out.counterexample,
                    format!("round trip of {v} through the recovered tuple gave {round}"),
                );
            }
        }
    }
    Ok(out)
}

fn check_equivalence(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
    rr: &RewriteResult,
    full_x: &[VarEnv],
    b: &Binding,
    seeds: &[u64],
    cap: usize,
) -> Result<(Vec<(u64, bool)>, Option<String>), OracleError> {
    let extra: Vec<String> = rr.formula.vars[1..].to_vec();
    let mut new_envs = Vec::new();
    for (slice_env, _) in slices(full_x, &extra) {
        for v in enumerate_y(rr, p, d, b, &slice_env, cap)? {
            let mut env = slice_env.clone();
            env.insert(rr.fresh.clone(), v);
            new_envs.push(env);
        }
    }
    let mut results = Vec::new();
    let mut cex = None;
    for &seed in seeds {
        let mut bs = b.clone();
        bs.set_seed(seed);
        let eval_all = |body: &Expr, envs: &[VarEnv]| -> Result<bool, String> {
            for env in envs {
                match eval_bool(body, &bs, env) {
                    Ok(true) => {}
                    Ok(false) => return Ok(false),
                    Err(e) => return Err(e.to_string()),
                }
            }
            Ok(true)
        };
        let (ok, msg) = match (
            eval_all(&f.body, full_x),
            eval_all(&rr.formula.body, &new_envs),
        ) {
            (Ok(a), Ok(c)) if a == c => (true, None),
            (Ok(a), Ok(c)) => (
                false,
                Some(format!(
                    "seed {seed}: original is {a}, rewritten is {c}"
                )),
            ),
            (Err(e), _) | (_, Err(e)) => {
                (false, Some(format!("seed {seed}: body evaluation failed: {e}")))
            }
        };
        results.push((seed, ok));
        if cex.is_none() {
            cex = msg;
        }
    }
    Ok((results, cex))
}

/// Runs the full battery for one instance: bijection and inverse laws first,
/// then the pointwise prefix-bound check, then truth equality per seed.
#[allow(clippy::too_many_arguments)]
pub fn run_oracle(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
    rr: &RewriteResult,
    sign: SignClass,
    b: &Binding,
    seeds: &[u64],
    cap: usize,
) -> Result<OracleReport, OracleError> {
    let full_x = enumerate_x(d, &f.vars, b, cap)?;
    let bij = check_bijection(p, d, rr, &full_x, b, cap)?;
    let eq4 = brute_eq4(p, d, &full_x, sign, b)?;
    let (seed_results, equiv_cex) =
        check_equivalence(f, p, d, rr, &full_x, b, seeds, cap)?;
    let mut counterexample = bij.counterexample;
    if counterexample.is_none() {
        counterexample = eq4.clone();
    }
    if counterexample.is_none() {
        counterexample = equiv_cex;
    }
    Ok(OracleReport {
        description: describe(b),
        x_size: bij.x_size,
        y_size: bij.y_size,
        injective: bij.injective,
        image_matches: bij.image_matches,
        inverses_hold: bij.inverses_hold,
        eq4_holds: eq4.is_none(),
        seed_results,
        counterexample,
    })
}
