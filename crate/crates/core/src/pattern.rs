//! Recognition of linear index shapes and decomposition of quantifier
//! domains into per-variable bounds plus a residual constraint.
//!
//! An index expression matches when it normalizes to `Σ aᵢ·xᵢ + b` with
//! every coefficient and the offset free of bound variables.  A domain
//! is split into recognized bounds (`minᵢ ≤ xᵢ`, `xᵢ < maxᵢ`) and the
//! residual constraint `C`; the conjunction of both parts is logically
//! identical to the original domain — conjuncts are partitioned, never
//! dropped.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::conditions::{check_all, fast_path_score, ConditionReport};
use crate::entails::FactSet;
use crate::expr::{CmpOp, Expr};
use crate::normal::{normalize, NormalForm};

/// A matched linear index: `index = Σ coeffs[i]·vars[i] + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPattern {
    /// Pattern variables in their current order (`x₁ .. x_k`, k ≥ 1).
    pub vars: Vec<String>,
    /// Coefficients `a₁ .. a_k`, free of bound variables.
    pub coeffs: Vec<NormalForm>,
    /// Constant offset `b`, free of bound variables.
    pub offset: NormalForm,
    /// Array symbol of the matched access, when found via a site scan.
    pub array: Option<String>,
    /// Child-index path of the access from the body root.
    pub path: Vec<usize>,
}

impl LinearPattern {
    pub fn k(&self) -> usize {
        self.vars.len()
    }

    /// Reconstruct `Σ aᵢ·xᵢ + b` as a normal form.
    pub fn to_nf(&self) -> NormalForm {
        let mut acc = self.offset.clone();
        for (v, a) in self.vars.iter().zip(&self.coeffs) {
            acc = acc.add(&a.mul(&NormalForm::var(v)));
        }
        acc
    }

    /// The same pattern with variables (and coefficients) permuted.
    pub fn permuted(&self, order: &[usize]) -> LinearPattern {
        LinearPattern {
            vars: order.iter().map(|&i| self.vars[i].clone()).collect(),
            coeffs: order.iter().map(|&i| self.coeffs[i].clone()).collect(),
            offset: self.offset.clone(),
            array: self.array.clone(),
            path: self.path.clone(),
        }
    }
}

/// Why an index failed to match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternError {
    /// A bound variable occurs squared, in a product of bound variables,
    /// or inside a `/`, `%`, `abs`, or access atom.
    NotLinear,
    /// No bound variable has a nonzero coefficient in the index.
    NoPatternVariables,
}

impl std::fmt::Display for PatternError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PatternError::NotLinear => {
                write!(f, "index is not linear in the bound variables")
            }
            PatternError::NoPatternVariables => {
                write!(f, "index does not involve any bound variable")
            }
        }
    }
}

/// Match `index` against the linear shape over `vars`.
///
/// Variables with zero coefficient are excluded from the returned
/// pattern; they stay ordinary quantified variables at the call site.
pub fn detect_linear(index: &Expr, vars: &[String]) -> Result<LinearPattern, PatternError> {
    let nf = normalize(index);
    let owned: Vec<String> = vars.to_vec();
    let Some((coeff_map, offset)) = nf.split_linear(&owned) else {
        return Err(PatternError::NotLinear);
    };
    let mut pat_vars = Vec::new();
    let mut coeffs = Vec::new();
    for v in vars {
        if let Some(c) = coeff_map.get(v) {
            pat_vars.push(v.clone());
            coeffs.push(c.clone());
        }
    }
    if pat_vars.is_empty() {
        return Err(PatternError::NoPatternVariables);
    }
    Ok(LinearPattern {
        vars: pat_vars,
        coeffs,
        offset,
        array: None,
        path: Vec::new(),
    })
}

/// Per-variable bounds and residual constraint of a domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSpec {
    /// Chosen lower bound (inclusive) per variable.
    pub lowers: BTreeMap<String, NormalForm>,
    /// Chosen upper bound (exclusive) per variable, where present.
    pub uppers: BTreeMap<String, NormalForm>,
    /// Residual conjuncts `C`, in original order.
    pub residual: Vec<Expr>,
}

impl DomainSpec {
    pub fn lower(&self, var: &str) -> &NormalForm {
        &self.lowers[var]
    }

    pub fn upper(&self, var: &str) -> Option<&NormalForm> {
        self.uppers.get(var)
    }

    /// `maxᵢ − minᵢ` where the upper bound exists.
    pub fn size(&self, var: &str) -> Option<NormalForm> {
        Some(self.uppers.get(var)?.sub(&self.lowers[var]))
    }

    /// The recognized bounds as boolean conjuncts, in variable order.
    pub fn bound_conjuncts(&self, order: &[String]) -> Vec<Expr> {
        let mut out = Vec::new();
        for v in order {
            if let Some(lo) = self.lowers.get(v) {
                out.push(Expr::le(lo.to_expr(), Expr::var(v)));
            }
            if let Some(hi) = self.uppers.get(v) {
                out.push(Expr::lt(Expr::var(v), hi.to_expr()));
            }
        }
        out
    }

    /// The residual constraint as one expression (`true` when empty).
    pub fn residual_expr(&self) -> Expr {
        Expr::conjoin(self.residual.clone())
    }
}

/// Why a domain cannot be decomposed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainError {
    MissingLowerBound(String),
    MissingUpperBoundLast(String),
    /// The domain is not a conjunction (top-level `||`, `==>`, or `!`).
    Unsupported,
}

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainError::MissingLowerBound(v) => {
                write!(f, "no lower bound recognized for `{v}`")
            }
            DomainError::MissingUpperBoundLast(v) => {
                write!(f, "no upper bound recognized for the last variable `{v}`")
            }
            DomainError::Unsupported => write!(f, "domain is not a conjunction"),
        }
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum BoundKind {
    Lower,
    Upper,
}

/// Split a domain over the given (ordered) pattern variables.
pub fn extract_domain(domain: &Expr, vars: &[String]) -> Result<DomainSpec, DomainError> {
    if matches!(domain, Expr::Or(..) | Expr::Implies(..) | Expr::Not(..)) {
        return Err(DomainError::Unsupported);
    }
    let mut spec = DomainSpec::default();
    // Chosen bound and the conjunct it came from, per (variable, side).
    let mut chosen: BTreeMap<(String, bool), (NormalForm, Expr)> = BTreeMap::new();

    for conjunct in domain.conjuncts() {
        match classify_bound(conjunct, vars) {
            Some((var, kind, bound)) => {
                let key = (var.clone(), matches!(kind, BoundKind::Lower));
                match chosen.get_mut(&key) {
                    None => {
                        chosen.insert(key, (bound, conjunct.clone()));
                    }
                    Some(current) => {
                        // Tightest wins: largest lower, smallest upper.
                        // Incomparable candidates keep the incumbent.
                        let diff = bound.sub(&current.0);
                        let replaces = match (diff.as_constant(), kind) {
                            (Some(c), BoundKind::Lower) => c.is_positive(),
                            (Some(c), BoundKind::Upper) => c.is_negative(),
                            (None, _) => false,
                        };
                        if replaces {
                            let (_, displaced) =
                                std::mem::replace(current, (bound, conjunct.clone()));
                            spec.residual.push(displaced);
                        } else {
                            spec.residual.push(conjunct.clone());
                        }
                    }
                }
            }
            None => spec.residual.push(conjunct.clone()),
        }
    }

    for ((var, is_lower), (bound, _)) in chosen {
        if is_lower {
            spec.lowers.insert(var, bound);
        } else {
            spec.uppers.insert(var, bound);
        }
    }

    for v in vars {
        if !spec.lowers.contains_key(v) {
            return Err(DomainError::MissingLowerBound(v.clone()));
        }
    }
    if let Some(last) = vars.last() {
        if !spec.uppers.contains_key(last) {
            return Err(DomainError::MissingUpperBoundLast(last.clone()));
        }
    }
    Ok(spec)
}

/// Recognize `conjunct` as a bound on exactly one of `vars`.
///
/// Strict forms are converted to the canonical inclusive-lower /
/// exclusive-upper shape: `e < x` becomes `e+1 ≤ x` and `x ≤ e` becomes
/// `x < e+1`.
fn classify_bound(conjunct: &Expr, vars: &[String]) -> Option<(String, BoundKind, NormalForm)> {
    let Expr::Cmp(op @ (CmpOp::Lt | CmpOp::Le), l, r) = conjunct else {
        return None;
    };
    // The conjunct means  r − l > 0  (Lt)  or  r − l ≥ 0  (Le).
    let nf = normalize(r).sub(&normalize(l));
    let owned: Vec<String> = vars.to_vec();
    let (coeff_map, rest) = nf.split_linear(&owned)?;
    if coeff_map.len() != 1 {
        return None;
    }
    let (var, coeff) = coeff_map.into_iter().next().unwrap();
    let c = coeff.as_constant()?;
    let one = BigInt::one();
    let strict = matches!(op, CmpOp::Lt);
    if c == one {
        // x + rest ≥ 0  ⇔  x ≥ −rest; strict adds one.
        let mut min = rest.neg();
        if strict {
            min = min.add(&NormalForm::constant(one));
        }
        Some((var, BoundKind::Lower, min))
    } else if c == -&one {
        // −x + rest ≥ 0  ⇔  x ≤ rest  ⇔  x < rest + 1; strict is direct.
        let mut max = rest;
        if !strict {
            max = max.add(&NormalForm::constant(one));
        }
        Some((var, BoundKind::Upper, max))
    } else {
        None
    }
}

/// One array access whose index mentions a bound variable.
#[derive(Debug, Clone)]
pub struct CandidateSite {
    pub array: String,
    /// Child-index path from the body root to the access node.
    pub path: Vec<usize>,
    pub index: Expr,
    /// True when the user marked the access as a trigger.
    pub trigger: bool,
    pub pattern: Result<LinearPattern, PatternError>,
}

/// All access sites whose index mentions at least one bound variable,
/// user-marked triggers first, then source order.
pub fn find_sites(body: &Expr, vars: &[String]) -> Vec<CandidateSite> {
    let mut found = Vec::new();
    let mut path = Vec::new();
    scan(body, vars, &mut path, &mut found);
    let (marked, rest): (Vec<_>, Vec<_>) = found.into_iter().partition(|s: &CandidateSite| s.trigger);
    let mut out = marked;
    out.extend(rest);
    out
}

fn scan(e: &Expr, vars: &[String], path: &mut Vec<usize>, out: &mut Vec<CandidateSite>) {
    if let Expr::Access {
        array,
        index,
        trigger,
    } = e
    {
        if index.mentions_any_var(vars) {
            let pattern = detect_linear(index, vars).map(|mut p| {
                p.array = Some(array.clone());
                p.path = path.clone();
                p
            });
            out.push(CandidateSite {
                array: array.clone(),
                path: path.clone(),
                index: (**index).clone(),
                trigger: *trigger,
                pattern,
            });
        }
    }
    for (i, child) in e.children().into_iter().enumerate() {
        path.push(i);
        scan(child, vars, path, out);
        path.pop();
    }
}

/// Find a variable order accepted by the condition checker.
///
/// Tries the declaration order first, then other permutations ranked by
/// how far the fast-path chain succeeds; if nothing is accepted the
/// declaration order comes back with the checker's verdicts attached.
pub fn order_variables(
    p: &LinearPattern,
    d: &DomainSpec,
    facts: &FactSet,
) -> (LinearPattern, ConditionReport) {
    let declared = check_all(p, d, facts);
    if declared.all_proven() {
        return (p.clone(), declared);
    }
    let k = p.k();
    if k > 1 && k <= 6 {
        let mut perms: Vec<Vec<usize>> = permutations(k);
        perms.retain(|perm| {
            // Skip the declaration order (already tried) and orders whose
            // final variable has no upper bound.
            perm.iter().enumerate().any(|(i, &j)| i != j)
                && d.uppers.contains_key(&p.vars[*perm.last().unwrap()])
        });
        let mut ranked: Vec<(usize, Vec<usize>)> = perms
            .into_iter()
            .map(|perm| {
                let candidate = p.permuted(&perm);
                (fast_path_score(&candidate, d, facts), perm)
            })
            .collect();
        // Highest score first; ties stay in lexicographic permutation order.
        ranked.sort_by(|a, b| b.0.cmp(&a.0));
        for (_, perm) in ranked {
            let candidate = p.permuted(&perm);
            let report = check_all(&candidate, d, facts);
            if report.all_proven() {
                return (candidate, report);
            }
        }
    }
    (p.clone(), declared)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut used = vec![false; k];
    fn rec(k: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(k, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(k, &mut current, &mut used, &mut out);
    out
}
