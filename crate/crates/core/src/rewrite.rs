//! Construction of the single-variable replacement quantifier.
//!
//! Once a linear access pattern has been detected, its domain decomposed, and
//! the side conditions proven, this module builds the new quantifier: a fresh
//! variable ranging over the image of the index map, a domain that recovers
//! the original tuple through `div`/`mod` chains, and a body whose matched
//! accesses are indexed by the fresh variable alone.  The resulting trigger
//! contains no arithmetic, so solvers can instantiate on the array access
//! itself.
//!
//! For strides that other tooling must keep opaque, [`wrap_site`] offers the
//! milder alternative: the index is wrapped in an uninterpreted-looking
//! `acc1d` application whose arguments are all pure.

use std::collections::BTreeMap;

use crate::conditions::{abs_nf, SignClass};
use crate::dsl::QuantifiedFormula;
use crate::entails::FactSet;
use crate::expr::{substitute, Expr};
use crate::normal::{normalize, NormalForm};
use crate::pattern::{DomainSpec, LinearPattern};
use crate::simplify::simplify_traced;

/// Everything produced by one successful rewrite.
#[derive(Debug, Clone)]
pub struct RewriteResult {
    /// Name of the fresh quantified variable.
    pub fresh: String,
    /// The image offset `sum_i a_i * min_i + b`.
    pub offset: Expr,
    /// Distance terms, innermost first; the last is `abs(x - offset)`.
    pub bases: Vec<Expr>,
    /// Recovered original indices, innermost first.
    pub inverses: Vec<Expr>,
    /// The simplified replacement domain.
    pub domain: Expr,
    /// The rewritten quantifier.
    pub formula: QuantifiedFormula,
    /// Simplification rules that fired while cleaning the domain.
    pub rules: Vec<&'static str>,
}

/// Picks a variable name not used anywhere in the formula or symbol table.
pub fn fresh_name(f: &QuantifiedFormula, taken: &[String]) -> String {
    let mut used: std::collections::BTreeSet<String> = taken.iter().cloned().collect();
    used.extend(f.vars.iter().cloned());
    let mut vars = std::collections::BTreeSet::new();
    f.domain.collect_vars(&mut vars);
    f.body.collect_vars(&mut vars);
    used.extend(vars);
    let mut params = std::collections::BTreeSet::new();
    f.domain.collect_params(&mut params);
    f.body.collect_params(&mut params);
    used.extend(params);
    if !used.contains("x") {
        return "x".to_string();
    }
    let mut i = 0usize;
    loop {
        let cand = format!("x{i}");
        if !used.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// A deliberate defect injected into the construction, used to demonstrate
/// that the brute-force checks would notice a broken rewriter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Omit the divisibility conjunct from the new domain.
    DropDivisibility,
    /// Build the range conjuncts for the opposite coefficient sign.
    FlipSignBranch,
    /// Shift the image offset by one.
    OffsetShift,
    /// Use `mod` where the recovered indices need `div`.
    SwapDivMod,
    /// Omit the residual constraint from the new domain.
    DropResidualFold,
    /// Omit the folded upper bounds of the inner variables.
    DropBoundFold,
}

impl Mutation {
    pub const ALL: [Mutation; 6] = [
        Mutation::DropDivisibility,
        Mutation::FlipSignBranch,
        Mutation::OffsetShift,
        Mutation::SwapDivMod,
        Mutation::DropResidualFold,
        Mutation::DropBoundFold,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Mutation::DropDivisibility => "drop-divisibility",
            Mutation::FlipSignBranch => "flip-sign-branch",
            Mutation::OffsetShift => "offset-shift",
            Mutation::SwapDivMod => "swap-div-mod",
            Mutation::DropResidualFold => "drop-c-fold",
            Mutation::DropBoundFold => "drop-bound-fold",
        }
    }

    pub fn parse(s: &str) -> Option<Mutation> {
        // "off+1" is the shorthand the oracle flag documents.
        if s == "off+1" {
            return Some(Mutation::OffsetShift);
        }
        Mutation::ALL.into_iter().find(|m| m.label() == s)
    }
}

/// Builds the replacement quantifier for an ordered, fully proven pattern.
///
/// `p` must already be in the order the side conditions were proven for, and
/// `facts` are the declared parameter facts — the only knowledge the domain
/// simplifier is allowed to use.
pub fn rewrite_site(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
    sign: SignClass,
    facts: &FactSet,
    fresh: &str,
) -> RewriteResult {
    build(f, p, d, sign, facts, fresh, None)
}

/// [`rewrite_site`] with one deliberate defect, for oracle sensitivity runs.
pub fn rewrite_site_mutated(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
    sign: SignClass,
    facts: &FactSet,
    fresh: &str,
    mutation: Mutation,
) -> RewriteResult {
    build(f, p, d, sign, facts, fresh, Some(mutation))
}

fn build(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
    sign: SignClass,
    facts: &FactSet,
    fresh: &str,
    mutation: Option<Mutation>,
) -> RewriteResult {
    let k = p.k();
    let lowers: Vec<NormalForm> = p.vars.iter().map(|v| d.lower(v).clone()).collect();
    let abs_coeffs: Vec<NormalForm> = p.coeffs.iter().map(|a| abs_nf(a, sign)).collect();

    // off = sum_i a_i * min_i + b
    let mut off_nf = p.offset.clone();
    for (a, lo) in p.coeffs.iter().zip(&lowers) {
        off_nf = off_nf.add(&a.mul(lo));
    }
    if mutation == Some(Mutation::OffsetShift) {
        off_nf = off_nf.add(&NormalForm::constant(num_bigint::BigInt::from(1)));
    }
    let offset = off_nf.to_expr();
    let diff = || Expr::sub(Expr::var(fresh), offset.clone());

    // bases, outermost to innermost: |x - off|, then successive remainders.
    let mut bases = vec![Expr::Int(num_bigint::BigInt::from(0)); k];
    bases[k - 1] = Expr::abs(diff());
    for j in (0..k - 1).rev() {
        bases[j] = Expr::rem(bases[j + 1].clone(), abs_coeffs[j + 1].to_expr());
    }
    let recover = if mutation == Some(Mutation::SwapDivMod) {
        Expr::rem
    } else {
        Expr::div
    };
    let inverses: Vec<Expr> = (0..k)
        .map(|j| {
            Expr::add(
                recover(bases[j].clone(), abs_coeffs[j].to_expr()),
                lowers[j].to_expr(),
            )
        })
        .collect();

    // Residual constraint, with accompanying bounds of quantified variables
    // that are not part of the pattern.
    let extra: Vec<String> = f
        .vars
        .iter()
        .filter(|v| !p.vars.contains(v))
        .cloned()
        .collect();
    let mut conjuncts: Vec<Expr> = d.bound_conjuncts(&extra);
    if mutation != Some(Mutation::DropResidualFold) {
        conjuncts.extend(d.residual.iter().cloned());
    }
    let map: BTreeMap<String, Expr> = p
        .vars
        .iter()
        .cloned()
        .zip(inverses.iter().cloned())
        .collect();
    let mut parts: Vec<Expr> = conjuncts
        .iter()
        .map(|c| substitute(c, &map).expect("recovered indices are integer-sorted"))
        .collect();

    // Upper bounds of the inner variables, folded through the inverse.
    if mutation != Some(Mutation::DropBoundFold) {
        for j in 0..k - 1 {
            if let Some(hi) = d.upper(&p.vars[j]) {
                parts.push(Expr::lt(inverses[j].clone(), hi.to_expr()));
            }
        }
    }

    // Divisibility: the innermost distance is an exact multiple of |a_1|.
    if mutation != Some(Mutation::DropDivisibility) {
        parts.push(Expr::eq(
            Expr::rem(bases[0].clone(), abs_coeffs[0].to_expr()),
            Expr::int(0),
        ));
    }

    // Image range, oriented by the shared coefficient sign.
    let size = d
        .size(&p.vars[k - 1])
        .expect("proven extent implies an upper bound");
    let extent = p.coeffs[k - 1].mul(&size).to_expr();
    let mut range_sign = sign;
    if mutation == Some(Mutation::FlipSignBranch) {
        range_sign = match sign {
            SignClass::Positive => SignClass::Negative,
            SignClass::Negative => SignClass::Positive,
        };
    }
    match range_sign {
        SignClass::Positive => {
            parts.push(Expr::le(Expr::int(0), diff()));
            parts.push(Expr::lt(diff(), extent));
        }
        SignClass::Negative => {
            parts.push(Expr::lt(extent, diff()));
            parts.push(Expr::le(diff(), Expr::int(0)));
        }
    }

    let (domain, rules) = simplify_traced(&Expr::conjoin(parts), facts);

    // Replace every access whose index is the pattern, across all arrays.
    let target = p.to_nf();
    let body = f.body.clone().map_accesses(&mut |acc| match acc {
        Expr::Access {
            array,
            index,
            trigger,
        } if normalize(&index) == target => Expr::Access {
            array,
            index: Box::new(Expr::var(fresh)),
            trigger,
        },
        other => other,
    });

    let mut vars = vec![fresh.to_string()];
    vars.extend(extra);
    let formula = QuantifiedFormula {
        vars,
        domain: domain.clone(),
        body,
        span: f.span,
    };
    RewriteResult {
        fresh: fresh.to_string(),
        offset,
        bases,
        inverses,
        domain,
        formula,
        rules,
    }
}

/// Wraps matched single-variable accesses in `acc1d(x, b, n, a)` instead of
/// requantifying.  The wrapper evaluates to `x * a + b`, so the formula is
/// unchanged semantically, but the access argument a matcher sees is the bare
/// variable.  Returns `None` unless the pattern has exactly one variable with
/// a recognized extent.
pub fn wrap_site(
    f: &QuantifiedFormula,
    p: &LinearPattern,
    d: &DomainSpec,
) -> Option<QuantifiedFormula> {
    if p.k() != 1 {
        return None;
    }
    let var = &p.vars[0];
    let n = d.size(var)?.to_expr();
    let b = p.offset.to_expr();
    let a = p.coeffs[0].to_expr();
    let target = p.to_nf();
    let var = var.clone();
    let body = f.body.clone().map_accesses(&mut |acc| match acc {
        Expr::Access {
            array,
            index,
            trigger,
        } if normalize(&index) == target => Expr::Access {
            array,
            index: Box::new(Expr::acc1d(
                Expr::var(&var),
                b.clone(),
                n.clone(),
                a.clone(),
            )),
            trigger,
        },
        other => other,
    });
    Some(QuantifiedFormula {
        vars: f.vars.clone(),
        domain: f.domain.clone(),
        body,
        span: f.span,
    })
}
