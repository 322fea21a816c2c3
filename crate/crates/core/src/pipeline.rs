//! End-to-end per-quantifier analysis: scan for candidate accesses, order
//! the pattern variables, prove the side conditions, rewrite, and repeat
//! until every index that can be a bare variable is one.
//!
//! Each pass rewrites at most one site — the first acceptable one, counting
//! user-marked accesses before source order — and then rescans, because a
//! rewrite changes every access sharing the pattern.  A site is skipped
//! when its variables already serve as bare trigger indices elsewhere;
//! substituting them away would destroy those earlier trigger positions.

use crate::conditions::{ConditionReport, SignClass};
use crate::dsl::{print_expr, QuantifiedFormula};
use crate::entails::FactSet;
use crate::pattern::{
    extract_domain, find_sites, order_variables, DomainError, DomainSpec, LinearPattern,
    PatternError,
};
use crate::rewrite::{
    fresh_name, rewrite_site, rewrite_site_mutated, wrap_site, Mutation, RewriteResult,
};
use crate::smt::pure_index;
use crate::symtab::SymbolTable;

/// Knobs for the driver.
#[derive(Debug, Clone)]
pub struct RewriteOptions {
    /// Wrap matched accesses in `acc1d` instead of requantifying.
    pub wrap: bool,
    /// Upper bound on rewrite passes over one quantifier.
    pub max_passes: usize,
    /// Deliberately corrupted output, for exercising the oracle.
    pub mutation: Option<Mutation>,
}

impl Default for RewriteOptions {
    fn default() -> RewriteOptions {
        RewriteOptions {
            wrap: false,
            max_passes: 4,
            mutation: None,
        }
    }
}

/// One accepted rewrite (or wrap) of one site.
#[derive(Debug, Clone)]
pub struct PassReport {
    pub array: String,
    pub index_text: String,
    /// Pattern in the proven variable order.
    pub pattern: LinearPattern,
    pub domain: DomainSpec,
    pub conditions: ConditionReport,
    pub sign: Option<SignClass>,
    /// Absent in wrapper mode, which changes no semantics.
    pub rewrite: Option<RewriteResult>,
}

/// One site that was examined and turned down, with a stable code.
#[derive(Debug, Clone)]
pub struct Refusal {
    pub array: String,
    pub index_text: String,
    pub code: &'static str,
    pub message: String,
    pub conditions: Option<ConditionReport>,
}

/// Everything the driver learned about one quantifier.
#[derive(Debug, Clone)]
pub struct QuantifierAnalysis {
    pub original: QuantifiedFormula,
    pub result: QuantifiedFormula,
    pub passes: Vec<PassReport>,
    /// Refusals from the final scan that made no progress.
    pub refusals: Vec<Refusal>,
    /// True when the body had no access worth examining.
    pub no_site: bool,
}

impl QuantifierAnalysis {
    pub fn changed(&self) -> bool {
        !self.passes.is_empty()
    }

    /// True when every examined site was handled; refusals mean work the
    /// driver had to leave undone.
    pub fn fully_accepted(&self) -> bool {
        self.refusals.is_empty() && !self.no_site
    }

    /// The code summarizing why nothing (more) could be done.
    pub fn primary_code(&self) -> Option<&'static str> {
        if self.no_site {
            return Some("no-site");
        }
        self.refusals.first().map(|r| r.code)
    }
}

fn domain_code(err: &DomainError) -> &'static str {
    match err {
        DomainError::MissingLowerBound(_) => "missing-lower-bound",
        DomainError::MissingUpperBoundLast(_) => "missing-upper-bound-last",
        DomainError::Unsupported => "unsupported-domain",
    }
}

/// Maps an unproven condition report to its diagnostic code, in condition
/// order.
fn condition_code(report: &ConditionReport) -> &'static str {
    use crate::symtab::Verdict;
    if !report.size_positive.is_proven() {
        return "eq1-unproven";
    }
    if !report.coeffs_nonzero.is_proven() {
        return "eq2-unproven";
    }
    match &report.signs_uniform {
        Verdict::Refuted(_) => return "eq3-refuted",
        Verdict::Unknown(_) => return "sign-undetermined",
        Verdict::Proven => {}
    }
    "eq4-unproven"
}

fn condition_message(report: &ConditionReport) -> String {
    match &report.unproven_goal {
        Some(goal) => format!("could not establish `{goal}`"),
        None => "side conditions not established".to_string(),
    }
}

/// Bound variables that already appear as a bare index (or the lead
/// argument of a pure `acc1d` index) somewhere in the body.
fn pure_trigger_vars(f: &QuantifiedFormula) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    f.body.for_each_access(&mut |acc| {
        if let crate::expr::Expr::Access { index, .. } = acc {
            if pure_index(index, &f.vars) {
                for v in &f.vars {
                    if index.mentions_var(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
    });
    out
}

/// Analyzes and, where the conditions allow, rewrites one quantifier.
pub fn analyze_quantifier(
    f: &QuantifiedFormula,
    table: &SymbolTable,
    opts: &RewriteOptions,
) -> QuantifierAnalysis {
    let facts = FactSet::from_symtab(table);

    let mut current = f.clone();
    let mut passes: Vec<PassReport> = Vec::new();
    let mut refusals: Vec<Refusal> = Vec::new();
    let mut no_site = false;
    let mut taken: Vec<String> = Vec::new();

    for _ in 0..opts.max_passes.max(1) {
        let sites = find_sites(&current.body, &current.vars);
        let mut examined_any = false;
        let mut progressed = false;
        let mut pass_refusals: Vec<Refusal> = Vec::new();
        let pure_vars = pure_trigger_vars(&current);

        for site in sites {
            if pure_index(&site.index, &current.vars) {
                continue; // already a trigger-friendly access
            }
            examined_any = true;
            let index_text = print_expr(&site.index);
            let refuse = |code, message, conditions| Refusal {
                array: site.array.clone(),
                index_text: index_text.clone(),
                code,
                message,
                conditions,
            };

            let p0 = match &site.pattern {
                Ok(p) => p.clone(),
                Err(e) => {
                    let code = match e {
                        PatternError::NotLinear => "not-linear",
                        PatternError::NoPatternVariables => "no-pattern-variables",
                    };
                    pass_refusals.push(refuse(code, e.to_string(), None));
                    continue;
                }
            };
            if let Some(v) = p0.vars.iter().find(|v| pure_vars.contains(v)) {
                pass_refusals.push(refuse(
                    "site-conflict",
                    format!("`{v}` already serves as a trigger index elsewhere in the body"),
                    None,
                ));
                continue;
            }
            let d = match extract_domain(&current.domain, &current.vars) {
                Ok(d) => d,
                Err(e) => {
                    pass_refusals.push(refuse(domain_code(&e), e.to_string(), None));
                    continue;
                }
            };
            if !p0.vars.iter().any(|v| d.uppers.contains_key(v)) {
                pass_refusals.push(refuse(
                    "missing-upper-bound-last",
                    "no pattern variable has a recognized upper bound".to_string(),
                    None,
                ));
                continue;
            }

            if opts.wrap {
                if p0.k() != 1 {
                    pass_refusals.push(refuse(
                        "wrap-not-1d",
                        format!(
                            "`acc1d` wraps one-variable indices; this one uses {}",
                            p0.k()
                        ),
                        None,
                    ));
                    continue;
                }
                let Some(wrapped) = wrap_site(&current, &p0, &d) else {
                    pass_refusals.push(refuse(
                        "missing-upper-bound-last",
                        format!("no upper bound recognized for `{}`", p0.vars[0]),
                        None,
                    ));
                    continue;
                };
                current = wrapped;
                passes.push(PassReport {
                    array: site.array.clone(),
                    index_text,
                    pattern: p0,
                    domain: d,
                    conditions: empty_report(),
                    sign: None,
                    rewrite: None,
                });
                progressed = true;
                break;
            }

            let (p, report) = order_variables(&p0, &d, &facts);
            if !report.all_proven() {
                pass_refusals.push(refuse(
                    condition_code(&report),
                    condition_message(&report),
                    Some(report),
                ));
                continue;
            }
            let sign = report.sign.expect("proven conditions carry a sign");
            let fresh = fresh_name(&current, &taken);
            taken.push(fresh.clone());
            let rr = match opts.mutation {
                Some(m) => rewrite_site_mutated(&current, &p, &d, sign, &facts, &fresh, m),
                None => rewrite_site(&current, &p, &d, sign, &facts, &fresh),
            };
            current = rr.formula.clone();
            passes.push(PassReport {
                array: site.array.clone(),
                index_text,
                pattern: p,
                domain: d,
                conditions: report,
                sign: Some(sign),
                rewrite: Some(rr),
            });
            progressed = true;
            break;
        }

        if !progressed {
            if !examined_any && passes.is_empty() {
                no_site = true;
            }
            refusals = pass_refusals;
            break;
        }
    }

    QuantifierAnalysis {
        original: f.clone(),
        result: current,
        passes,
        refusals,
        no_site,
    }
}

/// A report for operations that need none: everything trivially holds.
fn empty_report() -> ConditionReport {
    use crate::symtab::Verdict;
    ConditionReport {
        size_positive: Verdict::Proven,
        coeffs_nonzero: Verdict::Proven,
        signs_uniform: Verdict::Proven,
        prefix_bounded: Verdict::Proven,
        prefix_methods: Vec::new(),
        sign: None,
        unproven_goal: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, print_quantifier};

    fn analyze(src: &str, opts: &RewriteOptions) -> Vec<QuantifierAnalysis> {
        let file = parse(src).unwrap();
        let table = file.symbol_table();
        file.quantifiers()
            .iter()
            .map(|q| analyze_quantifier(q, &table, opts))
            .collect()
    }

    #[test]
    fn drives_the_strided_copy_end_to_end() {
        let src = "param int gtid;\n\
                   param int gsize where gsize > 0;\n\
                   param int n where n >= gsize;\n\
                   array int A;\narray int B;\n\
                   forall int i; 0 <= i && i < n / gsize; \
                   A[gtid + i * gsize] == B[gtid + i * gsize];\n";
        let out = analyze(src, &RewriteOptions::default());
        assert_eq!(out.len(), 1);
        let a = &out[0];
        assert!(a.changed());
        assert!(a.fully_accepted(), "{:?}", a.refusals);
        assert_eq!(a.passes.len(), 1);
        assert_eq!(
            print_quantifier(&a.result),
            "forall int x; abs(x - gtid) % gsize == 0 && 0 <= x - gtid && \
             x - gtid < gsize * (n / gsize); A[x] == B[x];"
        );
    }

    #[test]
    fn shuffled_variables_are_reordered() {
        // Declared order (x3, x1, x2) cannot satisfy the prefix condition;
        // the driver must find (x1, x2, x3).
        let src = "array int A;\n\
                   forall int x3, int x1, int x2; \
                   0 <= x1 && x1 < 4 && 0 <= x2 && x2 < 3 && 0 <= x3 && x3 < 2 \
                   && 4 * x2 + x1 < 10; \
                   A[10 * x3 + 4 * x2 + x1] >= 0;\n";
        let out = analyze(src, &RewriteOptions::default());
        let a = &out[0];
        assert!(a.changed(), "{:?}", a.refusals);
        assert_eq!(a.passes[0].pattern.vars, vec!["x1", "x2", "x3"]);
        assert_eq!(
            print_quantifier(&a.result),
            "forall int x; 0 <= x && x < 20; 0 <= A[x];"
        );
    }

    #[test]
    fn two_independent_sites_take_two_passes() {
        let src = "array int A;\narray int B;\n\
                   forall int i, int j; 0 <= i && i < 4 && 0 <= j && j < 5; \
                   A[2 * i] == B[3 * j + 1];\n";
        let out = analyze(src, &RewriteOptions::default());
        let a = &out[0];
        assert_eq!(a.passes.len(), 2, "{:?}", a.refusals);
        assert!(a.fully_accepted());
        let text = print_quantifier(&a.result);
        assert!(text.contains("A[x]"), "{text}");
        assert!(text.contains("B[x0]"), "{text}");
    }

    #[test]
    fn pass_limit_caps_the_rewrites() {
        let src = "array int A;\narray int B;\n\
                   forall int i, int j; 0 <= i && i < 4 && 0 <= j && j < 5; \
                   A[2 * i] == B[3 * j + 1];\n";
        let opts = RewriteOptions {
            max_passes: 1,
            ..RewriteOptions::default()
        };
        let a = &analyze(src, &opts)[0];
        assert_eq!(a.passes.len(), 1);
    }

    #[test]
    fn sites_sharing_a_variable_with_a_pure_index_are_refused() {
        let src = "array int A;\narray int B;\n\
                   forall int i; 0 <= i && i < 4; A[i] == B[2 * i + 1];\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert!(!a.changed());
        assert_eq!(a.primary_code(), Some("site-conflict"));
    }

    #[test]
    fn nonlinear_indices_are_refused() {
        let src = "param int c where c > 0;\narray int A;\n\
                   forall int i; 0 <= i && i < 8; A[i % c] == 0;\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert!(!a.changed());
        assert_eq!(a.primary_code(), Some("not-linear"));
    }

    #[test]
    fn missing_upper_bound_is_refused() {
        let src = "param int n where n > 0;\narray int A;\n\
                   forall int i; 0 <= i; A[2 * i] == 0;\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert_eq!(a.primary_code(), Some("missing-upper-bound-last"));
    }

    #[test]
    fn mixed_signs_are_refused() {
        let src = "array int A;\n\
                   forall int x1, int x2; \
                   0 <= x1 && x1 < 3 && 0 <= x2 && x2 < 4; \
                   A[2 * x1 - 6 * x2] == 0;\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert_eq!(a.primary_code(), Some("eq3-refuted"));
    }

    #[test]
    fn unprovable_extent_is_refused() {
        let src = "param int n;\narray int A;\n\
                   forall int i; 0 <= i && i < n; A[2 * i] == 0;\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert_eq!(a.primary_code(), Some("eq1-unproven"));
        let r = &a.refusals[0];
        assert!(r.message.contains("0 < n"), "{}", r.message);
    }

    #[test]
    fn bodies_without_accesses_report_no_site() {
        let src = "forall int i; 0 <= i && i < 4; i < 5;\n";
        let a = &analyze(src, &RewriteOptions::default())[0];
        assert!(a.no_site);
        assert_eq!(a.primary_code(), Some("no-site"));
    }

    #[test]
    fn wrapper_mode_leaves_the_quantifier_in_place() {
        let src = "param int gtid;\n\
                   param int gsize where gsize > 0;\n\
                   param int n where n >= gsize;\n\
                   array int A;\narray int B;\n\
                   forall int i; 0 <= i && i < n / gsize; \
                   A[gtid + i * gsize] == B[gtid + i * gsize];\n";
        let opts = RewriteOptions {
            wrap: true,
            ..RewriteOptions::default()
        };
        let a = &analyze(src, &opts)[0];
        assert!(a.changed());
        assert_eq!(
            print_quantifier(&a.result),
            "forall int i; 0 <= i && i < n / gsize; \
             A[acc1d(i, gtid, n / gsize, gsize)] == B[acc1d(i, gtid, n / gsize, gsize)];"
        );
    }

    #[test]
    fn wrapper_mode_refuses_multi_variable_sites() {
        let src = "array int A;\n\
                   forall int x1, int x2; \
                   0 <= x1 && x1 < 3 && 0 <= x2 && x2 < 4; \
                   A[3 * x2 + x1] == 0;\n";
        let opts = RewriteOptions {
            wrap: true,
            ..RewriteOptions::default()
        };
        let a = &analyze(src, &opts)[0];
        assert!(!a.changed());
        assert_eq!(a.primary_code(), Some("wrap-not-1d"));
    }

    #[test]
    fn mutations_flow_through_to_the_result() {
        let src = "array int A;\n\
                   forall int i; 0 <= i && i < 5; A[2 * i] == 0;\n";
        let clean = &analyze(src, &RewriteOptions::default())[0];
        let opts = RewriteOptions {
            mutation: Some(Mutation::OffsetShift),
            ..RewriteOptions::default()
        };
        let shifted = &analyze(src, &opts)[0];
        assert_ne!(
            print_quantifier(&clean.result),
            print_quantifier(&shifted.result)
        );
    }
}
