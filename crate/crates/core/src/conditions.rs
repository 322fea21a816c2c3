//! The four side conditions a matched pattern must satisfy before the
//! rewrite is sound, decided conservatively:
//!
//! 1. the last extent is positive (`n_k > 0`);
//! 2. every coefficient is nonzero;
//! 3. all coefficients agree in sign (and the shared sign is known);
//! 4. each prefix stays inside the next stride:
//!    `Σ_{j≤i} |a_j|·(x_j − min_j) < |a_{i+1}|` over the domain.
//!
//! Condition 4 is checked per position with two cheap sufficient checks
//! before the general entailment query: exact stride composition
//! (`nᵢ·aᵢ = a_{i+1}` after normalization) and the magnitude inequality
//! (`|aᵢ|·nᵢ ≤ |a_{i+1}|`).  Either one at position i, together with the
//! conditions established for positions below, implies condition 4
//! there; the fallback asks the entailment engine directly under the
//! domain's own conjuncts.

use crate::dsl::print_expr;
use crate::entails::FactSet;
use crate::expr::Expr;
use crate::normal::NormalForm;
use crate::pattern::{DomainSpec, LinearPattern};
use crate::symtab::Verdict;

/// Shared sign of all coefficients once conditions 2–3 hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Positive,
    Negative,
}

/// How condition 4 was discharged at one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eq4Method {
    /// `nᵢ·aᵢ` normalizes to exactly `a_{i+1}`.
    FastPathEqual,
    /// `|aᵢ|·nᵢ ≤ |a_{i+1}|` proven from the parameter facts.
    FastPathLeq,
    /// Direct entailment of the prefix inequality under the domain.
    SymbolicFallback,
    Failed,
}

impl Eq4Method {
    /// Stable machine-readable label for reports.
    pub fn label(&self) -> &'static str {
        match self {
            Eq4Method::FastPathEqual => "fast-equal",
            Eq4Method::FastPathLeq => "fast-leq",
            Eq4Method::SymbolicFallback => "symbolic",
            Eq4Method::Failed => "failed",
        }
    }
}

/// Verdicts for all four conditions plus supporting detail.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Condition 1: `n_k > 0`.
    pub size_positive: Verdict,
    /// Condition 2: every `aᵢ ≠ 0`.
    pub coeffs_nonzero: Verdict,
    /// Condition 3: uniform, determined sign.
    pub signs_uniform: Verdict,
    /// Condition 4 overall.
    pub prefix_bounded: Verdict,
    /// Per-position method for condition 4 (`i = 1 .. k−1`).
    pub prefix_methods: Vec<Eq4Method>,
    /// The shared coefficient sign, when determined.
    pub sign: Option<SignClass>,
    /// First goal the checker could not settle, printable.
    pub unproven_goal: Option<String>,
}

impl ConditionReport {
    pub fn all_proven(&self) -> bool {
        self.size_positive.is_proven()
            && self.coeffs_nonzero.is_proven()
            && self.signs_uniform.is_proven()
            && self.prefix_bounded.is_proven()
    }
}

pub(crate) fn abs_nf(nf: &NormalForm, sign: SignClass) -> NormalForm {
    match sign {
        SignClass::Positive => nf.clone(),
        SignClass::Negative => nf.neg(),
    }
}

fn coeff_sign(facts: &FactSet, nf: &NormalForm) -> Option<SignClass> {
    if let Some(c) = nf.as_constant() {
        use num_traits::Signed;
        return if c.is_positive() {
            Some(SignClass::Positive)
        } else if c.is_negative() {
            Some(SignClass::Negative)
        } else {
            None
        };
    }
    if facts.entails_nonneg(nf, false) {
        Some(SignClass::Positive)
    } else if facts.entails_nonneg(&nf.neg(), false) {
        Some(SignClass::Negative)
    } else {
        None
    }
}

/// Check conditions 1–3.
pub fn check_side_conditions(
    p: &LinearPattern,
    d: &DomainSpec,
    facts: &FactSet,
) -> ConditionReport {
    let mut report = ConditionReport {
        size_positive: Verdict::Unknown(None),
        coeffs_nonzero: Verdict::Proven,
        signs_uniform: Verdict::Proven,
        prefix_bounded: Verdict::Unknown(Some("not checked".into())),
        prefix_methods: Vec::new(),
        sign: None,
        unproven_goal: None,
    };

    // Condition 1: the extent of the last variable is positive.
    let last = p.vars.last().expect("pattern has at least one variable");
    match d.size(last) {
        Some(size) => {
            let size_goal = Expr::lt(Expr::int(0), size.to_expr());
            report.size_positive = facts.entails(&size_goal);
            if !report.size_positive.is_proven() && report.unproven_goal.is_none() {
                report.unproven_goal = Some(print_expr(&size_goal));
            }
        }
        None => {
            report.size_positive = Verdict::Unknown(Some(format!(
                "no upper bound recognized for `{last}`"
            )));
            report.unproven_goal = Some(format!("{last} < ?"));
        }
    }

    // Condition 2: coefficients are nonzero.
    for a in &p.coeffs {
        let goal = Expr::ne(a.to_expr(), Expr::int(0));
        match facts.entails(&goal) {
            Verdict::Proven => {}
            v => {
                report.coeffs_nonzero = v;
                if report.unproven_goal.is_none() {
                    report.unproven_goal = Some(print_expr(&goal));
                }
                break;
            }
        }
    }

    // Condition 3: a single determined sign.
    let mut shared: Option<SignClass> = None;
    for a in &p.coeffs {
        match coeff_sign(facts, a) {
            None => {
                let text = print_expr(&a.to_expr());
                report.signs_uniform =
                    Verdict::Unknown(Some(format!("sign of `{text}` undetermined")));
                if report.unproven_goal.is_none() {
                    report.unproven_goal = Some(format!("0 <= {text} || {text} <= 0"));
                }
                shared = None;
                break;
            }
            Some(s) => match shared {
                None => shared = Some(s),
                Some(prev) if prev == s => {}
                Some(_) => {
                    report.signs_uniform =
                        Verdict::Refuted(Some("coefficient signs differ".into()));
                    shared = None;
                    break;
                }
            },
        }
    }
    if report.signs_uniform.is_proven() {
        report.sign = shared;
    }
    report
}

/// Check condition 4 for a pattern whose conditions 1–3 hold.
pub fn check_eq4(
    p: &LinearPattern,
    d: &DomainSpec,
    facts: &FactSet,
    sign: SignClass,
) -> (Verdict, Vec<Eq4Method>, Option<String>) {
    let k = p.k();
    let mut methods = Vec::new();
    for i in 0..k.saturating_sub(1) {
        let a_i = &p.coeffs[i];
        let a_next = &p.coeffs[i + 1];
        let var_i = &p.vars[i];

        if let Some(n_i) = d.size(var_i) {
            if facts.entails_nonneg(&n_i, true) {
                if n_i.mul(a_i) == *a_next {
                    methods.push(Eq4Method::FastPathEqual);
                    continue;
                }
                let leq_goal = abs_nf(a_next, sign).sub(&abs_nf(a_i, sign).mul(&n_i));
                if facts.entails_nonneg(&leq_goal, false) {
                    methods.push(Eq4Method::FastPathLeq);
                    continue;
                }
            }
        }

        // Fallback: ask directly under the domain's own conjuncts.
        let mut extended = facts.clone();
        for c in d.bound_conjuncts(&p.vars) {
            extended.assume(&c);
        }
        for c in &d.residual {
            extended.assume(c);
        }
        let mut prefix = NormalForm::zero();
        for j in 0..=i {
            let delta = NormalForm::var(&p.vars[j]).sub(d.lower(&p.vars[j]));
            prefix = prefix.add(&abs_nf(&p.coeffs[j], sign).mul(&delta));
        }
        let goal = abs_nf(a_next, sign).sub(&prefix);
        if extended.entails_nonneg(&goal, true) {
            methods.push(Eq4Method::SymbolicFallback);
            continue;
        }

        methods.push(Eq4Method::Failed);
        let text = format!(
            "{} < {}",
            print_expr(&prefix.to_expr()),
            print_expr(&abs_nf(a_next, sign).to_expr())
        );
        return (Verdict::Unknown(Some(text.clone())), methods, Some(text));
    }
    (Verdict::Proven, methods, None)
}

/// Run all four checks in order; condition 4 only once 1–3 hold.
pub fn check_all(p: &LinearPattern, d: &DomainSpec, facts: &FactSet) -> ConditionReport {
    let mut report = check_side_conditions(p, d, facts);
    if report.size_positive.is_proven()
        && report.coeffs_nonzero.is_proven()
        && report.signs_uniform.is_proven()
    {
        let sign = report.sign.expect("uniform sign implies a determined sign");
        let (verdict, methods, goal) = check_eq4(p, d, facts, sign);
        report.prefix_bounded = verdict;
        report.prefix_methods = methods;
        if report.unproven_goal.is_none() {
            report.unproven_goal = goal;
        }
    }
    report
}

/// How many leading positions a fast path accepts; used to rank
/// candidate variable orders.
pub fn fast_path_score(p: &LinearPattern, d: &DomainSpec, facts: &FactSet) -> usize {
    let sign = {
        let mut shared = None;
        for a in &p.coeffs {
            match (coeff_sign(facts, a), shared) {
                (None, _) => {
                    shared = None;
                    break;
                }
                (Some(s), None) => shared = Some(s),
                (Some(s), Some(prev)) => {
                    if s != prev {
                        shared = None;
                        break;
                    }
                }
            }
        }
        shared
    };
    let mut score = 0;
    for i in 0..p.k().saturating_sub(1) {
        let Some(n_i) = d.size(&p.vars[i]) else { break };
        if !facts.entails_nonneg(&n_i, true) {
            break;
        }
        if n_i.mul(&p.coeffs[i]) == p.coeffs[i + 1] {
            score += 1;
            continue;
        }
        if let Some(sign) = sign {
            let goal = abs_nf(&p.coeffs[i + 1], sign).sub(&abs_nf(&p.coeffs[i], sign).mul(&n_i));
            if facts.entails_nonneg(&goal, false) {
                score += 1;
                continue;
            }
        }
        break;
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, parse_expr_with};
    use crate::pattern::{detect_linear, extract_domain};

    fn setup(
        where_facts: &[&str],
        params: &[&str],
        index: &str,
        domain: &str,
        vars: &[&str],
    ) -> (LinearPattern, DomainSpec, FactSet) {
        let idx = parse_expr_with(index, params, &[], vars).unwrap();
        let dom = parse_expr_with(domain, params, &[], vars).unwrap();
        let owned: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let p = detect_linear(&idx, &owned).unwrap();
        let d = extract_domain(&dom, &p.vars).unwrap();
        let mut facts = FactSet::new();
        for f in where_facts {
            facts.assume(&parse_expr_with(f, params, &[], &[]).unwrap());
        }
        (p, d, facts)
    }

    #[test]
    fn constant_layout_passes_all_conditions() {
        let (p, d, facts) = setup(
            &[],
            &[],
            "10 * x3 + 4 * x2 + x1",
            "0 <= x1 && x1 < 4 && 0 <= x2 && x2 < 3 && 0 <= x3 && x3 < 2 && 4 * x2 + x1 < 10",
            &["x1", "x2", "x3"],
        );
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(report.sign, Some(SignClass::Positive));
        assert_eq!(
            report.prefix_methods,
            vec![Eq4Method::FastPathEqual, Eq4Method::SymbolicFallback]
        );
    }

    #[test]
    fn symbolic_coefficient_passes_with_where_facts() {
        let (p, d, facts) = setup(
            &["0 < gsize", "gsize <= n"],
            &["n", "gsize", "gtid"],
            "gtid + i * gsize",
            "0 <= i && i < n / gsize",
            &["i"],
        );
        assert_eq!(p.k(), 1);
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(report.sign, Some(SignClass::Positive));
        assert!(report.prefix_methods.is_empty(), "k=1 has no prefix entries");
    }

    #[test]
    fn mixed_signs_are_refuted() {
        let (p, d, facts) = setup(
            &[],
            &[],
            "2 * x1 - 6 * x2",
            "0 <= x1 && x1 < 3 && 0 <= x2 && x2 < 2",
            &["x1", "x2"],
        );
        let report = check_side_conditions(&p, &d, &facts);
        assert!(matches!(report.signs_uniform, Verdict::Refuted(_)));
    }

    #[test]
    fn undetermined_sign_is_unknown() {
        let (p, d, facts) = setup(
            &["s != 0"],
            &["s"],
            "x1 * s",
            "0 <= x1 && x1 < 4",
            &["x1"],
        );
        let report = check_side_conditions(&p, &d, &facts);
        assert!(report.coeffs_nonzero.is_proven());
        assert!(matches!(report.signs_uniform, Verdict::Unknown(_)));
    }

    #[test]
    fn unknown_extent_blocks_condition_one() {
        let (p, d, facts) = setup(&[], &["m"], "x1", "0 <= x1 && x1 < m", &["x1"]);
        let report = check_all(&p, &d, &facts);
        assert_eq!(report.size_positive, Verdict::Unknown(None));
        assert_eq!(report.unproven_goal.as_deref(), Some("0 < m"));
    }

    #[test]
    fn parametric_strides_use_both_fast_paths() {
        // Column-major layout with symbolic extents: strides 1, w, w*h.
        let (p, d, facts) = setup(
            &["0 < w", "0 < h", "0 < dd"],
            &["w", "h", "dd"],
            "x1 + w * x2 + w * h * x3",
            "0 <= x1 && x1 < w && 0 <= x2 && x2 < h && 0 <= x3 && x3 < dd",
            &["x1", "x2", "x3"],
        );
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(
            report.prefix_methods,
            vec![Eq4Method::FastPathEqual, Eq4Method::FastPathEqual]
        );
    }

    #[test]
    fn padding_layout_uses_the_magnitude_path() {
        let (p, d, facts) = setup(
            &[],
            &[],
            "x1 + 5 * x2",
            "0 <= x1 && x1 < 4 && 0 <= x2 && x2 < 3",
            &["x1", "x2"],
        );
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(report.prefix_methods, vec![Eq4Method::FastPathLeq]);
    }

    #[test]
    fn missing_inner_upper_bound_falls_back_directly() {
        // x1 has no upper bound conjunct, but the residual constrains it.
        let (p, d, facts) = setup(
            &[],
            &[],
            "x1 + 5 * x2",
            "0 <= x1 && 0 <= x2 && x2 < 3 && x1 + x2 < 5",
            &["x1", "x2"],
        );
        assert!(d.upper("x1").is_none());
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(report.prefix_methods, vec![Eq4Method::SymbolicFallback]);
    }

    #[test]
    fn negative_coefficients_pass_with_matching_signs() {
        let (p, d, facts) = setup(
            &[],
            &[],
            "-x1 - 4 * x2",
            "0 <= x1 && x1 < 4 && 0 <= x2 && x2 < 3",
            &["x1", "x2"],
        );
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
        assert_eq!(report.sign, Some(SignClass::Negative));
        assert_eq!(report.prefix_methods, vec![Eq4Method::FastPathEqual]);
    }

    #[test]
    fn overlapping_strides_fail_condition_four() {
        let (p, d, facts) = setup(
            &[],
            &[],
            "2 * x1 + 3 * x2",
            "0 <= x1 && x1 < 2 && 0 <= x2 && x2 < 3",
            &["x1", "x2"],
        );
        let report = check_all(&p, &d, &facts);
        assert!(matches!(report.prefix_bounded, Verdict::Unknown(_)));
        assert_eq!(report.prefix_methods, vec![Eq4Method::Failed]);
        assert!(report.unproven_goal.is_some());
    }

    #[test]
    fn fast_path_results_respect_brute_force() {
        // Wherever a fast path accepts position i, the prefix inequality
        // must hold on every point of the enumerated box.
        let layouts: Vec<(Vec<i64>, Vec<i64>)> = vec![
            (vec![1, 4], vec![4, 3]),
            (vec![1, 5], vec![4, 3]),
            (vec![2, 8], vec![4, 2]),
            (vec![-1, -4], vec![4, 3]),
            (vec![3, 12, 24], vec![4, 2, 2]),
        ];
        for (coeffs, extents) in layouts {
            let vars: Vec<String> = (1..=coeffs.len()).map(|i| format!("x{i}")).collect();
            let index = coeffs
                .iter()
                .zip(&vars)
                .map(|(a, v)| format!("{a} * {v}"))
                .collect::<Vec<_>>()
                .join(" + ");
            let domain = vars
                .iter()
                .zip(&extents)
                .map(|(v, n)| format!("0 <= {v} && {v} < {n}"))
                .collect::<Vec<_>>()
                .join(" && ");
            let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            let (p, d, facts) = setup(&[], &[], &index, &domain, &var_refs);
            let report = check_all(&p, &d, &facts);
            for (i, m) in report.prefix_methods.iter().enumerate() {
                if matches!(m, Eq4Method::FastPathEqual | Eq4Method::FastPathLeq) {
                    assert_prefix_bound_brute(&coeffs, &extents, i);
                }
            }
        }
    }

    fn assert_prefix_bound_brute(coeffs: &[i64], extents: &[i64], i: usize) {
        let mut point = vec![0i64; coeffs.len()];
        loop {
            let prefix: i64 = (0..=i).map(|j| coeffs[j].abs() * point[j]).sum();
            assert!(
                prefix < coeffs[i + 1].abs(),
                "prefix bound fails at {point:?} for coeffs {coeffs:?}"
            );
            let mut carry = 0;
            loop {
                if carry == point.len() {
                    return;
                }
                point[carry] += 1;
                if point[carry] < extents[carry] {
                    break;
                }
                point[carry] = 0;
                carry += 1;
            }
        }
    }

    #[test]
    fn report_surfaces_through_a_parsed_file() {
        let src = "\
param int gsize where gsize > 0;
param int n where n >= gsize && n % gsize == 0;
param int gtid where 0 <= gtid && gtid < gsize;
array int A;
forall int i; 0 <= i && i < n / gsize; A[i * gsize + gtid] == 0;
";
        let file = parse(src).unwrap();
        let q = file.quantifiers()[0].clone();
        let facts = FactSet::from_symtab(&file.symbol_table());
        let p = detect_linear(
            &parse_expr_with("i * gsize + gtid", &["gsize", "gtid"], &[], &["i"]).unwrap(),
            &q.vars,
        )
        .unwrap();
        let d = extract_domain(&q.domain, &p.vars).unwrap();
        let report = check_all(&p, &d, &facts);
        assert!(report.all_proven(), "report: {report:?}");
    }
}
