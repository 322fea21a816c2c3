//! Machine-readable report assembly.  One JSON document per invocation,
//! printed to the error stream so standard output stays clean for the
//! rewritten text (or SMT script).  Identical invocations produce
//! byte-identical documents: no timestamps, sorted keys.

use serde_json::{json, Value};
use triggerforge_core::conditions::{ConditionReport, Eq4Method, SignClass};
use triggerforge_core::dsl::{print_expr, print_quantifier, Diagnostic, Severity};
use triggerforge_core::oracle::{OracleError, OracleReport};
use triggerforge_core::pipeline::QuantifierAnalysis;
use triggerforge_core::symtab::Verdict;

pub const SCHEMA: u64 = 1;

pub fn method_name(m: Eq4Method) -> &'static str {
    match m {
        Eq4Method::FastPathEqual => "FastPathEqual",
        Eq4Method::FastPathLeq => "FastPathLeq",
        Eq4Method::SymbolicFallback => "SymbolicFallback",
        Eq4Method::Failed => "Failed",
    }
}

pub fn sign_name(s: SignClass) -> &'static str {
    match s {
        SignClass::Positive => "positive",
        SignClass::Negative => "negative",
    }
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Proven => json!({ "verdict": "proven" }),
        Verdict::Refuted(detail) => json!({ "verdict": "refuted", "detail": detail }),
        Verdict::Unknown(detail) => json!({ "verdict": "unknown", "detail": detail }),
    }
}

pub fn conditions_json(r: &ConditionReport) -> Value {
    json!({
        "size_positive": verdict_json(&r.size_positive),
        "coeffs_nonzero": verdict_json(&r.coeffs_nonzero),
        "signs_uniform": verdict_json(&r.signs_uniform),
        "prefix_bounded": verdict_json(&r.prefix_bounded),
        "methods": r.prefix_methods.iter().map(|m| method_name(*m)).collect::<Vec<_>>(),
        "unproven_goal": r.unproven_goal,
    })
}

/// One oracle invocation on one rewrite pass.
pub struct OracleRun {
    pub quantifier: usize,
    pub pass: usize,
    pub outcome: Result<OracleReport, OracleError>,
}

impl OracleRun {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.passed())
    }

    pub fn to_json(&self) -> Value {
        match &self.outcome {
            Ok(r) => json!({
                "quantifier": self.quantifier,
                "pass": self.pass,
                "binding": r.description,
                "x_size": r.x_size,
                "y_size": r.y_size,
                "injective": r.injective,
                "image_matches": r.image_matches,
                "inverses_hold": r.inverses_hold,
                "prefix_bound_holds": r.eq4_holds,
                "seed_results": r.seed_results
                    .iter()
                    .map(|(seed, ok)| json!({ "seed": seed, "equal": ok }))
                    .collect::<Vec<_>>(),
                "passed": r.passed(),
                "counterexample": r.counterexample,
            }),
            Err(e) => json!({
                "quantifier": self.quantifier,
                "pass": self.pass,
                "passed": false,
                "error": e.to_string(),
            }),
        }
    }
}

pub fn quantifier_json(index: usize, a: &QuantifierAnalysis) -> Value {
    let passes: Vec<Value> = a
        .passes
        .iter()
        .map(|p| {
            json!({
                "array": p.array,
                "index": p.index_text,
                "variables": p.pattern.vars,
                "coefficients": p.pattern
                    .coeffs
                    .iter()
                    .map(|c| print_expr(&c.to_expr()))
                    .collect::<Vec<_>>(),
                "offset": print_expr(&p.pattern.offset.to_expr()),
                "sign": p.sign.map(sign_name),
                "conditions": conditions_json(&p.conditions),
                "fresh": p.rewrite.as_ref().map(|r| r.fresh.clone()),
                "rules": p.rewrite.as_ref().map(|r| r.rules.clone()),
            })
        })
        .collect();
    let refusals: Vec<Value> = a
        .refusals
        .iter()
        .map(|r| {
            json!({
                "array": r.array,
                "index": r.index_text,
                "code": r.code,
                "message": r.message,
                "conditions": r.conditions.as_ref().map(conditions_json),
            })
        })
        .collect();
    json!({
        "index": index,
        "original": print_quantifier(&a.original),
        "result": print_quantifier(&a.result),
        "changed": a.changed(),
        "no_site": a.no_site,
        "passes": passes,
        "refusals": refusals,
    })
}

pub fn diagnostic_json(d: &Diagnostic, src: &str) -> Value {
    let (line, col) = match d.span {
        Some(span) => {
            let (l, c) = span.line_col(src);
            (Some(l), Some(c))
        }
        None => (None, None),
    };
    json!({
        "severity": match d.severity {
            Severity::Error => "error",
            Severity::Info => "info",
        },
        "code": d.code,
        "message": d.message,
        "line": line,
        "col": col,
    })
}

/// Wraps command-specific fields into the versioned envelope.
pub fn envelope(command: &str, file: &str, exit_code: i32, summary: &str, body: Value) -> Value {
    let mut doc = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "file": file,
        "exit": { "code": exit_code, "summary": summary },
    });
    if let (Value::Object(doc), Value::Object(extra)) = (&mut doc, body) {
        for (k, v) in extra {
            doc.insert(k, v);
        }
    }
    doc
}

pub fn print_report(doc: &Value) {
    eprintln!("{}", serde_json::to_string_pretty(doc).expect("report serializes"));
}
