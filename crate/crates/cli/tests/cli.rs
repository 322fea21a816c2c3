//! Command-line contract tests: exit codes, stream discipline, report
//! stability, configuration, and the flag surface.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn cli_in(dir: Option<&std::path::Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_triggerforge"));
    if let Some(d) = dir {
        cmd.current_dir(d);
    }
    cmd.args(args).output().expect("the tool runs")
}

fn cli(args: &[&str]) -> Output {
    cli_in(None, args)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| {
        panic!(
            "report is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("tool exits normally")
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = cli(&["rewrite", "no/such/file.tfq"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_errors_point_at_the_source() {
    let dir = std::env::temp_dir();
    let path = dir.join("tf_cli_bad.tfq");
    std::fs::write(&path, "array A;\n").unwrap();
    let out = cli(&["rewrite", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:7"), "{err}");
}

#[test]
fn empty_files_succeed_with_an_empty_report() {
    let out = cli(&["rewrite", data("empty.tfq").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["quantifiers"].as_array().unwrap().len(), 0);
}

#[test]
fn nonlinear_domain_modulo_is_refused_with_not_linear() {
    let out = cli(&["rewrite", data("gemm3.tfq").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let doc = report(&out);
    assert_eq!(doc["quantifiers"][0]["refusals"][0]["code"], "not-linear");
}

#[test]
fn unproven_extent_names_the_goal() {
    let out = cli(&["check", data("reject_eq1.tfq").to_str().unwrap(), "--json-only"]);
    assert_eq!(code(&out), 2);
    let doc = report(&out);
    let refusal = &doc["quantifiers"][0]["refusals"][0];
    assert_eq!(refusal["code"], "eq1-unproven");
    let verdict = &refusal["conditions"]["size_positive"];
    assert_eq!(verdict["verdict"], "unknown");
    assert!(
        refusal["message"].as_str().unwrap().contains("0 < n"),
        "{refusal}"
    );
}

#[test]
fn json_only_silences_standard_output() {
    let out = cli(&["rewrite", data("swap.tfq").to_str().unwrap(), "--json-only"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc = report(&out);
    assert!(doc["output"].as_str().unwrap().contains("A[x] == B[x]"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["rewrite", "--json-only"],
        vec!["check", "--json-only"],
        vec!["oracle", "--json-only"],
    ] {
        let mut full = args.clone();
        let path = data("matrices.tfq");
        full.insert(1, path.to_str().unwrap());
        let a = cli(&full);
        let b = cli(&full);
        assert_eq!(a.stderr, b.stderr, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn wrap_mode_uses_the_helper_and_skips_requantifying() {
    let out = cli(&["rewrite", data("swap.tfq").to_str().unwrap(), "--wrap", "acc1d"]);
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    assert!(
        text.contains("A[acc1d(i, gtid, n / gsize, gsize)]"),
        "{text}"
    );
    assert!(!text.contains("abs("), "{text}");

    let bad = cli(&["rewrite", data("swap.tfq").to_str().unwrap(), "--wrap", "other"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn wrap_mode_refuses_multi_variable_patterns() {
    let out = cli(&[
        "rewrite",
        data("matrices.tfq").to_str().unwrap(),
        "--wrap",
        "acc1d",
        "--json-only",
    ]);
    assert_eq!(code(&out), 2);
    let doc = report(&out);
    assert_eq!(doc["quantifiers"][0]["refusals"][0]["code"], "wrap-not-1d");
}

#[test]
fn max_passes_limits_multi_site_rewrites() {
    let out = cli(&[
        "rewrite",
        data("twosite.tfq").to_str().unwrap(),
        "--max-passes",
        "1",
        "--json-only",
    ]);
    let doc = report(&out);
    assert_eq!(doc["quantifiers"][0]["passes"].as_array().unwrap().len(), 1);

    let full = cli(&["rewrite", data("twosite.tfq").to_str().unwrap(), "--json-only"]);
    let doc = report(&full);
    assert_eq!(doc["quantifiers"][0]["passes"].as_array().unwrap().len(), 2);
    assert_eq!(code(&full), 0);
}

#[test]
fn unknown_mutation_labels_are_usage_errors() {
    let out = cli(&[
        "oracle",
        data("matrices.tfq").to_str().unwrap(),
        "--mutate",
        "nonsense",
    ]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("drop-divisibility"), "{err}");
}

#[test]
fn binds_are_validated_against_declared_facts() {
    let path = data("swap.tfq");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["--bind", "n=2", "--bind", "gsize=4", "--bind", "gtid=0"], "violates"),
        (vec!["--bind", "zz=1"], "not a declared parameter"),
        (vec![], "unbound"),
        (vec!["--bind", "n=x"], "not an integer"),
        (vec!["--bind", "n"], "NAME=INT"),
    ];
    for (extra, needle) in cases {
        let mut args = vec!["oracle", path.to_str().unwrap()];
        args.extend(extra.iter());
        let out = cli(&args);
        assert_eq!(code(&out), 1, "{extra:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{extra:?}: {err}");
    }
}

#[test]
fn oracle_failures_exit_three() {
    let out = cli(&[
        "oracle",
        data("negstride.tfq").to_str().unwrap(),
        "--mutate",
        "flip-sign-branch",
        "--json-only",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join("tf_cli_cfg");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(data("matrices.tfq"), dir.join("matrices.tfq")).unwrap();
    std::fs::write(dir.join("triggerforge.toml"), "[oracle]\ncap = 10\nseeds = 5\n").unwrap();

    let capped = cli_in(Some(&dir), &["oracle", "matrices.tfq", "--json-only"]);
    assert_eq!(code(&capped), 3);
    let doc = report(&capped);
    assert_eq!(doc["cap"], 10);
    assert_eq!(doc["seeds"].as_array().unwrap().len(), 5);
    assert!(doc["oracle"][0]["error"]
        .as_str()
        .unwrap()
        .contains("cap is 10"));

    let overridden = cli_in(
        Some(&dir),
        &["oracle", "matrices.tfq", "--cap", "100000", "--json-only"],
    );
    assert_eq!(code(&overridden), 0);
    let doc = report(&overridden);
    assert_eq!(doc["cap"], 100_000);
    assert_eq!(doc["seeds"].as_array().unwrap().len(), 5);
}

#[test]
fn emit_smt_refuses_arithmetic_triggers_until_rewritten() {
    let path = data("swap.tfq");
    let refused = cli(&["emit-smt", path.to_str().unwrap()]);
    assert_eq!(code(&refused), 2);
    let doc = report(&refused);
    assert_eq!(doc["error"]["code"], "impure-trigger");

    let plain = cli(&["emit-smt", path.to_str().unwrap(), "--no-pattern"]);
    assert_eq!(code(&plain), 0);
    let text = stdout_text(&plain);
    assert!(!text.contains(":pattern"), "{text}");
    assert!(text.contains("(assert (forall ((i Int))"), "{text}");
    assert!(text.trim_end().ends_with("(check-sat)"), "{text}");
}

#[test]
fn typecheck_renders_line_and_column() {
    let out = cli(&["typecheck", data("q02_assign_mismatch.tfq").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let text = stdout_text(&out);
    assert!(text.contains("error[assign-mismatch]"), "{text}");
    assert!(text.lines().next().unwrap().contains(":"), "{text}");
}

#[test]
fn infos_do_not_affect_the_exit_code() {
    let out = cli(&["typecheck", data("q07_promotion.tfq").to_str().unwrap(), "--json-only"]);
    assert_eq!(code(&out), 0);
    let doc = report(&out);
    let infos = doc["sections"][0]["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|d| d["severity"] == "info")
        .count();
    assert!(infos > 0);
}

#[test]
fn typecheck_and_quantifiers_coexist_in_one_file() {
    let dir = std::env::temp_dir();
    let path = dir.join("tf_cli_mixed.tfq");
    std::fs::write(
        &path,
        "array int A;\n\
         forall int i; 0 <= i && i < 4; A[2 * i] == 0;\n\
         typecheck {\n  unique<1> int* p;\n  unique<1> int* q;\n  p = q;\n}\n",
    )
    .unwrap();
    let rewritten = cli(&["rewrite", path.to_str().unwrap()]);
    assert_eq!(code(&rewritten), 0);
    let text = stdout_text(&rewritten);
    assert!(text.contains("A[x]"), "{text}");
    assert!(text.contains("typecheck {"), "{text}");
    let checked = cli(&["typecheck", path.to_str().unwrap(), "--json-only"]);
    assert_eq!(code(&checked), 0);
}
