//! Command-line front end.  Parses a `.tfq` file, drives the analysis the
//! subcommand asks for, prints human-readable text (and rewritten source)
//! on standard output, and always emits one machine-readable JSON report
//! on the error stream.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 analysis refusal,
//! 3 oracle failure.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use triggerforge_core::dsl::{parse, print_file, Item, SourceFile};
use triggerforge_core::expr::{eval_bool, VarEnv};
use triggerforge_core::oracle::{run_oracle, DEFAULT_CAP};
use triggerforge_core::pipeline::{analyze_quantifier, QuantifierAnalysis, RewriteOptions};
use triggerforge_core::qualifiers::check_program;
use triggerforge_core::rewrite::Mutation;
use triggerforge_core::smt::emit_smt;
use triggerforge_core::symtab::Binding;

use config::load_config;
use report::{envelope, method_name, print_report, quantifier_json, sign_name, OracleRun};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_ORACLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "triggerforge",
    version,
    about = "Rewrites flattened-array quantifiers into trigger-friendly form"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite every quantifier whose side conditions can be proven.
    Rewrite {
        /// Input source file.
        file: PathBuf,
        /// Wrap matched one-variable accesses in the named helper
        /// (only `acc1d`) instead of requantifying.
        #[arg(long, value_name = "FN")]
        wrap: Option<String>,
        /// Bound on rewrite passes per quantifier.
        #[arg(long, value_name = "N", default_value_t = 4)]
        max_passes: usize,
        /// Deliberately corrupt the rewrite (oracle test hook).
        #[arg(long, value_name = "LABEL")]
        mutate: Option<String>,
        /// Suppress human-readable standard output.
        #[arg(long)]
        json_only: bool,
    },
    /// Analyze side conditions without printing rewritten source.
    Check {
        /// Input source file.
        file: PathBuf,
        /// Suppress human-readable standard output.
        #[arg(long)]
        json_only: bool,
    },
    /// Validate rewrites by brute-force enumeration under a binding.
    Oracle {
        /// Input source file.
        file: PathBuf,
        /// Parameter binding `NAME=INT` (repeatable; all parameters needed).
        #[arg(long = "bind", value_name = "NAME=INT")]
        bind: Vec<String>,
        /// Number of array seeds for truth-equality runs.
        #[arg(long, value_name = "N")]
        seeds: Option<usize>,
        /// Enumeration cap per instance.
        #[arg(long, value_name = "N")]
        cap: Option<usize>,
        /// Deliberately corrupt the rewrite first (test hook).
        #[arg(long, value_name = "LABEL")]
        mutate: Option<String>,
        /// Suppress human-readable standard output.
        #[arg(long)]
        json_only: bool,
    },
    /// Check alias qualifiers in `typecheck { ... }` sections.
    Typecheck {
        /// Input source file.
        file: PathBuf,
        /// Suppress human-readable standard output.
        #[arg(long)]
        json_only: bool,
    },
    /// Print the file as an SMT-LIB script with trigger annotations.
    EmitSmt {
        /// Input source file.
        file: PathBuf,
        /// Emit plain quantifiers without `:pattern` annotations.
        #[arg(long)]
        no_pattern: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are exit 1; `--help`/`--version` are success.
            let help = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if help { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Rewrite {
            file,
            wrap,
            max_passes,
            mutate,
            json_only,
        } => cmd_rewrite(&file, wrap.as_deref(), max_passes, mutate.as_deref(), json_only),
        Command::Check { file, json_only } => cmd_check(&file, json_only),
        Command::Oracle {
            file,
            bind,
            seeds,
            cap,
            mutate,
            json_only,
        } => cmd_oracle(&file, &bind, seeds, cap, mutate.as_deref(), json_only),
        Command::Typecheck { file, json_only } => cmd_typecheck(&file, json_only),
        Command::EmitSmt { file, no_pattern } => cmd_emit_smt(&file, no_pattern),
    };
    ExitCode::from(code)
}

fn fail_usage(message: &str) -> u8 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

fn load(path: &Path) -> Result<(String, SourceFile), String> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    match parse(&src) {
        Ok(file) => Ok((src, file)),
        Err(d) => Err(format!("{}: {}", path.display(), d.render(&src))),
    }
}

fn parse_mutation(label: Option<&str>) -> Result<Option<Mutation>, String> {
    match label {
        None => Ok(None),
        Some(l) => Mutation::parse(l).map(Some).ok_or_else(|| {
            let known: Vec<&str> = Mutation::ALL.iter().map(|m| m.label()).collect();
            format!("unknown mutation `{l}` (one of: {})", known.join(", "))
        }),
    }
}

fn parse_wrap(wrap: Option<&str>) -> Result<bool, String> {
    match wrap {
        None => Ok(false),
        Some("acc1d") => Ok(true),
        Some(other) => Err(format!("unknown wrapper `{other}` (only `acc1d`)")),
    }
}

/// Every quantifier analyzed in source order, plus the file with results
/// spliced back in.
struct FileAnalysis {
    quantifiers: Vec<QuantifierAnalysis>,
    rewritten: SourceFile,
}

fn analyze_file(file: &SourceFile, opts: &RewriteOptions) -> FileAnalysis {
    let table = file.symbol_table();
    let mut quantifiers = Vec::new();
    let mut items = Vec::new();
    for item in &file.items {
        match item {
            Item::Quantifier(q) => {
                let a = analyze_quantifier(q, &table, opts);
                items.push(Item::Quantifier(a.result.clone()));
                quantifiers.push(a);
            }
            other => items.push(other.clone()),
        }
    }
    FileAnalysis {
        quantifiers,
        rewritten: SourceFile { items },
    }
}

fn refusal_count(analysis: &FileAnalysis) -> usize {
    analysis.quantifiers.iter().map(|q| q.refusals.len()).sum()
}

fn describe_quantifier_lines(out: &mut Vec<String>, index: usize, a: &QuantifierAnalysis) {
    for (pi, p) in a.passes.iter().enumerate() {
        let what = match &p.rewrite {
            Some(r) => format!("rewrote with fresh `{}`", r.fresh),
            None => "wrapped in `acc1d`".to_string(),
        };
        let sign = match p.sign {
            Some(s) => format!("; sign {}", sign_name(s)),
            None => String::new(),
        };
        out.push(format!(
            "quantifier {}, pass {}: `{}[{}]` {} (variables {}{})",
            index + 1,
            pi + 1,
            p.array,
            p.index_text,
            what,
            p.pattern.vars.join(", "),
            sign,
        ));
    }
    for r in &a.refusals {
        out.push(format!(
            "quantifier {}: refused `{}[{}]`: {} — {}",
            index + 1,
            r.array,
            r.index_text,
            r.code,
            r.message,
        ));
    }
    if a.no_site {
        out.push(format!(
            "quantifier {}: no array accesses to rewrite",
            index + 1
        ));
    }
}

fn cmd_rewrite(
    path: &Path,
    wrap: Option<&str>,
    max_passes: usize,
    mutate: Option<&str>,
    json_only: bool,
) -> u8 {
    let wrap = match parse_wrap(wrap) {
        Ok(w) => w,
        Err(e) => return fail_usage(&e),
    };
    let mutation = match parse_mutation(mutate) {
        Ok(m) => m,
        Err(e) => return fail_usage(&e),
    };
    let (_, file) = match load(path) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    let opts = RewriteOptions {
        wrap,
        max_passes,
        mutation,
    };
    let analysis = analyze_file(&file, &opts);
    let refused = refusal_count(&analysis);
    let changed = analysis.quantifiers.iter().filter(|q| q.changed()).count();
    let code = if refused > 0 { EXIT_REFUSED } else { EXIT_OK };
    let output = print_file(&analysis.rewritten);
    let summary = format!(
        "rewrote {changed} of {} quantifier(s); {refused} refusal(s)",
        analysis.quantifiers.len()
    );

    if !json_only {
        let mut lines = Vec::new();
        for (i, q) in analysis.quantifiers.iter().enumerate() {
            describe_quantifier_lines(&mut lines, i, q);
        }
        for line in &lines {
            println!("{line}");
        }
        if !lines.is_empty() {
            println!();
        }
        print!("{output}");
    }

    let body = json!({
        "quantifiers": analysis.quantifiers
            .iter()
            .enumerate()
            .map(|(i, q)| quantifier_json(i, q))
            .collect::<Vec<_>>(),
        "output": output,
    });
    print_report(&envelope(
        "rewrite",
        &path.display().to_string(),
        code as i32,
        &summary,
        body,
    ));
    code
}

fn cmd_check(path: &Path, json_only: bool) -> u8 {
    let (_, file) = match load(path) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    let analysis = analyze_file(&file, &RewriteOptions::default());
    let refused = refusal_count(&analysis);
    let accepted: usize = analysis.quantifiers.iter().map(|q| q.passes.len()).sum();
    let code = if refused > 0 { EXIT_REFUSED } else { EXIT_OK };
    let summary = format!(
        "{accepted} site(s) accepted, {refused} refused across {} quantifier(s)",
        analysis.quantifiers.len()
    );

    if !json_only {
        for (i, q) in analysis.quantifiers.iter().enumerate() {
            for p in &q.passes {
                let methods: Vec<&str> = p
                    .conditions
                    .prefix_methods
                    .iter()
                    .map(|m| method_name(*m))
                    .collect();
                println!(
                    "quantifier {}: `{}[{}]` accepted (methods {}; sign {})",
                    i + 1,
                    p.array,
                    p.index_text,
                    if methods.is_empty() {
                        "none needed".to_string()
                    } else {
                        methods.join(", ")
                    },
                    p.sign.map(sign_name).unwrap_or("n/a"),
                );
            }
            for r in &q.refusals {
                println!(
                    "quantifier {}: `{}[{}]`: {} — {}",
                    i + 1,
                    r.array,
                    r.index_text,
                    r.code,
                    r.message,
                );
            }
            if q.no_site {
                println!("quantifier {}: no array accesses to examine", i + 1);
            }
        }
        println!("{summary}");
    }

    let body = json!({
        "quantifiers": analysis.quantifiers
            .iter()
            .enumerate()
            .map(|(i, q)| quantifier_json(i, q))
            .collect::<Vec<_>>(),
    });
    print_report(&envelope(
        "check",
        &path.display().to_string(),
        code as i32,
        &summary,
        body,
    ));
    code
}

fn parse_bindings(specs: &[String], file: &SourceFile) -> Result<Binding, String> {
    let table = file.symbol_table();
    let declared: Vec<String> = table.params().iter().map(|p| p.name.clone()).collect();
    let mut binding = Binding::new();
    for spec in specs {
        let Some((name, value)) = spec.split_once('=') else {
            return Err(format!("`--bind {spec}` is not of the form NAME=INT"));
        };
        if !declared.iter().any(|d| d == name) {
            return Err(format!("`{name}` is not a declared parameter"));
        }
        let value: i64 = value
            .parse()
            .map_err(|_| format!("`{value}` is not an integer in `--bind {spec}`"))?;
        binding.set_param(name, value.into());
    }
    for name in &declared {
        if binding.param(name).is_none() {
            return Err(format!("parameter `{name}` is unbound (add `--bind {name}=...`)"));
        }
    }
    let env = VarEnv::new();
    for fact in table.facts() {
        match eval_bool(&fact, &binding, &env) {
            Ok(true) => {}
            Ok(false) => {
                return Err(format!(
                    "binding violates `{}`",
                    triggerforge_core::dsl::print_expr(&fact)
                ));
            }
            Err(e) => return Err(format!("could not evaluate a declared fact: {e}")),
        }
    }
    Ok(binding)
}

fn cmd_oracle(
    path: &Path,
    bind: &[String],
    seeds: Option<usize>,
    cap: Option<usize>,
    mutate: Option<&str>,
    json_only: bool,
) -> u8 {
    let mutation = match parse_mutation(mutate) {
        Ok(m) => m,
        Err(e) => return fail_usage(&e),
    };
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => return fail_usage(&e),
    };
    let (_, file) = match load(path) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    let binding = match parse_bindings(bind, &file) {
        Ok(b) => b,
        Err(e) => return fail_usage(&e),
    };
    let seed_count = seeds.or(cfg.seeds).unwrap_or(3);
    let cap = cap.or(cfg.cap).unwrap_or(DEFAULT_CAP);
    let seed_list: Vec<u64> = (0..seed_count as u64).collect();

    let opts = RewriteOptions {
        mutation,
        ..RewriteOptions::default()
    };
    let analysis = analyze_file(&file, &opts);
    let refused = refusal_count(&analysis);

    let mut runs: Vec<OracleRun> = Vec::new();
    for (qi, q) in analysis.quantifiers.iter().enumerate() {
        let mut before = q.original.clone();
        for (pi, p) in q.passes.iter().enumerate() {
            let Some(rr) = &p.rewrite else { continue };
            let sign = p.sign.expect("rewrite passes carry a sign");
            let outcome = run_oracle(
                &before,
                &p.pattern,
                &p.domain,
                rr,
                sign,
                &binding,
                &seed_list,
                cap,
            );
            runs.push(OracleRun {
                quantifier: qi,
                pass: pi,
                outcome,
            });
            before = rr.formula.clone();
        }
    }

    let failed = runs.iter().filter(|r| !r.passed()).count();
    let code = if failed > 0 {
        EXIT_ORACLE
    } else if refused > 0 {
        EXIT_REFUSED
    } else {
        EXIT_OK
    };
    let summary = format!(
        "{} of {} oracle instance(s) passed; {refused} refusal(s)",
        runs.len() - failed,
        runs.len()
    );

    if !json_only {
        for r in &runs {
            match &r.outcome {
                Ok(rep) => {
                    let verdict = if rep.passed() { "ok" } else { "FAIL" };
                    let mut line = format!(
                        "quantifier {}, pass {} [{}]: {verdict} (|X|={}, |Y|={}, seeds {})",
                        r.quantifier + 1,
                        r.pass + 1,
                        rep.description,
                        rep.x_size,
                        rep.y_size,
                        rep.seed_results.len(),
                    );
                    if let Some(cex) = &rep.counterexample {
                        line.push_str(&format!(" — {cex}"));
                    }
                    println!("{line}");
                }
                Err(e) => println!(
                    "quantifier {}, pass {}: error — {e}",
                    r.quantifier + 1,
                    r.pass + 1
                ),
            }
        }
        for (i, q) in analysis.quantifiers.iter().enumerate() {
            for r in &q.refusals {
                println!(
                    "quantifier {}: refused `{}[{}]`: {} — {}",
                    i + 1,
                    r.array,
                    r.index_text,
                    r.code,
                    r.message,
                );
            }
        }
        println!("{summary}");
    }

    let body = json!({
        "cap": cap,
        "seeds": seed_list,
        "quantifiers": analysis.quantifiers
            .iter()
            .enumerate()
            .map(|(i, q)| quantifier_json(i, q))
            .collect::<Vec<_>>(),
        "oracle": runs.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    print_report(&envelope(
        "oracle",
        &path.display().to_string(),
        code as i32,
        &summary,
        body,
    ));
    code
}

fn cmd_typecheck(path: &Path, json_only: bool) -> u8 {
    let (src, file) = match load(path) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    let sections = file.typecheck_sections();
    let mut all = Vec::new();
    for prog in &sections {
        all.push(check_program(prog));
    }
    let errors: usize = all
        .iter()
        .flatten()
        .filter(|d| d.severity == triggerforge_core::dsl::Severity::Error)
        .count();
    let infos: usize = all.iter().map(|v| v.len()).sum::<usize>() - errors;
    let code = if errors > 0 { EXIT_REFUSED } else { EXIT_OK };
    let summary = format!(
        "{errors} error(s), {infos} info note(s) across {} section(s)",
        sections.len()
    );

    if !json_only {
        for diags in &all {
            for d in diags {
                println!("{}", d.render(&src));
            }
        }
        println!("{summary}");
    }

    let body = json!({
        "sections": all
            .iter()
            .map(|diags| json!({
                "diagnostics": diags
                    .iter()
                    .map(|d| report::diagnostic_json(d, &src))
                    .collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>(),
    });
    print_report(&envelope(
        "typecheck",
        &path.display().to_string(),
        code as i32,
        &summary,
        body,
    ));
    code
}

fn cmd_emit_smt(path: &Path, no_pattern: bool) -> u8 {
    let (src, file) = match load(path) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    match emit_smt(&file, !no_pattern) {
        Ok(text) => {
            print!("{text}");
            let body = json!({ "smt": text });
            print_report(&envelope(
                "emit-smt",
                &path.display().to_string(),
                EXIT_OK as i32,
                "emitted",
                body,
            ));
            EXIT_OK
        }
        Err(e) => {
            let (line, col) = e.span.line_col(&src);
            let message = format!("{line}:{col}: {}", e.message);
            let body = json!({
                "error": { "code": "impure-trigger", "message": message },
            });
            print_report(&envelope(
                "emit-smt",
                &path.display().to_string(),
                EXIT_REFUSED as i32,
                "refused",
                body,
            ));
            println!("error: {message}");
            EXIT_REFUSED
        }
    }
}
