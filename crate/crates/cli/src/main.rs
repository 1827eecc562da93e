use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lpcheck::queens::{
    brute_force, extract_solution, initial_query, nqueens_program, render_board, Mutant,
};
use lpcheck::queens_spec::{LevelMapping, SampleBound, SpecSet};
use lpcheck::verify::{
    check_completeness_condition, check_model, check_query_bound, check_recurrent, check_row_shift,
    compare_spec_fixpoint, CheckReport, Counterexample, Offender, RowShiftConfig, Verdict,
    VerifyConfig,
};
use lpcheck::{
    parse_program, parse_query, solve, Program, SelectionRule, Signature, SolveEvent, SolveOptions,
    Term,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPPED: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lpcheck",
    version,
    about = "Solve and verify the layered n-queens logic program"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the initial query for an n x n board and list the solutions.
    Solve(SolveArgs),
    /// Run a query against a program file.
    Query(QueryArgs),
    /// Run verification checks on the n-queens program or a mutant.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct EngineFlags {
    #[arg(long, value_enum, default_value_t = Rule::Leftmost)]
    rule: Rule,
    #[arg(long = "occur-check", value_enum, default_value_t = Switch::On)]
    occur_check: Switch,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl EngineFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            selection_rule: self.rule.into(),
            occur_check: self.occur_check == Switch::On,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Board size.
    #[arg(value_parser = clap::value_parser!(u64).range(1..=10))]
    n: u64,
    /// Print each solution as a board.
    #[arg(long)]
    board: bool,
    /// Also compare with the permutation oracle.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum)]
    mutate: Option<MutantArg>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Program file.
    program: PathBuf,
    /// Query text, e.g. "pqs(0,A,B,C)".
    query: String,
    /// Resolution steps allowed per derivation.
    #[arg(long)]
    depth: Option<usize>,
    /// Stop after this many answers.
    #[arg(long)]
    max_answers: Option<usize>,
    /// File of name/arity lines for the function symbols.
    #[arg(long)]
    signature: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Depth of the slice for clause-level checks.
    #[arg(long, default_value_t = 4)]
    depth: u32,
    /// Specification for the model check.
    #[arg(long, default_value = "s", value_parser = parse_spec)]
    spec: SpecSet,
    #[arg(long, value_enum)]
    mutate: Option<MutantArg>,
    /// Board size for the bound check; all of 1..=8 if absent.
    #[arg(long)]
    n: Option<u64>,
    /// Search cells allowed per check.
    #[arg(long, default_value_t = 10_000_000)]
    max_instances: u64,
    /// File of name/arity lines for the function symbols.
    #[arg(long)]
    signature: Option<PathBuf>,
    /// Largest row of the coverage sample base.
    #[arg(long, default_value_t = 3)]
    sample_row: u64,
    /// Longest list of the coverage sample base.
    #[arg(long, default_value_t = 6)]
    sample_len: usize,
    /// Extra atoms drawn from the whole of S0 after the S0_pqs part.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Random instances for the row-shift suite.
    #[arg(long, default_value_t = 100_000)]
    instances: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Model,
    Covered,
    Recurrent,
    Bound,
    #[value(name = "lemma4")]
    RowShift,
    Fixpoint,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Leftmost,
    Rightmost,
    Fair,
}

impl From<Rule> for SelectionRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Leftmost => SelectionRule::Leftmost,
            Rule::Rightmost => SelectionRule::Rightmost,
            Rule::Fair => SelectionRule::FairRoundRobin,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Switch {
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Records,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MutantArg {
    SwapUsDs,
    DropDsWrapper,
    NonuniformStrip,
}

impl From<MutantArg> for Mutant {
    fn from(m: MutantArg) -> Self {
        match m {
            MutantArg::SwapUsDs => Mutant::SwapUsDs,
            MutantArg::DropDsWrapper => Mutant::DropDsWrapper,
            MutantArg::NonuniformStrip => Mutant::NonuniformStrip,
        }
    }
}

fn parse_spec(s: &str) -> Result<SpecSet, String> {
    s.parse()
}

fn program_for(mutate: Option<MutantArg>) -> Program {
    match mutate {
        Some(m) => Mutant::from(m).program(),
        None => nqueens_program(),
    }
}

fn load_signature(path: Option<&Path>) -> Result<Signature, String> {
    match path {
        None => Ok(Signature::default_queens()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Signature::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Query(a) => cmd_query(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("lpcheck: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, String> {
    let program = program_for(a.mutate);
    let query = initial_query(a.n).map_err(|e| e.to_string())?;
    let mut solutions = Vec::new();
    for ans in solve(&program, &query, a.engine.options()).answers() {
        match extract_solution(&ans, a.n) {
            Ok(s) => solutions.push(s),
            Err(e) => {
                eprintln!("lpcheck: bad answer {}: {e}", ans.instantiated_query);
                return Ok(EXIT_FAIL);
            }
        }
    }
    let records = a.engine.format == Format::Records;
    for s in &solutions {
        if records {
            let rec = json!({"record": "solution", "n": a.n, "rows": s.columns_to_rows, "line": s.to_line()});
            println!("{rec}");
        } else {
            println!("{}", s.to_line());
            if a.board {
                println!("{}", render_board(s));
            }
        }
    }
    let mut code = 0;
    let mut oracle_match = None;
    if a.check {
        let mine: std::collections::BTreeSet<_> = solutions.iter().cloned().collect();
        let same = mine == brute_force(a.n) && mine.len() == solutions.len();
        oracle_match = Some(same);
        if !same {
            code = EXIT_FAIL;
        }
    }
    if records {
        let mut rec = json!({"record": "summary", "n": a.n, "solutions": solutions.len()});
        if let Some(m) = oracle_match {
            rec["oracle_match"] = json!(m);
        }
        println!("{rec}");
    } else {
        let noun = if solutions.len() == 1 {
            "solution"
        } else {
            "solutions"
        };
        println!("{} {noun}", solutions.len());
        if let Some(m) = oracle_match {
            println!("oracle {}", if m { "agrees" } else { "disagrees" });
        }
    }
    Ok(code)
}

fn cmd_query(a: &QueryArgs) -> Result<u8, String> {
    let sig = load_signature(a.signature.as_deref())?;
    let text =
        fs::read_to_string(&a.program).map_err(|e| format!("{}: {e}", a.program.display()))?;
    let program = parse_program(&text, &sig).map_err(|e| format!("{}:{e}", a.program.display()))?;
    let query = parse_query(&a.query, &sig).map_err(|e| format!("query:{e}"))?;
    if a.depth == Some(0) {
        return Err("--depth must be at least 1".into());
    }
    let opts = SolveOptions {
        depth_limit: a.depth,
        answer_limit: a.max_answers,
        ..a.engine.options()
    };
    let vars = query.vars();
    let records = a.engine.format == Format::Records;
    let mut count = 0;
    for event in solve(&program, &query, opts) {
        match event {
            SolveEvent::Answer(ans) => {
                count += 1;
                let bindings: Vec<(String, Term)> = vars
                    .iter()
                    .filter(|v| v.name().is_some_and(|n| !n.starts_with('_')))
                    .map(|v| (v.to_string(), ans.substitution.apply(&Term::Var(v.clone()))))
                    .collect();
                if records {
                    let map: serde_json::Map<String, serde_json::Value> = bindings
                        .iter()
                        .map(|(k, t)| (k.clone(), json!(t.to_string())))
                        .collect();
                    let rec = json!({
                        "record": "answer",
                        "index": count,
                        "query": ans.instantiated_query.to_string(),
                        "bindings": map,
                    });
                    println!("{rec}");
                } else if bindings.is_empty() {
                    println!("yes");
                } else {
                    let parts: Vec<String> =
                        bindings.iter().map(|(k, t)| format!("{k} = {t}")).collect();
                    println!("{}", parts.join(", "));
                }
            }
            SolveEvent::Truncated => {
                if records {
                    println!("{}", json!({"record": "truncated", "depth": a.depth}));
                } else {
                    println!("% search truncated at depth {}", a.depth.unwrap_or(0));
                }
            }
        }
    }
    if records {
        println!("{}", json!({"record": "summary", "answers": count}));
    } else {
        let noun = if count == 1 { "answer" } else { "answers" };
        println!("{count} {noun}");
    }
    Ok(0)
}

fn bound_report(ns: &[u64]) -> CheckReport {
    let lm = LevelMapping::queens();
    let mut report = CheckReport::new("bound");
    for &n in ns {
        let q = initial_query(n).expect("n is positive");
        report.instances_examined += 1;
        match check_query_bound(&q, &lm) {
            Some(b) => report.notes.push(format!("n={n}: bound {b}")),
            None => report.counterexamples.push(Counterexample {
                offender: Offender::Atom(q.atoms[0].clone()),
                explanation: "levels of the instances are unbounded".into(),
            }),
        }
        if let ([_], Some(b)) = (ns, check_query_bound(&q, &lm)) {
            report = report.param("n", n).param("bound", b);
        }
    }
    report
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, String> {
    let sig = load_signature(a.signature.as_deref())?;
    let program = program_for(a.mutate);
    let name = a.mutate.map_or("nqueens".to_string(), |m| {
        Mutant::from(m).name().to_string()
    });
    let cfg = VerifyConfig {
        max_instances: a.max_instances,
        ..VerifyConfig::new(sig.clone(), a.depth)
    };
    if let Some(0) = a.n {
        return Err("--n must be at least 1".into());
    }
    let run = |s: Suite| a.suite == s || a.suite == Suite::All;
    let mut reports = Vec::new();
    if run(Suite::Model) {
        reports.push(check_model(&program, a.spec, &cfg));
    }
    if run(Suite::Covered) {
        let bound = SampleBound::new(
            a.sample_row,
            a.sample_len,
            vec![Term::constant("a")],
            vec![Term::nil()],
        );
        let atoms = SpecSet::S0Pqs
            .sample(&bound)
            .chain(SpecSet::S0.sample(&bound).take(a.samples));
        reports.push(
            check_completeness_condition(&program, SpecSet::S0, atoms, &cfg)
                .param("sample_max_row", a.sample_row)
                .param("sample_max_len", a.sample_len)
                .param("extra_samples", a.samples),
        );
    }
    if run(Suite::Recurrent) {
        let r =
            check_recurrent(&program, &LevelMapping::queens(), &cfg).map_err(|e| e.to_string())?;
        reports.push(r);
    }
    if run(Suite::Bound) {
        let ns: Vec<u64> = match a.n {
            Some(n) => vec![n],
            None => (1..=8).collect(),
        };
        reports.push(bound_report(&ns));
    }
    if run(Suite::RowShift) {
        reports.push(check_row_shift(&RowShiftConfig {
            instances: a.instances,
            seed: a.seed,
            ..RowShiftConfig::default()
        }));
    }
    if run(Suite::Fixpoint) {
        let frag = program.fragment(&["pq"]);
        let exact = compare_spec_fixpoint(&frag, SpecSet::SPq, SpecSet::SPq, &cfg, None);
        let mut c = exact.containment;
        c.check_name = "pq_exact_containment".into();
        let mut d = exact.completeness;
        d.check_name = "pq_exact_completeness".into();
        d.notes.clear();
        reports.push(c);
        reports.push(d);
    }
    for r in reports.iter_mut() {
        r.parameters.insert("program".into(), name.clone());
        if a.format == Format::Records {
            print!("{}", r.to_records());
        } else {
            print!("{}", r.to_text());
        }
    }
    let verdicts: Vec<Verdict> = reports.iter().map(CheckReport::verdict).collect();
    if a.format == Format::Text {
        let failed = verdicts.iter().filter(|v| **v == Verdict::Fail).count();
        println!("{} checks, {} failed", verdicts.len(), failed);
    }
    let code = if verdicts.contains(&Verdict::Fail) {
        EXIT_FAIL
    } else if verdicts.contains(&Verdict::ResourceCapped) {
        EXIT_CAPPED
    } else {
        0
    };
    Ok(code)
}
