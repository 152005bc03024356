use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ckmorita::ckterm::{evaluate, parse_ck_expr, Polynomial, Presentation};
use ckmorita::elemeq::{enumerate_witnesses, solve_elementary, verify_elementary, Budget, SolveOutcome};
use ckmorita::invariants::{default_entropy_tol, parse_ratio, InvariantReport, DEFAULT_TRACE_DEPTH};
use ckmorita::morita::{build_certificate, reconstruct_factors, verify_certificate, MoritaCertificate};
use ckmorita::sftgraph::{build_edge_graph, edge_transition_matrix};
use ckmorita::ssechain::{search_chain, verify_chain, ChainOutcome, SSEChain, SearchConfig};
use ckmorita::{Error, Matrix};

const EXIT_FAIL: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DOMAIN: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

/// Shift equivalence search, invariants, and Cuntz-Krieger Morita
/// certificates for nonnegative integer matrices.
///
/// Exit codes: 0 success, 1 negative verdict, 2 search budget exhausted,
/// 64 unreadable input or bad usage, 65 input violates the standing
/// assumptions (irreducible, not a permutation), 70 internal inconsistency.
#[derive(Parser)]
#[command(name = "ckmorita", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugacy invariants of a matrix as JSON.
    Invariants {
        matrix: PathBuf,
        /// Number of traces tr(A^k) to list.
        #[arg(long, default_value_t = DEFAULT_TRACE_DEPTH)]
        traces: usize,
        /// Largest relative width of the entropy interval, as `p/q`.
        #[arg(long)]
        entropy_tol: Option<String>,
    },
    /// Elementary equivalences A = CD, B = DC.
    #[command(subcommand)]
    Elemeq(ElemeqCommand),
    /// Chains of elementary equivalences.
    #[command(subcommand)]
    Sse(SseCommand),
    /// Bimodule certificates.
    #[command(subcommand)]
    Morita(MoritaCommand),
    /// Expressions in a Cuntz-Krieger algebra.
    #[command(subcommand)]
    Ck(CkCommand),
}

#[derive(Args)]
struct BudgetArgs {
    /// Stop after this many search nodes.
    #[arg(long)]
    node_budget: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.node_budget,
            time_limit: None,
        }
    }
}

#[derive(Subcommand)]
enum ElemeqCommand {
    /// Least witness (C, D); exit 1 if none exists, 2 if the budget ran out.
    Solve {
        a: PathBuf,
        b: PathBuf,
        /// List up to this many witnesses as a JSON array.
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exit 0 iff A = CD and B = DC.
    Verify { a: PathBuf, b: PathBuf, c: PathBuf, d: PathBuf },
}

#[derive(Subcommand)]
enum SseCommand {
    /// Shortest chain from A to B within the step and size caps.
    Search {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        max_steps: usize,
        /// Largest intermediate matrix size.
        #[arg(long)]
        size_cap: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exit 0 iff every link of the chain holds.
    Verify { chain: PathBuf },
}

#[derive(Subcommand)]
enum MoritaCommand {
    /// Certificate for an elementary equivalence.
    Build {
        a: PathBuf,
        b: PathBuf,
        c: PathBuf,
        d: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run all checks; exit 0 iff every check passes.
    Verify {
        cert: PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recover C and D by counting; exit 0 iff they match the certificate.
    Reconstruct { cert: PathBuf },
}

#[derive(Args)]
struct AlgebraArgs {
    /// A 0-1 matrix is taken as the presenting matrix; any other matrix
    /// as A, presented by the transition matrix of its edge graph.
    #[arg(long)]
    matrix: PathBuf,
    /// Present by the edge graph even when the matrix is 0-1.
    #[arg(long)]
    edge_graph: bool,
}

#[derive(Subcommand)]
enum CkCommand {
    /// Print the normal form of an expression.
    Normalize {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Exit 0 iff the two expressions are equal.
    Eq {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            _ if e.is_domain() => EXIT_DOMAIN,
            Error::Consistency(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    Matrix::from_json_str(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn status(name: &str, extra: Value) -> Value {
    let mut v = json!({ "status": name });
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Invariants {
            matrix,
            traces,
            entropy_tol,
        } => {
            let a = read_matrix(&matrix)?;
            let tol = match entropy_tol {
                Some(t) => parse_ratio(&t)?,
                None => default_entropy_tol(),
            };
            let report = InvariantReport::compute(&a, traces, &tol)?;
            println!("{}", pretty(&report.to_json()));
            Ok(0)
        }
        Command::Elemeq(cmd) => elemeq(cmd),
        Command::Sse(cmd) => sse(cmd),
        Command::Morita(cmd) => morita(cmd),
        Command::Ck(cmd) => ck(cmd),
    }
}

fn elemeq(cmd: ElemeqCommand) -> Outcome {
    match cmd {
        ElemeqCommand::Solve { a, b, limit, budget } => {
            let (a, b) = (read_matrix(&a)?, read_matrix(&b)?);
            if let Some(limit) = limit {
                let e = enumerate_witnesses(&a, &b, limit, &budget.budget())?;
                let list: Vec<Value> = e.witnesses.iter().map(|w| w.to_json(&a, &b)).collect();
                println!("{}", pretty(&Value::Array(list)));
                return Ok(match (e.witnesses.is_empty(), e.complete) {
                    (false, _) => 0,
                    (true, true) => EXIT_FAIL,
                    (true, false) => EXIT_BUDGET,
                });
            }
            match solve_elementary(&a, &b, &budget.budget())? {
                SolveOutcome::Found(w) => {
                    println!("{}", pretty(&w.to_json(&a, &b)));
                    Ok(0)
                }
                SolveOutcome::Infeasible { screen } => {
                    println!("{}", pretty(&status("infeasible", json!({ "separating_invariant": screen }))));
                    Ok(EXIT_FAIL)
                }
                SolveOutcome::BudgetExhausted { nodes } => {
                    println!("{}", pretty(&status("budget_exhausted", json!({ "nodes": nodes }))));
                    Ok(EXIT_BUDGET)
                }
            }
        }
        ElemeqCommand::Verify { a, b, c, d } => {
            let ok = verify_elementary(&read_matrix(&a)?, &read_matrix(&b)?, &read_matrix(&c)?, &read_matrix(&d)?)?;
            println!("{}", if ok { "pass" } else { "fail" });
            Ok(if ok { 0 } else { EXIT_FAIL })
        }
    }
}

fn sse(cmd: SseCommand) -> Outcome {
    match cmd {
        SseCommand::Search {
            a,
            b,
            max_steps,
            size_cap,
            budget,
        } => {
            let (a, b) = (read_matrix(&a)?, read_matrix(&b)?);
            let config = SearchConfig {
                size_cap,
                budget: budget.budget(),
                ..SearchConfig::default()
            };
            match search_chain(&a, &b, max_steps, &config)? {
                ChainOutcome::Found(chain) => {
                    println!("{}", pretty(&chain.to_json()));
                    Ok(0)
                }
                ChainOutcome::NotFound { separating } => {
                    println!("{}", pretty(&status("not_found", json!({ "separating_invariant": separating }))));
                    Ok(EXIT_FAIL)
                }
                ChainOutcome::BudgetExhausted { nodes } => {
                    println!("{}", pretty(&status("budget_exhausted", json!({ "nodes": nodes }))));
                    Ok(EXIT_BUDGET)
                }
            }
        }
        SseCommand::Verify { chain } => {
            let chain = SSEChain::from_json_str(&read_text(&chain)?)?;
            let ok = verify_chain(&chain)?;
            println!("{}", if ok { "pass" } else { "fail" });
            Ok(if ok { 0 } else { EXIT_FAIL })
        }
    }
}

fn read_certificate(path: &Path) -> Result<MoritaCertificate, Failure> {
    MoritaCertificate::from_json_str(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn morita(cmd: MoritaCommand) -> Outcome {
    match cmd {
        MoritaCommand::Build { a, b, c, d, output } => {
            let cert = build_certificate(&read_matrix(&a)?, &read_matrix(&b)?, &read_matrix(&c)?, &read_matrix(&d)?)?;
            let text = cert.to_json_string_pretty();
            match output {
                Some(path) => write_text(&path, &(text + "\n"))?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        MoritaCommand::Verify { cert, report } => {
            let cert = read_certificate(&cert)?;
            let result = verify_certificate(&cert);
            eprint!("{result}");
            let text = pretty(&result.to_json());
            match report {
                Some(path) => write_text(&path, &(text + "\n"))?,
                None => println!("{text}"),
            }
            Ok(if result.passed() { 0 } else { EXIT_FAIL })
        }
        MoritaCommand::Reconstruct { cert } => {
            let cert = read_certificate(&cert)?;
            let (c, d) = match reconstruct_factors(&cert) {
                Ok(pair) => pair,
                Err(e @ Error::Consistency(_)) => {
                    eprintln!("ckmorita: {e}");
                    return Ok(EXIT_FAIL);
                }
                Err(e) => return Err(e.into()),
            };
            println!("{}", pretty(&json!({ "C": &c, "D": &d })));
            let matches = c == cert.c && d == cert.d;
            if !matches {
                eprintln!("ckmorita: recovered factors differ from the certificate");
            }
            Ok(if matches { 0 } else { EXIT_FAIL })
        }
    }
}

fn presentation(args: &AlgebraArgs) -> Result<std::sync::Arc<Presentation>, Failure> {
    let m = read_matrix(&args.matrix)?;
    let zero_one = m.entries().iter().all(|x| *x == 0.into() || *x == 1.into());
    if zero_one && !args.edge_graph {
        return Ok(Presentation::with_default_names(&m)?);
    }
    let g = build_edge_graph(&m)?;
    Ok(Presentation::new(&edge_transition_matrix(&g)?, g.names())?)
}

fn expression(text: &str, pres: &std::sync::Arc<Presentation>) -> Result<Polynomial, Failure> {
    Ok(evaluate(&parse_ck_expr(text, pres.names())?, pres)?)
}

fn ck(cmd: CkCommand) -> Outcome {
    match cmd {
        CkCommand::Normalize { algebra, expr } => {
            let pres = presentation(&algebra)?;
            println!("{}", expression(&expr, &pres)?);
            Ok(0)
        }
        CkCommand::Eq { algebra, lhs, rhs } => {
            let pres = presentation(&algebra)?;
            let equal = expression(&lhs, &pres)?.is_equal(&expression(&rhs, &pres)?)?;
            println!("{}", if equal { "equal" } else { "not equal" });
            Ok(if equal { 0 } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ckmorita: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
