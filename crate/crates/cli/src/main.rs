use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hodge_kdv::diffpoly::DiffPoly;
use hodge_kdv::hierarchy::HierarchyContext;
use hodge_kdv::hodge::{check_lambda_g, hodge_table, Bounds};
use hodge_kdv::ilw::{decompose_in_hamiltonians, sigma_sequence};
use hodge_kdv::scalar::rat;
use hodge_kdv::scalar::series::BernoulliTable;
use hodge_kdv::verify::{run_suites, Suite, VerifyConfig};
use hodge_kdv::Error;

#[derive(Parser, Debug)]
#[command(name = "hodge-kdv", version, about = "Deformed KdV hierarchy, ILW conserved quantities and Hodge integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation order in hbar.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    hbar_order: u32,

    /// Truncation order in mu for the ILW computations.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    mu_order: u32,

    /// Genus bound of the correlator table (at most the hbar order).
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    genus: u32,

    /// Largest descendant index.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..8))]
    descendants: u32,

    /// Degree bound in the times.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    degree: u32,

    /// Order in z for the series identities.
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    z_order: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// File of cached Hamiltonians, read before and written after a run.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Replaces B_2 by 1/5 in the series checks.
    #[arg(long, global = true, hide = true)]
    corrupt_bernoulli: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs a verification suite.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Prints the Hamiltonian h_n.
    Hamiltonian {
        #[arg(allow_negative_numbers = true)]
        n: i32,
    },
    /// Prints the table of Hodge integrals.
    HodgeTable,
    /// ILW conserved quantities.
    Ilw {
        #[arg(value_enum)]
        action: IlwAction,
        #[arg(value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Series,
    Brackets,
    Hamiltonians,
    Operator,
    #[value(name = "appendixA")]
    AppendixA,
    #[value(name = "appendixB")]
    AppendixB,
    Ilw,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::All => Suite::ALL.to_vec(),
            SuiteArg::Series => vec![Suite::Series],
            SuiteArg::Brackets => vec![Suite::Brackets],
            SuiteArg::Hamiltonians => vec![Suite::Hamiltonians],
            SuiteArg::Operator => vec![Suite::Operator],
            SuiteArg::AppendixA => vec![Suite::AppendixA],
            SuiteArg::AppendixB => vec![Suite::AppendixB],
            SuiteArg::Ilw => vec![Suite::Ilw],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IlwAction {
    Sigma,
    Decompose,
}

/// A failed run: mathematical failures exit 1, usage errors exit 2.
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

struct Output {
    text: String,
    document: serde_json::Value,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let body = match cli.format {
                Format::Text => out.text,
                Format::Structured => {
                    let mut s = serde_json::to_string_pretty(&out.document).expect("serializable");
                    s.push('\n');
                    s
                }
            };
            let mut stdout = io::stdout().lock();
            if stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Verify { suite } => Ok(verify(cli, *suite)),
        Command::Hamiltonian { n } => hamiltonian(cli, *n),
        Command::HodgeTable => table(cli),
        Command::Ilw { action, n } => ilw(cli, *action, *n as usize),
    }
}

fn with_cache<T>(cli: &Cli, ctx: &HierarchyContext, body: impl FnOnce() -> Result<T, Failure>) -> Result<T, Failure> {
    if let Some(path) = &cli.cache {
        ctx.load_cache(path)?;
    }
    let out = body()?;
    if let Some(path) = &cli.cache {
        ctx.save_cache(path)?;
    }
    Ok(out)
}

fn verify(cli: &Cli, suite: SuiteArg) -> Output {
    let mut bernoulli = BernoulliTable::exact(cli.z_order.max(16));
    if cli.corrupt_bernoulli {
        bernoulli = bernoulli.with_override(2, rat(1, 5));
    }
    let config = VerifyConfig { hbar_order: cli.hbar_order, mu_order: cli.mu_order, z_order: cli.z_order, bernoulli };
    let results = run_suites(&suite.suites(), &config);
    let passed = results.iter().all(|c| c.passed);
    let text: String = results.iter().map(|c| format!("{c}\n")).collect();
    let document = json!({
        "command": "verify",
        "suite": suite.to_possible_value().expect("no skipped variants").get_name(),
        "hbar_order": cli.hbar_order,
        "mu_order": cli.mu_order,
        "z_order": cli.z_order,
        "passed": passed,
        "checks": results,
    });
    Output { text, document, passed }
}

#[derive(Serialize)]
struct PolyDocument<'a> {
    command: &'a str,
    n: i64,
    text: String,
    terms: Vec<hodge_kdv::diffpoly::TermRecord>,
}

fn poly_document(command: &str, n: i64, text: String, p: &DiffPoly) -> serde_json::Value {
    serde_json::to_value(PolyDocument { command, n, text, terms: p.to_records() }).expect("serializable")
}

fn hamiltonian(cli: &Cli, n: i32) -> Result<Output, Failure> {
    if n < -1 {
        return Err(Failure::Usage(format!("no Hamiltonian h_{n}; n must be at least -1")));
    }
    let ctx = HierarchyContext::new(cli.hbar_order);
    let h = with_cache(cli, &ctx, || Ok(ctx.hamiltonian(n)?))?;
    let text = h.to_string();
    let mut document = poly_document("hamiltonian", n.into(), text.clone(), h.integrand());
    document["hbar_order"] = json!(cli.hbar_order);
    Ok(Output { text: text + "\n", document, passed: true })
}

fn table(cli: &Cli) -> Result<Output, Failure> {
    if cli.genus > cli.hbar_order {
        return Err(Failure::Usage(format!("genus bound {} exceeds hbar order {}", cli.genus, cli.hbar_order)));
    }
    let bounds = Bounds { genus: cli.genus, descendants: cli.descendants, degree: cli.degree };
    let ctx = HierarchyContext::new(cli.hbar_order);
    let table = with_cache(cli, &ctx, || Ok(hodge_table(&ctx, bounds)?))?;
    check_lambda_g(&table)?;
    let document = json!({
        "command": "hodge-table",
        "hbar_order": cli.hbar_order,
        "bounds": bounds,
        "rows": table.rows(),
    });
    Ok(Output { text: table.to_tsv(), document, passed: true })
}

fn ilw(cli: &Cli, action: IlwAction, n: usize) -> Result<Output, Failure> {
    let order = cli.mu_order;
    let sigmas = sigma_sequence(n, order);
    match action {
        IlwAction::Sigma => {
            let s = sigmas.sigma(n);
            let text = s.to_string();
            let mut document = poly_document("ilw-sigma", n as i64, text.clone(), s);
            document["mu_order"] = json!(order);
            Ok(Output { text: text + "\n", document, passed: true })
        }
        IlwAction::Decompose => {
            let ctx = HierarchyContext::new(order / 2);
            let d = with_cache(cli, &ctx, || Ok(decompose_in_hamiltonians(&sigmas, n, &ctx, order)?))?;
            let coefficients: Vec<_> =
                d.coefficients.iter().rev().map(|(k, c)| json!({ "k": k, "value": c.to_string() })).collect();
            let document = json!({
                "command": "ilw-decompose",
                "n": n,
                "mu_order": order,
                "coefficients": coefficients,
                "residual": d.residual.integrand().to_string(),
            });
            Ok(Output { text: format!("{d}\n"), document, passed: true })
        }
    }
}
