use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ratsurf::adjunction::{self, AdjunctionError};
use ratsurf::eliminator::{self, CorpusRow, Target};
use ratsurf::picard::DivisorClass;
use ratsurf::survey;
use ratsurf::typelang::{ERange, TypeExpr};
use ratsurf::verifier;

mod render;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "ratsurf",
    version,
    about = "Divisor classes and adjunction on rational surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
enum Command {
    /// Degree, sectional genus, K^2, chi and H.K of a type.
    Info(TypeArgs),
    /// One adjunction step H -> H + K.
    Adjoin(TypeArgs),
    /// The adjunction sequence of a type down to its terminal surface.
    Sequence(TypeArgs),
    /// Candidates for a degree and genus, run through the decomposition
    /// table and the lifting arguments.
    Classify(ClassifyArgs),
    /// Recompute the decomposition table.
    Eliminate(EliminateArgs),
    /// Run a verification scenario.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Exit 0 even when the output carries flags.
    #[arg(long)]
    allow_flags: bool,
}

#[derive(Args, Debug, Serialize)]
struct TypeArgs {
    /// A type such as "[7;2^7,1^10]" or "[(4,5-2e);2^4,1^13]".
    #[serde(rename = "type")]
    type_text: String,
    #[arg(long, conflicts_with = "e_range")]
    e: Option<u32>,
    /// Inclusive range, e.g. 0..3.
    #[arg(long, value_parser = parse_e_range)]
    #[serde(skip_serializing_if = "Option::is_none")]
    e_range: Option<ERange>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    #[arg(long)]
    degree: i64,
    #[arg(long)]
    genus: i64,
    /// Decomposition corpus (JSON lines); defaults to the shipped table.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct EliminateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 11)]
    degree: i64,
    #[arg(long, default_value_t = 8)]
    genus: i64,
    /// Do not assume h^1(H) = 1.
    #[arg(long)]
    non_special: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// construction, lifting-1, lifting-2 or all.
    scenario: String,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Table,
    Json,
    Csv,
}

fn parse_e_range(s: &str) -> Result<ERange, String> {
    s.parse::<ERange>().map_err(|e| e.to_string())
}

/// Failure classes, mapped to exit codes 1 and 3.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<AdjunctionError> for Failure {
    fn from(e: AdjunctionError) -> Self {
        match e {
            AdjunctionError::Invariant(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// What a command produced: rendered text and whether it carries flags.
struct Output {
    text: String,
    flagged: bool,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    format_version: u32,
    command: &'a Command,
    payload: T,
}

fn json<T: Serialize>(command: &Command, payload: T) -> Result<String, Failure> {
    let env = Envelope {
        format_version: FORMAT_VERSION,
        command,
        payload,
    };
    serde_json::to_string_pretty(&env)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn load_corpus(path: Option<&PathBuf>) -> Result<Vec<CorpusRow>, Failure> {
    let Some(path) = path else {
        return Ok(eliminator::shipped_corpus());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    eliminator::parse_corpus(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

type Realized = (TypeExpr, Vec<(Option<u32>, DivisorClass)>);

/// The classes a type stands for under the requested `e`.
fn realize(args: &TypeArgs) -> Result<Realized, Failure> {
    let t = TypeExpr::parse(&args.type_text).map_err(|e| Failure::Usage(format!("{}: {e}", args.type_text)))?;
    let es: Vec<Option<u32>> = match (t.is_ruled(), args.e, args.e_range) {
        (false, None, None) => vec![None],
        (false, _, _) => return Err(Failure::Usage(format!("{t} is a plane type; --e does not apply"))),
        (true, Some(e), _) => vec![Some(e)],
        (true, None, Some(r)) => r.iter().map(Some).collect(),
        (true, None, None) => return Err(Failure::Usage(format!("{t} is a ruled type; give --e or --e-range"))),
    };
    let classes = es
        .into_iter()
        .map(|e| {
            t.to_divisor(e)
                .map(|d| (e, d))
                .map_err(|err| Failure::Usage(err.to_string()))
        })
        .collect::<Result<_, _>>()?;
    Ok((t, classes))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let cmd = &cli.command;
    match cmd {
        Command::Info(args) => {
            let (t, classes) = realize(args)?;
            let records = classes
                .iter()
                .map(|(e, d)| render::InfoRecord::new(&t, *e, d))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let text = match args.common.format {
                Format::Json => json(cmd, &records)?,
                Format::Csv => render::info_csv(&records),
                Format::Table => render::info_table(&records),
            };
            Ok(Output { text, flagged: false })
        }
        Command::Adjoin(args) => {
            let (_, classes) = realize(args)?;
            let steps = classes
                .iter()
                .map(|(e, d)| adjunction::adjoin(d).map(|s| render::AdjoinRecord { e: *e, step: s }))
                .collect::<Result<Vec<_>, _>>()?;
            let text = match args.common.format {
                Format::Json => json(cmd, &steps)?,
                Format::Csv => render::adjoin_csv(&steps),
                Format::Table => render::adjoin_table(&steps),
            };
            Ok(Output { text, flagged: false })
        }
        Command::Sequence(args) => {
            let (_, classes) = realize(args)?;
            let seqs = classes
                .iter()
                .map(|(e, d)| adjunction::sequence(d).map(|s| render::SequenceRecord::new(*e, s)))
                .collect::<Result<Vec<_>, _>>()?;
            let text = match args.common.format {
                Format::Json => json(cmd, &seqs)?,
                Format::Csv => render::sequence_csv(&seqs),
                Format::Table => render::sequence_table(&seqs),
            };
            Ok(Output { text, flagged: false })
        }
        Command::Classify(args) => {
            let corpus = load_corpus(args.corpus.as_ref())?;
            let s = survey::survey(args.degree, args.genus, &corpus).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = match args.common.format {
                Format::Json => json(cmd, &s)?,
                Format::Csv => render::survey_csv(&s),
                Format::Table => render::survey_table(&s),
            };
            Ok(Output {
                text,
                flagged: s.has_flags(),
            })
        }
        Command::Eliminate(args) => {
            let corpus = load_corpus(args.corpus.as_ref())?;
            let target = Target {
                degree: args.degree,
                genus: args.genus,
                special: !args.non_special,
            };
            let rows = eliminator::run_table(&corpus, &target);
            let summary = eliminator::summarize(&rows);
            let text = match args.common.format {
                Format::Json => json(cmd, render::TablePayload { summary, rows: &rows })?,
                Format::Csv => render::eliminate_csv(&rows),
                Format::Table => render::eliminate_table(&rows, &summary),
            };
            Ok(Output {
                text,
                flagged: summary.flagged > 0 || summary.survivors > 0,
            })
        }
        Command::Verify(args) => {
            let names: Vec<&str> = match args.scenario.as_str() {
                "all" => verifier::SCENARIOS.to_vec(),
                name if verifier::SCENARIOS.contains(&name) => vec![name],
                other => {
                    return Err(Failure::Usage(format!(
                        "unknown scenario {other}; expected one of {}, all",
                        verifier::SCENARIOS.join(", ")
                    )))
                }
            };
            let reports: Vec<_> = names
                .iter()
                .map(|n| verifier::run_scenario(n).ok_or_else(|| Failure::Internal(format!("scenario {n} vanished"))))
                .collect::<Result<_, _>>()?;
            let text = match args.common.format {
                Format::Json => json(cmd, &reports)?,
                Format::Csv => render::verify_csv(&reports),
                Format::Table => render::verify_table(&reports),
            };
            Ok(Output {
                text,
                flagged: reports.iter().any(|r| !r.passed()),
            })
        }
    }
}

fn allow_flags(cmd: &Command) -> bool {
    match cmd {
        Command::Info(a) | Command::Adjoin(a) | Command::Sequence(a) => a.common.allow_flags,
        Command::Classify(a) => a.common.allow_flags,
        Command::Eliminate(a) => a.common.allow_flags,
        Command::Verify(a) => a.common.allow_flags,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = std::panic::catch_unwind(|| run(&cli));
    match result {
        Ok(Ok(out)) => {
            print!("{}", out.text);
            if out.flagged && !allow_flags(&cli.command) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
