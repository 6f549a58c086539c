//! Command-line front end: argument parsing, subcommand dispatch and
//! deterministic output.

pub mod json;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qtheory::algebra::{Conjugation, Element, Generator, Scalar};
use qtheory::catalog::{catalog_phi6, catalog_phi7, Catalog};
use qtheory::expr::parse_expression_with;
use qtheory::gns::{GnsRep, GnsTruncation, KERNEL_TOLERANCE};
use qtheory::lattice::ExperimentConfig;
use qtheory::rewrite::{normal_order_with, GeneratorOrder, RelationDocument, RelationSet, RewriteStats, Strategy};
use qtheory::states::{positivity_check, State, StateDocument, PSD_TOLERANCE};

#[derive(Debug, Parser)]
#[command(name = "qtheory", version, about = "Operator algebras, states and lattice continuum limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a state on an expression.
    Eval(EvalArgs),
    /// Normal-order an expression modulo CCR/CAR relations.
    NormalOrder(NormalOrderArgs),
    /// Smallest eigenvalue of a state's moment matrix.
    Positivity(PositivityArgs),
    /// Build a truncated GNS representation.
    Gns(GnsArgs),
    /// Run a lattice continuum-limit experiment.
    Continuum(ContinuumArgs),
    /// Emit a generator catalog as relation and generator JSON.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// State JSON file.
    #[arg(long)]
    pub state: PathBuf,
    /// Expression, e.g. `g1*g2 + (0+1i)*g3`.
    pub expression: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Leftmost,
    Rightmost,
}

#[derive(Debug, Args)]
pub struct NormalOrderArgs {
    /// Relation JSON file.
    #[arg(long)]
    pub relations: PathBuf,
    /// Comma-separated generator indices listed first in the order.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<u32>,
    #[arg(long, value_enum, default_value = "leftmost")]
    pub strategy: StrategyArg,
    pub expression: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PositivityArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub max_degree: usize,
    /// Generators `1..=block_dim` enter the moment matrix; defaults to the
    /// state's block.
    #[arg(long)]
    pub block_dim: Option<usize>,
    #[arg(long, default_value_t = PSD_TOLERANCE)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GnsArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Basis words have length at most this.
    #[arg(long, default_value_t = 1)]
    pub inner_degree: usize,
    /// Evaluation window; defaults to twice the inner degree plus the
    /// largest operator degree.
    #[arg(long)]
    pub ambient_degree: Option<usize>,
    #[arg(long)]
    pub block_dim: Option<usize>,
    /// Operator to represent; repeatable.
    #[arg(long = "op")]
    pub ops: Vec<String>,
    #[arg(long, default_value_t = KERNEL_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ContinuumArgs {
    /// Experiment JSON file.
    #[arg(long)]
    pub config: PathBuf,
    /// Also write the per-level delta table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Lattice CCR/CAR generators.
    Phi6 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Write the generator table here.
        #[arg(long)]
        generators: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// String-oscillator generators.
    Phi7 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        cutoff: usize,
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        generators: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Failure classes with their exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn render<T: Serialize>(value: &T) -> Result<String, CliError> {
    json::to_string(value).map_err(domain)
}

fn load_state(path: &Path) -> Result<State, CliError> {
    let doc: StateDocument = read_json(path)?;
    State::from_document(&doc).map_err(domain)
}

fn parse(text: &str, state: Option<&State>) -> Result<Element, CliError> {
    let conj = state.map_or(Conjugation::Coordinate, State::conjugation);
    parse_expression_with(text, &conj).map_err(|e| usage(format!("expression {e}")))
}

fn pair(z: Scalar) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize)]
struct EvalOutput {
    expression: String,
    value: [f64; 2],
}

#[derive(Serialize)]
struct TermOutput {
    word: Vec<u32>,
    coefficient: [f64; 2],
}

#[derive(Serialize)]
struct NormalOrderOutput {
    expression: String,
    normal_form: String,
    terms: Vec<TermOutput>,
    stats: RewriteStats,
}

#[derive(Serialize)]
struct PositivityOutput {
    block_dim: usize,
    max_degree: usize,
    tol: f64,
    min_eigenvalue: f64,
    positive: bool,
}

/// Runs one parsed command; the primary document goes to `--output` or is
/// returned for standard output.
pub fn execute(command: &Command) -> Result<Option<String>, CliError> {
    let (text, out) = match command {
        Command::Eval(a) => {
            let state = load_state(&a.state)?;
            let e = parse(&a.expression, Some(&state))?;
            let v = state.evaluate(&e).map_err(domain)?;
            let doc = EvalOutput {
                expression: e.to_string(),
                value: pair(v),
            };
            (render(&doc)?, &a.out)
        }
        Command::NormalOrder(a) => {
            let doc: RelationDocument = read_json(&a.relations)?;
            let relations = RelationSet::from_document(&doc).map_err(domain)?;
            let sequence = a
                .order
                .iter()
                .map(|&i| Generator::new(i).map_err(usage))
                .collect::<Result<Vec<_>, _>>()?;
            let order = GeneratorOrder::from_sequence(&sequence);
            let strategy = match a.strategy {
                StrategyArg::Leftmost => Strategy::Leftmost,
                StrategyArg::Rightmost => Strategy::Rightmost,
            };
            let e = parse(&a.expression, None)?;
            let (normal, stats) = normal_order_with(&e, &relations, &order, strategy);
            let doc = NormalOrderOutput {
                expression: e.to_string(),
                normal_form: normal.to_string(),
                terms: normal
                    .terms()
                    .map(|(w, c)| TermOutput {
                        word: w.indices(),
                        coefficient: pair(*c),
                    })
                    .collect(),
                stats,
            };
            (render(&doc)?, &a.out)
        }
        Command::Positivity(a) => {
            let state = load_state(&a.state)?;
            let block_dim = a.block_dim.unwrap_or_else(|| state.block_dim());
            let r = positivity_check(&state, block_dim, a.max_degree, a.tol).map_err(domain)?;
            let doc = PositivityOutput {
                block_dim,
                max_degree: a.max_degree,
                tol: a.tol,
                min_eigenvalue: r.min_eigenvalue,
                positive: r.positive,
            };
            (render(&doc)?, &a.out)
        }
        Command::Gns(a) => {
            let state = load_state(&a.state)?;
            let ops = a
                .ops
                .iter()
                .map(|s| parse(s, Some(&state)).map(|e| (s.clone(), e)))
                .collect::<Result<Vec<_>, _>>()?;
            let max_op = ops.iter().map(|(_, e)| e.degree()).max().unwrap_or(0);
            let ambient = a.ambient_degree.unwrap_or(2 * a.inner_degree + max_op);
            let block_dim = a.block_dim.unwrap_or_else(|| state.block_dim());
            let t = GnsTruncation::new(state, block_dim, a.inner_degree, ambient).map_err(domain)?;
            let rep = GnsRep::build_with_tolerance(t, a.tol).map_err(domain)?;
            let export = rep.export(&ops).map_err(domain)?;
            let text = match a.format {
                Format::Json => render(&export)?,
                Format::Csv => export.to_csv(json::format_float),
            };
            (text, &a.out)
        }
        Command::Continuum(a) => {
            let config: ExperimentConfig = read_json(&a.config)?;
            let report = config.run().map_err(domain)?;
            if let Some(path) = &a.csv {
                let labels: Vec<String> = config.sizes.iter().map(|n| n.to_string()).collect();
                write_file(path, &report.to_csv(&labels, json::format_float))?;
            }
            (render(&report)?, &a.out)
        }
        Command::Catalog(c) => {
            let (catalog, generators, out) = match c {
                CatalogCommand::Phi6 { m, n, generators, out } => {
                    (catalog_phi6(*m, *n).map_err(domain)?, generators, out)
                }
                CatalogCommand::Phi7 {
                    k,
                    cutoff,
                    dims,
                    generators,
                    out,
                } => (catalog_phi7(*k, *cutoff, *dims).map_err(domain)?, generators, out),
            };
            if let Some(path) = generators {
                write_file(path, &render(&catalog.generator_document())?)?;
            }
            (catalog_relations(&catalog)?, out)
        }
    };
    match &out.output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn catalog_relations(catalog: &Catalog) -> Result<String, CliError> {
    render(&catalog.relations.to_document())
}

/// Parses `args`, runs the command and reports to the given streams.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return 2;
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            if let Some(text) = text {
                let _ = stdout.write_all(text.as_bytes());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
