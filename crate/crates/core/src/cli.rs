//! The `probtree` command line.
//!
//! Exit codes are stable:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success (or record contained, for oracle) |
//! | 1    | oracle: record not contained              |
//! | 2    | input, parse or I/O error                 |
//! | 3    | tree construction error                   |
//! | 4    | invalid argument                          |
//! | 5    | validation assertion failed               |
//!
//! Machine-readable results go to stdout; diagnostics (enabled with `-v` or
//! `-vv`) go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::export::{self, to_json_with_metadata};
use crate::ingest::{read_csv, IngestOptions, MissingPolicy};
use crate::sampler::{Generator, RNG_ALGORITHM};
use crate::stats::{convergence_study, EXPECTED_SLOPE, SLOPE_TOLERANCE};
use crate::table::{CategoricalValue, Record};
use crate::tree::{ProbabilityTree, TreeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONTAINED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUILD: i32 = 3;
pub const EXIT_INVALID_ARGUMENT: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "probtree", version, about = "Probability trees over categorical CSV data")]
pub struct Cli {
    /// Diagnostic output on stderr (-v, -vv).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a tree from a CSV file and write it as JSON.
    Build {
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        ingest: IngestArgs,
        #[arg(long)]
        out: PathBuf,
        /// Omit the build timestamp so identical input gives identical files.
        #[arg(long)]
        deterministic: bool,
    },
    /// Generate records by Monte Carlo descent through the tree.
    Generate {
        #[command(flatten)]
        source: Source,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check every generated record against the tree before writing.
        #[arg(long)]
        verify: bool,
    },
    /// Write the tree as a DOT graph.
    Draw {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Join all components under a synthetic root vertex.
        #[arg(long)]
        single_root: bool,
    },
    /// Run the convergence study and write JSON and CSV reports.
    Validate {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "100,10000,1000000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        column: usize,
        /// JSON report path; the CSV report is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with code 5 unless the fitted slope is within -0.5 +/- 0.15.
        #[arg(long)]
        assert_slope: bool,
    },
    /// Check whether a (prefix) record is a path of the tree.
    Oracle {
        #[command(flatten)]
        source: Source,
        /// Comma-separated values in column order; may be a prefix.
        #[arg(allow_hyphen_values = true)]
        record: String,
    },
    /// Print the greedy most probable record.
    MaxRecord {
        #[command(flatten)]
        source: Source,
    },
    /// Summarize a tree.
    Info {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        print_tree: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "input")]
pub struct SourceInput {
    /// Build the tree from this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Load a tree written by `build`.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Source {
    #[command(flatten)]
    pub input: SourceInput,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MissingArg {
    Error,
    DropRow,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Equal-width binning for a numeric column, as COL=K. Repeatable.
    #[arg(long = "bins", value_name = "COL=K", value_parser = parse_bin)]
    pub bins: Vec<(String, usize)>,
    #[arg(long, value_enum, default_value = "error")]
    pub missing: MissingArg,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

fn parse_bin(s: &str) -> Result<(String, usize), String> {
    let (col, k) = s.rsplit_once('=').ok_or("expected COL=K")?;
    if col.is_empty() {
        return Err("empty column name".into());
    }
    let k: usize = k.parse().map_err(|_| format!("invalid bin count {k:?}"))?;
    if k < 2 {
        return Err(format!("bin count must be at least 2, got {k}"));
    }
    Ok((col.to_string(), k))
}

impl IngestArgs {
    fn options(&self) -> Result<IngestOptions, Failure> {
        if !self.delimiter.is_ascii() {
            return Err(Failure::new(EXIT_INVALID_ARGUMENT, "delimiter must be a single ASCII character"));
        }
        Ok(IngestOptions {
            missing_policy: match self.missing {
                MissingArg::Error => MissingPolicy::Error,
                MissingArg::DropRow => MissingPolicy::DropRow,
            },
            bin_spec: self.bins.iter().cloned().collect(),
            delimiter: self.delimiter as u8,
        })
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

struct Context<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    verbosity: u8,
}

impl Context<'_> {
    fn diag(&mut self, level: u8, msg: impl AsRef<str>) {
        if self.verbosity >= level {
            let _ = writeln!(self.err, "{}", msg.as_ref());
        }
    }

    fn print(&mut self, text: impl AsRef<str>) -> Result<(), Failure> {
        self.out
            .write_all(text.as_ref().as_bytes())
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write output: {e}")))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_INVALID_ARGUMENT
                }
            };
        }
    };
    let mut ctx = Context {
        out,
        err,
        verbosity: cli.verbose,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, ctx: &mut Context) -> Result<i32, Failure> {
    match command {
        Command::Build {
            csv,
            ingest,
            out,
            deterministic,
        } => cmd_build(ctx, &csv, &ingest, &out, deterministic),
        Command::Generate {
            source,
            n,
            seed,
            out,
            verify,
        } => cmd_generate(ctx, &source, n, seed, out.as_deref(), verify),
        Command::Draw {
            source,
            out,
            single_root,
        } => {
            let tree = load_tree(ctx, &source)?;
            write_output(ctx, out.as_deref(), &export::to_dot(&tree, single_root))?;
            Ok(EXIT_OK)
        }
        Command::Validate {
            source,
            sizes,
            trials,
            seed,
            column,
            out,
            assert_slope,
        } => cmd_validate(ctx, &source, &sizes, trials, seed, column, out.as_deref(), assert_slope),
        Command::Oracle { source, record } => cmd_oracle(ctx, &source, &record),
        Command::MaxRecord { source } => cmd_max_record(ctx, &source),
        Command::Info { source, print_tree } => {
            let tree = load_tree(ctx, &source)?;
            let mut text = format!(
                "columns: {}\ndepth: {}\nnode_count: {}\nsource_rows: {}\n",
                tree.columns().join(","),
                tree.depth(),
                tree.node_count(),
                tree.source_rows()
            );
            if print_tree {
                text.push_str(&tree.print_tree());
            }
            ctx.print(text)?;
            Ok(EXIT_OK)
        }
    }
}

fn build_from_csv(ctx: &mut Context, path: &Path, ingest: &IngestArgs) -> Result<ProbabilityTree, Failure> {
    let opts = ingest.options()?;
    let table = read_csv(path, &opts).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    if table.n_rows() == 0 {
        return Err(Failure::new(EXIT_INPUT, format!("{} has no data rows", path.display())));
    }
    ctx.diag(1, format!("ingested {} rows from {}", table.n_rows(), path.display()));
    ProbabilityTree::build(&table).map_err(|e| Failure::new(EXIT_BUILD, e.to_string()))
}

fn load_tree(ctx: &mut Context, source: &Source) -> Result<ProbabilityTree, Failure> {
    match (&source.input.csv, &source.input.tree) {
        (Some(csv), None) => build_from_csv(ctx, csv, &source.ingest),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
            let tree = export::from_json(&text)
                .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            ctx.diag(2, format!("loaded tree with {} nodes from {}", tree.node_count(), path.display()));
            Ok(tree)
        }
        _ => Err(Failure::new(EXIT_INVALID_ARGUMENT, "exactly one of --csv and --tree is required")),
    }
}

fn write_output(ctx: &mut Context, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", p.display()))),
        None => ctx.print(text),
    }
}

fn cmd_build(
    ctx: &mut Context,
    csv: &Path,
    ingest: &IngestArgs,
    out: &Path,
    deterministic: bool,
) -> Result<i32, Failure> {
    let tree = build_from_csv(ctx, csv, ingest)?;
    let mut metadata = Map::new();
    if !deterministic {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        metadata.insert("build_unix_time".into(), Value::from(now));
    }
    write_output(ctx, Some(out), &to_json_with_metadata(&tree, metadata))?;
    ctx.diag(
        1,
        format!(
            "columns: {}\nrows: {}\ndepth: {}\nnode_count: {}",
            tree.columns().join(","),
            tree.source_rows(),
            tree.depth(),
            tree.node_count()
        ),
    );
    Ok(EXIT_OK)
}

fn cmd_generate(
    ctx: &mut Context,
    source: &Source,
    n: usize,
    seed: u64,
    out: Option<&Path>,
    verify: bool,
) -> Result<i32, Failure> {
    if n == 0 {
        return Err(Failure::new(EXIT_INVALID_ARGUMENT, "-n must be at least 1"));
    }
    let tree = Arc::new(load_tree(ctx, source)?);
    let mut generator = Generator::new(tree.clone(), seed);
    let table = generator
        .get_records(n)
        .map_err(|e| Failure::new(EXIT_INVALID_ARGUMENT, e.to_string()))?;
    ctx.diag(1, format!("generated {n} records with seed {seed} using {RNG_ALGORITHM}"));
    if verify {
        for (i, row) in table.rows().iter().enumerate() {
            if !tree.oracle(row).unwrap_or(false) {
                return Err(Failure::new(EXIT_VALIDATION, format!("generated record {i} is not in the tree")));
            }
        }
        ctx.diag(1, format!("verified {n} records against the tree"));
    }
    write_output(ctx, out, &export::to_csv_string(&table))?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    ctx: &mut Context,
    source: &Source,
    sizes: &[usize],
    trials: usize,
    seed: u64,
    column: usize,
    out: Option<&Path>,
    assert_slope: bool,
) -> Result<i32, Failure> {
    let tree = Arc::new(load_tree(ctx, source)?);
    let report = convergence_study(&tree, column, sizes, trials, seed)
        .map_err(|e| Failure::new(EXIT_INVALID_ARGUMENT, e.to_string()))?;
    for (n, e) in report.sizes.iter().zip(&report.errors) {
        ctx.diag(1, format!("n={n} mean_l1={e:e}"));
    }
    if let Some(json_path) = out {
        let csv_path = if json_path.extension().is_some_and(|e| e == "csv") {
            return Err(Failure::new(EXIT_INVALID_ARGUMENT, "--out names the JSON report, not the CSV"));
        } else {
            json_path.with_extension("csv")
        };
        write_output(ctx, Some(json_path), &report.to_json())?;
        write_output(ctx, Some(&csv_path), &report.to_csv())?;
    }
    match report.fitted_slope {
        Some(s) => ctx.print(format!("fitted_slope: {s}\n"))?,
        None => ctx.print("fitted_slope: undefined\n")?,
    }
    if assert_slope && !report.slope_within_band() {
        let why = match report.fitted_slope {
            Some(s) => format!("fitted slope {s} is outside {EXPECTED_SLOPE} +/- {SLOPE_TOLERANCE}"),
            None => "slope is undefined (fewer than three sizes, or zero error at some size: the column may be degenerate)"
                .to_string(),
        };
        ctx.diag(0, format!("validation failed: {why}"));
        return Ok(EXIT_VALIDATION);
    }
    Ok(EXIT_OK)
}

/// Splits a comma-separated record and types each token by its column.
/// Returns `None` when a token cannot be a value of its column at all.
fn parse_record(tree: &ProbabilityTree, text: &str) -> Result<Option<Record>, TreeError> {
    let tokens: Vec<&str> = if text.is_empty() { Vec::new() } else { text.split(',').collect() };
    if tokens.len() > tree.depth() {
        return Err(TreeError::RecordTooLong {
            len: tokens.len(),
            depth: tree.depth(),
        });
    }
    let mut record = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        let kind = tree.column_kind(i).expect("index below depth");
        match CategoricalValue::parse_as(token, kind) {
            Some(v) => record.push(v),
            None => return Ok(None),
        }
    }
    Ok(Some(record))
}

fn cmd_oracle(ctx: &mut Context, source: &Source, text: &str) -> Result<i32, Failure> {
    let tree = load_tree(ctx, source)?;
    let record = parse_record(&tree, text).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let (contained, p) = match record {
        Some(r) => {
            let p = tree
                .record_probability(&r)
                .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
            (p > 0.0, p)
        }
        None => (false, 0.0),
    };
    ctx.print(format!("{contained}\np={p}\n"))?;
    Ok(if contained { EXIT_OK } else { EXIT_NOT_CONTAINED })
}

fn cmd_max_record(ctx: &mut Context, source: &Source) -> Result<i32, Failure> {
    let tree = load_tree(ctx, source)?;
    let (record, probabilities) = tree.max_record();
    let values: Vec<String> = record.iter().map(ToString::to_string).collect();
    let probs: Vec<String> = probabilities.iter().map(|p| format!("{p:.6}")).collect();
    ctx.print(format!("{}\n{}\n", values.join(","), probs.join(",")))?;
    if ctx.verbosity >= 1 {
        let joint = tree.record_probability(&record).unwrap_or(0.0);
        ctx.diag(1, format!("record_probability={joint}"));
    }
    Ok(EXIT_OK)
}
