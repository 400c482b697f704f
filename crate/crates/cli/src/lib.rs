//! Command-line front end over `abc-core`.
//!
//! Every subcommand writes one table (or, for `census --format json`, one
//! report object) to the selected sink. Exit codes: 0 on success, 2 for
//! invalid arguments or domain errors, 3 for resource and I/O failures.

use std::io::Write;
use std::path::{Path, PathBuf};

use abc_core::bounds::{divisor_bound_constant, optimize_epsilon, refined_threshold, BoundEvaluation};
use abc_core::hp::HpReal;
use abc_core::report::{emit_census, plot_data, Cell, Format, Table};
use abc_core::search::{census_with, default_grid, enumerate_exceptional_with, fit_exponent, TripleRecord};
use abc_core::sieve::{count_small_radical_by_classes, small_radical_cutoff, SieveConfig, DEFAULT_MAX_N};
use abc_core::{enumerate_radical_class, BoundParams, Error, Ratio, SieveTables};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default directory for sieve caches.
pub const CACHE_DIR_ENV: &str = "ABC_CACHE_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "abc", version, about = "Radicals, radical classes and exceptional abc triples")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    /// Output encoding.
    #[arg(long = "format", value_enum, default_value_t = OutputFormat::Csv, global = true)]
    pub format: OutputFormat,

    /// Write to this file instead of standard output.
    #[arg(long = "output", global = true)]
    pub output_path: Option<PathBuf>,

    /// Worker threads for sieving and searching.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..), global = true)]
    pub threads: u32,

    /// Sieve cache file (defaults to a file under $ABC_CACHE_DIR when set).
    #[arg(long = "cache", global = true)]
    pub cache_path: Option<PathBuf>,

    /// Largest sieve length accepted before failing with a resource error.
    #[arg(long, default_value_t = DEFAULT_MAX_N, global = true)]
    pub sieve_budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Tsv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
            OutputFormat::Tsv => Format::Tsv,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print rad(n) and τ(n) for n ≤ N.
    Sieve {
        #[arg(long)]
        n_max: u64,
    },
    /// List R(r, N) = { n ≤ N : rad(n) = r }.
    RadicalClass {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        n_max: u64,
    },
    /// Count n ≤ N with rad(n) ≤ N^λ.
    CountLambda {
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        lambda: String,
        /// Recount by summing radical classes and fail if the two disagree.
        #[arg(long)]
        cross_check: bool,
    },
    /// Evaluate the explicit bound constants.
    Bounds {
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        n_max: u64,
        /// Squarefree r for the radical-class bound.
        #[arg(long, default_value_t = 1)]
        r: u64,
        /// Also evaluate the refined threshold at this c.
        #[arg(long)]
        c: Option<u64>,
        #[arg(long, default_value = "1/1")]
        kappa: String,
    },
    /// List E(N, ε) with decomposition witnesses.
    Search {
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        epsilon: String,
    },
    /// Count |E(N, ε)| over a grid of N and fit the growth exponent.
    Census {
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value = "1/10")]
        epsilon: String,
        /// Comma-separated N values (default: powers of ten up to N, then N).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u64>>,
        /// Embed the triples in JSON output.
        #[arg(long)]
        triples: bool,
        /// Emit (log N, log count) pairs instead of the census table.
        #[arg(long)]
        plot_data: bool,
    },
    /// Fit log(count) against log(N) from a CSV with N and count columns.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource(_) | Error::Io(_) | Error::Cache(_) => EXIT_RESOURCE,
            _ => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}

fn parse_ratio(flag: &str, s: &str) -> Result<Ratio, CliError> {
    s.parse().map_err(|e: Error| CliError::invalid(format!("--{flag}: {e}")))
}

fn params(epsilon: &str, n_max: u64) -> Result<BoundParams, CliError> {
    let eps = parse_ratio("epsilon", epsilon)?;
    BoundParams::new(eps, n_max).map_err(|e| CliError::invalid(format!("--epsilon/--n-max: {e}")))
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code after writing any diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let text = render(config)?;
    write_output(config.output.output_path.as_deref(), text.as_bytes())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let result = match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| CliError { code: EXIT_RESOURCE, message: format!("cannot write output: {e}") })
}

fn sieve_config(opts: &OutputOpts) -> SieveConfig {
    SieveConfig { max_n: opts.sieve_budget, threads: opts.threads as usize, ..Default::default() }
}

fn tables(opts: &OutputOpts, n_max: u64) -> Result<SieveTables, CliError> {
    let config = sieve_config(opts);
    if n_max > config.max_n {
        return Err(Error::Resource(format!("N = {n_max} exceeds the sieve budget {}", config.max_n)).into());
    }
    let cache = opts.cache_path.clone().or_else(|| {
        std::env::var_os(CACHE_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("radsieve-{n_max}.bin")))
    });
    Ok(match cache {
        Some(path) if n_max < 1 << 32 => SieveTables::load_or_build(&path, n_max, &config)?,
        _ => SieveTables::build_with(n_max, &config)?,
    })
}

fn render(config: &RunConfig) -> Result<String, CliError> {
    let opts = &config.output;
    let format: Format = opts.format.into();
    let threads = opts.threads as usize;
    let table = match &config.command {
        Command::Sieve { n_max } => {
            let t = tables(opts, *n_max)?;
            let mut out = Table::new(["n", "rad", "tau"]);
            for n in 1..=*n_max {
                out.push(vec![n.into(), t.rad(n).into(), t.tau(n).into()]);
            }
            out
        }
        Command::RadicalClass { r, n_max } => {
            let class = enumerate_radical_class(*r, *n_max)?;
            let mut out = Table::new(["r", "n"]);
            for m in class.members {
                out.push(vec![(*r).into(), m.into()]);
            }
            out
        }
        Command::CountLambda { n_max, lambda, cross_check } => {
            let lam = parse_ratio("lambda", lambda)?;
            let cutoff = small_radical_cutoff(*n_max, lam).map_err(|e| CliError::invalid(format!("--lambda: {e}")))?;
            let count = tables(opts, *n_max)?.count_small_radical(lam)?;
            if *cross_check {
                let by_classes = count_small_radical_by_classes(*n_max, lam)?;
                if by_classes != count {
                    return Err(CliError {
                        code: 1,
                        message: format!("table scan gives {count}, class sum gives {by_classes}"),
                    });
                }
            }
            let mut out = Table::new(["N", "lambda", "cutoff", "count"]);
            out.push(vec![(*n_max).into(), lam.to_string().into(), cutoff.into(), count.into()]);
            out
        }
        Command::Bounds { epsilon, n_max, r, c, kappa } => bounds_table(epsilon, *n_max, *r, *c, kappa)?,
        Command::Search { n_max, epsilon } => {
            let p = params(epsilon, *n_max)?;
            let t = tables(opts, *n_max)?;
            let found = enumerate_exceptional_with(&t, &p, threads)?;
            let records: Vec<TripleRecord> = found.iter().map(|x| TripleRecord::from_triple(&t, x)).collect();
            if format == Format::Json {
                let mut s = serde_json::to_string_pretty(&records).map_err(|e| CliError::invalid(e.to_string()))?;
                s.push('\n');
                return Ok(s);
            }
            triple_table(&records)
        }
        Command::Census { n_max, epsilon, grid, triples, plot_data: plot } => {
            let p = params(epsilon, *n_max)?;
            let grid = grid.clone().unwrap_or_else(|| default_grid(*n_max));
            let t = tables(opts, *n_max)?;
            let report = census_with(&t, &p, &grid, threads, *triples)?;
            if *plot {
                plot_data(&report)
            } else {
                return Ok(emit_census(&report, format)?);
            }
        }
        Command::Fit { input } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| CliError { code: EXIT_RESOURCE, message: format!("cannot read {}: {e}", input.display()) })?;
            let points = parse_grid_csv(&text)?;
            let slope = fit_exponent(&points)?;
            let mut out = Table::new(["points", "fitted_exponent"]);
            out.push(vec![points.len().into(), slope.into()]);
            out
        }
    };
    Ok(table.render(format))
}

fn triple_table(records: &[TripleRecord]) -> Table {
    let mut out = Table::new(["a", "b", "c", "rad_abc", "quality", "witness_pair", "witness_radical"]);
    for r in records {
        out.push(vec![
            r.a.into(),
            r.b.into(),
            r.c.into(),
            r.rad_abc.into(),
            r.quality.into(),
            r.witness_pair.label().into(),
            r.witness_radical.into(),
        ]);
    }
    out
}

fn hp_cells(v: &HpReal) -> [Cell; 2] {
    let x = v.to_f64();
    [if x.is_finite() { x.into() } else { Cell::Empty }, v.log10().into()]
}

fn bounds_table(epsilon: &str, n_max: u64, r: u64, c: Option<u64>, kappa: &str) -> Result<Table, CliError> {
    let eps = parse_ratio("epsilon", epsilon)?;
    let kappa = parse_ratio("kappa", kappa)?;
    let mut out = Table::new(["bound", "epsilon", "scale", "value", "log10_value"]);
    let mut row = |name: &str, eps: Cell, scale: Cell, v: &HpReal| {
        let [value, log10] = hp_cells(v);
        out.push(vec![name.into(), eps, scale, value, log10]);
    };
    row("divisor-constant", eps.to_string().into(), Cell::Empty, &divisor_bound_constant(eps)?);
    row("divisor", eps.to_string().into(), n_max.into(), &BoundEvaluation::divisor(n_max, eps)?.bound_value);
    row(
        "radical-class",
        eps.to_string().into(),
        n_max.into(),
        &BoundEvaluation::radical_class(r, n_max, eps)?.bound_value,
    );
    let opt = optimize_epsilon(n_max)?;
    row("optimized", opt.epsilon_star.to_string().into(), n_max.into(), &BoundEvaluation::optimized(n_max)?.bound_value);
    if let Some(c) = c {
        row("refined-threshold", kappa.to_string().into(), c.into(), &refined_threshold(c, kappa)?);
    }
    Ok(out)
}

/// Reads `N,count` rows; a header line naming the columns is optional.
fn parse_grid_csv(text: &str) -> Result<Vec<(u64, f64)>, CliError> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split([',', '\t']).map(str::trim);
        let (n, count) = (fields.next().unwrap_or(""), fields.next().unwrap_or(""));
        match (n.parse::<u64>(), count.parse::<f64>()) {
            (Ok(n), Ok(count)) => points.push((n, count)),
            _ if i == 0 => continue,
            _ => return Err(CliError::invalid(format!("--input line {}: expected N,count", i + 1))),
        }
    }
    Ok(points)
}
