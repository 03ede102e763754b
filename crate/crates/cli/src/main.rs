use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use productset::bounds::{compare_actual, BoundReport};
use productset::certificate::{certify, validate, CertificateNode};
use productset::decomposition::decompose;
use productset::divisor::{build_tau_table, tau, tau_max, TauTable};
use productset::harness::{batch_report, threads_from_env, ReportConfig};
use productset::rational::{enumerate_farey, product_set, quotient_set};
use productset::search::{
    exhaustive_min, local_search_min, objective_value, structured_construction, Construction,
    Method, Objective, SearchResult, DEFAULT_ITERS, DEFAULT_RESTARTS,
};
use productset::text::{format_rational_set, parse_fraction, parse_rational_set};
use productset::{Error, FareyParams, RationalSet};

const EXIT_USAGE: u8 = 64;

/// Exact product and quotient sets of bounded-height rationals.
#[derive(Parser)]
#[command(name = "productset", version)]
struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List F(Q, Q') in increasing order, one fraction per line.
    Enumerate(Heights),
    /// Print the product set AB.
    ProductSet(Pair),
    /// Print the quotient set A/B.
    QuotientSet(Pair),
    /// Gcd-class table of A x B as CSV.
    Decompose(Pair),
    /// Number of divisors of M.
    Tau {
        #[arg(long)]
        m: u64,
    },
    /// Largest divisor count up to X.
    Tmax {
        #[arg(long)]
        x: f64,
    },
    /// Compare every bound with the exact size of A/B.
    Bounds(BoundsArgs),
    /// Build (or check) a certificate tree for A/B.
    Certify(CertifyArgs),
    /// Look for small quotient or product sets.
    Search(SearchArgs),
    /// Seeded batch of random instances as CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct Heights {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    qprime: f64,
}

impl Heights {
    fn params(&self) -> productset::Result<FareyParams> {
        FareyParams::new(self.q, self.qprime)
    }
}

/// Two input sets; `-` reads standard input.
#[derive(Args)]
struct Pair {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    sets: Pair,
    #[command(flatten)]
    heights: Heights,
    /// Largest level scanned; defaults to ceil(ln QQ').
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also compute the exact product-set size.
    #[arg(long)]
    product: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    sets: Pair,
    #[command(flatten)]
    heights: Heights,
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Re-check the produced tree against A and B.
    #[arg(long)]
    validate: bool,
    /// Check this certificate instead of building one.
    #[arg(long, conflicts_with_all = ["validate"])]
    check: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMethod {
    Exhaustive,
    Local,
    Geometric,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Quotient,
    Product,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    heights: Heights,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "quotient")]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "local")]
    method: SearchMethod,
    /// Search over A = B.
    #[arg(long)]
    symmetric: bool,
    #[arg(long, default_value_t = DEFAULT_ITERS)]
    iters: u32,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First term of a geometric construction.
    #[arg(long, default_value = "1")]
    start: String,
    /// Common ratio of a geometric construction.
    #[arg(long, default_value = "2")]
    ratio: String,
    /// Smoothness bound of a smooth construction.
    #[arg(long, default_value_t = 2)]
    smooth_bound: u64,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    heights: Heights,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, default_value_t = 1)]
    size_min: usize,
    #[arg(long, default_value_t = 200)]
    size_max: usize,
}

/// Command failure: a library error, or an I/O problem with its own message.
enum Failure {
    Lib(Error),
    Io(String),
    /// Output to emit before exiting with the given status.
    Report(String, u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = Result<T, Failure>;

/// Reads input files, serving `-` from a single read of standard input.
#[derive(Default)]
struct Inputs {
    stdin: Option<String>,
}

impl Inputs {
    fn text(&mut self, path: &str) -> Outcome<String> {
        if path == "-" {
            if self.stdin.is_none() {
                let mut s = String::new();
                io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::Io(format!("reading standard input: {e}")))?;
                self.stdin = Some(s);
            }
            return Ok(self.stdin.clone().unwrap_or_default());
        }
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("reading {path}: {e}")))
    }

    fn set(&mut self, path: &str) -> Outcome<RationalSet> {
        let text = self.text(path)?;
        Ok(parse_rational_set(&text)?)
    }

    fn pair(&mut self, pair: &Pair) -> Outcome<(RationalSet, RationalSet)> {
        Ok((self.set(&pair.a)?, self.set(&pair.b)?))
    }
}

fn table_for(p: &FareyParams) -> Outcome<TauTable> {
    Ok(build_tau_table(p.floor_product())?)
}

fn run(cli: Cli) -> Outcome<String> {
    let mut inputs = Inputs::default();
    let out = match cli.command {
        Command::Enumerate(h) => format_rational_set(&enumerate_farey(&h.params()?)?),
        Command::ProductSet(pair) => {
            let (a, b) = inputs.pair(&pair)?;
            format_rational_set(&product_set(&a, &b)?)
        }
        Command::QuotientSet(pair) => {
            let (a, b) = inputs.pair(&pair)?;
            format_rational_set(&quotient_set(&a, &b)?)
        }
        Command::Decompose(pair) => {
            let (a, b) = inputs.pair(&pair)?;
            let table = decompose(&a, &b)?;
            let mut out = String::from("r,s,countA,countB,countM\n");
            for (c, counts) in table.classes() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.r(),
                    c.s(),
                    counts.count_a,
                    counts.count_b,
                    counts.count_m
                ));
            }
            out
        }
        Command::Tau { m } => {
            if m == 0 {
                return Err(Error::Domain("tau is defined for m >= 1".into()).into());
            }
            format!("{}\n", tau(m))
        }
        Command::Tmax { x } => {
            if !x.is_finite() || x < 1.0 {
                return Err(Error::Domain(format!("x must be finite and >= 1, got {x}")).into());
            }
            let table = build_tau_table(x.floor() as u64)?;
            format!("{}\n", tau_max(&table, x)?)
        }
        Command::Bounds(args) => {
            let (a, b) = inputs.pair(&args.sets)?;
            let p = args.heights.params()?;
            let report = compare_actual(&a, &b, &p, args.n_max, &table_for(&p)?, args.product)?;
            match args.format {
                Format::Json => format!("{}\n", pretty(&report.to_json())),
                Format::Csv => format!(
                    "{}\n{}\n",
                    BoundReport::csv_header(report.n_max()),
                    report.to_csv_row()
                ),
            }
        }
        Command::Certify(args) => return run_certify(args, &mut inputs),
        Command::Search(args) => format!("{}\n", pretty(&run_search(&args)?.to_json())),
        Command::Report(args) => batch_report(&ReportConfig {
            params: args.heights.params()?,
            instances: args.instances,
            seed: args.seed,
            n_max: args.n_max,
            size_min: args.size_min,
            size_max: args.size_max,
        })?,
    };
    Ok(out)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize")
}

fn run_certify(args: CertifyArgs, inputs: &mut Inputs) -> Outcome<String> {
    let (a, b) = inputs.pair(&args.sets)?;
    let p = args.heights.params()?;
    let table = table_for(&p)?;
    let (cert, echo) = match &args.check {
        Some(path) => (CertificateNode::from_json_str(&inputs.text(path)?)?, false),
        None => match certify(&a, &b, &p, args.n, &table) {
            Ok(c) => (c, true),
            Err(Error::CertificationFailure { message, node }) => {
                eprintln!("certification failure at level {}: {message}", node.level);
                return Err(Failure::Report(format!("{}\n", node.to_json_string()), 3));
            }
            Err(e) => return Err(e.into()),
        },
    };
    let mut out = String::new();
    if echo {
        out.push_str(&cert.to_json_string());
        out.push('\n');
    }
    if args.validate || args.check.is_some() {
        let v = validate(&cert, &a, &b, &table);
        if v.is_valid() {
            out.push_str("valid\n");
        } else {
            out.push_str("invalid\n");
            for d in &v.diagnostics {
                out.push_str(&format!("  {d}\n"));
            }
            return Err(Failure::Report(out, 3));
        }
    }
    Ok(out)
}

fn run_search(args: &SearchArgs) -> Outcome<SearchResult> {
    let p = args.heights.params()?;
    let objective = match args.objective {
        ObjectiveArg::Quotient => Objective::Quotient,
        ObjectiveArg::Product => Objective::Product,
    };
    let built = |kind| -> Outcome<SearchResult> {
        let set = structured_construction(kind, &p, args.k)?;
        Ok(SearchResult {
            objective: objective_value(objective, &set, &set)?,
            witness_a: set.clone(),
            witness_b: set,
            q: p.q(),
            qprime: p.qprime(),
            k: args.k,
            method: Method::Construction,
        })
    };
    Ok(match args.method {
        SearchMethod::Exhaustive => exhaustive_min(&p, args.k, objective, args.symmetric)?,
        SearchMethod::Local => local_search_min(
            &p,
            args.k,
            objective,
            args.symmetric,
            args.iters,
            args.restarts,
            args.seed,
        )?,
        SearchMethod::Geometric => built(Construction::Geometric {
            start: parse_fraction(&args.start)?,
            ratio: parse_fraction(&args.ratio)?,
        })?,
        SearchMethod::Smooth => built(Construction::Smooth {
            bound: args.smooth_bound,
        })?,
    })
}

fn emit(text: &str, path: Option<&PathBuf>) -> Outcome<()> {
    let res = match path {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
        }
    };
    res.map_err(|e| Failure::Io(format!("writing output: {e}")))
}

fn configure_threads() -> Result<(), Error> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let output = cli.output.clone();
    let result = match run(cli) {
        Err(Failure::Report(text, code)) => {
            emit(&text, output.as_ref()).and(Err(Failure::Report(String::new(), code)))
        }
        other => other.and_then(|text| emit(&text, output.as_ref())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Report(_, code)) => ExitCode::from(code),
    }
}
