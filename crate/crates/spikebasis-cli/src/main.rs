//! Command-line front end: generate datasets, run best-basis searches, emit
//! the closed-form basis constructions and curve data, and run the
//! verification suite.
//!
//! Every command is deterministic given its flags and seed. The default seed
//! is 0, overridable through the `SPIKEBASIS_SEED` environment variable.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spikebasis::analytic;
use spikebasis::bases::{self, GlLsdbParams};
use spikebasis::bestbasis::{self, DictionaryCost, SpikeCostKind};
use spikebasis::costs::{entropy_exact_spike, mutual_information_spike, HistogramEstimator};
use spikebasis::dictionary::DictionaryTable;
use spikebasis::fmt12;
use spikebasis::processes::{
    sample_multispike, sample_spike, sample_uniform2d, Dataset, SpikeProcess,
};
use spikebasis::verify::{self, Claim};

fn default_seed() -> u64 {
    std::env::var("SPIKEBASIS_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

#[derive(Parser)]
#[command(
    name = "spikebasis",
    about = "Sparsity and statistical-independence analysis of the spike process",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw realizations of a process and write them as CSV or JSON
    Sample(SampleArgs),
    /// Run the best-basis search over the Haar-Walsh dictionary
    Bestbasis(BestBasisArgs),
    /// Emit the closed-form least-dependent bases with their costs
    Lsdb(LsdbArgs),
    /// Emit curve data for the analytic functions as CSV
    Curves(CurvesArgs),
    /// Run theorem-level verification; exits nonzero on any violation
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProcessKind {
    Spike,
    Uniform2d,
    Multispike,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SampleArgs {
    /// Which process to sample
    #[arg(long, value_enum)]
    process: ProcessKind,
    /// Dimension (spike and multispike)
    #[arg(long)]
    n: Option<usize>,
    /// Number of spikes per realization (multispike)
    #[arg(long)]
    m: Option<usize>,
    /// Number of realizations
    #[arg(long)]
    count: usize,
    /// RNG seed
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CostName {
    Entropy,
    Lp,
}

#[derive(Args)]
struct BestBasisArgs {
    /// CSV dataset, one sample per row (dyadic row length)
    #[arg(long, conflicts_with = "process")]
    input: Option<PathBuf>,
    /// Analyze a process instead of a dataset (only `spike` with --exact)
    #[arg(long, value_enum)]
    process: Option<ProcessKind>,
    /// Use the closed-form per-node costs of the spike process
    #[arg(long, requires = "process")]
    exact: bool,
    /// Tree depth exponent for --process spike --exact (n = 2^n0)
    #[arg(long)]
    n0: Option<usize>,
    /// Cost function
    #[arg(long, value_enum)]
    cost: CostName,
    /// Exponent for the lp cost
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Decomposition depth (defaults to the maximal depth)
    #[arg(long)]
    depth: Option<usize>,
    /// Select one basis per sample instead of one for the whole dataset
    #[arg(long)]
    per_realization: bool,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LsdbGroup {
    /// Orthonormal group
    Og,
    /// General linear group (analysis/synthesis pair)
    Gl,
}

#[derive(Args)]
struct LsdbArgs {
    #[arg(long, value_enum)]
    group: LsdbGroup,
    /// Dimension
    #[arg(long)]
    n: usize,
    /// First-row value of the analysis matrix (gl)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    /// Off-diagonal row values b_2..b_n (gl); single value broadcasts
    #[arg(long, value_delimiter = ',', default_values_t = [0.0], allow_hyphen_values = true)]
    b: Vec<f64>,
    /// Diagonal row values c_2..c_n (gl); single value broadcasts
    #[arg(long, value_delimiter = ',', default_values_t = [1.0], allow_hyphen_values = true)]
    c: Vec<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CurveName {
    /// Binary entropy
    F,
    /// Signed-coordinate entropy (f(x) + x)
    G,
    /// Doubling gap g(x) - g(2x)
    Gg2,
    /// Natural-log mutual information of the general-linear optimum
    H,
    /// Class-bound gap deciding the active entropy lower bound
    R,
    /// Reflection lp cost as a function of x = 2/n
    #[value(name = "s_p")]
    SP,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, value_enum)]
    function: CurveName,
    /// Exponent for s_p
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Grid start (per-function default when omitted)
    #[arg(long)]
    xmin: Option<f64>,
    /// Grid end (per-function default when omitted)
    #[arg(long)]
    xmax: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Claim family to run
    #[arg(long)]
    claim: String,
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    /// Trial count for the randomized searches (claim defaults when omitted)
    #[arg(long)]
    trials: Option<usize>,
    /// JSON-lines report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a per-check summary table
    #[arg(long)]
    summary_csv: Option<PathBuf>,
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> Result<()> {
    let dataset = match args.process {
        ProcessKind::Spike => {
            let n = args.n.context("--process spike requires --n")?;
            sample_spike(&SpikeProcess::new(n)?, args.count, args.seed)?
        }
        ProcessKind::Uniform2d => sample_uniform2d(args.count, args.seed)?,
        ProcessKind::Multispike => {
            let n = args.n.context("--process multispike requires --n")?;
            let m = args.m.context("--process multispike requires --m")?;
            sample_multispike(n, m, args.count, args.seed)?
        }
    };
    match args.format {
        OutputFormat::Json => write_output(&args.out, &dataset.to_json())?,
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            dataset.write_csv(&mut buf)?;
            write_output(&args.out, std::str::from_utf8(&buf)?)?;
        }
    }
    Ok(())
}

fn run_bestbasis(args: BestBasisArgs) -> Result<()> {
    if let Some(process) = args.process {
        if process != ProcessKind::Spike || !args.exact {
            bail!("only --process spike --exact is supported without --input");
        }
        let n0 = args.n0.context("--process spike --exact requires --n0")?;
        let kind = match args.cost {
            CostName::Entropy => SpikeCostKind::Entropy,
            CostName::Lp => SpikeCostKind::Lp { p: args.p },
        };
        let result = bestbasis::best_basis_exact_spike(n0, kind)?;
        return write_output(&args.out, &(result.to_json() + "\n"));
    }
    let input = args.input.context("need either --input or --process")?;
    let file =
        std::fs::File::open(&input).with_context(|| format!("reading {}", input.display()))?;
    let dataset = Dataset::read_csv(file)?;
    let n = dataset.dimension();
    if !n.is_power_of_two() {
        bail!("dataset dimension {n} is not dyadic");
    }
    let n0 = n.trailing_zeros() as usize;
    let depth = args.depth.unwrap_or(n0);
    let cost = match args.cost {
        CostName::Entropy => DictionaryCost::EntropyEmpirical {
            estimator: HistogramEstimator::default(),
        },
        CostName::Lp => DictionaryCost::Lp { p: args.p },
    };
    let tables: Vec<DictionaryTable> = dataset
        .samples()
        .iter()
        .map(|x| DictionaryTable::analyze(x.as_slice(), depth))
        .collect::<spikebasis::Result<_>>()?;
    let text = if args.per_realization {
        let mut results = Vec::with_capacity(tables.len());
        for table in &tables {
            results.push(bestbasis::best_basis(std::slice::from_ref(table), &cost)?);
        }
        let mut out = String::from("[\n");
        for (i, r) in results.iter().enumerate() {
            out.push_str(&r.to_json());
            if i + 1 < results.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    } else {
        bestbasis::best_basis(&tables, &cost)?.to_json() + "\n"
    };
    write_output(&args.out, &text)
}

fn matrix_rows(m: &spikebasis::nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn run_lsdb(args: LsdbArgs) -> Result<()> {
    let text = match args.group {
        LsdbGroup::Og => {
            let optima = bases::lsdb_orthonormal(args.n)?;
            let mut entries = Vec::new();
            for basis in &optima {
                let cost = entropy_exact_spike(basis, args.n, bases::DEFAULT_REL_TOL)?;
                entries.push(serde_json::json!({
                    "provenance": basis.provenance(),
                    "n": args.n,
                    "group_tag": "orthonormal",
                    "matrix": matrix_rows(basis.synthesis_matrix()),
                    "cost_bits": cost.value,
                    "mutual_information_bits":
                        mutual_information_spike(basis, args.n, bases::DEFAULT_REL_TOL)?,
                }));
            }
            serde_json::to_string_pretty(&serde_json::json!({
                "group": "og",
                "n": args.n,
                "optima": entries,
            }))?
        }
        LsdbGroup::Gl => {
            let broadcast = |values: &[f64]| -> Vec<f64> {
                if values.len() == 1 {
                    vec![values[0]; args.n - 1]
                } else {
                    values.to_vec()
                }
            };
            let params = GlLsdbParams::new(args.a, broadcast(&args.b), broadcast(&args.c))?;
            let basis = bases::lsdb_gl_pair(&params)?;
            let cost = entropy_exact_spike(&basis, args.n, bases::DEFAULT_REL_TOL)?;
            serde_json::to_string_pretty(&serde_json::json!({
                "group": "gl",
                "n": args.n,
                "a": params.a,
                "b": params.b,
                "c": params.c,
                "analysis": matrix_rows(basis.analysis_matrix()),
                "synthesis": matrix_rows(basis.synthesis_matrix()),
                "determinant": bases::gl_lsdb_determinant(&params),
                "cost_bits": cost.value,
                "mutual_information_bits":
                    mutual_information_spike(&basis, args.n, bases::DEFAULT_REL_TOL)?,
            }))?
        }
    };
    write_output(&args.out, &(text + "\n"))
}

const CURVE_STEP: f64 = 1e-3;

type CurveFn = Box<dyn Fn(f64) -> spikebasis::Result<f64>>;

fn run_curves(args: CurvesArgs) -> Result<()> {
    let p = args.p;
    let (name, default_range, f): (&str, (f64, f64), CurveFn) = match args.function {
        CurveName::F => ("f", (0.0, 1.0), Box::new(analytic::binary_entropy)),
        CurveName::G => ("g", (0.0, 1.0), Box::new(analytic::signed_entropy)),
        CurveName::Gg2 => (
            "gg2",
            (0.0, 0.5),
            Box::new(|x| Ok(analytic::signed_entropy(x)? - analytic::signed_entropy(2.0 * x)?)),
        ),
        CurveName::H => (
            "h",
            (2.0, 100.0),
            Box::new(analytic::gl_mutual_information_nats),
        ),
        CurveName::R => ("r", (2.0, 8.0), Box::new(analytic::class_bound_gap)),
        CurveName::SP => (
            "s_p",
            (CURVE_STEP, 1.0),
            Box::new(move |x| analytic::reflection_lp_cost(x, p)),
        ),
    };
    let x0 = args.xmin.unwrap_or(default_range.0);
    let x1 = args.xmax.unwrap_or(default_range.1);
    let points = analytic::sample_curve(x0, x1, CURVE_STEP, f)?;
    let mut out = format!("# function={name} step={CURVE_STEP}\nx,value\n");
    for (x, v) in points {
        out.push_str(&format!("{},{}\n", fmt12(x), fmt12(v)));
    }
    write_output(&args.out, &out)
}

fn run_verify(args: VerifyArgs) -> Result<bool> {
    let claim: Claim = args.claim.parse()?;
    let reports = verify::run_claim(claim, args.seed, args.trials)?;
    let mut jsonl = Vec::new();
    verify::write_reports_jsonl(&reports, &mut jsonl)?;
    write_output(&args.out, std::str::from_utf8(&jsonl)?)?;
    if let Some(path) = &args.summary_csv {
        let file =
            std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        verify::write_summary_csv(&reports, file)?;
    }
    let mut all_confirmed = true;
    for report in &reports {
        let status = if report.confirmed() {
            "confirmed"
        } else {
            "VIOLATED"
        };
        eprintln!("{}: {status}", report.claim_id);
        all_confirmed &= report.confirmed();
    }
    Ok(all_confirmed)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sample(args) => run_sample(args)?,
        Command::Bestbasis(args) => run_bestbasis(args)?,
        Command::Lsdb(args) => run_lsdb(args)?,
        Command::Curves(args) => run_curves(args)?,
        Command::Verify(args) => {
            if !run_verify(args)? {
                std::io::stdout().flush().ok();
                std::process::exit(1);
            }
        }
    }
    Ok(())
}
