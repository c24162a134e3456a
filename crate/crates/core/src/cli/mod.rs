//! Command-line interface: `gen`, `exact`, `density`, and `experiment`.
//!
//! Exit codes: 0 on success (experiment assertions all pass), 1 when an
//! experiment ran to completion but an assertion failed (the report is
//! still written), 2 on usage or configuration errors. Reports go to
//! stdout unless `--out` redirects them; status lines go to stderr.
//!
//! Set the environment variable `MGL_WORKERS` to cap experiment
//! parallelism; reports are byte-identical for any worker count.

pub mod config;
pub mod experiments;
pub mod report;
pub mod thresholds;

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::generators::{DegreeConvention, RngStream};
use crate::multigraphon::KernelSpec;
use crate::oracle::{
    ball_replacement_stationary, edge_reconnect_stationary, exact_pag_distribution,
    polya_degree_marginal,
};
use crate::{Error, Result};
use config::{OutputFormat, Overlay};

/// Everything ran and every assertion passed.
pub const EXIT_OK: i32 = 0;
/// An experiment completed but at least one assertion failed.
pub const EXIT_ASSERTION: i32 = 1;
/// Usage, configuration, or input errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "mgl",
    version,
    about = "Simulation and verification toolkit for dense random multigraphs",
    long_about = "Simulation and verification toolkit for dense random multigraphs: \
                  preferential-attachment and configuration-model samplers, exact \
                  small-instance probability tables, Monte Carlo pattern densities \
                  against limit kernels, and a suite of statistical experiments.\n\n\
                  Exit codes: 0 success, 1 experiment assertion failure, 2 usage or \
                  configuration error. Set MGL_WORKERS to cap parallelism (results \
                  do not depend on the worker count)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one preferential-attachment multigraph and print its edge list.
    Gen(GenArgs),
    /// Compute an exact distribution table for a small instance (JSON).
    Exact(ExactArgs),
    /// Monte Carlo induced-density estimate of a pattern in a host graph or kernel.
    Density(DensityArgs),
    /// Run a named experiment and write its report.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
#[command(group = ArgGroup::new("size").required(true).args(["m", "rho"]))]
struct GenArgs {
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Number of edges.
    #[arg(long)]
    m: Option<u64>,
    /// Edge density; the edge count becomes ⌊rho·n²/2⌋.
    #[arg(long)]
    rho: Option<f64>,
    /// Strength parameter κ > 0.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Master seed (same seed, same bytes).
    #[arg(long, default_value_t = thresholds::DEFAULT_SEED)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ExactTarget {
    /// Preferential-attachment graph law by exhaustive enumeration.
    Pag,
    /// Stationary law of the ball-replacement chain on urn words.
    BallReplacement,
    /// Stationary law of the edge-reconnecting chain on multigraphs.
    EdgeReconnect,
    /// Degree-sequence marginal of the attachment law.
    Degrees,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
enum ConventionArg {
    /// Attachment weights use degrees before the stub is detached.
    #[default]
    Before,
    /// Attachment weights use degrees after the stub is detached.
    After,
}

impl From<ConventionArg> for DegreeConvention {
    fn from(value: ConventionArg) -> Self {
        match value {
            ConventionArg::Before => DegreeConvention::BeforeDetachment,
            ConventionArg::After => DegreeConvention::AfterDetachment,
        }
    }
}

#[derive(Args)]
struct ExactArgs {
    /// Which exact law to compute.
    #[arg(long, value_enum)]
    what: ExactTarget,
    /// Number of vertices (colors).
    #[arg(long)]
    n: usize,
    /// Number of edges (half the word length).
    #[arg(long)]
    m: u64,
    /// Strength parameter κ > 0.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Degree convention for the edge-reconnecting chain.
    #[arg(long, value_enum, default_value_t = ConventionArg::Before)]
    convention: ConventionArg,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("target").required(true).args(["graph", "kernel"]))]
struct DensityArgs {
    /// Path to the pattern edge list.
    #[arg(long)]
    pattern: PathBuf,
    /// Path to a host multigraph edge list.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Path to a kernel description (JSON).
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Master seed.
    #[arg(long, default_value_t = thresholds::DEFAULT_SEED)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment name: exact-small, degree-gamma, edge-poisson,
    /// density-convergence, spag-check, or ui-diagnostic.
    name: String,
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Number of edges.
    #[arg(long, conflicts_with = "rho")]
    m: Option<u64>,
    /// Edge density; the edge count becomes ⌊rho·n²/2⌋.
    #[arg(long)]
    rho: Option<f64>,
    /// Strength parameter κ > 0.
    #[arg(long)]
    kappa: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Seed replicas (or tested pairs, for edge-poisson).
    #[arg(long)]
    replicas: Option<usize>,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

/// Parse the process arguments, run the requested command, and return
/// the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Like [`run`], from explicit arguments (first entry is the program
/// name). Lets tests drive the full CLI in process.
pub fn run_from<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive as "errors" but exit 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => {
            let text = cmd_gen(&args)?;
            write_output(args.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Exact(args) => {
            let text = cmd_exact(&args)?;
            write_output(args.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Density(args) => {
            let text = cmd_density(&args)?;
            write_output(args.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn resolve_edges(n: usize, m: Option<u64>, rho: Option<f64>) -> Result<usize> {
    let m = match (m, rho) {
        (Some(m), _) => m,
        (None, Some(rho)) => {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "density must be a positive finite number, got {rho}"
                )));
            }
            (rho * n as f64 * n as f64 / 2.0).floor() as u64
        }
        (None, None) => {
            return Err(Error::InvalidParameter("give an edge count or a density".into()));
        }
    };
    if m == 0 {
        return Err(Error::InvalidParameter(
            "resolved edge count is zero; increase n or the density".into(),
        ));
    }
    usize::try_from(m).map_err(|_| Error::InvalidParameter("edge count overflows usize".into()))
}

fn cmd_gen(args: &GenArgs) -> Result<String> {
    let m = resolve_edges(args.n, args.m, args.rho)?;
    let mut rng = RngStream::new(args.seed).rng();
    let b = crate::generators::pag(args.n, m, args.kappa, &mut rng)?;
    Ok(b.to_edge_list())
}

fn cmd_exact(args: &ExactArgs) -> Result<String> {
    let m = usize::try_from(args.m)
        .map_err(|_| Error::InvalidParameter("edge count overflows usize".into()))?;
    let table = match args.what {
        ExactTarget::Pag => {
            exact_pag_distribution(args.n, m, args.kappa)?.map_keys(|b| b.to_edge_list())
        }
        ExactTarget::BallReplacement => ball_replacement_stationary(args.n, m, args.kappa)?
            .map_keys(|w| w.canonical_string()),
        ExactTarget::EdgeReconnect => {
            edge_reconnect_stationary(args.n, args.m, args.kappa, args.convention.into())?
                .map_keys(|b| b.to_edge_list())
        }
        ExactTarget::Degrees => polya_degree_marginal(args.n, m, args.kappa)?.map_keys(|d| {
            d.as_slice().iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
        }),
    };
    let mut text = table.to_json();
    text.push('\n');
    Ok(text)
}

fn cmd_density(args: &DensityArgs) -> Result<String> {
    let pattern_text = std::fs::read_to_string(&args.pattern)?;
    let pattern = crate::graph::AdjacencyMatrix::from_edge_list(&pattern_text)?;
    let mut rng = RngStream::new(args.seed).rng();
    let estimate = match (&args.graph, &args.kernel) {
        (Some(path), None) => {
            let host = crate::graph::AdjacencyMatrix::from_edge_list(
                &std::fs::read_to_string(path)?,
            )?;
            crate::densities::hom_density_mc(&pattern, &host, args.samples, &mut rng)?
        }
        (None, Some(path)) => {
            let spec = KernelSpec::from_json(&std::fs::read_to_string(path)?)?;
            let kernel = spec.build()?;
            crate::densities::graphon_density_mc(&pattern, kernel.as_ref(), args.samples, &mut rng)?
        }
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --graph and --kernel".into(),
            ));
        }
    };
    let doc = serde_json::json!({
        "pattern": pattern.to_edge_list(),
        "mean": estimate.mean,
        "stderr": estimate.stderr,
        "samples": estimate.samples,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let flags = Overlay {
        n: args.n,
        m: args.m,
        rho: args.rho,
        kappa: args.kappa,
        seed: args.seed,
        samples: args.samples,
        replicas: args.replicas,
        out: args.out,
        format: args.format,
    };
    let file = match &args.config {
        Some(path) => config::load_config_file(path)?,
        None => Overlay::default(),
    };
    let cfg = config::resolve(&args.name, &flags, &file)?;
    let report = experiments::run_experiment(&cfg)?;
    write_output(cfg.out.as_deref(), &report.render(cfg.format))?;
    if report.passed() {
        eprintln!("{}: pass", cfg.experiment);
        Ok(EXIT_OK)
    } else {
        for failure in &report.failures {
            eprintln!("{}: FAIL - {failure}", cfg.experiment);
        }
        Ok(EXIT_ASSERTION)
    }
}
