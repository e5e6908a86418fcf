//! Command-line front end: graph generation, spectrum histograms, solver
//! trace runs, rate reports, and the verification suites.
//!
//! Exit codes: 0 success, 1 runtime/numerical failure (including failed
//! verification checks), 2 usage error. Every command prints its fully
//! resolved parameters before computing, and all file output is atomic.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regraph_core::analysis::{fit_log_slope, rate_report};
use regraph_core::csvio::{atomic_write, fmt_g17};
use regraph_core::solvers::run as run_solver;
use regraph_core::spectrum::{empirical_histogram, l1_density_distance, DEFAULT_QUAD_NODES};
use regraph_core::verify::run_suites;
use regraph_core::{Error, MethodConfig, MethodKind, RegularGraph, StateBlock};

/// Seed offset separating the initial-state stream from the graph stream.
const X0_SEED_SALT: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Parser)]
#[command(name = "regraph", version, about = "Consensus methods on random regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random simple connected k-regular graph and emit its edge list.
    Generate(GenerateArgs),
    /// Eigenvalue histogram of L = I - A/k with the Kesten-McKay overlay.
    Spectrum(SpectrumArgs),
    /// Run consensus methods on one graph and write per-method error traces.
    Run(RunArgs),
    /// Expected-error rate table: quadrature, closed-form sandwich, optional
    /// Monte Carlo columns.
    Rates(RatesArgs),
    /// Run the analytic/statistical verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of vertices.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Degree.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge-list output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Histogram bin count over the theoretical support.
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Load this edge-list file instead of generating (--n/--k/--seed ignored).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Histogram CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Columns of the node-state block.
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 60)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated method names, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Output directory for the trace CSVs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Largest iteration in the table.
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Methods with closed-form sandwiches: optimal and/or heavyball.
    #[arg(long, default_value = "optimal,heavyball")]
    methods: String,
    #[arg(long, default_value_t = DEFAULT_QUAD_NODES)]
    quad_nodes: usize,
    /// Comma-separated seeds; enables the Monte Carlo columns.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Monte Carlo graph size (with --seeds).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Monte Carlo state columns (with --seeds).
    #[arg(long, default_value_t = 50)]
    d: usize,
    /// Output directory for the rate CSVs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated suite names; all suites when omitted.
    #[arg(long, value_delimiter = ',')]
    suites: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_QUAD_NODES)]
    quad_nodes: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Rates(args) => cmd_rates(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::DenseCapExceeded { cap, .. } = e {
                eprintln!("hint: lower --n to at most {cap} for dense spectra");
            }
            match e {
                Error::InvalidParameter(_)
                | Error::UnsupportedMethod(_)
                | Error::MalformedEdgeList(_)
                | Error::DenseCapExceeded { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode, Error> {
    println!(
        "generate: n={} k={} seed={} out={}",
        args.n,
        args.k,
        args.seed,
        path_or_stdout(&args.out)
    );
    let graph = RegularGraph::generate(args.n, args.k, args.seed)?;
    match &args.out {
        Some(path) => graph.write_edge_list(path)?,
        None => print!("{}", graph.edge_list_string()),
    }
    println!("n={} k={} seed={} connected=true", args.n, args.k, args.seed);
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<ExitCode, Error> {
    let graph = match &args.graph {
        Some(path) => {
            println!(
                "spectrum: graph={} bins={} out={}",
                path.display(),
                args.bins,
                path_or_stdout(&args.out)
            );
            RegularGraph::read_edge_list(path)?
        }
        None => {
            println!(
                "spectrum: n={} k={} seed={} bins={} out={}",
                args.n,
                args.k,
                args.seed,
                args.bins,
                path_or_stdout(&args.out)
            );
            RegularGraph::generate(args.n, args.k, args.seed)?
        }
    };
    let eigs = graph.dense_eigenvalues()?;
    let hist = empirical_histogram(&eigs, args.bins, graph.k())?;
    let csv = hist.to_csv();
    match &args.out {
        Some(path) => atomic_write(path, &csv)?,
        None => print!("{csv}"),
    }
    println!("l1_distance={}", fmt_g17(l1_density_distance(&hist, graph.k())));
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, Error> {
    let methods = parse_methods(&args.methods)?;
    println!(
        "run: n={} k={} d={} iters={} seed={} methods={} out={}",
        args.n,
        args.k,
        args.d,
        args.iters,
        args.seed,
        join_methods(&methods),
        args.out.display()
    );
    let graph = RegularGraph::generate(args.n, args.k, args.seed)?;
    let x0 = StateBlock::gaussian(args.n, args.d, args.seed ^ X0_SEED_SALT);
    std::fs::create_dir_all(&args.out)?;
    for method in methods {
        let cfg = MethodConfig::new(method, args.k, args.iters);
        let trace = run_solver(&graph, &x0, &cfg)?;
        let file = args
            .out
            .join(format!("{method}_k{}_n{}_seed{}.csv", args.k, args.n, args.seed));
        atomic_write(&file, &trace.to_csv())?;
        let &(t, e) = trace.entries.last().expect("trace has a t=0 entry");
        println!(
            "method={method} final_iter={t} final_error={} diverged={} file={}",
            fmt_g17(e),
            trace.diverged,
            file.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rates(args: &RatesArgs) -> Result<ExitCode, Error> {
    let methods = parse_methods(&args.methods)?;
    println!(
        "rates: k={} iters={} methods={} quad_nodes={} seeds={:?} n={} d={} out={}",
        args.k,
        args.iters,
        join_methods(&methods),
        args.quad_nodes,
        args.seeds,
        args.n,
        args.d,
        args.out.display()
    );
    std::fs::create_dir_all(&args.out)?;
    for method in methods {
        let mc = (!args.seeds.is_empty()).then_some((args.n, args.d, args.seeds.as_slice()));
        let report = rate_report(args.k, method, args.iters, 1.0, args.quad_nodes, mc)?;
        let file = args.out.join(format!("rates_{method}_k{}.csv", args.k));
        atomic_write(&file, &report.to_csv())?;
        let entries: Vec<(usize, f64)> =
            report.rows.iter().map(|r| (r.t, r.quadrature)).collect();
        let slope = fit_log_slope(&entries, 5, args.iters)
            .ok_or_else(|| Error::Numerical("too few points for a slope fit".into()))?;
        println!(
            "method={method} fitted_log_slope={} target={} file={}",
            fmt_g17(slope),
            fmt_g17((1.0 / (args.k as f64 - 1.0)).ln()),
            file.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    println!(
        "verify: suites={} quad_nodes={}",
        if args.suites.is_empty() {
            "all".to_string()
        } else {
            args.suites.join(",")
        },
        args.quad_nodes
    );
    let checks = run_suites(&args.suites, args.quad_nodes)?;
    let mut failures = 0usize;
    for check in &checks {
        let verdict = if check.pass() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {} measured={} threshold={}",
            check.name,
            fmt_g17(check.measured),
            fmt_g17(check.threshold)
        );
        if !check.pass() {
            failures += 1;
        }
    }
    println!("{} checks, {failures} failed", checks.len());
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_methods(list: &str) -> Result<Vec<MethodKind>, Error> {
    if list == "all" {
        return Ok(MethodKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in list.split(',') {
        let method: MethodKind = name.trim().parse()?;
        if !out.contains(&method) {
            out.push(method);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty method list".into()));
    }
    Ok(out)
}

fn join_methods(methods: &[MethodKind]) -> String {
    methods
        .iter()
        .map(|m| m.name())
        .collect::<Vec<_>>()
        .join(",")
}

fn path_or_stdout(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "<stdout>".into())
}
