use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use pentabound::certify::VerificationReport;
use pentabound::pipeline::{Pipeline, RunConfig};
use pentabound::theta::{brute_force_alpha, theta_prime_bound, FiniteGraph, MAX_BRUTE_FORCE};

/// Upper bounds for the packing density of regular pentagons.
#[derive(Parser)]
#[command(name = "pentabound", version)]
struct Cli {
    #[command(flatten)]
    opts: ConfigArgs,

    /// Worker threads for the verification sweep (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true, env = "PENTABOUND_SCRATCH")]
    out: Option<PathBuf>,
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    alpha_count: Option<usize>,
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    enlargement: Option<f64>,
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    verify_alpha_count: Option<usize>,
    #[arg(long, global = true)]
    verify_grid_n: Option<usize>,
    #[arg(long, global = true)]
    safety_factor: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the constraint sample and plot data.
    Sample,
    /// Write Problem A in SDPA format with its manifest.
    Generate,
    /// Solve the generated problem or import an external solution.
    Solve {
        /// Use the embedded interior-point solver.
        #[arg(long, conflicts_with = "import")]
        embedded: bool,
        /// CSDP-style solution file for the generated problem.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Re-solve as a feasibility problem with the objective capped above z*.
    Refine,
    /// Project onto the equality constraints and recover the tensor.
    Project,
    /// Extended precision eigenvalue, residual and sign checks.
    Verify,
    /// Write and print the verification report.
    Bound,
    /// Run every step.
    All,
    /// Print the effective configuration as JSON.
    Config,
    /// Independence number bound of a finite graph.
    Theta {
        /// Named graph: c<n>, k<n>, e<n>, k<a>,<b> or petersen.
        #[arg(long, conflicts_with_all = ["adjacency", "dimacs"])]
        graph: Option<String>,
        /// Adjacency-list file (`v: u w ...`).
        #[arg(long, conflicts_with = "dimacs")]
        adjacency: Option<PathBuf>,
        /// DIMACS edge-list file.
        #[arg(long)]
        dimacs: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn load_config(a: &ConfigArgs) -> anyhow::Result<RunConfig> {
    let mut c = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f.clone() { c.$f = v; })* };
    }
    set!(n, d, alpha_count, grid_n, enlargement, precision_bits, gap_tol, feas_tol, max_iter, verify_alpha_count, verify_grid_n, safety_factor);
    if let Some(out) = &a.out {
        c.output_dir = out.clone();
    }
    Ok(c)
}

fn report_exit(report: &VerificationReport) -> ExitCode {
    print!("{}", report.to_text());
    if report.holds() {
        ExitCode::SUCCESS
    } else {
        eprintln!("bound NOT verified: see eigenvalue_condition and sign_condition above");
        ExitCode::from(2)
    }
}

fn theta(graph: Option<String>, adjacency: Option<PathBuf>, dimacs: Option<PathBuf>, tol: f64) -> anyhow::Result<()> {
    let g = match (graph, adjacency, dimacs) {
        (Some(name), _, _) => FiniteGraph::named(&name)?,
        (_, Some(path), _) => FiniteGraph::parse_adjacency_list(&fs::read_to_string(&path)?)?,
        (_, _, Some(path)) => FiniteGraph::parse_dimacs(&fs::read_to_string(&path)?)?,
        _ => bail!("give one of --graph, --adjacency, --dimacs"),
    };
    println!("vertices = {}", g.n());
    println!("edges = {}", g.edges().len());
    if g.n() <= MAX_BRUTE_FORCE {
        println!("alpha = {}", brute_force_alpha(&g)?);
    }
    println!("bound = {:.6}", theta_prime_bound(&g, tol)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring thread pool")?;
    }
    if let Command::Theta { graph, adjacency, dimacs, tol } = cli.command {
        theta(graph, adjacency, dimacs, tol)?;
        return Ok(ExitCode::SUCCESS);
    }
    let config = load_config(&cli.opts)?;
    if let Command::Config = cli.command {
        println!("{}", config.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let p = Pipeline::new(config)?;
    log::info!("config hash {}", p.config_hash());
    match cli.command {
        Command::Sample => println!("constraint sample: {} points", p.sample()?),
        Command::Generate => {
            let a = p.generate()?;
            println!("blocks: {}", a.problem.blocks.len());
            println!("constraints: {} ({} equalities)", a.problem.constraints.len(), a.equality_count());
        }
        Command::Solve { embedded: _, import } => {
            let sol = p.solve(import.as_deref())?;
            println!("status: {}", sol.status);
            println!("primal objective: {}", sol.primal_objective);
            println!("dual objective: {}", sol.dual_objective);
        }
        Command::Refine => {
            let sol = p.refine()?;
            println!("status: {}", sol.status);
            println!("min eigenvalue: {:e}", sol.min_eigenvalue());
        }
        Command::Project => {
            let s = p.project()?;
            println!("residual: {:e} -> {:e}", s.residual_before, s.residual_after);
            println!("displacement: {:e}", s.displacement);
            println!("tensor: {}", s.tensor_hash);
        }
        Command::Verify => {
            let v = p.verify()?;
            println!("min block eigenvalue: {:e}", v.margin.min_eigenvalue);
            println!("max constraint residual: {:e}", v.margin.max_residual);
            println!("sign margin: {:e} over {} points", v.sign.sign_margin, v.sign.points);
        }
        Command::Bound => return Ok(report_exit(&p.bound()?)),
        Command::All => return Ok(report_exit(&p.all()?)),
        Command::Config | Command::Theta { .. } => unreachable!("handled above"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
