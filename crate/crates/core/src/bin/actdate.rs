use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use actdate::estimation::{fit, local_average_init, FitConfig};
use actdate::evaluation::{run_experiment, summarize, DensitySweep, ExperimentConfig, Scenario};
use actdate::io;
use actdate::simulation::{generate, DateModel, SimConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_FIT: u8 = 4;
const EXIT_NOT_CONVERGED: u8 = 5;

#[derive(Parser)]
#[command(name = "actdate", version, about = "Activity date estimation for timestamped interaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit activity dates to an edge list.
    Estimate(EstimateArgs),
    /// Generate one ground-truthed network.
    Simulate(SimulateArgs),
    /// Run a batch of simulations and summarise the improvement curve.
    Experiment(ExperimentArgs),
}

#[derive(clap::Args)]
struct EstimateArgs {
    /// Edge list CSV with header `src,dst,date`.
    #[arg(long)]
    input: PathBuf,
    /// Destination for `node,z_local,z_model`.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50.0)]
    sigma_init: f64,
    #[arg(long, default_value_t = 100.0)]
    span_init: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon_init: f64,
    /// Write the per-iteration log-likelihood trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Renumber vertex ids to 0..k instead of treating gaps as isolated vertices.
    #[arg(long)]
    compact: bool,
    /// Exit nonzero when the optimiser does not converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DateModelArg {
    Gaussian,
    Uniform,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    density: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "gaussian")]
    date_model: DateModelArg,
    #[arg(long, default_value_t = 0.0)]
    rewire_fraction: f64,
    #[arg(long)]
    out_edges: PathBuf,
    #[arg(long)]
    out_truth: PathBuf,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1200.0)]
    z_low: f64,
    #[arg(long, default_value_t = 1400.0)]
    z_high: f64,
    #[arg(long, default_value_t = 80.0)]
    life_span: f64,
    #[arg(long, default_value_t = 20.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Ideal,
    Uniform,
    Rewired,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long)]
    replicates: usize,
    /// Defaults to 0.05 for `rewired` and 0 otherwise.
    #[arg(long)]
    rewire_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    curve: PathBuf,
    /// Kernel bandwidth; Silverman's rule when absent.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Also report the crossing with records below this improvement removed.
    #[arg(long, allow_hyphen_values = true)]
    exclude_below: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    density_low: f64,
    #[arg(long, default_value_t = 0.5)]
    density_high: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot create {}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::new(EXIT_FAILURE, format!("cannot write {}: {e}", path.display()))
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let config = FitConfig {
        max_iterations: args.max_iter,
        relative_tolerance: args.tol,
        sigma_init: args.sigma_init,
        span_init: args.span_init,
        epsilon_init: args.epsilon_init,
        ..FitConfig::default()
    };
    config
        .validate()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let file = File::open(&args.input).map_err(|e| {
        Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", args.input.display()))
    })?;
    let reader = BufReader::new(file);
    let input_err = |e: io::ParseError| {
        Failure::new(EXIT_INPUT, format!("{}: {e}", args.input.display()))
    };
    let (graph, ids) = if args.compact {
        let (g, ids) = io::parse_edge_list_compacted(reader).map_err(input_err)?;
        (g, Some(ids))
    } else {
        (io::parse_edge_list(reader).map_err(input_err)?, None)
    };

    let result = fit(&graph, &config, None, None)
        .map_err(|e| Failure::new(EXIT_FIT, format!("fit failed: {e}")))?;
    let local = local_average_init(&graph);

    let mut out = create(&args.output)?;
    io::write_node_estimates(&mut out, &local, &result.z_hat, ids.as_deref())
        .map_err(write_err(&args.output))?;
    if let Some(path) = &args.trace {
        let mut out = create(path)?;
        io::write_trace(&mut out, &result.trace).map_err(write_err(path))?;
    }

    let p = result.params_hat;
    let mut summary = format!(
        "log_likelihood={} iterations={} alpha={} beta={} sigma={} converged={}",
        result.final_log_likelihood,
        result.iterations,
        p.alpha(),
        p.beta(),
        p.sigma(),
        result.converged
    );
    if !result.converged {
        summary.push_str(" warning=not-converged");
    }
    println!("{summary}");
    if !result.converged {
        eprintln!("warning: optimiser stopped without converging ({:?})", result.stop_reason);
        if args.strict {
            return Err(Failure::new(EXIT_NOT_CONVERGED, "strict mode: fit did not converge"));
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let config = SimConfig {
        n: args.n,
        z_low: args.z_low,
        z_high: args.z_high,
        target_density: args.density,
        life_span: args.life_span,
        epsilon: args.epsilon,
        sigma: args.sigma,
        date_model: match args.date_model {
            DateModelArg::Gaussian => DateModel::Gaussian,
            DateModelArg::Uniform => DateModel::Uniform,
        },
        rewire_fraction: args.rewire_fraction,
        seed: args.seed,
    };
    let out = generate(&config).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let mut w = create(&args.out_edges)?;
    io::write_edge_list(&mut w, &out.graph).map_err(write_err(&args.out_edges))?;
    let mut w = create(&args.out_truth)?;
    io::write_truth(&mut w, &out.z_true).map_err(write_err(&args.out_truth))?;

    println!(
        "accepted={} vertices={} edges={} edges_per_vertex={}",
        out.accepted,
        out.graph.n(),
        out.graph.edge_count(),
        out.edges_per_vertex
    );
    if out.rewire_skipped > 0 {
        eprintln!("warning: {} edges could not be rewired", out.rewire_skipped);
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let scenario = match args.scenario {
        ScenarioArg::Ideal => Scenario::Ideal,
        ScenarioArg::Uniform => Scenario::Uniform,
        ScenarioArg::Rewired => Scenario::Rewired,
    };
    let mut config = ExperimentConfig::new(scenario, args.replicates, args.seed_base);
    if let Some(f) = args.rewire_fraction {
        config.rewire_fraction = f;
    }
    config.density = DensitySweep::Uniform {
        low: args.density_low,
        high: args.density_high,
    };
    config.fit.max_iterations = args.max_iter;
    config.fit.relative_tolerance = args.tol;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    let records = pool
        .install(|| run_experiment(&config))
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let mut w = create(&args.records)?;
    io::write_records(&mut w, &records).map_err(write_err(&args.records))?;

    let summary = summarize(&records, args.bandwidth, args.exclude_below)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let mut w = create(&args.curve)?;
    match &summary.curve {
        Some(curve) => io::write_curve(&mut w, curve),
        None => {
            use std::io::Write;
            writeln!(w, "{}", io::CURVE_HEADER.join(",")).and_then(|_| w.flush())
        }
    }
    .map_err(write_err(&args.curve))?;

    let scored = records.iter().filter(|r| r.improvement.is_some()).count();
    let fmt = |c: Option<f64>| c.map_or_else(|| "none".to_string(), |c| c.to_string());
    println!(
        "records={} scored={} not_converged={} crossing={}",
        records.len(),
        scored,
        records.iter().filter(|r| r.accepted && !r.converged).count(),
        fmt(summary.crossing)
    );
    if let Some(floor) = args.exclude_below {
        println!(
            "excluded_below={} excluded={} filtered_crossing={}",
            floor,
            summary.excluded,
            fmt(summary.filtered_crossing)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
