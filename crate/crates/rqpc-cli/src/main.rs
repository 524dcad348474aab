//! `rqpc`: resource planning and simulation for loss-tolerant parity-code
//! quantum communication chains.

mod artifact;
mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use artifact::{Format, RunArtifact, TableRow, VERSION};
use rqpc::analytic::{
    multiplexed_failure_probability, optimize_code, rate_report, CostMetric, OptimizeOutcome,
    SearchBounds,
};
use rqpc::netsim::{run_butterfly, run_chain, run_chain_exact_small, ChainMode, Engine};
use rqpc::transfer::default_assignment;
use rqpc::verify::{run_suite, Suite};
use rqpc::ExecMode;

#[derive(Parser)]
#[command(
    name = "rqpc",
    version,
    about = "Loss-tolerant parity-code network planning and simulation"
)]
struct Cli {
    /// Master seed; overrides the `seed` key of a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Artifact format: CSV or line-delimited JSON records.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Worker threads for the Monte Carlo loops (1 = sequential). The
    /// RQPC_THREADS environment variable is used when the flag is absent.
    /// Results are identical at any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Resource table: cheapest (m, n) per arrival probability.
    Table(TableArgs),
    /// Cheapest feasible code for one arrival probability.
    Optimize(OptimizeArgs),
    /// Monte Carlo of a direct transmission chain, from a config file.
    Chain(RunArgs),
    /// Monte Carlo of butterfly entanglement distribution, from a config file.
    Butterfly(RunArgs),
    /// Protocol verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TableArgs {
    /// Arrival probabilities, comma separated.
    #[arg(long = "p", value_delimiter = ',', default_values_t = [0.95, 0.90, 0.82, 0.67])]
    p: Vec<f64>,

    /// Feasibility threshold on the failure probability.
    #[arg(long, default_value_t = 1.2e-3)]
    threshold: f64,

    /// Local gate cycle time in ns (sets the raw rate column).
    #[arg(long, default_value_t = 100.0)]
    cycle_time_ns: f64,

    /// Also evaluate each row's code under a k-qubits-per-photon
    /// round-robin assignment, adding multiplexed columns.
    #[arg(long)]
    qubits_per_photon: Option<u32>,

    #[arg(long, default_value_t = 64)]
    m_max: u32,

    #[arg(long, default_value_t = 100_000)]
    n_max: u32,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Per-photon arrival probability.
    #[arg(long)]
    p: f64,

    /// Target failure probability.
    #[arg(long, default_value_t = 1.2e-3)]
    target: f64,

    /// Cost metric to minimize.
    #[arg(long, value_enum, default_value_t = CostArg::TotalQubits)]
    cost: CostArg,

    #[arg(long, default_value_t = 64)]
    m_max: u32,

    #[arg(long, default_value_t = 100_000)]
    n_max: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CostArg {
    TotalQubits,
    MinBlocks,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (flat `key = value` file).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: transfer, recovery, oracle, or ecc.
    suite: String,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn exec_mode(threads: Option<usize>) -> ExecMode {
    let requested = threads.or_else(|| {
        std::env::var("RQPC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    match requested {
        Some(1) => ExecMode::Sequential,
        Some(k) if k > 1 => {
            // Best effort: the pool can only be sized once per process.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global();
            ExecMode::default()
        }
        _ => ExecMode::default(),
    }
}

fn open_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mode = exec_mode(cli.threads);
    match &cli.command {
        Command::Table(args) => cmd_table(&cli, args, mode),
        Command::Optimize(args) => cmd_optimize(&cli, args),
        Command::Chain(args) => cmd_run(&cli, args, ChainMode::Direct, mode),
        Command::Butterfly(args) => cmd_run(&cli, args, ChainMode::Butterfly, mode),
        Command::Verify(args) => cmd_verify(args, mode),
    }
}

fn table_identity(args: &TableArgs) -> String {
    format!(
        "table p={:?} threshold={} cycle_time_ns={} qubits_per_photon={:?} m_max={} n_max={}",
        args.p, args.threshold, args.cycle_time_ns, args.qubits_per_photon, args.m_max, args.n_max
    )
}

fn cmd_table(cli: &Cli, args: &TableArgs, mode: ExecMode) -> Result<()> {
    if !(args.cycle_time_ns.is_finite() && args.cycle_time_ns > 0.0) {
        bail!("cycle time must be positive");
    }
    let rate_hz = 1e9 / args.cycle_time_ns;
    let bounds = SearchBounds {
        m_max: args.m_max,
        n_max: args.n_max,
    };
    let seed = cli.seed.unwrap_or(0);

    let mut rows = Vec::with_capacity(args.p.len());
    for &p in &args.p {
        let outcome = optimize_code(p, args.threshold, CostMetric::TotalQubits, bounds)?;
        let mut row = match outcome {
            OptimizeOutcome::Found(f) => TableRow {
                p,
                m: Some(f.code.m),
                n: Some(f.code.n),
                p_f: Some(f.failure_probability),
                total_qubits: Some(f.code.total_qubits()),
                rate_hz,
                status: "ok",
                qubits_per_photon: None,
                photons: None,
                p_f_multiplexed: None,
                p_f_multiplexed_std_error: None,
            },
            OptimizeOutcome::Infeasible {
                below_loss_bound, ..
            } => {
                if below_loss_bound {
                    eprintln!(
                        "note: p = {p} allows more than 50% loss, beyond what the code family \
                         can tolerate; row reported as infeasible"
                    );
                }
                TableRow::infeasible(p, rate_hz)
            }
        };
        if let (Some(k), OptimizeOutcome::Found(f)) = (args.qubits_per_photon, outcome) {
            let k = k.min(f.code.n);
            let assignment = default_assignment(f.code, k)?;
            let mux = multiplexed_failure_probability(p, &assignment, mode)?;
            row.set_multiplexed(k, assignment.photon_count(), mux);
        }
        rows.push(row);
    }

    let hash = config::config_hash(table_identity(args).as_bytes());
    artifact::write_table(
        open_sink(&cli.out)?,
        cli.format.into(),
        &rows,
        &hash,
        seed,
        args.qubits_per_photon.is_some(),
    )
}

fn cmd_optimize(cli: &Cli, args: &OptimizeArgs) -> Result<()> {
    let bounds = SearchBounds {
        m_max: args.m_max,
        n_max: args.n_max,
    };
    let cost = match args.cost {
        CostArg::TotalQubits => CostMetric::TotalQubits,
        CostArg::MinBlocks => CostMetric::MinBlocks,
    };
    let outcome = optimize_code(args.p, args.target, cost, bounds)?;

    match &outcome {
        OptimizeOutcome::Found(f) => eprintln!(
            "p = {}: m = {}, n = {}, total qubits {}, p_f = {}",
            args.p,
            f.code.m,
            f.code.n,
            f.code.total_qubits(),
            artifact::sig6(f.failure_probability)
        ),
        OptimizeOutcome::Infeasible {
            m_max,
            n_max,
            below_loss_bound,
        } => {
            let reason = if *below_loss_bound {
                "; total loss exceeds the 50% the code family can tolerate"
            } else {
                ""
            };
            eprintln!(
                "p = {}: infeasible within bounds (m <= {m_max}, n <= {n_max}){reason}",
                args.p
            );
        }
    }

    let identity = format!(
        "optimize p={} target={} cost={:?} m_max={} n_max={}",
        args.p, args.target, args.cost as u8, args.m_max, args.n_max
    );
    let hash = config::config_hash(identity.as_bytes());
    artifact::write_optimize(
        open_sink(&cli.out)?,
        cli.format.into(),
        args.p,
        args.target,
        &outcome,
        &hash,
    )
}

fn cmd_run(cli: &Cli, args: &RunArgs, chain_mode: ChainMode, mode: ExecMode) -> Result<()> {
    let raw = fs::read(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))?;
    let text = String::from_utf8(raw.clone()).context("config file is not UTF-8")?;
    let experiment = config::parse_experiment(&text, chain_mode, cli.seed)?;
    let hash = config::config_hash(&raw);

    let cfg = &experiment.chain;
    let stats = match (chain_mode, experiment.engine) {
        (ChainMode::Direct, Engine::Pattern) => run_chain(cfg, mode)?,
        (ChainMode::Direct, Engine::ExactSmall) => run_chain_exact_small(cfg, mode)?,
        (ChainMode::Butterfly, engine) => run_butterfly(cfg, engine, mode)?,
    };

    // Analytic end-to-end estimates over the total number of links
    // traversed (both directions for the butterfly).
    let analytic_hops = match chain_mode {
        ChainMode::Direct => cfg.hops,
        ChainMode::Butterfly => 2 * cfg.hops,
    };
    let analytic = rate_report(
        &cfg.budget,
        cfg.code,
        analytic_hops,
        experiment.cycle_time_s,
        cfg.per_hop_transfer_fidelity,
        false,
    )?;

    let (record, mode_name) = match chain_mode {
        ChainMode::Direct => ("chain_stats", "direct"),
        ChainMode::Butterfly => ("butterfly_stats", "butterfly"),
    };
    let engine_name = match experiment.engine {
        Engine::Pattern => "pattern",
        Engine::ExactSmall => "exact",
    };

    eprintln!(
        "{record}: {} trials in {:.3}s; success rate {} +- {}, estimated fidelity {}",
        stats.trials,
        stats.wall_clock.as_secs_f64(),
        artifact::sig6(stats.success_rate),
        artifact::sig6(stats.success_std_error),
        artifact::sig6(stats.estimated_fidelity),
    );
    for note in &analytic.annotations {
        eprintln!("note: {note}");
    }

    let run = RunArtifact {
        record,
        version: VERSION,
        config_hash: &hash,
        seed: cfg.seed,
        mode: mode_name,
        engine: engine_name,
        hops: cfg.hops,
        block_size: cfg.code.m,
        blocks: cfg.code.n,
        qubits_per_photon: cfg.qubits_per_photon,
        analytic: &analytic,
        stats: &stats,
    };
    artifact::write_run(open_sink(&cli.out)?, cli.format.into(), &run)
}

fn cmd_verify(args: &VerifyArgs, mode: ExecMode) -> Result<()> {
    let suite: Suite = args.suite.parse()?;
    let report = run_suite(suite, mode)?;
    for check in &report.checks {
        println!(
            "{} {}: {} cases, {} failures ({})",
            if check.passed() { "ok  " } else { "FAIL" },
            check.name,
            check.cases,
            check.failures,
            check.detail
        );
    }
    println!(
        "suite {}: {} checks, {} cases, {} failures",
        report.suite,
        report.checks.len(),
        report.total_cases(),
        report.total_failures()
    );
    if !report.passed() {
        bail!("verification suite {} failed", report.suite);
    }
    Ok(())
}
