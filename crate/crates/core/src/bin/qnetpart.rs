use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnetpart::bench::{
    append_csv_row, run, write_reports, CircuitSource, Mode, RunConfig, TopologySpec,
};
use qnetpart::MatchingMode;

#[derive(Parser)]
#[command(
    name = "qnetpart",
    version,
    about = "Partition quantum circuits over QPU networks to minimize e-bit cost"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the partitioning pipeline and emit one JSON report per repetition.
    Partition(PartitionArgs),
}

#[derive(Args)]
struct PartitionArgs {
    /// OpenQASM 2.0 circuit file.
    #[arg(long, conflicts_with = "cp")]
    circuit: Option<PathBuf>,
    /// CP-fraction circuit as n,depth,fraction (e.g. 32,32,0.5).
    #[arg(long, value_name = "N,D,F")]
    cp: Option<String>,
    /// Topology: linear:<N> | grid:<R>x<C> | random:<N>:<p>.
    #[arg(long)]
    network: String,
    /// Data-qubit capacity per QPU (default: ceil(n / N)).
    #[arg(long)]
    capacity: Option<u32>,
    /// direct = multilevel FM over the full network; coarse = recursive
    /// network coarsening.
    #[arg(long, default_value = "direct")]
    mode: String,
    /// Coarsening factor for coarse mode.
    #[arg(long, default_value_t = 4)]
    chi: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions; repetition i runs with seed + i.
    #[arg(long, default_value_t = 1)]
    reps: u32,
    /// Append JSON-lines reports here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Matching algorithm for network coarsening.
    #[arg(long, default_value = "exact")]
    matching: String,
    /// Precompute the cost table for networks up to this many QPUs.
    #[arg(long, default_value_t = 10)]
    table_threshold: usize,
    /// Solve sibling sub-problems in parallel (identical results).
    #[arg(long)]
    parallel: bool,
    /// Append a (fraction, num_qubits, cost_mean) row to this CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Embed the per-node assignment and per-edge costs in each report.
    #[arg(long)]
    detailed: bool,
}

fn parse_cp(text: &str) -> Result<CircuitSource, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("--cp wants n,depth,fraction, got `{text}`"));
    }
    Ok(CircuitSource::CpFraction {
        n: parts[0].trim().parse().map_err(|e| format!("bad n: {e}"))?,
        depth: parts[1].trim().parse().map_err(|e| format!("bad depth: {e}"))?,
        fraction: parts[2].trim().parse().map_err(|e| format!("bad fraction: {e}"))?,
    })
}

fn build_config(args: &PartitionArgs) -> Result<RunConfig, String> {
    let circuit = match (&args.circuit, &args.cp) {
        (Some(path), None) => CircuitSource::Qasm { path: path.clone() },
        (None, Some(cp)) => parse_cp(cp)?,
        (None, None) => return Err("one of --circuit or --cp is required".into()),
        (Some(_), Some(_)) => return Err("--circuit and --cp are exclusive".into()),
    };
    let topology: TopologySpec = args.network.parse()?;
    let mode = match args.mode.as_str() {
        "direct" => Mode::Direct,
        "coarse" => Mode::Coarse,
        other => return Err(format!("bad --mode `{other}` (want direct|coarse)")),
    };
    let matching = match args.matching.as_str() {
        "exact" => MatchingMode::Exact,
        "greedy" => MatchingMode::Greedy,
        other => return Err(format!("bad --matching `{other}` (want exact|greedy)")),
    };
    Ok(RunConfig {
        circuit,
        topology,
        capacity: args.capacity,
        mode,
        chi: args.chi,
        seed: args.seed,
        reps: args.reps,
        matching,
        table_threshold: args.table_threshold,
        parallel: args.parallel,
        detailed: args.detailed,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Partition(args) = cli.command;
    let config = match build_config(&args) {
        Ok(config) => config,
        Err(msg) => {
            eprintln!("error[config]: {msg}");
            return ExitCode::from(2);
        }
    };
    let reports = match run(&config) {
        Ok(reports) => reports,
        Err(err) => {
            eprintln!("error{err}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &args.out {
        Some(path) => std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|f| write_reports(&reports, f).map_err(|e| e.to_string())),
        None => write_reports(&reports, std::io::stdout().lock()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error[io]: {msg}");
        return ExitCode::FAILURE;
    }
    if let Some(csv) = &args.csv {
        if let Err(err) = append_csv_row(&config, &reports, csv) {
            eprintln!("error{err}");
            return ExitCode::FAILURE;
        }
    }
    for report in &reports {
        eprintln!(
            "seed {}: cost {} e-bits ({} qubits, depth {}, {} over {})",
            report.seed,
            report.cost,
            report.num_qubits,
            report.depth,
            match report.mode {
                Mode::Direct => "direct".to_string(),
                Mode::Coarse => format!("coarse chi={}", report.chi.unwrap_or(0)),
            },
            report.topology,
        );
    }
    ExitCode::SUCCESS
}
