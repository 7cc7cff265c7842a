//! Command-line front end: sweeps, cost figures, IDA analysis and memory
//! tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polarlist::channel::sigma_from_ebn0;
use polarlist::cost::{charge_ops, latency_cycles, LatencyModel, OpCounter};
use polarlist::fixedpoint::QuantizationProfile;
use polarlist::gpscl::{memory_bits, MemoryKind};
use polarlist::ida::{expected_average_list, small_list_probability, IdaConfig};
use polarlist::sc_kernel::{Schedule, ScheduleOptions};
use polarlist::sim::{
    emit_results, load_records, preset, run_sweep_skipping, ArmEntry, OutputFormat, SimConfig, SimError, StopRule,
};

#[derive(Parser)]
#[command(name = "polarlist", version, about = "Polar list decoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo FER/BER sweep over decoder arms.
    Sweep(SweepArgs),
    /// Latency and memory of one arm, plus op counts for cost events.
    Cost(CostArgs),
    /// Probability of choosing the small list, per Eb/N0.
    IdaAnalyze(IdaArgs),
    /// Memory of SCL-16, SCL-8 and GPSCL-8 at n = 4096 and 8192.
    MemTable,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset arm(s), comma separated; used without or on top of --config.
    #[arg(long, value_delimiter = ',')]
    preset: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebn0: Vec<f64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_frames: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; `.json` writes JSON, anything else CSV (appending and
    /// resuming). Prints CSV to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value = "ida-be-gpscl8")]
    preset: String,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    /// Cost events such as `sorter:16` or `left:64:8`.
    #[arg(long = "event")]
    events: Vec<String>,
}

#[derive(Args)]
struct IdaArgs {
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1.0,1.5,2.0,2.5,3.0")]
    ebn0: Vec<f64>,
    #[arg(long)]
    quantized: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    phi: Option<usize>,
}

fn sweep_config(args: &SweepArgs) -> Result<SimConfig, SimError> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig {
            n: args.n.ok_or_else(|| SimError::Config("--n is required without --config".into()))?,
            rate: args.rate.ok_or_else(|| SimError::Config("--rate is required without --config".into()))?,
            ebn0_db: Vec::new(),
            seed: 1,
            workers: 1,
            stop: StopRule::default(),
            arms: Vec::new(),
        },
    };
    if args.config.is_some() {
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if let Some(r) = args.rate {
            cfg.rate = r;
        }
    }
    if !args.ebn0.is_empty() {
        cfg.ebn0_db = args.ebn0.clone();
    }
    cfg.arms.extend(args.preset.iter().map(|p| ArmEntry::preset(p)));
    if let Some(v) = args.min_errors {
        cfg.stop.min_frame_errors = v;
    }
    if let Some(v) = args.max_frames {
        cfg.stop.max_frames = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn sweep(args: &SweepArgs) -> Result<(), SimError> {
    let cfg = sweep_config(args)?;
    match &args.out {
        Some(path) => {
            let format = OutputFormat::from_path(path);
            let done = match format {
                OutputFormat::Csv => load_records(path)?,
                OutputFormat::Json => Vec::new(),
            };
            let records = run_sweep_skipping(&cfg, &done)?;
            if records.is_empty() {
                eprintln!("all points already in {}", path.display());
                return Ok(());
            }
            emit_results(&records, format, path, Some(&cfg))?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
        }
        None => {
            let records = run_sweep_skipping(&cfg, &[])?;
            print!("{}", polarlist::sim::to_csv(&records)?);
        }
    }
    Ok(())
}

fn cost(args: &CostArgs) -> Result<(), SimError> {
    let arm = preset(&args.preset, args.n, args.rate)?;
    let spec = arm.code_spec(args.n, args.rate)?;
    let schedule = Schedule::build(
        spec.frozen_mask(),
        ScheduleOptions {
            fast: arm.fast,
            partitions: arm.partitions,
        },
    );
    let report = latency_cycles(&schedule, &LatencyModel::new(arm.list), arm.ida.is_some());
    let profile = QuantizationProfile::for_code(args.n, args.rate);
    let kind = if arm.partitions > 1 { MemoryKind::Gpscl } else { MemoryKind::Scl };
    let mem = memory_bits(kind, args.n, arm.list, arm.partitions, arm.crossover, &profile);
    println!("arm: {}", arm.name);
    println!("total_cycles: {}", report.total_cycles);
    println!("cycles_before_first_info: {}", report.before_first_info);
    println!("ida_cycles: {}", report.ida_cycles);
    println!("ida_overhead: {}", report.ida_overhead);
    println!("memory_bits: {mem}");
    if !args.events.is_empty() {
        let mut ops = OpCounter::default();
        for e in &args.events {
            charge_ops(e, &mut ops).map_err(|err| SimError::Config(format!("{e}: {err}")))?;
        }
        println!(
            "ops: additions={} comparisons={} selections={} total={}",
            ops.additions,
            ops.comparisons,
            ops.selections,
            ops.total()
        );
    }
    Ok(())
}

fn ida_analyze(args: &IdaArgs) -> Result<(), SimError> {
    let mut cfg = IdaConfig::preset(args.n, args.rate, args.quantized)
        .or_else(|e| match (args.gamma, args.phi) {
            (Some(g), Some(p)) => IdaConfig::new(g, p, 4, 8),
            _ => Err(e),
        })?;
    if let Some(g) = args.gamma {
        cfg.gamma = g;
    }
    if let Some(p) = args.phi {
        cfg.phi = p;
    }
    let rate = (args.rate * args.n as f64).round() / args.n as f64;
    println!("n={} rate={} gamma={} phi={}", args.n, args.rate, cfg.gamma, cfg.phi);
    println!("ebn0_db,delta,expected_first_list");
    for &e in &args.ebn0 {
        let sigma = sigma_from_ebn0(e, rate);
        let delta = small_list_probability(args.n, cfg.gamma, sigma, cfg.phi);
        let avg = expected_average_list(delta, cfg.small_list, cfg.large_list, 0.0, cfg.large_list);
        println!("{e},{delta:.6},{avg:.4}");
    }
    Ok(())
}

fn mem_table() {
    println!("n,scl16,be_scl8,be_gpscl8");
    for n in [4096usize, 8192] {
        let p = QuantizationProfile::for_code(n, 0.5);
        println!(
            "{n},{},{},{}",
            memory_bits(MemoryKind::Scl, n, 16, 1, 1, &p),
            memory_bits(MemoryKind::Scl, n, 8, 1, 1, &p),
            memory_bits(MemoryKind::Gpscl, n, 8, 2, 2, &p)
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Cost(a) => cost(a),
        Command::IdaAnalyze(a) => ida_analyze(a),
        Command::MemTable => {
            mem_table();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
