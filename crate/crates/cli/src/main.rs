//! Experiment driver: replays a stream file or generates an adversarial
//! stream, runs the selected engine, audits answers against the exact
//! oracles, and writes a metrics CSV.
//!
//! Exit code 0 iff no invariant violation occurred.

use clap::Parser;
use dyngeo::diameter::Mode;
use dyngeo::harness::{
    parse_stream, run_experiment, run_stream, AdversaryKind, Algo, ExperimentConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dyngeo", about = "Dynamic diameter / MEB / k-center experiments")]
struct Args {
    /// Stream file to replay; when omitted, a stream is generated with the
    /// configured adversary.
    stream: Option<PathBuf>,

    #[arg(long, default_value_t = 2)]
    dim: usize,

    /// Engine accuracy parameter; defaults per engine (1/4d^2 for diameter,
    /// 0.2 for k-center).
    #[arg(long)]
    eps: Option<f64>,

    #[arg(long, default_value_t = 0.01)]
    delta: f64,

    #[arg(long, default_value_t = 2)]
    k: usize,

    #[arg(long, default_value_t = 0.05)]
    dmin: f64,

    #[arg(long, default_value_t = 1000.0)]
    dmax: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value = "amortized", value_parser = parse_mode)]
    mode: Mode,

    #[arg(long, default_value = "oblivious_random", value_parser = parse_adversary)]
    adversary: AdversaryKind,

    /// Number of events to generate (ignored when replaying a stream file).
    #[arg(long, default_value_t = 10_000)]
    n: usize,

    /// Audit every this many queries against the exact oracles (0 = never).
    #[arg(long = "oracle-cadence", default_value_t = 10)]
    oracle_cadence: usize,

    /// Metrics CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "diam", value_parser = parse_algo)]
    algo: Algo,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "amortized" => Ok(Mode::Amortized),
        "deamortized" => Ok(Mode::Deamortized),
        _ => Err(format!("unknown mode {s} (amortized|deamortized)")),
    }
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    AdversaryKind::from_str(s).ok_or_else(|| {
        format!("unknown adversary {s} (oblivious_random|output_adaptive|randomness_adaptive)")
    })
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    match s {
        "diam" => Ok(Algo::Diam),
        "meb" => Ok(Algo::Meb),
        "kcenter" => Ok(Algo::KCenter),
        _ => Err(format!("unknown algo {s} (diam|meb|kcenter)")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = ExperimentConfig::new(args.algo, args.dim, args.n, args.seed);
    cfg.eps = args.eps;
    cfg.delta = args.delta;
    cfg.k = args.k;
    cfg.dmin = args.dmin;
    cfg.dmax = args.dmax;
    cfg.mode = args.mode;
    cfg.adversary = args.adversary;
    cfg.oracle_cadence = args.oracle_cadence;

    let report = match &args.stream {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match parse_stream(&text, args.dim) {
                Ok(events) => run_stream(&cfg, &events),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        None => run_experiment(&cfg),
    };

    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(out) = &args.out {
        if let Err(e) = std::fs::write(out, report.to_csv()) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }

    eprintln!(
        "events={} queries={} oracle_checks={} violations={} rebuilds={} \
         max_update_ops={} total_ops={} deadline_misses={}",
        report.rows.len(),
        report.queries,
        report.oracle_checks,
        report.violations,
        report.rebuilds,
        report.max_update_ops,
        report.total_ops,
        report.deadline_misses,
    );

    if report.violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
