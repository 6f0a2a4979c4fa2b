mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lowprec_core::netbench::{NetError, NetOp};
use lowprec_core::swm::SwmError;
use lowprec_core::{MulAddMode, ScalarKind};
use thiserror::Error;

/// Bad arguments or configuration. Exit status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser, Debug)]
#[command(
    name = "lowprec",
    version,
    about = "Reduced-precision kernels, shallow-water model and message-passing benchmarks"
)]
pub struct Cli {
    /// Flat `section.key = value` config file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random stream [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flush binary16 subnormal results to zero (also HALF_FLUSH_SUBNORMALS=1).
    #[arg(long, global = true)]
    pub flush_subnormals: bool,
    /// binary16 multiply-add rounding: fused or double.
    #[arg(long, global = true, value_name = "MODE")]
    pub muladd: Option<MulAddMode>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time y <- a*x + y over doubling vector lengths.
    AxpyBench(AxpyArgs),
    /// Shallow-water model.
    Swm {
        #[command(subcommand)]
        command: SwmCommand,
    },
    /// Range instrumentation of a shallow-water run.
    Sherlog {
        #[command(subcommand)]
        command: SherlogCommand,
    },
    /// Ping-pong and collective latency over in-process ranks.
    Netbench(NetArgs),
}

#[derive(Subcommand, Debug)]
pub enum SwmCommand {
    /// Run the model and print diagnostics as CSV.
    Run(SwmRunArgs),
    /// Time and compare number formats across grid sizes.
    Bench(SwmBenchArgs),
}

#[derive(Subcommand, Debug)]
pub enum SherlogCommand {
    /// Histogram of the base-2 exponents of every arithmetic result.
    Report(SherlogArgs),
}

#[derive(Args, Debug)]
pub struct AxpyArgs {
    /// f16, f32 or f64
    #[arg(long)]
    pub kind: Option<ScalarKind>,
    /// Smallest size, as a power of two [default: 4]
    #[arg(long)]
    pub min_exp: Option<u32>,
    /// Largest size, as a power of two [default: 24]
    #[arg(long)]
    pub max_exp: Option<u32>,
    /// Rotate through buffer copies so calls do not reuse cached data.
    #[arg(long)]
    pub cold: bool,
    /// Timing samples per size [default: 11]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Minimum duration of one sample in milliseconds [default: 10]
    #[arg(long)]
    pub min_sample_ms: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

/// Model parameters settable from the command line.
#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// f64, f32, f16 or mixed
    #[arg(long)]
    pub kind: Option<ScalarKind>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Time step in seconds [default: CFL limit]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Power-of-two scale, or `auto` to calibrate from a binary32 run.
    #[arg(long)]
    pub scale: Option<String>,
    /// Format of the time integration.
    #[arg(long)]
    pub integration_kind: Option<ScalarKind>,
    /// Drop the advection terms.
    #[arg(long)]
    pub linear: bool,
    /// Plain instead of compensated time integration.
    #[arg(long)]
    pub no_compensation: bool,
}

#[derive(Args, Debug)]
pub struct SwmRunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub diag_every: Option<usize>,
    /// Diagnostics CSV path [default: standard output]
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Final fields in the binary snapshot format.
    #[arg(long, value_name = "PATH")]
    pub snapshot: Option<PathBuf>,
    /// Heatmap of the final interface height.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SwmBenchArgs {
    /// Comma-separated kinds; f64 is always included.
    #[arg(long)]
    pub kinds: Option<String>,
    /// Comma-separated grids, e.g. 64x32,128x64
    #[arg(long)]
    pub sizes: Option<String>,
    /// Steps per run [default: 200]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Run cases concurrently; timings become unreliable.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Speedup against grid size.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SherlogArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NetArgs {
    #[arg(long)]
    pub op: Option<NetOp>,
    /// Number of ranks [default: 2]
    #[arg(long)]
    pub ranks: Option<usize>,
    /// Comma-separated message sizes in bytes [default: 0 and 2^0..2^22]
    #[arg(long)]
    pub sizes: Option<String>,
    /// Rotate through 16 buffer copies between repetitions.
    #[arg(long)]
    pub cache_avoidance: bool,
    /// Fixed repetition count instead of the size-dependent schedule.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(s) = cause.downcast_ref::<SwmError>() {
            return match s {
                SwmError::Config(_) => 2,
                SwmError::Blowup { .. } => 3,
            };
        }
        if let Some(NetError::Config(_)) = cause.downcast_ref::<NetError>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
