//! CSV and file output, host stamping.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub type CsvOut = csv::Writer<Box<dyn Write>>;

/// CSV to `path`, or standard output without one.
pub fn csv_writer(path: Option<&Path>) -> Result<CsvOut> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink))
}

pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cpu_model() -> Option<String> {
    let info = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    info.lines()
        .find(|l| {
            l.starts_with("model name") || l.starts_with("Model") || l.starts_with("CPU part")
        })
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim().to_string())
}

/// One line describing the machine, for benchmark provenance.
pub fn host_info() -> String {
    let threads = std::thread::available_parallelism().map_or(0, |n| n.get());
    format!(
        "host: {} {} cpu=\"{}\" threads={} build={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        cpu_model().unwrap_or_else(|| "unknown".into()),
        threads,
        if cfg!(debug_assertions) {
            "debug"
        } else {
            "release"
        }
    )
}
