//! Flat `section.key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::UsageError;

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "general.seed",
    "fp16.flush_subnormals",
    "fp16.muladd",
    "axpy.kind",
    "axpy.min_exp",
    "axpy.max_exp",
    "axpy.cold",
    "axpy.warmup",
    "axpy.samples",
    "axpy.min_sample_ms",
    "swm.kind",
    "swm.nx",
    "swm.ny",
    "swm.lx",
    "swm.ly",
    "swm.g",
    "swm.depth",
    "swm.f0",
    "swm.beta",
    "swm.wind_amplitude",
    "swm.nu4",
    "swm.r_bottom",
    "swm.dt",
    "swm.n_steps",
    "swm.scale_s",
    "swm.nonlinear",
    "swm.compensated",
    "swm.integration_kind",
    "swm.perturbation",
    "swm.diag_every",
    "bench.kinds",
    "bench.sizes",
    "bench.steps",
    "bench.parallel",
    "sherlog.kind",
    "netbench.op",
    "netbench.ranks",
    "netbench.sizes",
    "netbench.cache_avoidance",
    "netbench.warmup",
    "netbench.reps",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(UsageError(format!(
                    "line {}: expected `section.key = value`",
                    n + 1
                )));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(UsageError(format!("line {}: unknown key `{k}`", n + 1)));
            }
            let v = v
                .strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .unwrap_or(v);
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, UsageError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key).map(|v| parse_value(key, v)).transpose()
    }
}

pub fn parse_value<T>(what: &str, v: &str) -> Result<T, UsageError>
where
    T: FromStr,
    T::Err: Display,
{
    v.parse()
        .map_err(|e| UsageError(format!("invalid value `{v}` for {what}: {e}")))
}

/// Comma-separated list.
pub fn parse_list<T>(what: &str, v: &str) -> Result<Vec<T>, UsageError>
where
    T: FromStr,
    T::Err: Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(what, s))
        .collect()
}

/// `64x32,128x64`
pub fn parse_grids(what: &str, v: &str) -> Result<Vec<(usize, usize)>, UsageError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (a, b) = s.split_once('x').ok_or_else(|| {
                UsageError(format!("invalid grid `{s}` for {what}, expected NXxNY"))
            })?;
            Ok((parse_value(what, a)?, parse_value(what, b)?))
        })
        .collect()
}
