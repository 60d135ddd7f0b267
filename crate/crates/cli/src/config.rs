//! Parameter resolution: command-line flags override the config file, the
//! config file overrides PRIMECORR_THREADS, and built-in defaults fill the
//! rest. The config file is flat `key = value` text; keys use the flag
//! names with underscores.

use std::path::PathBuf;

use crate::commands::CmdError;
use crate::output::Format;

pub const THREADS_ENV: &str = "PRIMECORR_THREADS";

#[derive(clap::Args, Debug, Clone, Default)]
pub struct RawOpts {
    /// Upper limit x (accepts 1e13, 10_000, or plain digits)
    #[arg(long, global = true, value_parser = parse_count)]
    pub x: Option<u64>,
    /// Quadratic range limit N (sum over n <= N)
    #[arg(long, global = true, value_parser = parse_count)]
    pub n_limit: Option<u64>,
    /// Shift m for linear correlations; the integer argument n for series
    #[arg(long, global = true, value_parser = parse_count)]
    pub m: Option<u64>,
    /// sigma, or a comma-separated sigma grid for spectrum
    #[arg(long, global = true)]
    pub sigma: Option<String>,
    /// Series/spectrum truncation point Q
    #[arg(long, global = true, value_parser = parse_count)]
    pub q_trunc: Option<u64>,
    /// Euler product prime cutoff P
    #[arg(long, global = true, value_parser = parse_count)]
    pub p_cutoff: Option<u64>,
    /// Worker thread count
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Block size for partitioned jobs
    #[arg(long, global = true, value_parser = parse_count)]
    pub segment_size: Option<u64>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Checkpoint file for resumable jobs
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Flat key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub x: Option<u64>,
    pub n_limit: Option<u64>,
    pub m: Option<u64>,
    pub sigma: Option<String>,
    pub q_trunc: Option<u64>,
    pub p_cutoff: Option<u64>,
    pub threads: Option<usize>,
    pub segment_size: Option<u64>,
    pub format: Format,
    pub checkpoint: Option<PathBuf>,
}

/// Count-like flag values: plain digits, digits with underscores, or float
/// notation that denotes an exact integer (1e13, 2.5e6).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| format!("expected a count, got '{s}'"))?;
    if !f.is_finite() || f < 0.0 || f >= u64::MAX as f64 {
        return Err(format!("count out of range: '{s}'"));
    }
    let r = f.round();
    if (f - r).abs() > 1e-6 * r.max(1.0) {
        return Err(format!("count must be an integer: '{s}'"));
    }
    Ok(r as u64)
}

const ALL_KEYS: [&str; 10] = [
    "x",
    "n_limit",
    "m",
    "sigma",
    "q_trunc",
    "p_cutoff",
    "threads",
    "segment_size",
    "format",
    "checkpoint",
];

const UNIVERSAL: [&str; 3] = ["threads", "format", "config"];

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

pub fn parse_format(s: &str) -> Result<Format, CmdError> {
    match s {
        "plain" => Ok(Format::Plain),
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(usage(format!(
            "format must be plain, json, or csv, got '{other}'"
        ))),
    }
}

/// Keys provided explicitly on the command line, for the per-command check.
fn provided_flags(raw: &RawOpts) -> Vec<&'static str> {
    let mut out = Vec::new();
    if raw.x.is_some() {
        out.push("x");
    }
    if raw.n_limit.is_some() {
        out.push("n_limit");
    }
    if raw.m.is_some() {
        out.push("m");
    }
    if raw.sigma.is_some() {
        out.push("sigma");
    }
    if raw.q_trunc.is_some() {
        out.push("q_trunc");
    }
    if raw.p_cutoff.is_some() {
        out.push("p_cutoff");
    }
    if raw.segment_size.is_some() {
        out.push("segment_size");
    }
    if raw.checkpoint.is_some() {
        out.push("checkpoint");
    }
    out
}

fn parse_config_file(path: &PathBuf) -> Result<Vec<(String, String)>, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {} is not key=value: '{line}'", idx + 1)))?;
        let key = key.trim().to_string();
        if !ALL_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("unknown config key '{key}'")));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Merge flags, config file, environment, and defaults, and reject flags the
/// command does not consume. Config entries for other commands' keys are
/// ignored silently so one file can serve several commands.
pub fn resolve(raw: &RawOpts, accepted: &'static [&'static str]) -> Result<RunConfig, CmdError> {
    for key in provided_flags(raw) {
        if !accepted.contains(&key) && !UNIVERSAL.contains(&key) {
            return Err(usage(format!(
                "flag --{} is not used by this command",
                key.replace('_', "-")
            )));
        }
    }

    let mut cfg = RunConfig {
        x: raw.x,
        n_limit: raw.n_limit,
        m: raw.m,
        sigma: raw.sigma.clone(),
        q_trunc: raw.q_trunc,
        p_cutoff: raw.p_cutoff,
        threads: raw.threads,
        segment_size: raw.segment_size,
        format: Format::Plain,
        checkpoint: raw.checkpoint.clone(),
    };

    let mut file_format: Option<Format> = None;
    if let Some(path) = &raw.config {
        for (key, value) in parse_config_file(path)? {
            let relevant = accepted.contains(&key.as_str()) || UNIVERSAL.contains(&key.as_str());
            if !relevant {
                continue;
            }
            let count = || parse_count(&value).map_err(|e| usage(format!("config key '{key}': {e}")));
            let fill = |slot: &mut Option<u64>| -> Result<(), CmdError> {
                if slot.is_none() {
                    *slot = Some(count()?);
                }
                Ok(())
            };
            match key.as_str() {
                "x" => fill(&mut cfg.x)?,
                "n_limit" => fill(&mut cfg.n_limit)?,
                "m" => fill(&mut cfg.m)?,
                "q_trunc" => fill(&mut cfg.q_trunc)?,
                "p_cutoff" => fill(&mut cfg.p_cutoff)?,
                "segment_size" => fill(&mut cfg.segment_size)?,
                "sigma" => {
                    if cfg.sigma.is_none() {
                        cfg.sigma = Some(value);
                    }
                }
                "threads" => {
                    if cfg.threads.is_none() {
                        let t: usize = value
                            .parse()
                            .map_err(|_| usage(format!("config threads: '{value}'")))?;
                        cfg.threads = Some(t);
                    }
                }
                "format" => file_format = Some(parse_format(&value)?),
                "checkpoint" => {
                    if cfg.checkpoint.is_none() {
                        cfg.checkpoint = Some(PathBuf::from(value));
                    }
                }
                _ => unreachable!("key set checked above"),
            }
        }
    }

    cfg.format = raw.format.or(file_format).unwrap_or(Format::Plain);

    if cfg.threads.is_none() {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            let t: usize = v
                .parse()
                .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
            cfg.threads = Some(t);
        }
    }
    if cfg.threads == Some(0) {
        return Err(usage("thread count must be at least 1"));
    }
    if cfg.segment_size == Some(0) {
        return Err(usage("segment size must be at least 1"));
    }
    Ok(cfg)
}

/// Single sigma value (commands that take one, not a grid).
pub fn single_sigma(cfg: &RunConfig, default: f64) -> Result<f64, CmdError> {
    match &cfg.sigma {
        None => Ok(default),
        Some(text) => {
            let v: f64 = text
                .trim()
                .parse()
                .map_err(|_| usage(format!("sigma must be one real number, got '{text}'")))?;
            if !v.is_finite() {
                return Err(usage("sigma must be finite"));
            }
            Ok(v)
        }
    }
}

/// Comma-separated sigma grid.
pub fn sigma_grid(cfg: &RunConfig, default: f64) -> Result<Vec<f64>, CmdError> {
    match &cfg.sigma {
        None => Ok(vec![default]),
        Some(text) => {
            let mut out = Vec::new();
            for part in text.split(',') {
                let v: f64 = part
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad sigma entry '{part}'")))?;
                if !v.is_finite() {
                    return Err(usage("sigma entries must be finite"));
                }
                out.push(v);
            }
            if out.is_empty() {
                return Err(usage("sigma grid is empty"));
            }
            Ok(out)
        }
    }
}
