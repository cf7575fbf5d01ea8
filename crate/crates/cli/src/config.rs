//! Flags, config files and defaults. Flags override the config file, which
//! overrides defaults.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use limitop::{Error, Result};

/// Analysis parameters. Every field is optional so that flag and file
/// layers can be merged; the merged record is echoed into reports.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Space spec (nat:MAX, lattice:LO..HI[,..][:norm], quadrant:MAX[:norm], box:AxB[,..][:SEP]) or space file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Operator generator spec or operator file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    /// Exponent of the ℓᵖ space.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Window radius.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    /// Cauchy tolerance for limit windows.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Number of trailing windows compared and averaged.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
    /// Direction: "x0,step", "x0,exp:RATE" or "ids:a;b;c" (vector coordinates joined by ':'). Repeatable.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<Vec<String>>,
    /// Partition scale L.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    /// Seed for randomised generators.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Column set: all, interior, or ball:R around the centre.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<String>,
    /// Support radius for localised lower norms.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    /// Slack δ for localisation checks.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Separation m for sparsification.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Target captured fraction for sparsification.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Measure: uniform, atoms:i;j;..., or a file with one weight per line.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    /// Radii for profiles (comma separated).
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<u32>>,
    /// Local inverse norm bound M.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Radius of the central ball excluded from residuals.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_radius: Option<u32>,
    /// Interior lower norms at or below this count as zero.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_threshold: Option<f64>,
    /// Largest accepted parametrix residual.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_threshold: Option<f64>,
}

/// Run-level settings that do not affect results and are never echoed.
#[derive(Args, Clone, Debug, Default)]
pub struct Runtime {
    /// JSON config file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report (or artifact) path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV series path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Params { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone())),* }
    };
}

impl Params {
    /// `self` (flags) over `lower` (file).
    pub fn over(&self, lower: &Params) -> Params {
        merge_fields!(self, lower; space, op, p, radius, tol, tail, dir, scale, seed, cols, s, delta, m, c, measure, radii, bound, residual_radius, zero_threshold, residual_threshold)
    }
}

/// Parameters from a JSON config file. An optional `command` key must match
/// the invoked subcommand; an optional `description` key is ignored.
pub fn load_config(path: &std::path::Path, command: &str) -> Result<Params> {
    let text = std::fs::read_to_string(path)?;
    let mut map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)?;
    if let Some(c) = map.remove("command") {
        if c.as_str() != Some(command) {
            return Err(Error::Parse(format!("config is for {c}, not `{command}`")));
        }
    }
    // Descriptions are for people reading the file.
    map.remove("description");
    Ok(serde_json::from_value(serde_json::Value::Object(map))?)
}
