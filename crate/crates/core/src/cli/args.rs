use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::CliError;

#[derive(Debug, Parser)]
#[command(name = "mobitrace", version, about = "Mobility analytics for CDR trajectories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and project CDRs; write the per-user trajectory dump.
    Ingest,
    /// Per-user mobility summary table.
    Summarize,
    /// Trajectories in their intrinsic (principal, standardized) frame.
    Rescale,
    /// Histogram of jump sizes between consecutive activities (km).
    Jumps,
    /// Histogram of waiting times between consecutive activities (s).
    Waits,
    /// Histogram of the radius of gyration over users.
    Rgdist,
    /// Maximum-likelihood truncated power-law fit of P(r_g).
    Fit,
    /// Count users per radius-of-gyration band.
    Classify,
    /// Generate a synthetic CDR population.
    Synth,
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Input CSV (repeatable).
    #[arg(long = "input", global = true, value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Projection reference: `auto` or `LAT,LON`.
    #[arg(long = "ref", global = true, value_name = "auto|LAT,LON")]
    pub reference: Option<String>,
    /// Window start, `YYYY-MM-DDThh:mm:ssZ`.
    #[arg(long, global = true, value_name = "ISO8601")]
    pub from: Option<String>,
    /// Window end (inclusive).
    #[arg(long, global = true, value_name = "ISO8601")]
    pub to: Option<String>,
    #[arg(long = "log-bins", global = true, value_name = "BASE:START:NBINS")]
    pub log_bins: Option<String>,
    #[arg(long = "lin-bins", global = true, value_name = "LO:HI:NBINS")]
    pub lin_bins: Option<String>,
    #[arg(long = "fit-range", global = true, value_name = "MIN:MAX")]
    pub fit_range: Option<String>,
    /// Offset parameter of the fitted law: `fixed` (zero) or `free`.
    #[arg(long, global = true, value_name = "fixed|free")]
    pub r0: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub users: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Events per synthetic user, inclusive range.
    #[arg(long, global = true, value_name = "MIN:MAX")]
    pub events: Option<String>,
    /// Fraction of synthetic users generated as two-cluster commuters.
    #[arg(long, global = true, value_name = "FRACTION")]
    pub commuters: Option<String>,
    /// Also render an SVG plot (rescale, rgdist).
    #[arg(long, global = true, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Write the rejected-row report (ingest and analysis commands).
    #[arg(long, global = true, value_name = "PATH")]
    pub rejects: Option<PathBuf>,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

const CONFIG_KEYS: [&str; 16] = [
    "input", "out", "ref", "from", "to", "log-bins", "lin-bins", "fit-range", "r0", "users",
    "seed", "events", "commuters", "svg", "rejects", "quiet",
];

/// Parse flat `key = value` text. `#` starts a comment line; `input` may
/// repeat.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", i + 1)));
        };
        let key = key.trim().trim_start_matches("--").to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        map.entry(key).or_default().push(value.trim().to_string());
    }
    Ok(map)
}

impl Flags {
    /// Fill every flag left unset on the command line from `config`.
    pub fn merge_config(&mut self, config: &BTreeMap<String, Vec<String>>) -> Result<(), CliError> {
        let last = |k: &str| config.get(k).and_then(|v| v.last()).cloned();
        fn fill(slot: &mut Option<String>, v: Option<String>) {
            if slot.is_none() {
                *slot = v;
            }
        }
        if self.input.is_empty() {
            if let Some(v) = config.get("input") {
                self.input = v.iter().map(PathBuf::from).collect();
            }
        }
        if self.out.is_none() {
            self.out = last("out").map(PathBuf::from);
        }
        if self.svg.is_none() {
            self.svg = last("svg").map(PathBuf::from);
        }
        if self.rejects.is_none() {
            self.rejects = last("rejects").map(PathBuf::from);
        }
        fill(&mut self.reference, last("ref"));
        fill(&mut self.from, last("from"));
        fill(&mut self.to, last("to"));
        fill(&mut self.log_bins, last("log-bins"));
        fill(&mut self.lin_bins, last("lin-bins"));
        fill(&mut self.fit_range, last("fit-range"));
        fill(&mut self.r0, last("r0"));
        fill(&mut self.users, last("users"));
        fill(&mut self.seed, last("seed"));
        fill(&mut self.events, last("events"));
        fill(&mut self.commuters, last("commuters"));
        if !self.quiet {
            if let Some(v) = last("quiet") {
                self.quiet = match v.as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(CliError::Usage(format!("quiet: expected a boolean, got `{v}`"))),
                };
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = parse_config("# run\nseed = 7\ninput=a.csv\ninput=b.csv\n\n--users=10\n").unwrap();
        assert_eq!(c["seed"], ["7"]);
        assert_eq!(c["input"], ["a.csv", "b.csv"]);
        assert_eq!(c["users"], ["10"]);
        assert!(parse_config("colour=blue").is_err());
        assert!(parse_config("seed").is_err());
    }

    #[test]
    fn flags_override_config() {
        let mut f = Flags {
            seed: Some("1".into()),
            ..Flags::default()
        };
        f.merge_config(&parse_config("seed=7\nusers=5\nquiet=true").unwrap()).unwrap();
        assert_eq!(f.seed.as_deref(), Some("1"));
        assert_eq!(f.users.as_deref(), Some("5"));
        assert!(f.quiet);
    }
}
