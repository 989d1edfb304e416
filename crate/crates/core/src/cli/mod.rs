//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (including a failed
//! `selftest`).

mod args;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use log::{info, warn};
use thiserror::Error;

pub use args::{parse_config, Cli, Command, Flags};

use crate::distribution::{
    band_census, fit_truncated_power_law, population_jumps, population_waits, rg_distribution,
    Binning, DistributionError, FitRange, Histogram, R0Mode,
};
use crate::ingest::{
    ingest_texts, write_cdr_csv, write_rejections, GeoPoint, IngestError, IngestOptions,
    Reference, Timestamp, Window,
};
use crate::kernel::{summarize_all, to_intrinsic_frame, write_intrinsic, write_summaries};
use crate::selftest;
use crate::synth::{gen_population, PopulationSpec, RgSampler, SynthError};
use crate::trajectory::{build_trajectories, write_dump, Trajectory};

pub const LOG_ENV: &str = "MOBITRACE_LOG";

/// Reference used by `synth` to place the planar population on the globe
/// when no explicit `--ref` is given.
pub const DEFAULT_SYNTH_REF: (f64, f64) = (49.49, 0.12);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let name = match &e {
            IngestError::EmptyInput { .. } => "EmptyInput",
            IngestError::BadWindow { .. } => "BadWindow",
            IngestError::Geo(_) => "GeoError",
            IngestError::Io(_) => "IoError",
        };
        CliError::Data(format!("{name}: {e}"))
    }
}

impl From<DistributionError> for CliError {
    fn from(e: DistributionError) -> Self {
        let name = match &e {
            DistributionError::TooShort { .. } => "TooShort",
            DistributionError::BadBinning(_) => "BadBinning",
            DistributionError::EdgeMismatch => "EdgeMismatch",
            DistributionError::EmptyPopulation => "EmptyPopulation",
            DistributionError::BadArgument(_) => "BadArgument",
            DistributionError::TooFewSamples { .. } => "TooFewSamples",
            DistributionError::NoConvergence { .. } => "NoConvergence",
        };
        CliError::Data(format!("{name}: {e}"))
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(format!("IoError: {e}"))
    }
}

/// Fully resolved run configuration. Every field has a default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// Standard output when `None`.
    pub out: Option<PathBuf>,
    pub reference: Reference,
    pub window: Option<Window>,
    /// Command-specific default when `None`.
    pub binning: Option<Binning>,
    /// `[0.1, max r_g]` when `None`.
    pub fit_range: Option<FitRange>,
    pub r0: R0Mode,
    pub users: usize,
    pub seed: u64,
    pub events: (usize, usize),
    pub commuters: f64,
    pub svg: Option<PathBuf>,
    pub rejects: Option<PathBuf>,
    pub quiet: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            out: None,
            reference: Reference::Auto,
            window: None,
            binning: None,
            fit_range: None,
            r0: R0Mode::FixedZero,
            users: 1000,
            seed: 0,
            events: PopulationSpec::default().events_per_user,
            commuters: 0.0,
            svg: None,
            rejects: None,
            quiet: false,
        }
    }
}

fn usage(flag: &str, value: &str, expected: &str) -> CliError {
    CliError::Usage(format!("--{flag} {value:?}: expected {expected}"))
}

fn parse_num<T: std::str::FromStr>(flag: &str, value: &str, expected: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| usage(flag, value, expected))
}

fn split_fields<'a>(flag: &str, value: &'a str, n: usize, expected: &str) -> Result<Vec<&'a str>, CliError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != n {
        return Err(usage(flag, value, expected));
    }
    Ok(parts)
}

impl RunConfig {
    pub fn from_flags(flags: &Flags) -> Result<Self, CliError> {
        let mut cfg = RunConfig {
            inputs: flags.input.clone(),
            out: flags.out.clone(),
            svg: flags.svg.clone(),
            rejects: flags.rejects.clone(),
            quiet: flags.quiet,
            ..RunConfig::default()
        };
        if let Some(r) = &flags.reference {
            cfg.reference = if r.eq_ignore_ascii_case("auto") {
                Reference::Auto
            } else {
                let expected = "`auto` or LAT,LON";
                let (lat, lon) = r.split_once(',').ok_or_else(|| usage("ref", r, expected))?;
                let lat = parse_num("ref", lat, expected)?;
                let lon = parse_num("ref", lon, expected)?;
                Reference::Fixed(GeoPoint::new(lat, lon).map_err(|_| usage("ref", r, expected))?)
            };
        }
        let stamp = |flag: &str, v: &Option<String>| -> Result<Option<Timestamp>, CliError> {
            v.as_deref()
                .map(|s| s.parse().map_err(|_| usage(flag, s, "YYYY-MM-DDThh:mm:ssZ")))
                .transpose()
        };
        let from = stamp("from", &flags.from)?;
        let to = stamp("to", &flags.to)?;
        if from.is_some() || to.is_some() {
            let w = Window::new(from.unwrap_or(Timestamp(i64::MIN)), to.unwrap_or(Timestamp(i64::MAX)))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            cfg.window = Some(w);
        }
        match (&flags.log_bins, &flags.lin_bins) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("--log-bins and --lin-bins are exclusive".into()))
            }
            (Some(v), None) => {
                let e = "BASE:START:NBINS";
                let p = split_fields("log-bins", v, 3, e)?;
                cfg.binning = Some(Binning::Log {
                    base: parse_num("log-bins", p[0], e)?,
                    start: parse_num("log-bins", p[1], e)?,
                    n_bins: parse_num("log-bins", p[2], e)?,
                });
            }
            (None, Some(v)) => {
                let e = "LO:HI:NBINS";
                let p = split_fields("lin-bins", v, 3, e)?;
                cfg.binning = Some(Binning::Linear {
                    lo: parse_num("lin-bins", p[0], e)?,
                    hi: parse_num("lin-bins", p[1], e)?,
                    n_bins: parse_num("lin-bins", p[2], e)?,
                });
            }
            (None, None) => {}
        }
        if let Some(b) = &cfg.binning {
            b.edges().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if let Some(v) = &flags.fit_range {
            let e = "MIN:MAX with 0 < MIN < MAX";
            let p = split_fields("fit-range", v, 2, e)?;
            let range = FitRange::new(parse_num("fit-range", p[0], e)?, parse_num("fit-range", p[1], e)?)
                .map_err(|_| usage("fit-range", v, e))?;
            cfg.fit_range = Some(range);
        }
        if let Some(v) = &flags.r0 {
            cfg.r0 = match v.as_str() {
                "fixed" => R0Mode::FixedZero,
                "free" => R0Mode::Free,
                _ => return Err(usage("r0", v, "`fixed` or `free`")),
            };
        }
        if let Some(v) = &flags.users {
            cfg.users = parse_num("users", v, "a positive integer")?;
            if cfg.users == 0 {
                return Err(usage("users", v, "a positive integer"));
            }
        }
        if let Some(v) = &flags.seed {
            cfg.seed = parse_num("seed", v, "an unsigned 64-bit integer")?;
        }
        if let Some(v) = &flags.events {
            let e = "MIN:MAX with 1 ≤ MIN ≤ MAX";
            let p = split_fields("events", v, 2, e)?;
            let (lo, hi): (usize, usize) = (parse_num("events", p[0], e)?, parse_num("events", p[1], e)?);
            if lo == 0 || lo > hi {
                return Err(usage("events", v, e));
            }
            cfg.events = (lo, hi);
        }
        if let Some(v) = &flags.commuters {
            let e = "a fraction in [0, 1]";
            cfg.commuters = parse_num("commuters", v, e)?;
            if !(0.0..=1.0).contains(&cfg.commuters) {
                return Err(usage("commuters", v, e));
            }
        }
        Ok(cfg)
    }
}

fn init_logging(quiet: bool) {
    let default = if quiet { "error" } else { "warn" };
    let env = env_logger::Env::new().filter_or(LOG_ENV, default);
    let mut builder = env_logger::Builder::from_env(env);
    if quiet {
        builder.filter_level(log::LevelFilter::Error);
    }
    let _ = builder.format_timestamp(None).try_init();
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Data(format!("IoError: {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_side_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("IoError: {}: {e}", path.display())))
}

fn load(cfg: &RunConfig) -> Result<std::collections::BTreeMap<String, Trajectory>, CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Usage("--input PATH is required".into()));
    }
    let texts = cfg
        .inputs
        .iter()
        .map(|p| fs::read_to_string(p).map_err(|e| CliError::Data(format!("IoError: {}: {e}", p.display()))))
        .collect::<Result<Vec<String>, _>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let opts = IngestOptions {
        reference: cfg.reference,
        window: cfg.window,
    };
    let ingested = ingest_texts(&refs, &opts)?;
    let s = &ingested.stats;
    info!(
        "ingested {} lines: {} ok, {} rejected {:?}; reference {}",
        s.lines_read,
        s.records_ok,
        s.records_rejected,
        s.reject_reasons,
        s.ref_point.map(|p| p.to_string()).unwrap_or_default()
    );
    if s.records_rejected > 0 {
        warn!("{} of {} rows rejected", s.records_rejected, s.lines_read);
    }
    if let Some(path) = &cfg.rejects {
        let mut buf = Vec::new();
        write_rejections(&mut buf, &ingested.rejections)?;
        write_side_file(path, &buf)?;
    }
    Ok(build_trajectories(&ingested.records))
}

fn histogram_bytes(h: &Histogram) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    h.write_csv(&mut buf)?;
    Ok(buf)
}

/// Execute one command. Output goes to `cfg.out` (or standard output);
/// side files only to the paths named by `--svg` and `--rejects`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Ingest => {
            let trajs = load(cfg)?;
            let mut buf = Vec::new();
            write_dump(&mut buf, trajs.values())?;
            emit(cfg, &buf)
        }
        Command::Summarize => {
            let summaries = summarize_all(&load(cfg)?);
            let mut buf = Vec::new();
            write_summaries(&mut buf, &summaries)?;
            emit(cfg, &buf)
        }
        Command::Rescale => {
            let trajs = load(cfg)?;
            let list: Vec<&Trajectory> = trajs.values().collect();
            let frames: Vec<_> = crate::par::map(&list, |t| to_intrinsic_frame(t).ok())
                .into_iter()
                .flatten()
                .collect();
            info!("{} of {} users have a non-degenerate frame", frames.len(), list.len());
            let mut buf = Vec::new();
            write_intrinsic(&mut buf, &frames)?;
            if let Some(path) = &cfg.svg {
                let points: Vec<(f64, f64)> =
                    frames.iter().flat_map(|f| f.points.iter().map(|p| (p.u, p.v))).collect();
                write_side_file(path, svg::scatter("Trajectories in the intrinsic frame", &points, &[]).as_bytes())?;
            }
            emit(cfg, &buf)
        }
        Command::Jumps => {
            let jumps = population_jumps(&load(cfg)?);
            let binning = cfg.binning.clone().unwrap_or_else(Binning::default_log);
            emit(cfg, &histogram_bytes(&Histogram::from_values(&jumps, &binning)?)?)
        }
        Command::Waits => {
            let waits: Vec<f64> = population_waits(&load(cfg)?).into_iter().map(|w| w as f64).collect();
            let binning = cfg.binning.clone().unwrap_or(Binning::Log {
                base: 2.0,
                start: 1.0,
                n_bins: 20,
            });
            emit(cfg, &histogram_bytes(&Histogram::from_values(&waits, &binning)?)?)
        }
        Command::Rgdist => {
            let summaries = summarize_all(&load(cfg)?);
            let binning = cfg.binning.clone().unwrap_or_else(Binning::default_log);
            let h = rg_distribution(&summaries, &binning)?;
            if let Some(path) = &cfg.svg {
                let pts: Vec<(f64, f64)> = h
                    .densities()
                    .into_iter()
                    .enumerate()
                    .map(|(k, d)| ((h.edges[k] * h.edges[k + 1]).sqrt(), d))
                    .collect();
                write_side_file(path, svg::loglog_line("P(r_g)", "r_g (km)", "density", &pts).as_bytes())?;
            }
            emit(cfg, &histogram_bytes(&h)?)
        }
        Command::Fit => {
            let summaries = summarize_all(&load(cfg)?);
            let samples: Vec<f64> = summaries.iter().map(|s| s.rg).collect();
            let range = match cfg.fit_range {
                Some(r) => r,
                None => {
                    let max = samples.iter().copied().fold(0.0, f64::max);
                    FitRange::new(0.1, max)?
                }
            };
            let fit = fit_truncated_power_law(&samples, cfg.r0, range)?;
            let mut buf = Vec::new();
            fit.write_report(&mut buf)?;
            emit(cfg, &buf)
        }
        Command::Classify => {
            let census = band_census(&summarize_all(&load(cfg)?));
            let mut buf = Vec::new();
            census.write_csv(&mut buf)?;
            emit(cfg, &buf)
        }
        Command::Synth => {
            let spec = PopulationSpec {
                n_users: cfg.users,
                rg_sampler: RgSampler::default(),
                events_per_user: cfg.events,
                commuter_fraction: cfg.commuters,
                master_seed: cfg.seed,
                ..PopulationSpec::default()
            };
            let records = gen_population(&spec)?;
            let reference = match cfg.reference {
                Reference::Fixed(p) => p,
                Reference::Auto => GeoPoint::new(DEFAULT_SYNTH_REF.0, DEFAULT_SYNTH_REF.1)
                    .expect("valid default reference"),
            };
            let mut buf = Vec::new();
            write_cdr_csv(&mut buf, &records, reference)?;
            emit(cfg, &buf)
        }
        Command::Selftest => {
            let report = selftest::run();
            emit(cfg, report.to_string().as_bytes())?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Data("selftest: one or more properties failed".into()))
            }
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let Cli { command, mut flags } = cli;
    let result = (|| {
        if let Some(path) = flags.config.clone() {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            flags.merge_config(&parse_config(&text)?)?;
        }
        let cfg = RunConfig::from_flags(&flags)?;
        init_logging(cfg.quiet);
        run(command, &cfg)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mobitrace: {e}");
            e.exit_code()
        }
    }
}
