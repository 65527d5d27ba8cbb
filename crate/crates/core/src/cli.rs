//! Command-line front end: config files, CSV output, manifests and panels.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Values
//! resolve with command-line overrides first, then the file, then the
//! built-in defaults, and the manifest records which source won for every
//! key.
//!
//! Output files written by `simulate`:
//!
//! * `raw.csv`: `replication,gen,prop_zero,prop_one,prop_nonbinary,match_prob,unmatched,mean_fitness`
//! * `median.csv`: the same columns without `replication`
//! * `manifest.txt`: resolved config, value sources, tool version, timings
//!
//! Column names and order are part of [`SCHEMA_VERSION`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game_analysis::{analyze, compute_phi};
use crate::genome::InitPolicy;
use crate::harness::{
    run_replications, FitnessBackend, GenerationMetrics, MedianMetrics, SimConfig,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RAW_COLUMNS: [&str; 8] = [
    "replication",
    "gen",
    "prop_zero",
    "prop_one",
    "prop_nonbinary",
    "match_prob",
    "unmatched",
    "mean_fitness",
];
pub const MEDIAN_COLUMNS: [&str; 7] = [
    "gen",
    "prop_zero",
    "prop_one",
    "prop_nonbinary",
    "match_prob",
    "unmatched",
    "mean_fitness",
];

/// Config keys in the order they are written.
pub const CONFIG_KEYS: [&str; 12] = [
    "agents",
    "segment_length",
    "periods",
    "replications",
    "pmut",
    "pcross",
    "bin_size",
    "eps_class",
    "rounds",
    "init",
    "mode",
    "seed",
];

#[derive(Debug, Parser)]
#[command(
    name = "identity-evo",
    version,
    about = "Identity evolution under pairwise matching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the replicated simulation and write raw, median and manifest files.
    Simulate(SimulateArgs),
    /// Print the stage game, its pure Nash equilibria and their refinements.
    AnalyzeGame {
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 1000)]
        k_max: u32,
    },
    /// Monte Carlo estimate of the nonbinary match probability for bin size b.
    Phi {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Split a median CSV into per-panel series.
    PlotData {
        /// Median CSV written by `simulate`.
        #[arg(long)]
        median: PathBuf,
        /// Directory receiving panel_identity.csv, panel_matching.csv and panel_unmatched.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker cap; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub bin_size: Option<f64>,
    #[arg(long)]
    pub pmut: Option<f64>,
    #[arg(long)]
    pub pcross: Option<f64>,
    #[arg(long)]
    pub eps_class: Option<f64>,
    /// analytic, counts or montecarlo
    #[arg(long)]
    pub mode: Option<FitnessBackend>,
}

impl SimulateArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |key, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        push("agents", self.agents.map(|v| v.to_string()));
        push("periods", self.periods.map(|v| v.to_string()));
        push("replications", self.replications.map(|v| v.to_string()));
        push("pmut", self.pmut.map(|v| v.to_string()));
        push("pcross", self.pcross.map(|v| v.to_string()));
        push("bin_size", self.bin_size.map(|v| v.to_string()));
        push("eps_class", self.eps_class.map(|v| v.to_string()));
        push("mode", self.mode.map(|v| v.as_str().to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Cli,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Cli => "cli",
        }
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "default" => Ok(Source::Default),
            "file" => Ok(Source::File),
            "cli" => Ok(Source::Cli),
            other => Err(format!("unknown source `{other}`")),
        }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// unknown and repeated keys are errors.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_error(
                line,
                format!("line {}: expected `key = value`", lineno + 1),
            ));
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if seen.insert(key.clone(), lineno).is_some() {
            return Err(config_error(
                &key,
                format!("line {}: duplicate key", lineno + 1),
            ));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| config_error(key, format!("cannot parse `{value}`: {e}")))
}

fn apply(config: &mut SimConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "agents" => config.agents = parse_value(key, value)?,
        "segment_length" => config.segment_len = parse_value(key, value)?,
        "periods" => config.periods = parse_value(key, value)?,
        "replications" => config.replications = parse_value(key, value)?,
        "pmut" => config.p_mut = parse_value(key, value)?,
        "pcross" => config.p_cross = parse_value(key, value)?,
        "bin_size" => config.bin_size = parse_value(key, value)?,
        "eps_class" => config.eps_class = parse_value(key, value)?,
        "rounds" => config.rounds = parse_value(key, value)?,
        "init" => config.init = parse_value::<InitPolicy>(key, value)?,
        "mode" => config.mode = parse_value::<FitnessBackend>(key, value)?,
        "seed" => config.master_seed = parse_value(key, value)?,
        other => {
            return Err(config_error(
                other,
                format!("unknown key (expected one of {})", CONFIG_KEYS.join(", ")),
            ))
        }
    }
    Ok(())
}

/// Value of `key` in `config`, formatted as it would be written to a file.
pub fn config_value(config: &SimConfig, key: &str) -> String {
    match key {
        "agents" => config.agents.to_string(),
        "segment_length" => config.segment_len.to_string(),
        "periods" => config.periods.to_string(),
        "replications" => config.replications.to_string(),
        "pmut" => config.p_mut.to_string(),
        "pcross" => config.p_cross.to_string(),
        "bin_size" => config.bin_size.to_string(),
        "eps_class" => config.eps_class.to_string(),
        "rounds" => config.rounds.to_string(),
        "init" => config.init.as_str().to_string(),
        "mode" => config.mode.as_str().to_string(),
        "seed" => config.master_seed.to_string(),
        _ => String::new(),
    }
}

/// A validated config plus the source of every key.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: SimConfig,
    pub sources: BTreeMap<String, Source>,
}

pub fn resolve_config(
    file: &[(String, String)],
    overrides: &[(&str, String)],
) -> Result<ResolvedConfig> {
    let mut config = SimConfig::default();
    let mut sources: BTreeMap<String, Source> = CONFIG_KEYS
        .iter()
        .map(|k| (k.to_string(), Source::Default))
        .collect();
    for (key, value) in file {
        apply(&mut config, key, value)?;
        sources.insert(key.clone(), Source::File);
    }
    for (key, value) in overrides {
        apply(&mut config, key, value)?;
        sources.insert(key.to_string(), Source::Cli);
    }
    config.validate()?;
    Ok(ResolvedConfig { config, sources })
}

/// Run record written next to the CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub resolved: ResolvedConfig,
    /// Unix seconds.
    pub started: u64,
    pub finished: u64,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "schema_version={}", self.schema_version);
        let _ = writeln!(out, "tool_version={}", self.tool_version);
        let _ = writeln!(out, "started_unix={}", self.started);
        let _ = writeln!(out, "finished_unix={}", self.finished);
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key}={}", config_value(&self.resolved.config, key));
        }
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "source.{key}={}", self.resolved.sources[key].as_str());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = SimConfig::default();
        let mut sources = BTreeMap::new();
        let mut header = BTreeMap::new();
        for (key, value) in parse_key_values(text)? {
            if let Some(k) = key.strip_prefix("source.") {
                if !CONFIG_KEYS.contains(&k) {
                    return Err(config_error(&key, "unknown key"));
                }
                sources.insert(k.to_string(), parse_value::<Source>(&key, &value)?);
            } else if CONFIG_KEYS.contains(&key.as_str()) {
                apply(&mut config, &key, &value)?;
            } else {
                header.insert(key, value);
            }
        }
        let take = |key: &str| {
            header
                .get(key)
                .cloned()
                .ok_or_else(|| config_error(key, "missing from manifest"))
        };
        for key in CONFIG_KEYS {
            if !sources.contains_key(key) {
                return Err(config_error(
                    &format!("source.{key}"),
                    "missing from manifest",
                ));
            }
        }
        Ok(Manifest {
            schema_version: parse_value("schema_version", &take("schema_version")?)?,
            tool_version: take("tool_version")?,
            resolved: ResolvedConfig { config, sources },
            started: parse_value("started_unix", &take("started_unix")?)?,
            finished: parse_value("finished_unix", &take("finished_unix")?)?,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn raw_csv(raw: &[Vec<GenerationMetrics>]) -> Result<String> {
    let rows = raw.iter().enumerate().flat_map(|(rep, series)| {
        series.iter().map(move |m| {
            vec![
                rep.to_string(),
                m.gen.to_string(),
                m.prop_zero.to_string(),
                m.prop_one.to_string(),
                m.prop_nonbinary.to_string(),
                m.match_prob.to_string(),
                m.unmatched.to_string(),
                m.mean_fitness.to_string(),
            ]
        })
    });
    write_csv(&RAW_COLUMNS, rows)
}

pub fn median_csv(median: &[MedianMetrics]) -> Result<String> {
    let rows = median.iter().map(|m| {
        vec![
            m.gen.to_string(),
            m.prop_zero.to_string(),
            m.prop_one.to_string(),
            m.prop_nonbinary.to_string(),
            m.match_prob.to_string(),
            m.unmatched.to_string(),
            m.mean_fitness.to_string(),
        ]
    });
    write_csv(&MEDIAN_COLUMNS, rows)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Manifest> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            parse_key_values(&text)?
        }
        None => Vec::new(),
    };
    let resolved = resolve_config(&file, &args.overrides())?;
    let started = unix_now();
    let output = run_replications(&resolved.config, args.threads)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("raw.csv"), raw_csv(&output.raw)?)?;
    std::fs::write(args.out.join("median.csv"), median_csv(&output.median)?)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        resolved,
        started,
        finished: unix_now(),
    };
    std::fs::write(args.out.join("manifest.txt"), manifest.to_text())?;
    Ok(manifest)
}

pub fn cmd_analyze_game(phi: f64, k_max: u32) -> Result<String> {
    Ok(analyze(phi, k_max)?.to_string())
}

pub fn cmd_phi(b: f64, samples: usize, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = compute_phi(b, samples, &mut rng)?;
    Ok(format!(
        "phi={}\nstd_err={}\nsamples={}\n",
        est.estimate, est.std_err, est.samples
    ))
}

/// Panel files and the median columns each one carries (after `gen`).
pub const PANELS: [(&str, &[&str]); 3] = [
    (
        "panel_identity.csv",
        &["prop_zero", "prop_one", "prop_nonbinary"],
    ),
    ("panel_matching.csv", &["match_prob"]),
    ("panel_unmatched.csv", &["unmatched"]),
];

/// Splits median CSV text into the three panel CSVs, returned as
/// `(file name, contents)`.
pub fn plot_panels(median_text: &str) -> Result<Vec<(&'static str, String)>> {
    let mut reader = csv::Reader::from_reader(median_text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let found: Vec<&str> = headers.iter().collect();
    let index = |col: &str| found.iter().position(|h| *h == col);
    if MEDIAN_COLUMNS.iter().any(|c| index(c).is_none()) {
        return Err(Error::Schema {
            expected: MEDIAN_COLUMNS.join(","),
            found: found.join(","),
        });
    }
    let records = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_error)?;
    PANELS
        .iter()
        .map(|(name, cols)| {
            let mut header = vec!["gen"];
            header.extend_from_slice(cols);
            let idx: Vec<usize> = header.iter().map(|c| index(c).unwrap()).collect();
            let rows = records.iter().map(|r| {
                idx.iter()
                    .map(|&i| r.get(i).unwrap_or("").to_string())
                    .collect()
            });
            Ok((*name, write_csv(&header, rows)?))
        })
        .collect()
}

pub fn cmd_plot_data(median: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(median)
        .map_err(|e| Error::Io(format!("{}: {e}", median.display())))?;
    // an empty file is an empty series
    let text = if text.trim().is_empty() {
        MEDIAN_COLUMNS.join(",") + "\n"
    } else {
        text
    };
    let panels = plot_panels(&text)?;
    std::fs::create_dir_all(out)?;
    panels
        .into_iter()
        .map(|(name, contents)| {
            let path = out.join(name);
            std::fs::write(&path, contents)?;
            Ok(path)
        })
        .collect()
}

/// Runs a parsed command line, returning what should go to stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(args) => {
            let manifest = cmd_simulate(&args)?;
            let c = &manifest.resolved.config;
            Ok(format!(
                "wrote {} replications x {} periods to {}\n",
                c.replications,
                c.periods,
                args.out.display()
            ))
        }
        Command::AnalyzeGame { phi, k_max } => cmd_analyze_game(phi, k_max),
        Command::Phi { b, samples, seed } => cmd_phi(b, samples, seed),
        Command::PlotData { median, out } => {
            let paths = cmd_plot_data(&median, &out)?;
            Ok(paths.iter().map(|p| format!("{}\n", p.display())).collect())
        }
    }
}
