//! Run configuration: flat `key = value` files merged with command-line
//! overrides, plus the small grammars for seeds, generators and formats.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mcbp::data::{gen_aniso, gen_blobs, gen_moons, Dataset};
use mcbp::experiment::Strategy;
use serde::Serialize;

use crate::CliError;

/// Environment variable consulted for the output directory when `--out` is
/// not given.
pub const OUT_DIR_ENV: &str = "MCBP_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "mcbp-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::Usage(format!(
                "unknown output format '{other}' (csv, json, svg)"
            ))),
        }
    }
}

pub fn parse_formats(s: &str) -> Result<Vec<Format>, CliError> {
    let mut out: Vec<Format> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let f: Format = part.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no output format selected".into()));
    }
    Ok(out)
}

/// Accepts `a..b` (exclusive), `a..=b`, and comma-separated lists of either.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse seed list '{s}'"));
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..=") {
            let (a, b): (u64, u64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            seeds.extend(a..=b);
        } else if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("seed list is empty".into()));
    }
    Ok(seeds)
}

pub fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>, CliError> {
    let list: Result<Vec<usize>, _> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect();
    match list {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "{key}: expected a comma-separated list of integers, got '{s}'"
        ))),
    }
}

pub fn parse_strategies(s: &str) -> Result<Vec<Strategy>, CliError> {
    if s.trim() == "all" {
        return Ok(Strategy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let st: Strategy = part.parse().map_err(|e: mcbp::Error| CliError::Usage(e.to_string()))?;
        if !out.contains(&st) {
            out.push(st);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no strategy selected".into()));
    }
    Ok(out)
}

/// A synthetic generator with its parameters, e.g. `moons:n=1000,noise=0.1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Blob { n: usize, sd: f64 },
    TwoBlobs { n: usize, separation: f64, sd: f64 },
    Aniso { n: usize },
    Moons { n: usize, noise: f64 },
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Blob { .. } => "blob",
            GeneratorSpec::TwoBlobs { .. } => "two-blobs",
            GeneratorSpec::Aniso { .. } => "aniso",
            GeneratorSpec::Moons { .. } => "moons",
        }
    }

    pub fn generate(&self, seed: u64) -> mcbp::Result<Dataset> {
        match *self {
            GeneratorSpec::Blob { n, sd } => gen_blobs(n, &[vec![0.0, 0.0]], &[sd], seed),
            GeneratorSpec::TwoBlobs { n, separation, sd } => {
                gen_blobs(n, &[vec![0.0, 0.0], vec![separation, 0.0]], &[sd, sd], seed)
            }
            GeneratorSpec::Aniso { n } => gen_aniso(n, seed),
            GeneratorSpec::Moons { n, noise } => gen_moons(n, noise, seed),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorSpec::Blob { n, sd } => write!(f, "blob:n={n},sd={sd}"),
            GeneratorSpec::TwoBlobs { n, separation, sd } => {
                write!(f, "two-blobs:n={n},separation={separation},sd={sd}")
            }
            GeneratorSpec::Aniso { n } => write!(f, "aniso:n={n}"),
            GeneratorSpec::Moons { n, noise } => write!(f, "moons:n={n},noise={noise}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("generator parameter '{kv}' is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str, default: f64| -> Result<f64, CliError> {
            match params.remove(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("generator parameter {key}: '{v}' is not a number"))),
            }
        };
        let spec = match name.trim() {
            "blob" => GeneratorSpec::Blob {
                n: take("n", 400.0)? as usize,
                sd: take("sd", 1.0)?,
            },
            "two-blobs" => GeneratorSpec::TwoBlobs {
                n: take("n", 400.0)? as usize,
                separation: take("separation", 6.0)?,
                sd: take("sd", 1.0)?,
            },
            "aniso" => GeneratorSpec::Aniso {
                n: take("n", 600.0)? as usize,
            },
            "moons" => GeneratorSpec::Moons {
                n: take("n", 1000.0)? as usize,
                noise: take("noise", 0.1)?,
            },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown generator '{other}' (blob, two-blobs, aniso, moons)"
                )))
            }
        };
        if let Some(key) = params.keys().next() {
            return Err(CliError::Usage(format!("generator {name} has no parameter '{key}'")));
        }
        Ok(spec)
    }
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are
/// ignored; dashes and underscores in keys are interchangeable.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", no + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

/// Where the data for a run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Files(Vec<PathBuf>),
    Generator(GeneratorSpec),
}

/// Fully resolved settings shared by the data-driven commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    /// `None` means `⌊log₂ n⌋`, resolved per dataset.
    pub k: Option<usize>,
    pub p: f64,
    pub mcs: Vec<usize>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub strategies: Vec<Strategy>,
    pub label_column: Option<String>,
    pub header: bool,
    pub standardize: bool,
    pub n_clusters: Option<usize>,
}

/// Command-line values before merging; `None` defers to the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Vec<PathBuf>,
    pub generator: Option<String>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub mcs: Option<String>,
    pub seeds: Option<String>,
    pub strategy: Option<String>,
    pub out: Option<PathBuf>,
    pub formats: Option<String>,
    pub label_column: Option<String>,
    pub no_header: bool,
    pub standardize: Option<bool>,
    pub clusters: Option<usize>,
}

const KNOWN_KEYS: [&str; 13] = [
    "input",
    "generator",
    "k",
    "p",
    "mcs",
    "seeds",
    "strategy",
    "out",
    "formats",
    "label_column",
    "header",
    "standardize",
    "clusters",
];

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Usage(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    /// Merges file settings with command-line overrides (the latter win) and
    /// validates the result. `default_standardize` differs per command.
    pub fn resolve(
        file: &BTreeMap<String, String>,
        cli: Overrides,
        env_out: Option<PathBuf>,
        default_standardize: bool,
    ) -> Result<Self, CliError> {
        if let Some(key) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key '{key}'")));
        }
        let get = |key: &str| file.get(key).map(String::as_str);

        let inputs: Vec<PathBuf> = if !cli.input.is_empty() {
            cli.input
        } else {
            get("input")
                .map(|v| v.split(',').map(|s| PathBuf::from(s.trim())).collect())
                .unwrap_or_default()
        };
        let generator = cli.generator.or_else(|| get("generator").map(String::from));
        let source = match (inputs.is_empty(), generator) {
            (false, None) => Source::Files(inputs),
            (true, Some(g)) => Source::Generator(g.parse()?),
            (false, Some(_)) => return Err(CliError::Usage("--input and --generator are mutually exclusive".into())),
            (true, None) => return Err(CliError::Usage("either --input or --generator is required".into())),
        };

        let k = match cli.k {
            Some(k) => Some(k),
            None => get("k").map(|v| parse_num("k", v)).transpose()?,
        };
        if let Some(k) = k {
            if k < 2 {
                return Err(CliError::Usage(format!("k must be at least 2, got {k}")));
            }
        }
        let p = match cli.p {
            Some(p) => p,
            None => get("p").map(|v| parse_num("p", v)).transpose()?.unwrap_or(0.75),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::Usage(format!("p must lie strictly between 0 and 1, got {p}")));
        }
        let mcs = match cli.mcs.as_deref().or(get("mcs")) {
            Some(s) => parse_usize_list("mcs", s)?,
            None => mcbp::cluster::DEFAULT_MCS_CANDIDATES.to_vec(),
        };
        if mcs.iter().any(|&m| m < 2) {
            return Err(CliError::Usage("every mcs candidate must be at least 2".into()));
        }
        let seeds = match cli.seeds.as_deref().or(get("seeds")) {
            Some(s) => parse_seeds(s)?,
            None => (0..20).collect(),
        };
        let formats = match cli.formats.as_deref().or(get("formats")) {
            Some(s) => parse_formats(s)?,
            None => vec![Format::Csv, Format::Json, Format::Svg],
        };
        let strategies = match cli.strategy.as_deref().or(get("strategy")) {
            Some(s) => parse_strategies(s)?,
            None => Strategy::ALL.to_vec(),
        };
        let out = cli
            .out
            .or_else(|| get("out").map(PathBuf::from))
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let header = if cli.no_header {
            false
        } else {
            get("header")
                .map(|v| parse_bool("header", v))
                .transpose()?
                .unwrap_or(true)
        };
        let standardize = match cli.standardize {
            Some(b) => b,
            None => get("standardize")
                .map(|v| parse_bool("standardize", v))
                .transpose()?
                .unwrap_or(default_standardize),
        };
        let n_clusters = match cli.clusters {
            Some(c) => Some(c),
            None => get("clusters").map(|v| parse_num("clusters", v)).transpose()?,
        };

        Ok(RunConfig {
            source,
            k,
            p,
            mcs,
            seeds,
            out,
            formats,
            strategies,
            label_column: cli.label_column.or_else(|| get("label_column").map(String::from)),
            header,
            standardize,
            n_clusters,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
