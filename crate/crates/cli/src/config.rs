//! Command-line flags, the per-verb config file, and typed parameter access.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    ExactVolume,
    Sample,
    EstimateVolume,
    EstimateTail,
    MinDistance,
    LocalLemma,
    CountDiscrete,
    Sandwich,
    Hypergraph,
    Verify,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::ExactVolume => "exact-volume",
            Verb::Sample => "sample",
            Verb::EstimateVolume => "estimate-volume",
            Verb::EstimateTail => "estimate-tail",
            Verb::MinDistance => "min-distance",
            Verb::LocalLemma => "local-lemma",
            Verb::CountDiscrete => "count-discrete",
            Verb::Sandwich => "sandwich",
            Verb::Hypergraph => "hypergraph",
            Verb::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Computations on the metric polytope and its discrete analogue.
#[derive(Debug, Parser)]
#[command(name = "metricpoly", version)]
pub struct Args {
    #[arg(value_enum)]
    pub verb: Verb,
    /// Number of points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest distance value of the discrete model.
    #[arg(long = "M")]
    pub big_m: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample count (per level for estimate-volume, trials for local-lemma).
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// INI-style file with one `[verb]` section per verb; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suite for `verify`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Extra verb parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

/// Everything a verb needs, after merging the config file and the flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub verb: Verb,
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub big_m: Option<u32>,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(verb: Verb) -> Self {
        ExperimentConfig {
            verb,
            n: None,
            big_m: None,
            seed: None,
            params: BTreeMap::new(),
            output_path: None,
            format: None,
            workers: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.big_m = Some(m);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_format(mut self, format: Format) -> Self {
        self.format = Some(format);
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Merges `args` over the optional config file named in them.
    pub fn from_args(args: Args) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::new(args.verb);
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.n = args.n.or(cfg.n);
        cfg.big_m = args.big_m.or(cfg.big_m);
        cfg.seed = args.seed.or(cfg.seed);
        cfg.workers = args.workers.or(cfg.workers);
        cfg.format = args.format.or(cfg.format);
        cfg.output_path = args.out.or(cfg.output_path);
        let flag_params = [
            ("samples", args.samples.map(|v| v.to_string())),
            ("delta", args.delta.map(|v| v.to_string())),
            ("threshold", args.threshold.map(|v| v.to_string())),
            ("thresholds", args.thresholds.map(|v| join(&v))),
            ("levels", args.levels.map(|v| v.to_string())),
            ("suite", args.suite),
        ];
        for (k, v) in flag_params {
            if let Some(v) = v {
                cfg.params.insert(k.to_string(), v);
            }
        }
        for kv in &args.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::validation(format!("--param expects KEY=VALUE, got {kv:?}")))?;
            cfg.params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    /// Reads the general (unnamed) section and the `[verb]` section.
    fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let ini = ini::Ini::load_from_file(path)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
        let sections = [ini.general_section(), ini.section(Some(self.verb.name())).unwrap_or(ini.general_section())];
        for (i, props) in sections.into_iter().enumerate() {
            if i == 1 && ini.section(Some(self.verb.name())).is_none() {
                break;
            }
            for (k, v) in props.iter() {
                self.set_from_text(k, v)?;
            }
        }
        Ok(())
    }

    fn set_from_text(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "n" => self.n = Some(parse_value(key, value)?),
            "M" => self.big_m = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "workers" => self.workers = Some(parse_value(key, value)?),
            "out" => self.output_path = Some(PathBuf::from(value)),
            "format" => {
                self.format = Some(
                    Format::from_str(value, true).map_err(|_| CliError::validation(format!("unknown format {value:?}")))?,
                )
            }
            _ => {
                self.params.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    /// The requested format; `sample` defaults to CSV, everything else to JSON.
    pub fn output_format(&self) -> Format {
        self.format.unwrap_or(if self.verb == Verb::Sample { Format::Csv } else { Format::Json })
    }

    pub fn require_n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| CliError::validation(format!("{} needs --n", self.verb.name())))
    }

    pub fn require_m(&self) -> CliResult<u32> {
        self.big_m
            .ok_or_else(|| CliError::validation(format!("{} needs --M", self.verb.name())))
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::validation(format!("cannot parse {key} = {value:?}")))
}

/// Typed, checked access to verb parameters. Every key must be read by the
/// verb, otherwise [`Params::finish`] reports it as unknown.
#[derive(Clone, Debug)]
pub struct Params {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Params {
    pub fn new(map: &BTreeMap<String, String>) -> Self {
        Params {
            map: map.clone(),
            used: BTreeSet::new(),
        }
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        self.used.insert(key.to_string());
        self.map.get(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn text(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    pub fn list<T: FromStr>(&mut self, key: &str) -> CliResult<Option<Vec<T>>> {
        match self.text(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| parse_value(key, p))
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn finish(self) -> CliResult<()> {
        let unknown: Vec<&String> = self.map.keys().filter(|k| !self.used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::validation(format!("unknown parameter(s): {unknown:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentConfig {
        let mut full = vec!["metricpoly"];
        full.extend_from_slice(args);
        ExperimentConfig::from_args(Args::try_parse_from(full).unwrap()).unwrap()
    }

    #[test]
    fn flags_map_to_config() {
        let c = parse(&["count-discrete", "--n", "3", "--M", "3", "--param", "budget=100"]);
        assert_eq!(c.verb, Verb::CountDiscrete);
        assert_eq!((c.n, c.big_m), (Some(3), Some(3)));
        assert_eq!(c.params["budget"], "100");
        let c = parse(&["min-distance", "--n", "8", "--thresholds", "0.5,0.75"]);
        assert_eq!(c.params["thresholds"], "0.5,0.75");
    }

    #[test]
    fn unknown_params_are_reported() {
        let map = BTreeMap::from([("a".to_string(), "1".to_string()), ("b".to_string(), "x".to_string())]);
        let mut p = Params::new(&map);
        assert_eq!(p.get::<u32>("a").unwrap(), Some(1));
        assert!(p.finish().is_err());
        let mut p = Params::new(&map);
        assert!(p.get::<u32>("b").is_err());
    }
}
