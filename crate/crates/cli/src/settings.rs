//! Merges defaults, an optional `key = value` config file and command-line
//! flags, in that order of increasing priority.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use knn_banzhaf::io::load_config_file;
use knn_banzhaf::run::{Algo, RunConfig};
use knn_banzhaf::{DistanceMetric, Error, Result, WeightScheme};

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Training data (CSV with a `label` column).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Test data; without it a seeded share of --data is held out.
    #[arg(long)]
    pub test_file: Option<PathBuf>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// bruteforce, standard, efficient, unweighted, mc-coalition, mc-permutation
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub bits: Option<u32>,
    /// uniform, inverse-distance[:epsilon] or rbf[:sigma]
    #[arg(long)]
    pub weights: Option<String>,
    /// euclidean, manhattan or cosine
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub budget_secs: Option<f64>,
    /// Raise the brute-force size cap (at most 30).
    #[arg(long)]
    pub cap_override: Option<usize>,
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("invalid value `{value}` for `{key}`"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

pub fn parse_weights(value: &str) -> Result<WeightScheme> {
    let (name, param) = match value.split_once(':') {
        Some((n, p)) => (n, Some(parse::<f64>("weights", p)?)),
        None => (value, None),
    };
    match name {
        "uniform" if param.is_none() => Ok(WeightScheme::Uniform),
        "inverse-distance" => Ok(WeightScheme::InverseDistance {
            epsilon: param.unwrap_or(1e-3),
        }),
        "rbf" => Ok(WeightScheme::Rbf {
            sigma: param.unwrap_or(1.0),
        }),
        _ => Err(bad("weights", value)),
    }
}

pub fn parse_metric(value: &str) -> Result<DistanceMetric> {
    match value {
        "euclidean" => Ok(DistanceMetric::Euclidean),
        "manhattan" => Ok(DistanceMetric::Manhattan),
        "cosine" => Ok(DistanceMetric::Cosine),
        _ => Err(bad("metric", value)),
    }
}

/// Final settings of one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub run: RunConfig,
    pub data: Option<PathBuf>,
    pub test_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Subcommand-specific keys from the config file, for their own lookups.
    pub extra: BTreeMap<String, String>,
}

impl Common {
    pub fn resolve(&self, default_algo: Algo) -> Result<Settings> {
        let mut file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => BTreeMap::new(),
        };
        let mut take = |key: &str, cli: Option<String>| cli.or_else(|| file.remove(key));
        let mut run = RunConfig {
            algo: default_algo,
            ..RunConfig::default()
        };
        if let Some(v) = take("algo", self.algo.clone()) {
            run.algo = v.parse()?;
        }
        if let Some(v) = take("k", self.k.map(|x| x.to_string())) {
            run.k = parse("k", &v)?;
        }
        if let Some(v) = take("bits", self.bits.map(|x| x.to_string())) {
            run.bits = parse("bits", &v)?;
        }
        if let Some(v) = take("weights", self.weights.clone()) {
            run.weight_scheme = parse_weights(&v)?;
        }
        if let Some(v) = take("metric", self.metric.clone()) {
            run.distance_metric = parse_metric(&v)?;
        }
        if let Some(v) = take("samples", self.samples.map(|x| x.to_string())) {
            run.samples = parse("samples", &v)?;
        }
        if let Some(v) = take("seed", self.seed.map(|x| x.to_string())) {
            run.seed = parse("seed", &v)?;
        }
        if let Some(v) = take("test-fraction", self.test_fraction.map(|x| x.to_string())) {
            run.test_fraction = parse("test-fraction", &v)?;
        }
        if let Some(v) = take("threads", self.threads.map(|x| x.to_string())) {
            run.threads = parse("threads", &v)?;
        }
        if let Some(v) = take("budget-secs", self.budget_secs.map(|x| x.to_string())) {
            run.budget_secs = parse("budget-secs", &v)?;
        }
        if let Some(v) = take("cap-override", self.cap_override.map(|x| x.to_string())) {
            run.cap_override = Some(parse("cap-override", &v)?);
        }
        let path = |key: &str, cli: &Option<PathBuf>, file: &mut BTreeMap<String, String>| {
            cli.clone().or_else(|| file.remove(key).map(PathBuf::from))
        };
        let data = path("data", &self.data, &mut file);
        let test_file = path("test-file", &self.test_file, &mut file);
        let out = path("out", &self.out, &mut file);
        Ok(Settings {
            run,
            data,
            test_file,
            out,
            extra: file,
        })
    }
}

impl Settings {
    /// A subcommand option: the flag if given, else the config file, else
    /// `default`.
    pub fn option<T: std::str::FromStr>(&self, key: &str, cli: Option<T>, default: T) -> Result<T> {
        match (cli, self.extra.get(key)) {
            (Some(v), _) => Ok(v),
            (None, Some(v)) => parse(key, v),
            (None, None) => Ok(default),
        }
    }
}
