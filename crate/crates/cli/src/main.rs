use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use knn_banzhaf::apps::{
    data_selection_curve, inject_label_noise, label_flip_repair_curve, mislabel_detection_scores,
    point_removal_curve, Curve,
};
use knn_banzhaf::bench::run_bench;
use knn_banzhaf::io::{
    load_csv_dataset, write_curve_csv, write_json, write_report, write_values_csv,
};
use knn_banzhaf::run::{run_value, split_train_test, Algo, ValuationReport};
use knn_banzhaf::{Dataset, Error, Result};
use serde_json::json;

mod settings;

use settings::{Common, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "knn-banzhaf",
    version,
    about = "Banzhaf data valuation for kNN classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Value every training point (default engine: efficient).
    Value(Common),
    /// Exhaustive enumeration; refuses more than 20 points unless overridden.
    Oracle(Common),
    /// Sampling estimate.
    Mc {
        #[command(flatten)]
        common: Common,
        /// coalition or permutation
        #[arg(long)]
        method: Option<String>,
    },
    /// Single-threaded runtime scaling on synthetic 32-dimensional data.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Accuracy while removing the highest-valued points.
    Remove {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Accuracy while adding the highest-valued points to a random warm start.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
    },
    /// Inject label noise and score its detection from the values.
    Mislabel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        noise_rate: Option<f64>,
    },
    /// Inject label noise, then flip the lowest-valued labels back one by one.
    Flip {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        noise_rate: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": e.category(), "message": e.to_string() })
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Value(common) => value(common.resolve(Algo::Efficient)?),
        Command::Oracle(common) => {
            let mut s = common.resolve(Algo::Bruteforce)?;
            s.run.algo = Algo::Bruteforce;
            value(s)
        }
        Command::Mc { common, method } => {
            let mut s = common.resolve(Algo::McCoalition)?;
            let method: String = s.option("method", method, "coalition".to_string())?;
            s.run.algo = match method.as_str() {
                "coalition" => Algo::McCoalition,
                "permutation" => Algo::McPermutation,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown sampling method `{other}`"
                    )))
                }
            };
            value(s)
        }
        Command::Bench { common, sizes } => bench(common.resolve(Algo::Unweighted)?, sizes),
        Command::Remove { common, steps } => {
            let s = common.resolve(Algo::Unweighted)?;
            let (train, test) = datasets(&s)?;
            let report = run_value(&s.run, &train, &test)?;
            let steps = s.option("steps", steps, train.len() / 2)?;
            let curve = point_removal_curve(
                &train,
                &test,
                &report.values,
                &s.run.spec(),
                steps,
                s.run.execution(),
            )?;
            emit_curve(&s, &report, curve)
        }
        Command::Select {
            common,
            steps,
            warmup,
        } => {
            let s = common.resolve(Algo::Unweighted)?;
            let (train, test) = datasets(&s)?;
            let report = run_value(&s.run, &train, &test)?;
            let warmup = s.option("warmup", warmup, s.run.k.min(train.len()))?;
            let steps = s.option("steps", steps, train.len().saturating_sub(warmup))?;
            let curve = data_selection_curve(
                &train,
                &test,
                &report.values,
                &s.run.spec(),
                warmup,
                steps,
                s.run.seed,
                s.run.execution(),
            )?;
            emit_curve(&s, &report, curve)
        }
        Command::Mislabel { common, noise_rate } => {
            let s = common.resolve(Algo::Unweighted)?;
            let rate = s.option("noise-rate", noise_rate, 0.05)?;
            let (train, test) = datasets(&s)?;
            let (noisy, mask) = inject_label_noise(&train, rate, s.run.seed)?;
            let report = run_value(&s.run, &noisy, &test)?;
            let scores = mislabel_detection_scores(&report.values, &mask, rate);
            let summary = json!({
                "config": &report.config,
                "noise_rate": rate,
                "flipped": mask.flipped_ids.len(),
                "scores": scores,
                "timing": &report.timing,
            });
            match &s.out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    write_report(dir.join("report.json"), &report)?;
                    write_values_csv(dir.join("values.csv"), &report.values)?;
                    write_json(dir.join("detection.json"), &summary)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&summary)?),
            }
            Ok(())
        }
        Command::Flip {
            common,
            noise_rate,
            steps,
        } => {
            let s = common.resolve(Algo::Unweighted)?;
            let rate = s.option("noise-rate", noise_rate, 0.05)?;
            let (train, test) = datasets(&s)?;
            let (noisy, mask) = inject_label_noise(&train, rate, s.run.seed)?;
            let report = run_value(&s.run, &noisy, &test)?;
            let steps = s.option("steps", steps, mask.flipped_ids.len())?;
            let curve = label_flip_repair_curve(
                &noisy,
                &test,
                &report.values,
                &s.run.spec(),
                steps,
                s.run.execution(),
            )?;
            emit_curve(&s, &report, curve)
        }
    }
}

fn required(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required")))
}

fn datasets(s: &Settings) -> Result<(Dataset, Dataset)> {
    let data = load_csv_dataset(required(&s.data, "data")?)?;
    match &s.test_file {
        Some(path) => Ok((data, load_csv_dataset(path)?)),
        None => split_train_test(&data, s.run.test_fraction, s.run.seed),
    }
}

fn value(s: Settings) -> Result<()> {
    let (train, test) = datasets(&s)?;
    let report = run_value(&s.run, &train, &test)?;
    match &s.out {
        Some(dir) => write_outputs(dir, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn write_outputs(dir: &Path, report: &ValuationReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_report(dir.join("report.json"), report)?;
    write_values_csv(dir.join("values.csv"), &report.values)
}

fn emit_curve(s: &Settings, report: &ValuationReport, curve: Curve) -> Result<()> {
    let curve = Curve {
        metadata: knn_banzhaf::apps::CurveMeta {
            seed: Some(s.run.seed),
            ..curve.metadata
        },
        ..curve
    }
    .with_algorithm(s.run.algo.name());
    match &s.out {
        Some(dir) => {
            write_outputs(dir, report)?;
            write_curve_csv(dir.join("curve.csv"), &curve)?;
            write_json(dir.join("curve.json"), &curve)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&curve)?);
            Ok(())
        }
    }
}

fn bench(mut s: Settings, sizes: Vec<usize>) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("--sizes is required".into()));
    }
    s.run.threads = 1;
    let table = run_bench(&s.run, &sizes)?;
    let summary = json!({ "config": &s.run, "table": &table });
    match &s.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("bench.csv"), table.to_csv())?;
            write_json(dir.join("bench.json"), &summary)?;
        }
        None => print!("{}", table.to_csv()),
    }
    match table.slope {
        Some(slope) => eprintln!("log-log slope: {slope:.3}"),
        None => eprintln!("log-log slope: n/a"),
    }
    Ok(())
}
