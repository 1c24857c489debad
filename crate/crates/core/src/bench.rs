//! Runtime scaling harness: time one engine end to end on synthetic data of
//! growing size and fit a log-log slope.

use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mc::{banzhaf_mc_coalition, banzhaf_mc_permutation, McMethod};
use crate::model::{prepare_game, Dataset, GameSpec};
use crate::run::{exact_values, Algo, RunConfig};

/// Feature dimension of the synthetic benchmark data.
pub const BENCH_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchStatus {
    Completed,
    TimedOut,
    /// Not attempted because a smaller size already timed out.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub seconds: Option<f64>,
    pub status: BenchStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub algo: Algo,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln seconds` against `ln n` over completed rows.
    pub slope: Option<f64>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,seconds,status\n");
        for r in &self.rows {
            let secs = r.seconds.map_or(String::new(), |s| format!("{s:.6}"));
            let status = match r.status {
                BenchStatus::Completed => "completed",
                BenchStatus::TimedOut => "timed-out",
                BenchStatus::Skipped => "skipped",
            };
            out.push_str(&format!("{},{secs},{status}\n", r.n));
        }
        out
    }
}

/// `n` standard Gaussian points in [`BENCH_DIM`] dimensions with fair-coin
/// binary labels (both labels forced present), plus one test point.
pub fn synthetic_instance(n: usize, seed: u64) -> Result<(Dataset, Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..BENCH_DIM).map(|_| StandardNormal.sample(rng)).collect()
    };
    let features: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng)).collect();
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
    if n >= 2 {
        labels[0] = 0;
        labels[1] = 1;
    }
    let test = point(&mut rng);
    let test_label = rng.random_range(0..2);
    Ok((Dataset::from_rows(features, labels)?, test, test_label))
}

/// Game preparation plus one engine call, single-threaded.
pub fn time_once(config: &RunConfig, n: usize) -> Result<f64> {
    let (train, test, label) = synthetic_instance(n, config.seed)?;
    let spec: GameSpec = config.spec();
    spec.validate_for(n)?;
    let exec = Execution::Sequential;
    let start = Instant::now();
    let game = prepare_game(&train, &test, label, &spec)?;
    match config.algo.mc_method() {
        None => {
            exact_values(&game, config.algo, exec, &config.enumeration(exec))?;
        }
        Some(McMethod::Coalition) => {
            banzhaf_mc_coalition(&game, config.samples, config.seed, exec)?;
        }
        Some(McMethod::Permutation) => {
            banzhaf_mc_permutation(&game, config.samples, config.seed, exec)?;
        }
    }
    Ok(start.elapsed().as_secs_f64())
}

/// Fastest of up to five runs, stopping once a second has been spent, so
/// short sizes are not dominated by one-off scheduling noise.
pub fn time_best(config: &RunConfig, n: usize) -> Result<f64> {
    let mut best = time_once(config, n)?;
    let mut spent = best;
    for _ in 1..5 {
        if spent >= 1.0 {
            break;
        }
        let t = time_once(config, n)?;
        best = best.min(t);
        spent += t;
    }
    Ok(best)
}

/// Times `config.algo` at each size. A run over `config.budget_secs` is
/// abandoned and marked timed out; larger sizes are then skipped.
pub fn run_bench(config: &RunConfig, sizes: &[usize]) -> Result<BenchTable> {
    config.validate()?;
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sizes must be strictly ascending".into(),
        ));
    }
    let budget = Duration::from_secs_f64(config.budget_secs);
    let mut rows = Vec::with_capacity(sizes.len());
    let mut exhausted = false;
    for &n in sizes {
        if exhausted {
            rows.push(BenchRow {
                n,
                seconds: None,
                status: BenchStatus::Skipped,
            });
            continue;
        }
        let (tx, rx) = mpsc::channel();
        let job = config.clone();
        // Detached: a timed-out engine cannot be interrupted, only abandoned.
        thread::spawn(move || {
            let _ = tx.send(time_best(&job, n));
        });
        match rx.recv_timeout(budget) {
            Ok(result) => rows.push(BenchRow {
                n,
                seconds: Some(result?),
                status: BenchStatus::Completed,
            }),
            Err(_) => {
                exhausted = true;
                rows.push(BenchRow {
                    n,
                    seconds: None,
                    status: BenchStatus::TimedOut,
                });
            }
        }
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.seconds.map(|s| ((r.n as f64).ln(), s.max(1e-9).ln())))
        .collect();
    Ok(BenchTable {
        algo: config.algo,
        rows,
        slope: log_log_slope(&points),
    })
}

/// Ordinary least-squares slope; `None` with fewer than two distinct x.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
