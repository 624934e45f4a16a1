//! Experiment rows and their CSV/JSON encodings.

use serde::Serialize;
use std::io::Write;

/// One estimator run on one sampled instance.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub p: f64,
    pub sigma: f64,
    /// Derived per-trial seed actually used for the instance.
    pub seed: u64,
    pub trial: usize,
    pub method: &'static str,
    pub loss: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub wall_ms: f64,
    /// `sigma^2 / (2p)`.
    pub theory_risk: f64,
}

pub const CSV_HEADER: &str =
    "n,p,sigma,seed,trial,method,loss,iterations,residual,converged,wall_ms,theory_risk";

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.p,
            self.sigma,
            self.seed,
            self.trial,
            self.method,
            self.loss,
            self.iterations,
            self.residual,
            self.converged,
            self.wall_ms,
            self.theory_risk
        )
    }
}

/// Mean, standard error of the mean, and mean/target ratio of a grid cell.
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub ratio: Option<f64>,
}

pub fn summarize(losses: &[f64], theory_risk: f64) -> Summary {
    let t = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / t;
    let std_error = if losses.len() > 1 {
        let var = losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (t - 1.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    let ratio = (theory_risk > 0.0).then(|| mean / theory_risk);
    Summary {
        mean,
        std_error,
        ratio,
    }
}

/// Writes to the path when given, stdout otherwise.
pub fn write_output(out: Option<&std::path::Path>, body: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())
        }
    }
}
