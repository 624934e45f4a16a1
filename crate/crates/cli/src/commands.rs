//! Implementations of the four subcommands.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use phasync_core::{
    derive_seed, fisher_blocks, gpm, gpm_step, grid_mle, jacobi_eig, leading_eigenvector,
    mc_fisher, mix64, mle, mle_objective, prior_information, sample_observation, sample_truth,
    spectral_init, trace_j_prior_integral, EstimateResult, GpmConfig, GridSpec, HermitianMatrix,
    ModelParams, Observation, PhaseVector, PriorDensity, TruthMode,
};

use crate::record::{summarize, write_output, ExperimentRecord, CSV_HEADER};
use crate::{ConvergenceArgs, Format, LowerboundArgs, Method, OracleCheckArgs, SimulateArgs};

/// Stream tag for per-trial eigensolver start vectors.
const STREAM_EIG: u64 = 3;

const EIG_TOL: f64 = 1e-10;
const EIG_MAX_ITER: usize = 2000;

type CommandResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

#[cfg(feature = "parallel")]
fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

fn linf(a: &PhaseVector, b: &PhaseVector) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn run_method(
    method: Method,
    obs: &Observation,
    trial_seed: u64,
    config: &GpmConfig,
) -> phasync_core::Result<(f64, EstimateResult, PhaseVector)> {
    match method {
        Method::Spectral => {
            let start = Instant::now();
            let z0 = spectral_init(
                obs,
                EIG_TOL,
                EIG_MAX_ITER,
                derive_seed(trial_seed, STREAM_EIG, 0),
            )?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            let image = gpm_step(obs, &z0)?;
            let result = EstimateResult {
                residual: linf(&image, &z0),
                estimate: z0.clone(),
                iterations: 0,
                converged: true,
                trajectory: None,
            };
            Ok((wall, result, z0))
        }
        Method::Gpm => {
            let start = Instant::now();
            let z0 = spectral_init(
                obs,
                EIG_TOL,
                EIG_MAX_ITER,
                derive_seed(trial_seed, STREAM_EIG, 0),
            )?;
            let result = gpm(obs, &z0, config, None)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            let estimate = result.estimate.clone();
            Ok((wall, result, estimate))
        }
        Method::Mle => {
            let start = Instant::now();
            let result = mle(obs, config, None)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            let estimate = result.estimate.clone();
            Ok((wall, result, estimate))
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> CommandResult {
    if args.trials == 0 {
        return Ok(usage_error("--trials must be >= 1"));
    }
    if args.method.is_empty() {
        return Ok(usage_error("--method must name at least one estimator"));
    }
    for &n in &args.n {
        if n < 2 {
            return Ok(usage_error(&format!("--n must be >= 2, got {n}")));
        }
    }
    for &p in &args.p {
        if p.is_nan() || p <= 0.0 || p > 1.0 {
            return Ok(usage_error(&format!("--p must be in (0, 1], got {p}")));
        }
    }
    for &sigma in &args.sigma {
        if sigma.is_nan() || sigma < 0.0 {
            return Ok(usage_error(&format!("--sigma must be >= 0, got {sigma}")));
        }
    }

    let config = GpmConfig {
        max_iters: args.max_iters,
        fixed_point_tol: args.tol,
        track_trajectory: false,
    };

    let mut records: Vec<ExperimentRecord> = Vec::new();
    let mut grid_index = 0u64;
    // Grid cells in document order: n outermost, then p, then sigma.
    for &n in &args.n {
        for &p in &args.p {
            for &sigma in &args.sigma {
                let theory_risk = sigma * sigma / (2.0 * p);
                let per_trial: Vec<phasync_core::Result<Vec<ExperimentRecord>>> =
                    map_indexed(args.trials, |trial| {
                        let trial_seed = derive_seed(args.seed, grid_index, trial as u64);
                        let params = ModelParams::new(n, p, sigma, trial_seed)?;
                        let truth = sample_truth(&params, TruthMode::UniformRandom)?;
                        let obs = sample_observation(&truth, &params)?;
                        args.method
                            .iter()
                            .map(|&method| {
                                let (wall_ms, result, estimate) =
                                    run_method(method, &obs, trial_seed, &config)?;
                                Ok(ExperimentRecord {
                                    n,
                                    p,
                                    sigma,
                                    seed: trial_seed,
                                    trial,
                                    method: method.name(),
                                    loss: phasync_core::loss(&estimate, &truth)?,
                                    iterations: result.iterations,
                                    residual: result.residual,
                                    converged: result.converged,
                                    wall_ms,
                                    theory_risk,
                                })
                            })
                            .collect()
                    });
                let cell_start = records.len();
                for trial_records in per_trial {
                    records.extend(trial_records?);
                }
                for &method in &args.method {
                    let losses: Vec<f64> = records[cell_start..]
                        .iter()
                        .filter(|r| r.method == method.name())
                        .map(|r| r.loss)
                        .collect();
                    let s = summarize(&losses, theory_risk);
                    let ratio = s.ratio.map_or("na".to_string(), |r| format!("{r:.4}"));
                    eprintln!(
                        "grid[{grid_index}] n={n} p={p} sigma={sigma} method={}: mean_loss={:.6e} std_err={:.3e} mean/theory={ratio}",
                        method.name(),
                        s.mean,
                        s.std_error,
                    );
                }
                grid_index += 1;
            }
        }
    }

    let body = match args.format {
        Format::Csv => {
            let mut out = String::with_capacity(64 * (records.len() + 1));
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &records {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(&records)?;
            out.push('\n');
            out
        }
    };
    write_output(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

pub fn convergence(args: &ConvergenceArgs) -> CommandResult {
    let params = match ModelParams::new(args.n, args.p, args.sigma, args.seed) {
        Ok(p) => p,
        Err(e) => return Ok(usage_error(&e.to_string())),
    };
    let truth = sample_truth(&params, TruthMode::UniformRandom)?;
    let obs = sample_observation(&truth, &params)?;
    let z0 = spectral_init(
        &obs,
        EIG_TOL,
        EIG_MAX_ITER,
        derive_seed(args.seed, STREAM_EIG, 0),
    )?;
    let config = GpmConfig {
        max_iters: args.max_iters,
        fixed_point_tol: args.tol,
        track_trajectory: true,
    };
    let result = gpm(&obs, &z0, &config, Some(&truth))?;
    let trajectory = result
        .trajectory
        .expect("trajectory requested with known truth");

    let body = match args.format {
        Format::Csv => {
            let mut out = String::from("t,loss\n");
            for (t, l) in trajectory.iter().enumerate() {
                out.push_str(&format!("{t},{l}\n"));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Point {
                t: usize,
                loss: f64,
            }
            let points: Vec<Point> = trajectory
                .iter()
                .enumerate()
                .map(|(t, &loss)| Point { t, loss })
                .collect();
            let mut out = serde_json::to_string_pretty(&points)?;
            out.push('\n');
            out
        }
    };
    eprintln!(
        "n={} p={} sigma={} seed={}: iterations={} residual={:.3e} converged={} theory_risk={}",
        args.n,
        args.p,
        args.sigma,
        args.seed,
        result.iterations,
        result.residual,
        result.converged,
        args.sigma * args.sigma / (2.0 * args.p),
    );
    write_output(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LowerboundReport {
    pair_bound: f64,
    aggregate_bound: f64,
    closed_form_target: f64,
    ratio: f64,
    quad_points: usize,
    fd_step: f64,
}

pub fn lowerbound(args: &LowerboundArgs) -> CommandResult {
    if args.sigma == 0.0 {
        return Ok(usage_error(
            "sigma = 0 is noiseless: information is infinite and the bound degenerates to the trivial value 0",
        ));
    }
    let params = match ModelParams::new(args.n, args.p, args.sigma, 0) {
        Ok(p) => p,
        Err(e) => return Ok(usage_error(&e.to_string())),
    };
    let prior = PriorDensity::mollifier(args.quad_points);
    let main = match trace_j_prior_integral(&params, &prior, args.quad_points) {
        Ok(v) => v,
        Err(e) => return Ok(usage_error(&e.to_string())),
    };
    let info = match prior_information(&prior, &params, args.quad_points, args.fd_step) {
        Ok(v) => v,
        Err(e) => return Ok(usage_error(&e.to_string())),
    };
    let pair_bound = main - info;
    let n = args.n as f64;
    let aggregate_bound = n * (n - 1.0) / (2.0 * n) * pair_bound;
    let closed_form_target = args.sigma * args.sigma / (2.0 * args.p);
    if pair_bound < 0.0 {
        eprintln!(
            "warning: prior information dominates (pair bound {pair_bound:.3e} < 0); the asymptotic regime sigma^2 << np does not hold here"
        );
    }
    let report = LowerboundReport {
        pair_bound,
        aggregate_bound,
        closed_form_target,
        ratio: aggregate_bound / closed_form_target,
        quad_points: args.quad_points,
        fd_step: args.fd_step,
    };
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    write_output(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

struct CheckOutcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Uniform f64 in [0, 1) from a counter, via the 64-bit mixer.
fn unit_f64(seed: u64, counter: u64) -> f64 {
    (mix64(seed.wrapping_add(counter.wrapping_mul(0x9e37_79b9_7f4a_7c15))) >> 11) as f64
        / (1u64 << 53) as f64
}

fn check_grid(seed: u64, inject_fault: bool) -> CheckOutcome {
    let run = || -> phasync_core::Result<(f64, f64, f64)> {
        let params = ModelParams::new(4, 1.0, 0.1, derive_seed(seed, 0xA11CE, 0))?;
        let truth = sample_truth(&params, TruthMode::UniformRandom)?;
        let obs = sample_observation(&truth, &params)?;

        let mut z = spectral_init(&obs, EIG_TOL, EIG_MAX_ITER, 1)?;
        let mut residual = f64::INFINITY;
        for _ in 0..200 {
            let mut next = gpm_step(&obs, &z)?;
            if inject_fault {
                // Simulated sign bug in the iteration step.
                let mut entries = next.entries().to_vec();
                entries[0] = -entries[0];
                next = PhaseVector::from_entries(entries)?;
            }
            residual = linf(&next, &z);
            z = next;
            if residual <= 1e-12 {
                break;
            }
        }
        let objective = mle_objective(&obs, &z)?;
        let spec = GridSpec {
            resolution: 400,
            gauge_fix: true,
        };
        let (_, grid_objective) = grid_mle(&obs, &spec)?;
        Ok((objective, grid_objective, residual))
    };
    match run() {
        Ok((objective, grid_objective, residual)) => {
            let slack = 1e-6 * 16.0;
            let passed = objective >= grid_objective - slack && residual <= 1e-10;
            CheckOutcome {
                name: "grid",
                passed,
                detail: format!(
                    "fixed-point objective {objective:.9} vs grid optimum {grid_objective:.9} (slack {slack:.1e}), residual {residual:.2e}"
                ),
            }
        }
        Err(e) => CheckOutcome {
            name: "grid",
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn check_jacobi(seed: u64) -> CheckOutcome {
    let run = || -> phasync_core::Result<(f64, f64, f64)> {
        let base = derive_seed(seed, 0x1AC0B1, 0);
        let mut counter = 0u64;
        let mut draw = || {
            counter += 1;
            unit_f64(base, counter) - 0.5
        };
        let m = HermitianMatrix::from_upper(8, |j, k| {
            if j == k {
                Complex64::new(draw(), 0.0)
            } else {
                Complex64::new(draw(), draw())
            }
        });
        let power = leading_eigenvector(&m, 1e-14, 5000, 7)?;
        let pairs = jacobi_eig(&m, 1e-11)?;
        let value_gap = (power.value - pairs[0].value).abs();
        let overlap: Complex64 = power
            .vector
            .iter()
            .zip(&pairs[0].vector)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let trace: f64 = (0..8).map(|j| m.get(j, j).re).sum();
        let eig_sum: f64 = pairs.iter().map(|p| p.value).sum();
        Ok((value_gap, 1.0 - overlap.norm(), (trace - eig_sum).abs()))
    };
    match run() {
        Ok((value_gap, vector_gap, trace_gap)) => CheckOutcome {
            name: "jacobi",
            passed: value_gap <= 1e-9 && vector_gap <= 1e-6 && trace_gap <= 1e-10,
            detail: format!(
                "eigenvalue gap {value_gap:.2e} (tol 1e-9), vector gap {vector_gap:.2e} (tol 1e-6), trace identity {trace_gap:.2e} (tol 1e-10)"
            ),
        },
        Err(e) => CheckOutcome {
            name: "jacobi",
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn check_fisher(seed: u64) -> CheckOutcome {
    let run = || -> phasync_core::Result<(f64, f64)> {
        let params = ModelParams::new(100, 1.0, 1.0, 0)?;
        let est = mc_fisher(0.5, 0.5, &params, 100_000, derive_seed(seed, 0xF15E, 0))?;
        let fc = fisher_blocks(0.5, 0.5, &params)?;
        let want = fc.b1.add(&fc.b2);
        let rel = |d: usize| (est.0[d][d] - want.0[d][d]).abs() / want.0[d][d];
        Ok((rel(0), rel(1)))
    };
    match run() {
        Ok((rel_a, rel_c)) => CheckOutcome {
            name: "fisher",
            passed: rel_a <= 0.05 && rel_c <= 0.05,
            detail: format!(
                "diagonal relative errors {rel_a:.4} / {rel_c:.4} vs closed form (tol 0.05)"
            ),
        },
        Err(e) => CheckOutcome {
            name: "fisher",
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn oracle_check(args: &OracleCheckArgs) -> CommandResult {
    const ALL: [&str; 3] = ["grid", "jacobi", "fisher"];
    let selected: Vec<String> = match &args.checks {
        Some(list) => {
            for name in list {
                if !ALL.contains(&name.as_str()) {
                    return Ok(usage_error(&format!(
                        "unknown check '{name}'; available: grid, jacobi, fisher"
                    )));
                }
            }
            list.clone()
        }
        None => ALL.iter().map(|s| s.to_string()).collect(),
    };

    let mut all_passed = true;
    for name in &selected {
        let outcome = match name.as_str() {
            "grid" => check_grid(args.seed, args.inject_fault),
            "jacobi" => check_jacobi(args.seed),
            "fisher" => check_fisher(args.seed),
            _ => unreachable!(),
        };
        println!(
            "check {:<7} {}  {}",
            outcome.name,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        all_passed &= outcome.passed;
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
