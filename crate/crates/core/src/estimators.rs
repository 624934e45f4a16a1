//! Spectral initialization, the power-iteration map, the iterative driver,
//! and the MLE characterized as the map's fixed point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::leading_eigenvector;
use crate::model::{loss, Observation, PhaseVector};
use crate::par;
use crate::rng::{derive_seed, normal_pair, rng_from};

/// Absolute threshold below which an entry is treated as the map's exact
/// zero branch; a fully masked row produces an exact 0.0, anything this
/// small otherwise is rounding residue.
const ZERO_BRANCH: f64 = 1e-14;

/// Eigensolver defaults used by [`mle`].
const MLE_EIG_TOL: f64 = 1e-12;
const MLE_EIG_MAX_ITER: usize = 1000;
const MLE_EIG_SEED: u64 = 0x70686173_796e6300;

/// Driver configuration.
#[derive(Debug, Clone, Copy)]
pub struct GpmConfig {
    pub max_iters: usize,
    /// Threshold on the sup-norm fixed-point residual `||f(z) - z||_inf`.
    pub fixed_point_tol: f64,
    pub track_trajectory: bool,
}

impl Default for GpmConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            fixed_point_tol: 1e-12,
            track_trajectory: false,
        }
    }
}

impl GpmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.fixed_point_tol.is_nan() || self.fixed_point_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "fixed_point_tol must be > 0, got {}",
                self.fixed_point_tol
            )));
        }
        Ok(())
    }
}

/// Estimator output with its fixed-point certificate.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub estimate: PhaseVector,
    /// Applications of the iteration map actually run.
    pub iterations: usize,
    /// `||f(estimate) - estimate||_inf` at exit.
    pub residual: f64,
    pub converged: bool,
    /// Per-iterate loss against the supplied truth, including the start.
    pub trajectory: Option<Vec<f64>>,
}

/// Entrywise phases of `u`, with unit fallback for (numerically) zero
/// entries.
pub(crate) fn unit_phases(u: &[Complex64]) -> PhaseVector {
    PhaseVector::from_unit_entries(
        u.iter()
            .map(|x| {
                let r = x.norm();
                if r > ZERO_BRANCH {
                    x / r
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect(),
    )
}

/// Initialization from the leading eigenvector of the masked data matrix.
pub fn spectral_init(
    obs: &Observation,
    eig_tol: f64,
    eig_max_iter: usize,
    seed: u64,
) -> Result<PhaseVector> {
    let pair = leading_eigenvector(&obs.data, eig_tol, eig_max_iter, seed)?;
    Ok(unit_phases(&pair.vector))
}

/// One step of the iteration: multiply by the masked data, then project
/// each entry back to the unit circle (zero entries map to 1).
pub fn gpm_step(obs: &Observation, z: &PhaseVector) -> Result<PhaseVector> {
    let w = obs.data.matvec(z.entries())?;
    Ok(unit_phases(&w))
}

fn linf_distance(a: &PhaseVector, b: &PhaseVector) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Iterates the map from `z0` until the successive change drops below the
/// fixed-point tolerance or `max_iters` is reached.
///
/// On a converged exit the returned estimate is the iterate whose image
/// was just computed, so `residual` is exactly `||f(estimate) -
/// estimate||_inf` with no extra work. On a max-iteration exit the last
/// iterate is returned and its residual is recomputed with one more
/// application of the map.
pub fn gpm(
    obs: &Observation,
    z0: &PhaseVector,
    config: &GpmConfig,
    truth: Option<&PhaseVector>,
) -> Result<EstimateResult> {
    config.validate()?;
    let tracked = truth.filter(|_| config.track_trajectory);
    let mut trajectory = match tracked {
        Some(t) => Some(vec![loss(z0, t)?]),
        None => None,
    };

    let mut z = z0.clone();
    for it in 1..=config.max_iters {
        let z_next = gpm_step(obs, &z)?;
        if let (Some(traj), Some(t)) = (trajectory.as_mut(), tracked) {
            traj.push(loss(&z_next, t)?);
        }
        let delta = linf_distance(&z_next, &z);
        if delta <= config.fixed_point_tol {
            return Ok(EstimateResult {
                estimate: z,
                iterations: it,
                residual: delta,
                converged: true,
                trajectory,
            });
        }
        z = z_next;
    }

    let image = gpm_step(obs, &z)?;
    let residual = linf_distance(&image, &z);
    Ok(EstimateResult {
        converged: residual <= config.fixed_point_tol,
        estimate: z,
        iterations: config.max_iters,
        residual,
        trajectory,
    })
}

/// The MLE computed as the fixed point of the iteration map started from
/// the spectral initialization.
///
/// The fixed-point residual in the result is the certificate; convergence
/// to the global optimum is only guaranteed in the benign noise regime,
/// elsewhere the output is a stationary point.
pub fn mle(
    obs: &Observation,
    config: &GpmConfig,
    truth: Option<&PhaseVector>,
) -> Result<EstimateResult> {
    let z0 = spectral_init(obs, MLE_EIG_TOL, MLE_EIG_MAX_ITER, MLE_EIG_SEED)?;
    gpm(obs, &z0, config, truth)
}

/// The quadratic objective `Re(z^H (A o Y) z)`.
pub fn mle_objective(obs: &Observation, z: &PhaseVector) -> Result<f64> {
    let w = obs.data.matvec(z.entries())?;
    let q: Complex64 = z
        .entries()
        .iter()
        .zip(&w)
        .map(|(zj, wj)| zj.conj() * wj)
        .sum();
    debug_assert!(
        q.im.abs() < 1e-9 * z.len() as f64,
        "Hermitian form has imaginary part {}",
        q.im
    );
    Ok(q.re)
}

/// Empirical one-step contraction probe.
///
/// For each trial, perturbs the truth's phases with seeded Gaussian noise
/// rescaled until `loss(z, truth)` lands in `[0.9*gamma*n, 1.1*gamma*n]`,
/// applies one iteration step, and records the loss before and after.
pub fn contraction_probe(
    obs: &Observation,
    truth: &PhaseVector,
    corruption_level: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if corruption_level.is_nan() || corruption_level <= 0.0 || corruption_level >= 1.0 {
        return Err(Error::OutOfDomain {
            name: "corruption_level",
            value: corruption_level,
            domain: "(0, 1)",
        });
    }
    let n = truth.len();
    let target = corruption_level * n as f64;
    par::map_indexed(trials, |trial| -> Result<(f64, f64)> {
        let mut rng = rng_from(derive_seed(seed, trial as u64, 0));
        let eps: Vec<f64> = (0..n)
            .map(|_| {
                let (g, _) = normal_pair(&mut rng);
                g
            })
            .collect();
        let mut scale = corruption_level.sqrt();
        let mut corrupted = None;
        for _ in 0..100 {
            let z = PhaseVector::from_unit_entries(
                truth
                    .entries()
                    .iter()
                    .zip(&eps)
                    .map(|(t, e)| t * Complex64::from_polar(1.0, scale * e))
                    .collect(),
            );
            let l = loss(&z, truth)?;
            if l >= 0.9 * target && l <= 1.1 * target {
                corrupted = Some((z, l));
                break;
            }
            scale *= if l > 0.0 { (target / l).sqrt() } else { 2.0 };
        }
        let (z, before) = corrupted.ok_or(Error::CorruptionUnreachable { attempts: 100 })?;
        let after = loss(&gpm_step(obs, &z)?, truth)?;
        Ok((before, after))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_observation, sample_truth, ModelParams, TruthMode};
    use crate::oracle::{grid_mle, jacobi_eig, GridSpec};

    fn instance(n: usize, p: f64, sigma: f64, seed: u64) -> (PhaseVector, Observation) {
        let params = ModelParams::new(n, p, sigma, seed).unwrap();
        let truth = sample_truth(&params, TruthMode::UniformRandom).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        (truth, obs)
    }

    #[test]
    fn unit_phases_zero_entry_falls_back_to_one() {
        let u = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 4.0),
            Complex64::new(0.0, 5e-15),
        ];
        let z = unit_phases(&u);
        assert_eq!(z.entries()[0], Complex64::new(1.0, 0.0));
        assert!((z.entries()[1] - Complex64::new(0.6, 0.8)).norm() < 1e-15);
        assert_eq!(z.entries()[2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn spectral_init_noiseless_is_near_exact() {
        let (truth, obs) = instance(16, 1.0, 0.0, 2024);
        let z0 = spectral_init(&obs, 1e-14, 4000, 7).unwrap();
        let l = loss(&z0, &truth).unwrap();
        assert!(l < 1e-8, "spectral loss {l}");
        // Cross-check the eigensolver against the dense oracle.
        let pairs = jacobi_eig(&obs.data, 1e-11).unwrap();
        assert!((pairs[0].value - 15.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_init_rejects_zero_data() {
        let params = ModelParams::new(8, 1.0, 0.0, 5).unwrap();
        let truth = sample_truth(&params, TruthMode::UniformRandom).unwrap();
        let mut obs = sample_observation(&truth, &params).unwrap();
        obs.data = crate::hermitian::HermitianMatrix::zeros(8);
        assert!(matches!(
            spectral_init(&obs, 1e-10, 100, 0),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn spectral_init_bound_calibrated() {
        // Pilot-calibrated constant for the initialization error at
        // moderate noise: loss * p / (sigma^2 + 1) stays below 40.
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let params = ModelParams::new(500, 1.0, 2.0, 9000 + seed).unwrap();
            let truth = sample_truth(&params, TruthMode::UniformRandom).unwrap();
            let obs = sample_observation(&truth, &params).unwrap();
            let z0 = spectral_init(&obs, 1e-10, 1000, 1).unwrap();
            let l = loss(&z0, &truth).unwrap();
            worst = worst.max(l * params.p / (params.sigma * params.sigma + 1.0));
        }
        assert!(worst <= 40.0, "normalized spectral loss {worst}");
    }

    // Two inequalities the analysis of the projection rests on: the
    // distance of x/|x| from 1 is controlled by the Im/Re ratio when
    // Re(x) > 0, and projecting onto the circle at most doubles the
    // distance to any unit target.
    #[test]
    fn circle_projection_inequalities() {
        let mut rng = crate::rng::rng_from(424);
        for _ in 0..10_000 {
            let x = Complex64::new(
                rand::Rng::random::<f64>(&mut rng) + 1e-3,
                4.0 * (rand::Rng::random::<f64>(&mut rng) - 0.5),
            );
            let proj = x / x.norm();
            assert!(
                (proj - 1.0).norm() <= (x.im / x.re).abs() + 1e-15,
                "Im/Re bound failed at {x}"
            );

            let y = Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * rand::Rng::random::<f64>(&mut rng),
            );
            assert!(
                (proj - y).norm() <= 2.0 * (x - y).norm() + 1e-15,
                "projection bound failed at x={x}, y={y}"
            );
        }
    }

    #[test]
    fn gpm_step_fixes_truth_noiseless() {
        let params = ModelParams::new(12, 1.0, 0.0, 3).unwrap();
        let truth = PhaseVector::ones(12);
        let obs = sample_observation(&truth, &params).unwrap();
        let stepped = gpm_step(&obs, &truth).unwrap();
        assert_eq!(stepped, truth);

        let (truth, obs) = instance(12, 1.0, 0.0, 4);
        let stepped = gpm_step(&obs, &truth).unwrap();
        for (a, b) in stepped.entries().iter().zip(truth.entries()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn gpm_step_commutes_with_global_phase() {
        let (truth, obs) = instance(30, 0.8, 0.7, 5);
        let a = Complex64::from_polar(1.0, 1.234);
        let lhs = gpm_step(&obs, &truth.rotated(a)).unwrap();
        let rhs = gpm_step(&obs, &truth).unwrap().rotated(a);
        for (x, y) in lhs.entries().iter().zip(rhs.entries()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn gpm_step_zero_row_takes_unit_branch() {
        // Node 0 fully masked: its numerator is empty, output entry is 1.
        let n = 3;
        let truth = PhaseVector::random_uniform(n, 6);
        let params = ModelParams::new(n, 1.0, 0.0, 6).unwrap();
        let mut obs = sample_observation(&truth, &params).unwrap();
        for k in 1..n {
            obs.mask.set_pair(0, k, Complex64::new(0.0, 0.0));
            obs.data.set_pair(0, k, Complex64::new(0.0, 0.0));
        }
        let out = gpm_step(&obs, &truth).unwrap();
        assert_eq!(out.entries()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gpm_from_truth_converges_immediately() {
        let truth = PhaseVector::ones(20);
        let params = ModelParams::new(20, 1.0, 0.0, 8).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let result = gpm(&obs, &truth, &GpmConfig::default(), Some(&truth)).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.residual, 0.0);
        assert_eq!(loss(&result.estimate, &truth).unwrap(), 0.0);
    }

    #[test]
    fn gpm_noiseless_exactness_across_sizes() {
        for &n in &[4usize, 16, 64] {
            for seed in 0..3u64 {
                let (truth, obs) = instance(n, 1.0, 0.0, 100 + seed);
                let z0 = spectral_init(&obs, 1e-14, 4000, seed).unwrap();
                let cfg = GpmConfig {
                    max_iters: 50,
                    fixed_point_tol: 1e-13,
                    track_trajectory: false,
                };
                let result = gpm(&obs, &z0, &cfg, Some(&truth)).unwrap();
                let l = loss(&result.estimate, &truth).unwrap();
                assert!(l < 1e-20, "n={n} seed={seed}: loss {l}");
                assert!(result.converged);
            }
        }
    }

    #[test]
    fn gpm_statistical_error_tracks_noise_floor() {
        // Pilot-calibrated: converged within 50 iterations and loss at
        // most 1.5 * sigma^2/(2p) in at least 18 of 20 seeds.
        let mut ok = 0;
        for seed in 0..20 {
            let (truth, obs) = instance(1000, 1.0, 1.0, 40_000 + seed);
            let z0 = spectral_init(&obs, 1e-10, 1000, seed).unwrap();
            let cfg = GpmConfig {
                max_iters: 50,
                fixed_point_tol: 1e-12,
                track_trajectory: false,
            };
            let r = gpm(&obs, &z0, &cfg, None).unwrap();
            let l = loss(&r.estimate, &truth).unwrap();
            if r.converged && l <= 0.75 {
                ok += 1;
            }
        }
        assert!(ok >= 18, "only {ok}/20 seeds within band");
    }

    #[test]
    fn noiseless_trajectory_is_flat_after_first_step() {
        let (truth, obs) = instance(24, 1.0, 0.0, 9);
        let z0 = spectral_init(&obs, 1e-13, 2000, 3).unwrap();
        let cfg = GpmConfig {
            max_iters: 10,
            fixed_point_tol: 1e-14,
            track_trajectory: true,
        };
        let result = gpm(&obs, &z0, &cfg, Some(&truth)).unwrap();
        let traj = result.trajectory.unwrap();
        assert_eq!(traj.len(), result.iterations + 1);
        for w in traj[1..].windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "trajectory rose: {w:?}");
        }
    }

    #[test]
    fn mle_noiseless_is_exact_fixed_point() {
        let (truth, obs) = instance(16, 1.0, 0.0, 10);
        let r = mle(&obs, &GpmConfig::default(), Some(&truth)).unwrap();
        assert!(r.converged);
        assert!(r.residual <= 1e-12);
        assert!(loss(&r.estimate, &truth).unwrap() < 1e-20);
    }

    #[test]
    fn mle_beats_grid_oracle_at_small_n() {
        let (_truth, obs) = instance(4, 1.0, 0.1, 11);
        let r = mle(&obs, &GpmConfig::default(), None).unwrap();
        let obj = mle_objective(&obs, &r.estimate).unwrap();
        let spec = GridSpec {
            resolution: 400,
            gauge_fix: true,
        };
        let (_, grid_obj) = grid_mle(&obs, &spec).unwrap();
        assert!(
            obj >= grid_obj - 1e-6,
            "gpm objective {obj} vs grid {grid_obj}"
        );
    }

    #[test]
    fn mle_statistical_error_with_missing_data() {
        let mut ok = 0;
        for seed in 0..20 {
            let (truth, obs) = instance(300, 0.5, 1.0, 52_000 + seed);
            let r = mle(&obs, &GpmConfig::default(), None).unwrap();
            let l = loss(&r.estimate, &truth).unwrap();
            if r.residual <= 1e-10 && l <= 1.5 {
                ok += 1;
            }
        }
        assert!(ok >= 18, "only {ok}/20 seeds within band");
    }

    #[test]
    fn output_stays_on_unit_circle_under_heavy_noise() {
        // Far outside the benign regime the estimate is garbage, but it
        // must still be a phase vector.
        let (_, obs) = instance(50, 0.1, 100.0, 66);
        let r = mle(&obs, &GpmConfig::default(), None).unwrap();
        for (j, e) in r.estimate.entries().iter().enumerate() {
            assert!(
                (e.norm() - 1.0).abs() <= 1e-12,
                "entry {j} has modulus {}",
                e.norm()
            );
        }
    }

    #[test]
    fn objective_at_truth_noiseless_full_graph() {
        let truth = PhaseVector::ones(10);
        let params = ModelParams::new(10, 1.0, 0.0, 13).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        assert_eq!(mle_objective(&obs, &truth).unwrap(), 90.0);
    }

    #[test]
    fn objective_is_gauge_invariant() {
        let (truth, obs) = instance(15, 0.9, 0.5, 14);
        let a = Complex64::from_polar(1.0, -0.7);
        let o1 = mle_objective(&obs, &truth).unwrap();
        let o2 = mle_objective(&obs, &truth.rotated(a)).unwrap();
        assert!((o1 - o2).abs() < 1e-10 * o1.abs().max(1.0));
    }

    #[test]
    fn objective_matches_double_sum_oracle() {
        let (_, obs) = instance(6, 0.8, 1.2, 15);
        let z = PhaseVector::random_uniform(6, 16);
        let fast = mle_objective(&obs, &z).unwrap();
        let mut slow = 0.0;
        for j in 0..6 {
            for k in 0..6 {
                if j != k {
                    slow += (z.entries()[j].conj() * obs.data.get(j, k) * z.entries()[k]).re;
                }
            }
        }
        assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0));
    }

    #[test]
    fn objective_ascends_from_init_to_fixed_point() {
        let (_, obs) = instance(200, 1.0, 1.0, 17);
        let z0 = spectral_init(&obs, 1e-10, 1000, 2).unwrap();
        let r = gpm(&obs, &z0, &GpmConfig::default(), None).unwrap();
        assert!(r.converged);
        let o0 = mle_objective(&obs, &z0).unwrap();
        let o1 = mle_objective(&obs, &r.estimate).unwrap();
        assert!(o1 >= o0 - 1e-9, "objective fell: {o0} -> {o1}");
    }

    #[test]
    fn contraction_probe_noiseless_contracts_hard() {
        let (truth, obs) = instance(200, 1.0, 0.0, 18);
        let pairs = contraction_probe(&obs, &truth, 0.01, 10, 77).unwrap();
        for (before, after) in pairs {
            assert!(after <= 0.1 * before, "before {before}, after {after}");
        }
    }

    #[test]
    fn contraction_probe_near_truth_hits_noise_floor() {
        let (truth, obs) = instance(1000, 1.0, 1.0, 19);
        let pairs = contraction_probe(&obs, &truth, 1e-5, 5, 78).unwrap();
        let oracle_error = 1.0 / 2.0; // sigma^2 / (2p)
        for (_, after) in pairs {
            assert!(after <= 1.5 * oracle_error, "after {after}");
        }
    }

    #[test]
    fn contraction_probe_noisy_one_step_bound() {
        let (truth, obs) = instance(1000, 1.0, 1.0, 20);
        let pairs = contraction_probe(&obs, &truth, 0.05, 20, 79).unwrap();
        assert_eq!(pairs.len(), 20);
        let floor = 1.0 / 2.0;
        for (before, after) in pairs {
            let target = 0.9 * 0.05 * 1000.0..=1.1 * 0.05 * 1000.0;
            assert!(target.contains(&before), "corruption missed: {before}");
            assert!(
                after <= 0.5 * before + 1.5 * floor,
                "before {before}, after {after}"
            );
        }
    }

    #[test]
    fn contraction_probe_rejects_bad_gamma() {
        let (truth, obs) = instance(10, 1.0, 0.0, 21);
        assert!(contraction_probe(&obs, &truth, 0.0, 1, 0).is_err());
        assert!(contraction_probe(&obs, &truth, 1.0, 1, 0).is_err());
    }
}
