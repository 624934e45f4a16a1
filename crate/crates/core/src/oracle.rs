//! Independent oracles for the fast paths: exhaustive grid search for the
//! small-n objective, a dense complex Jacobi eigendecomposition, and a
//! Monte Carlo Fisher-information estimator.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::estimators::mle_objective;
use crate::hermitian::{EigPair, HermitianMatrix};
use crate::lower_bound::{ts_map, Mat2};
use crate::model::{ModelParams, Observation, PhaseVector};
use crate::par;
use crate::rng::{derive_seed, normal_pair, rng_from};

/// Enumerated grid tuples allowed before the guard trips. The final free
/// coordinate is optimized in closed form, so the enumeration has
/// `K^(free-1)` tuples rather than `K^free`.
const GRID_GUARD: f64 = 1e8;

/// Dense eigendecomposition size guard.
const DENSE_GUARD: usize = 512;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Phase-grid specification for the exhaustive objective search.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Number of grid phases `2 pi k / K`.
    pub resolution: usize,
    /// Fix the first coordinate to 1, removing the global-phase orbit.
    pub gauge_fix: bool,
}

/// Exhaustively maximizes the quadratic objective over the phase grid.
///
/// Coordinates before the last are enumerated lexicographically; the last
/// is maximized in closed form (the objective is `base + 2 Re(w z_last)`,
/// a cosine in the last phase, so its grid argmax is adjacent to the
/// rounded continuous argmax). Ties resolve to the lexicographically
/// smallest index tuple.
pub fn grid_mle(obs: &Observation, spec: &GridSpec) -> Result<(PhaseVector, f64)> {
    let k_res = spec.resolution;
    if k_res < 8 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be >= 8, got {k_res}"
        )));
    }
    let n = obs.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid search needs n >= 2, got {n}"
        )));
    }
    let free = if spec.gauge_fix { n - 1 } else { n };
    let enumerated = free - 1;
    let size = (k_res as f64).powi(enumerated as i32);
    if size > GRID_GUARD {
        return Err(Error::GridTooLarge {
            size,
            guard: GRID_GUARD,
        });
    }
    let total = (k_res as u64).pow(enumerated as u32) as usize;

    let phases: Vec<Complex64> = (0..k_res)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / k_res as f64))
        .collect();
    let first_free = if spec.gauge_fix { 1 } else { 0 };
    let last = n - 1;
    let m = &obs.data;

    struct Best {
        objective: f64,
        prefix: usize,
        last_k: usize,
    }

    let evaluate = |range: std::ops::Range<usize>| -> Best {
        let mut best = Best {
            objective: f64::NEG_INFINITY,
            prefix: 0,
            last_k: 0,
        };
        let mut z = vec![Complex64::new(1.0, 0.0); n];
        for prefix in range {
            // Decode digits most-significant first so ascending prefix
            // order is lexicographic tuple order.
            let mut rem = prefix;
            for d in (0..enumerated).rev() {
                z[first_free + enumerated - 1 - d] = phases[(rem / k_res.pow(d as u32)) % k_res];
                rem %= k_res.pow(d as u32);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..last {
                for k in (j + 1)..last {
                    acc += m.get(j, k) * z[j].conj() * z[k];
                }
            }
            let base = 2.0 * acc.re;
            let w: Complex64 = (0..last).map(|j| m.get(j, last) * z[j].conj()).sum();

            // Candidate grid phases bracketing the continuous argmax of
            // 2 Re(w z_last); when w = 0 every phase ties and index 0 wins.
            let theta = (-w.arg()).rem_euclid(TAU);
            let k0 = (theta * k_res as f64 / TAU).round() as usize % k_res;
            let mut best_here = (f64::NEG_INFINITY, 0usize);
            for cand in [(k0 + k_res - 1) % k_res, k0, (k0 + 1) % k_res] {
                let val = 2.0 * (w * phases[cand]).re;
                if val > best_here.0 || (val == best_here.0 && cand < best_here.1) {
                    best_here = (val, cand);
                }
            }
            let objective = base + best_here.0;
            if objective > best.objective {
                best = Best {
                    objective,
                    prefix,
                    last_k: best_here.1,
                };
            }
        }
        best
    };

    let chunk = (total / 128).max(1);
    let chunked = par::map_chunks(total, chunk, evaluate);
    // Chunks cover ascending prefix ranges; strict improvement keeps the
    // lexicographically smallest maximizer.
    let mut best = Best {
        objective: f64::NEG_INFINITY,
        prefix: 0,
        last_k: 0,
    };
    for b in chunked {
        if b.objective > best.objective {
            best = b;
        }
    }

    let mut z = vec![Complex64::new(1.0, 0.0); n];
    let mut rem = best.prefix;
    for d in (0..enumerated).rev() {
        z[first_free + enumerated - 1 - d] = phases[(rem / k_res.pow(d as u32)) % k_res];
        rem %= k_res.pow(d as u32);
    }
    z[last] = phases[best.last_k];
    let zv = PhaseVector::from_unit_entries(z);
    let objective = mle_objective(obs, &zv)?;
    Ok((zv, objective))
}

/// Full eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// sweeps; pairs return sorted by descending eigenvalue.
pub fn jacobi_eig(m: &HermitianMatrix, tol: f64) -> Result<Vec<EigPair>> {
    let n = m.dim();
    if n > DENSE_GUARD {
        return Err(Error::DenseGuard {
            n,
            guard: DENSE_GUARD,
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }

    let mut a: Vec<Complex64> = (0..n * n).map(|i| m.get(i / n, i % n)).collect();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        v[j * n + j] = Complex64::new(1.0, 0.0);
    }

    let off_mass = |a: &[Complex64]| -> f64 {
        let mut sum = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    sum += a[j * n + k].norm_sqr();
                }
            }
        }
        sum.sqrt()
    };

    let mut sweeps = 0;
    while off_mass(&a) >= tol {
        sweeps += 1;
        if sweeps > MAX_JACOBI_SWEEPS {
            return Err(Error::JacobiNoConvergence {
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let beta = a[p * n + q];
                let b = beta.norm();
                if b == 0.0 {
                    continue;
                }
                let phase = beta / b;
                let alpha = a[p * n + p].re;
                let gamma = a[q * n + q].re;
                // Rotation angle annihilating the (p,q) entry:
                // tan(2 theta) = 2|beta| / (alpha - gamma).
                let tau = (alpha - gamma) / (2.0 * b);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                a[p * n + p] = Complex64::new(alpha * c * c + 2.0 * b * c * s + gamma * s * s, 0.0);
                a[q * n + q] = Complex64::new(alpha * s * s - 2.0 * b * c * s + gamma * c * c, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);

                let sp = s * phase;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[j * n + p];
                    let ajq = a[j * n + q];
                    a[j * n + p] = c * ajp + sp.conj() * ajq;
                    a[j * n + q] = -sp * ajp + c * ajq;
                    a[p * n + j] = a[j * n + p].conj();
                    a[q * n + j] = a[j * n + q].conj();
                }
                for j in 0..n {
                    let vjp = v[j * n + p];
                    let vjq = v[j * n + q];
                    v[j * n + p] = c * vjp + sp.conj() * vjq;
                    v[j * n + q] = -sp * vjp + c * vjq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    Ok(order
        .into_iter()
        .map(|col| EigPair {
            value: a[col * n + col].re,
            vector: (0..n).map(|j| v[j * n + col]).collect(),
            converged: true,
            iterations: sweeps,
        })
        .collect())
}

/// Monte Carlo estimate of the 2x2 Fisher information of the pair
/// subproblem at `(a, c)`.
///
/// Each sample draws the sufficient statistics (the direct edge and the
/// two star sums), computes the score by central differences of the exact
/// log-likelihood, and the estimate is the sample covariance of the score.
pub fn mc_fisher(
    a: f64,
    c: f64,
    params: &ModelParams,
    n_samples: usize,
    seed: u64,
) -> Result<Mat2> {
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "mc_fisher needs at least 1e4 samples, got {n_samples}"
        )));
    }
    params.validate()?;
    if params.sigma == 0.0 {
        return Err(Error::InvalidParameter(
            "sigma = 0: score is degenerate".into(),
        ));
    }
    let h = 1e-5;

    // Model quantities at the five parameter configurations used by the
    // central differences.
    struct Config {
        t: f64,
        s: f64,
        a: f64,
        root_a: f64,
        c: f64,
        root_c: f64,
    }
    let configs: Vec<Config> = [(a, c), (a + h, c), (a - h, c), (a, c + h), (a, c - h)]
        .into_iter()
        .map(|(aa, cc)| -> Result<Config> {
            let (t, s) = ts_map(aa, cc)?;
            Ok(Config {
                t,
                s,
                a: aa,
                root_a: (1.0 - aa * aa).sqrt(),
                c: cc,
                root_c: (1.0 - cc * cc).sqrt(),
            })
        })
        .collect::<Result<_>>()?;

    let sigma = params.sigma;
    let sigma2 = sigma * sigma;
    let (t0, s0) = (configs[0].t, configs[0].s);
    let stars = params.n - 2;

    let scores: Vec<(f64, f64)> = par::map_indexed(n_samples, |i| {
        let mut rng = rng_from(derive_seed(seed, i as u64, 0));
        let direct = rng.random::<f64>() < params.p;
        let mut m1 = 0usize;
        let mut m2 = 0usize;
        for _ in 0..stars {
            m1 += (rng.random::<f64>() < params.p) as usize;
        }
        for _ in 0..stars {
            m2 += (rng.random::<f64>() < params.p) as usize;
        }
        let edge = direct.then(|| {
            let (g1, g2) = normal_pair(&mut rng);
            let sd = sigma / 2.0f64.sqrt();
            (t0 + sd * g1, s0 + sd * g2)
        });
        let star1 = (m1 > 0).then(|| {
            let (g1, g2) = normal_pair(&mut rng);
            let sd = sigma * (m1 as f64 / 2.0).sqrt();
            (
                m1 as f64 * configs[0].a + sd * g1,
                m1 as f64 * configs[0].root_a + sd * g2,
            )
        });
        let star2 = (m2 > 0).then(|| {
            let (g1, g2) = normal_pair(&mut rng);
            let sd = sigma * (m2 as f64 / 2.0).sqrt();
            (
                m2 as f64 * configs[0].c + sd * g1,
                m2 as f64 * configs[0].root_c + sd * g2,
            )
        });

        let ll = |cfg: &Config| -> f64 {
            let mut total = 0.0;
            if let Some((u1, u2)) = edge {
                total -= ((u1 - cfg.t).powi(2) + (u2 - cfg.s).powi(2)) / sigma2;
            }
            if let Some((v1, v2)) = star1 {
                let mf = m1 as f64;
                total -=
                    ((v1 - mf * cfg.a).powi(2) + (v2 - mf * cfg.root_a).powi(2)) / (sigma2 * mf);
            }
            if let Some((w1, w2)) = star2 {
                let mf = m2 as f64;
                total -=
                    ((w1 - mf * cfg.c).powi(2) + (w2 - mf * cfg.root_c).powi(2)) / (sigma2 * mf);
            }
            total
        };

        let score_a = (ll(&configs[1]) - ll(&configs[2])) / (2.0 * h);
        let score_c = (ll(&configs[3]) - ll(&configs[4])) / (2.0 * h);
        (score_a, score_c)
    });

    let m = n_samples as f64;
    let (mut mean_a, mut mean_c) = (0.0, 0.0);
    for &(sa, sc) in &scores {
        mean_a += sa;
        mean_c += sc;
    }
    mean_a /= m;
    mean_c /= m;
    let (mut vaa, mut vac, mut vcc) = (0.0, 0.0, 0.0);
    for &(sa, sc) in &scores {
        let (da, dc) = (sa - mean_a, sc - mean_c);
        vaa += da * da;
        vac += da * dc;
        vcc += dc * dc;
    }
    let denom = m - 1.0;
    Ok(Mat2([
        [vaa / denom, vac / denom],
        [vac / denom, vcc / denom],
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::leading_eigenvector;
    use crate::lower_bound::fisher_blocks;
    use crate::model::{loss, sample_observation, sample_truth, TruthMode};
    use rand::Rng;

    fn grid_truth(n: usize, k_res: usize, seed: u64) -> PhaseVector {
        let mut rng = rng_from(seed);
        let mut angles = vec![0.0; n];
        for a in angles.iter_mut().skip(1) {
            *a = TAU * (rng.random::<u32>() as usize % k_res) as f64 / k_res as f64;
        }
        PhaseVector::from_angles(&angles)
    }

    #[test]
    fn grid_recovers_on_grid_truth_exactly() {
        let k_res = 64;
        let truth = grid_truth(3, k_res, 5);
        let params = ModelParams::new(3, 1.0, 0.0, 5).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let spec = GridSpec {
            resolution: k_res,
            gauge_fix: true,
        };
        let (z, _) = grid_mle(&obs, &spec).unwrap();
        assert!(loss(&z, &truth).unwrap() < 1e-12);
    }

    #[test]
    fn grid_objective_dominates_truth_up_to_discretization() {
        let k_res = 100;
        let params = ModelParams::new(4, 1.0, 0.3, 6).unwrap();
        let truth = sample_truth(&params, TruthMode::UniformRandom).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let spec = GridSpec {
            resolution: k_res,
            gauge_fix: true,
        };
        let (_, grid_obj) = grid_mle(&obs, &spec).unwrap();
        let truth_obj = mle_objective(&obs, &truth).unwrap();
        let slack = 4.0 * std::f64::consts::PI * 16.0 / k_res as f64;
        assert!(grid_obj >= truth_obj - slack, "{grid_obj} vs {truth_obj}");
    }

    #[test]
    fn grid_disconnected_component_takes_first_point() {
        // Only edge (0,1) observed; the third coordinate is free and the
        // tie resolves to grid point 0.
        let truth = PhaseVector::random_uniform(3, 7);
        let params = ModelParams::new(3, 1.0, 0.0, 7).unwrap();
        let mut obs = sample_observation(&truth, &params).unwrap();
        for k in 0..2 {
            obs.mask.set_pair(k, 2, Complex64::new(0.0, 0.0));
            obs.data.set_pair(k, 2, Complex64::new(0.0, 0.0));
        }
        let spec = GridSpec {
            resolution: 32,
            gauge_fix: true,
        };
        let (z, _) = grid_mle(&obs, &spec).unwrap();
        assert_eq!(z.entries()[2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn grid_guard_trips_on_large_enumeration() {
        let truth = PhaseVector::random_uniform(7, 8);
        let params = ModelParams::new(7, 1.0, 0.0, 8).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let spec = GridSpec {
            resolution: 100,
            gauge_fix: true,
        };
        assert!(matches!(
            grid_mle(&obs, &spec),
            Err(Error::GridTooLarge { .. })
        ));
    }

    /// Plain enumeration of every gauge-fixed tuple, including the last
    /// coordinate; independent of the closed-form shortcut in `grid_mle`.
    fn exhaustive_grid(obs: &Observation, k_res: usize) -> (PhaseVector, f64) {
        let n = obs.dim();
        let phases: Vec<Complex64> = (0..k_res)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / k_res as f64))
            .collect();
        let total = k_res.pow((n - 1) as u32);
        let mut best: Option<(PhaseVector, f64)> = None;
        for tuple in 0..total {
            let mut z = vec![Complex64::new(1.0, 0.0); n];
            let mut rem = tuple;
            for d in (0..n - 1).rev() {
                z[1 + (n - 2 - d)] = phases[(rem / k_res.pow(d as u32)) % k_res];
                rem %= k_res.pow(d as u32);
            }
            let zv = PhaseVector::from_unit_entries(z);
            let obj = mle_objective(obs, &zv).unwrap();
            if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                best = Some((zv, obj));
            }
        }
        best.unwrap()
    }

    #[test]
    fn grid_shortcut_matches_exhaustive_enumeration() {
        for (n, k_res, seed) in [
            (3, 16, 20u64),
            (3, 16, 21),
            (3, 16, 22),
            (4, 10, 23),
            (4, 10, 24),
        ] {
            let params = ModelParams::new(n, 0.9, 0.4, seed).unwrap();
            let truth = sample_truth(&params, TruthMode::UniformRandom).unwrap();
            let obs = sample_observation(&truth, &params).unwrap();
            let spec = GridSpec {
                resolution: k_res,
                gauge_fix: true,
            };
            let (fast, fast_obj) = grid_mle(&obs, &spec).unwrap();
            let (slow, slow_obj) = exhaustive_grid(&obs, k_res);
            assert_eq!(
                fast.entries(),
                slow.entries(),
                "argmax differs at n={n} K={k_res} seed={seed}"
            );
            assert_eq!(fast_obj, slow_obj);
        }
    }

    #[test]
    fn grid_two_dim_has_only_the_analytic_coordinate() {
        let k_res = 16;
        let truth = grid_truth(2, k_res, 4);
        let params = ModelParams::new(2, 1.0, 0.0, 4).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let spec = GridSpec {
            resolution: k_res,
            gauge_fix: true,
        };
        let (z, _) = grid_mle(&obs, &spec).unwrap();
        assert!(loss(&z, &truth).unwrap() < 1e-12);
    }

    #[test]
    fn grid_rejects_tiny_resolution() {
        let truth = PhaseVector::random_uniform(3, 9);
        let params = ModelParams::new(3, 1.0, 0.0, 9).unwrap();
        let obs = sample_observation(&truth, &params).unwrap();
        let spec = GridSpec {
            resolution: 4,
            gauge_fix: true,
        };
        assert!(grid_mle(&obs, &spec).is_err());
    }

    #[test]
    fn jacobi_diagonal_matrix() {
        let m = HermitianMatrix::from_upper(4, |j, k| {
            if j == k {
                Complex64::new([3.0, -1.0, 7.0, 2.0][j], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let pairs = jacobi_eig(&m, 1e-12).unwrap();
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![7.0, 3.0, 2.0, -1.0]);
        // Leading eigenvector is the third standard basis vector.
        assert!((pairs[0].vector[2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_rank_one() {
        let z = PhaseVector::random_uniform(6, 10);
        let e = z.entries();
        let m = HermitianMatrix::from_upper(6, |j, k| e[j] * e[k].conj());
        let pairs = jacobi_eig(&m, 1e-11).unwrap();
        assert!((pairs[0].value - 6.0).abs() < 1e-10);
        for p in &pairs[1..] {
            assert!(p.value.abs() < 1e-10);
        }
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = rng_from(seed);
        HermitianMatrix::from_upper(n, |j, k| {
            if j == k {
                Complex64::new(rng.random::<f64>() - 0.5, 0.0)
            } else {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            }
        })
    }

    #[test]
    fn jacobi_satisfies_trace_orthogonality_reconstruction() {
        let tol = 1e-11;
        let m = random_hermitian(8, 11);
        let pairs = jacobi_eig(&m, tol).unwrap();

        let trace: f64 = (0..8).map(|j| m.get(j, j).re).sum();
        let sum: f64 = pairs.iter().map(|p| p.value).sum();
        assert!((trace - sum).abs() < 1e-10);

        for i in 0..8 {
            for j in (i + 1)..8 {
                let d: Complex64 = pairs[i]
                    .vector
                    .iter()
                    .zip(&pairs[j].vector)
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                assert!(d.norm() < 1e-8, "pairs {i},{j} overlap {}", d.norm());
            }
        }

        let mut err = 0.0;
        for r in 0..8 {
            for c in 0..8 {
                let mut rec = Complex64::new(0.0, 0.0);
                for p in &pairs {
                    rec += p.value * p.vector[r] * p.vector[c].conj();
                }
                err += (m.get(r, c) - rec).norm_sqr();
            }
        }
        assert!(
            err.sqrt() < 10.0 * tol,
            "reconstruction error {}",
            err.sqrt()
        );

        let lead = leading_eigenvector(&m, 1e-14, 5000, 1).unwrap();
        assert!((lead.value - pairs[0].value).abs() < 1e-9);
    }

    #[test]
    fn jacobi_reconstruction_across_sizes() {
        let tol = 1e-11;
        for (n, seed) in [(2usize, 70u64), (3, 71), (5, 72), (16, 73), (32, 74)] {
            let m = random_hermitian(n, seed);
            let pairs = jacobi_eig(&m, tol).unwrap();
            let trace: f64 = (0..n).map(|j| m.get(j, j).re).sum();
            let sum: f64 = pairs.iter().map(|p| p.value).sum();
            assert!((trace - sum).abs() < 1e-10, "n={n}: trace gap");
            let mut err = 0.0;
            for r in 0..n {
                for c in 0..n {
                    let mut rec = Complex64::new(0.0, 0.0);
                    for p in &pairs {
                        rec += p.value * p.vector[r] * p.vector[c].conj();
                    }
                    err += (m.get(r, c) - rec).norm_sqr();
                }
            }
            assert!(
                err.sqrt() < 10.0 * tol,
                "n={n}: reconstruction {}",
                err.sqrt()
            );
        }
    }

    #[test]
    fn jacobi_guard() {
        let m = HermitianMatrix::zeros(513);
        assert!(matches!(
            jacobi_eig(&m, 1e-10),
            Err(Error::DenseGuard { .. })
        ));
    }

    #[test]
    fn mc_fisher_matches_closed_form_diagonals() {
        let params = ModelParams::new(100, 1.0, 1.0, 0).unwrap();
        let est = mc_fisher(0.5, 0.5, &params, 100_000, 42).unwrap();
        let fc = fisher_blocks(0.5, 0.5, &params).unwrap();
        let want = fc.b1.add(&fc.b2);
        for d in 0..2 {
            let rel = (est.0[d][d] - want.0[d][d]).abs() / want.0[d][d];
            assert!(
                rel < 0.05,
                "diagonal {d}: {} vs {}",
                est.0[d][d],
                want.0[d][d]
            );
        }
        assert_eq!(est.0[0][1], est.0[1][0]);
    }

    #[test]
    fn mc_fisher_scales_inversely_with_noise_variance() {
        let p1 = ModelParams::new(60, 0.8, 1.0, 0).unwrap();
        let p2 = ModelParams::new(60, 0.8, std::f64::consts::SQRT_2, 0).unwrap();
        let f1 = mc_fisher(0.45, 0.55, &p1, 50_000, 7).unwrap();
        let f2 = mc_fisher(0.45, 0.55, &p2, 50_000, 7).unwrap();
        for d in 0..2 {
            let ratio = f2.0[d][d] / f1.0[d][d];
            assert!((0.45..=0.55).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn mc_fisher_error_shrinks_with_samples() {
        let params = ModelParams::new(52, 1.0, 1.0, 0).unwrap();
        let fc = fisher_blocks(0.5, 0.5, &params).unwrap();
        let want = fc.b1.add(&fc.b2);
        let mean_err = |n_samples: usize| -> f64 {
            (0..4)
                .map(|rep| {
                    let est = mc_fisher(0.5, 0.5, &params, n_samples, 1000 + rep).unwrap();
                    ((est.0[0][0] - want.0[0][0]).abs() + (est.0[1][1] - want.0[1][1]).abs()) / 2.0
                })
                .sum::<f64>()
                / 4.0
        };
        let coarse = mean_err(25_000);
        let fine = mean_err(100_000);
        assert!(fine < coarse, "error did not shrink: {coarse} -> {fine}");
    }

    #[test]
    fn mc_fisher_rejects_few_samples() {
        let params = ModelParams::new(10, 1.0, 1.0, 0).unwrap();
        assert!(mc_fisher(0.5, 0.5, &params, 100, 0).is_err());
    }
}
