//! The masked phase-synchronization model: synthetic instance generation,
//! the quotient loss, and its Frobenius companion.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::rng::{complex_standard_gaussian, derive_seed, rng_from};

/// Stream tags for the per-module RNG streams derived from a model seed.
const STREAM_TRUTH: u64 = 1;
const STREAM_OBSERVATION: u64 = 2;

/// A vector of unit-modulus complex entries; the estimand and all iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    entries: Vec<Complex64>,
}

impl PhaseVector {
    /// Validates that every entry has unit modulus within 1e-12.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        for (index, e) in entries.iter().enumerate() {
            let modulus = e.norm();
            if (modulus - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnitModulus { index, modulus });
            }
        }
        Ok(Self { entries })
    }

    /// Constructs e^{i*theta_j} entrywise.
    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            entries: angles
                .iter()
                .map(|&t| Complex64::new(t.cos(), t.sin()))
                .collect(),
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            entries: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Uniform random phases from a dedicated seeded stream.
    pub fn random_uniform(n: usize, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        Self {
            entries: (0..n)
                .map(|_| {
                    let theta = TAU * rng.random::<f64>();
                    Complex64::new(theta.cos(), theta.sin())
                })
                .collect(),
        }
    }

    /// Internal constructor for entries already on the unit circle by
    /// construction (normalization output).
    pub(crate) fn from_unit_entries(entries: Vec<Complex64>) -> Self {
        debug_assert!(entries.iter().all(|e| (e.norm() - 1.0).abs() <= 1e-12));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The vector multiplied by one global phase.
    pub fn rotated(&self, phase: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e * phase).collect(),
        }
    }
}

/// Parameters of the masked model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    /// Observation probability of each off-diagonal pair.
    pub p: f64,
    /// Noise standard-deviation scale.
    pub sigma: f64,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, sigma: f64, seed: u64) -> Result<Self> {
        let params = Self { n, p, sigma, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if self.p.is_nan() || self.p <= 0.0 || self.p > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p must be in (0, 1], got {}",
                self.p
            )));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// The full sufficient data: the Bernoulli mask and the masked pairwise
/// measurements, both Hermitian with zero diagonal.
#[derive(Debug, Clone)]
pub struct Observation {
    pub mask: HermitianMatrix,
    pub data: HermitianMatrix,
}

impl Observation {
    pub fn dim(&self) -> usize {
        self.data.dim()
    }
}

/// How to obtain the ground-truth phase vector.
#[derive(Debug, Clone)]
pub enum TruthMode {
    UniformRandom,
    FixedGiven(PhaseVector),
}

/// Draws the ground truth: uniform phases from the seed's truth stream,
/// or a validated copy of a given vector.
pub fn sample_truth(params: &ModelParams, mode: TruthMode) -> Result<PhaseVector> {
    params.validate()?;
    match mode {
        TruthMode::UniformRandom => Ok(PhaseVector::random_uniform(
            params.n,
            derive_seed(params.seed, STREAM_TRUTH, 0),
        )),
        TruthMode::FixedGiven(v) => {
            if v.len() != params.n {
                return Err(Error::DimensionMismatch {
                    expected: params.n,
                    found: v.len(),
                });
            }
            PhaseVector::from_entries(v.entries.clone())
        }
    }
}

/// Draws one observation: for each pair j<k independently, a Bernoulli(p)
/// mask bit and, when observed, `z_j conj(z_k) + sigma * W` with W a
/// standard complex Gaussian. The lower triangle mirrors by conjugation
/// and the diagonal is zero.
pub fn sample_observation(truth: &PhaseVector, params: &ModelParams) -> Result<Observation> {
    params.validate()?;
    if truth.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: truth.len(),
        });
    }
    let n = params.n;
    let z = truth.entries();
    let mut rng = rng_from(derive_seed(params.seed, STREAM_OBSERVATION, 0));
    let mut mask = HermitianMatrix::zeros(n);
    let mut data = HermitianMatrix::zeros(n);
    for j in 0..n {
        for k in (j + 1)..n {
            if rng.random::<f64>() < params.p {
                mask.set_pair(j, k, Complex64::new(1.0, 0.0));
                let w = complex_standard_gaussian(&mut rng);
                data.set_pair(j, k, z[j] * z[k].conj() + params.sigma * w);
            }
        }
    }
    Ok(Observation { mask, data })
}

fn check_pair(zhat: &PhaseVector, ztruth: &PhaseVector) -> Result<()> {
    if zhat.len() != ztruth.len() {
        return Err(Error::DimensionMismatch {
            expected: ztruth.len(),
            found: zhat.len(),
        });
    }
    Ok(())
}

/// Inner product `sum_j zhat_j conj(ztruth_j)`.
fn overlap(zhat: &PhaseVector, ztruth: &PhaseVector) -> Complex64 {
    zhat.entries
        .iter()
        .zip(&ztruth.entries)
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Quotient loss: the squared l2 distance minimized over a global phase.
///
/// Equal to `2(n - |s|)` with `s = sum_j zhat_j conj(ztruth_j)`. The value
/// is evaluated as the residual at the minimizing phase `conj(s)/|s|`,
/// which is the same quantity without the cancellation that `n - |s|`
/// suffers when the vectors nearly coincide.
pub fn loss(zhat: &PhaseVector, ztruth: &PhaseVector) -> Result<f64> {
    check_pair(zhat, ztruth)?;
    let s = overlap(zhat, ztruth);
    let norm = s.norm();
    if norm == 0.0 {
        // min_a of 2n - 2 Re(a s) is 2n for every phase a.
        return Ok(2.0 * zhat.len() as f64);
    }
    let a = s.conj() / norm;
    Ok(zhat
        .entries
        .iter()
        .zip(&ztruth.entries)
        .map(|(zh, zt)| (zh * a - zt).norm_sqr())
        .sum())
}

/// Rotates `zhat` by the loss-minimizing global phase `conj(s)/|s|`.
pub fn align(zhat: &PhaseVector, ztruth: &PhaseVector) -> Result<PhaseVector> {
    check_pair(zhat, ztruth)?;
    let s = overlap(zhat, ztruth);
    let norm = s.norm();
    if norm == 0.0 {
        return Err(Error::OrthogonalAlignment);
    }
    Ok(zhat.rotated(s.conj() / norm))
}

/// Squared Frobenius distance of the phase Gram matrices:
/// `||z z^H - z* z*^H||_F^2 = 2(n^2 - |s|^2)`.
pub fn gram_distance(z: &PhaseVector, zstar: &PhaseVector) -> Result<f64> {
    check_pair(z, zstar)?;
    let n = z.len() as f64;
    let s = overlap(z, zstar).norm_sqr();
    Ok(2.0 * (n * n - s))
}
