//! Seed derivation and the random primitives used by the model.
//!
//! All randomness flows through ChaCha8 streams whose 64-bit seeds are
//! derived with the SplitMix64 finalizer. Derived streams make trials
//! independent of scheduling: trial `i` of grid cell `g` always sees the
//! stream `derive_seed(base, g, i)` no matter how many threads run.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Derives an independent stream seed from a base seed and two indices.
///
/// Chained mixing keeps (base, a, b) triples injective in practice, so
/// per-trial streams never collide with per-module streams.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let h = mix64(base.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let h = mix64(h ^ a);
    mix64(h ^ b)
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on (0, 1]; safe to feed into `ln`.
#[inline]
fn uniform_open01(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Standard complex Gaussian CN(0,1) by Box-Muller: real and imaginary
/// parts are independent N(0, 1/2).
///
/// With u1 on (0,1] and u2 on [0,1), the pair (g1+i*g2)/sqrt(2) collapses
/// to sqrt(-ln u1) * exp(i*2*pi*u2).
#[inline]
pub(crate) fn complex_standard_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1 = uniform_open01(rng);
    let u2 = rng.random::<f64>();
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

/// A pair of independent standard normals by Box-Muller.
#[inline]
pub(crate) fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform_open01(rng);
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = TAU * u2;
    (r * theta.cos(), r * theta.sin())
}
