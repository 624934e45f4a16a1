//! Numerical evaluation of the Bayesian minimax lower bound: the pair
//! reparametrization, its Jacobian, the Fisher blocks of the direct edge
//! and the two stars, the prior information term, and the aggregation of
//! per-pair Bayes bounds into the global bound with target sigma^2/(2p).

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::par;
use crate::quad::gauss_legendre;

/// Support of the smooth prior.
const SUPPORT_LO: f64 = 0.4;
const SUPPORT_HI: f64 = 0.6;

/// Default central-difference step for the prior-information integrand.
const DEFAULT_FD_STEP: f64 = 1e-5;

/// Mass cutoff: nodes where the joint prior mass is below this contribute
/// nothing (the mollifier vanishes faster than the integrand varies).
const MASS_CUTOFF: f64 = 1e-12;

/// Small dense 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn diag(d0: f64, d1: f64) -> Self {
        Mat2([[d0, 0.0], [0.0, d1]])
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &other.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Mat2 {
        let d = self.det();
        assert!(d != 0.0, "singular 2x2 matrix");
        Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    /// Eigenvalues of a symmetric 2x2, ascending.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let t = self.trace();
        let disc = (t * t - 4.0 * self.det()).max(0.0).sqrt();
        ((t - disc) / 2.0, (t + disc) / 2.0)
    }
}

/// Smooth compactly supported prior density on [0.4, 0.6].
///
/// The bump `exp(-1/(1-u^2))` with `u = (x-0.5)/0.1`, normalized by
/// quadrature; it vanishes with all derivatives at the support endpoints.
#[derive(Debug, Clone)]
pub struct PriorDensity {
    norm: f64,
}

impl PriorDensity {
    fn bump(x: f64) -> f64 {
        let u = (x - 0.5) / 0.1;
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    /// Builds the mollifier prior, normalizing with a Gauss-Legendre rule
    /// of `quad_points` nodes.
    pub fn mollifier(quad_points: usize) -> Self {
        let rule = gauss_legendre(quad_points.max(64), SUPPORT_LO, SUPPORT_HI);
        let mass = rule.integrate(Self::bump);
        Self { norm: 1.0 / mass }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.norm * Self::bump(x)
    }

    pub fn support(&self) -> (f64, f64) {
        (SUPPORT_LO, SUPPORT_HI)
    }
}

fn check_unit_interval(name: &'static str, v: f64, open_left: bool) -> Result<()> {
    let ok = if open_left {
        v > 0.0 && v < 1.0
    } else {
        (0.0..1.0).contains(&v)
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value: v,
            domain: if open_left { "(0, 1)" } else { "[0, 1)" },
        })
    }
}

/// Real and imaginary part of `z1 conj(z2)` for phases parametrized by
/// their real parts `a` and `c` on the upper half circle.
pub fn ts_map(a: f64, c: f64) -> Result<(f64, f64)> {
    check_unit_interval("a", a, false)?;
    check_unit_interval("c", c, false)?;
    let sa = (1.0 - a * a).sqrt();
    let sc = (1.0 - c * c).sqrt();
    Ok((a * c + sa * sc, sa * c - a * sc))
}

/// Closed-form Jacobian of `(T, S)` with respect to `(a, c)`.
pub fn jacobian(a: f64, c: f64) -> Result<Mat2> {
    check_unit_interval("a", a, true)?;
    check_unit_interval("c", c, true)?;
    let sa = (1.0 - a * a).sqrt();
    let sc = (1.0 - c * c).sqrt();
    Ok(Mat2([
        [c - sc * a / sa, a - sa * c / sc],
        [-a * c / sa - sc, sa + a * c / sc],
    ]))
}

/// Jacobian and Fisher blocks of the pair subproblem at a prior point.
#[derive(Debug, Clone, Copy)]
pub struct FisherComponents {
    /// Jacobian of the reparametrization.
    pub jac: Mat2,
    /// Information carried by the direct edge, scale 2p/sigma^2.
    pub b1: Mat2,
    /// Information carried by the two stars, scale 2(n-2)p/sigma^2.
    pub b2: Mat2,
}

pub fn fisher_blocks(a: f64, c: f64, params: &ModelParams) -> Result<FisherComponents> {
    params.validate()?;
    if params.sigma == 0.0 {
        return Err(Error::InvalidParameter(
            "sigma = 0: information is infinite and the bound degenerates to 0".into(),
        ));
    }
    let jac = jacobian(a, c)?;
    let sigma2 = params.sigma * params.sigma;
    let (ta, tc) = (jac.0[0][0], jac.0[0][1]);
    let (sa, sc) = (jac.0[1][0], jac.0[1][1]);
    let edge = 2.0 * params.p / sigma2;
    let b1 = Mat2([
        [edge * (ta * ta + sa * sa), edge * ta * tc],
        [edge * ta * tc, edge * (tc * tc + sc * sc)],
    ]);
    let star = 2.0 * (params.n as f64 - 2.0) * params.p / sigma2;
    let b2 = Mat2::diag(star / (1.0 - a * a), star / (1.0 - c * c));
    Ok(FisherComponents { jac, b1, b2 })
}

/// `trace(J B^-1 J^T)` with `B = B1 + B2`: the per-pair inverse
/// information pushed through the reparametrization.
pub fn trace_j(a: f64, c: f64, params: &ModelParams) -> Result<f64> {
    let fc = fisher_blocks(a, c, params)?;
    let b = fc.b1.add(&fc.b2);
    debug_assert!(b.det() > 0.0, "Fisher matrix must be positive definite");
    Ok(fc.jac.mul(&b.inverse()).mul(&fc.jac.transpose()).trace())
}

/// 2x2 kernel `K = J B^-1` whose derivatives enter the prior information.
fn kernel(a: f64, c: f64, params: &ModelParams) -> Result<Mat2> {
    let fc = fisher_blocks(a, c, params)?;
    Ok(fc.jac.mul(&fc.b1.add(&fc.b2).inverse()))
}

fn validate_quad_points(quad_points: usize) -> Result<()> {
    if quad_points < 100 {
        return Err(Error::InvalidParameter(format!(
            "quad_points must be >= 100, got {quad_points}"
        )));
    }
    Ok(())
}

/// Information of the prior: the van Trees penalty term.
///
/// Evaluates `sum_j (sum_k d/dtheta_k K_jk)^2` against the joint prior
/// mass by tensor-product quadrature, with the theta-derivatives of the
/// kernel taken by central differences. The penalty scales as
/// `(sigma^2/(np))^2`, two orders below the main term.
pub fn prior_information(
    f: &PriorDensity,
    params: &ModelParams,
    quad_points: usize,
    fd_step: f64,
) -> Result<f64> {
    validate_quad_points(quad_points)?;
    if !(1e-7..=1e-4).contains(&fd_step) {
        return Err(Error::OutOfDomain {
            name: "fd_step",
            value: fd_step,
            domain: "[1e-7, 1e-4]",
        });
    }
    if params.sigma == 0.0 {
        // Surface the degenerate case before any node evaluation.
        fisher_blocks(0.5, 0.5, params)?;
    }
    let rule = gauss_legendre(quad_points, SUPPORT_LO, SUPPORT_HI);
    let n = rule.nodes.len();

    let contributions = par::map_indexed(n * n, |idx| -> Result<f64> {
        let (i, j) = (idx / n, idx % n);
        let (a, c) = (rule.nodes[i], rule.nodes[j]);
        let ff = f.density(a) * f.density(c);
        if ff < MASS_CUTOFF {
            return Ok(0.0);
        }
        let h = fd_step;
        let ka_plus = kernel(a + h, c, params)?;
        let ka_minus = kernel(a - h, c, params)?;
        let kc_plus = kernel(a, c + h, params)?;
        let kc_minus = kernel(a, c - h, params)?;
        let mut integrand = 0.0;
        for row in 0..2 {
            let da = (ka_plus.0[row][0] - ka_minus.0[row][0]) / (2.0 * h);
            let dc = (kc_plus.0[row][1] - kc_minus.0[row][1]) / (2.0 * h);
            let total = da + dc;
            integrand += total * total;
        }
        Ok(rule.weights[i] * rule.weights[j] * integrand * ff)
    });
    let mut sum = 0.0;
    for c in contributions {
        sum += c?;
    }
    Ok(sum)
}

/// Lower bound on the two-point Bayes risk, with a flag raised when the
/// prior-information term dominates (the asymptotic regime is violated).
#[derive(Debug, Clone, Copy)]
pub struct PairBound {
    pub value: f64,
    pub warning_negative: bool,
}

/// `trace_J` integrated against the joint prior by tensor-product
/// quadrature.
pub fn trace_j_prior_integral(
    params: &ModelParams,
    f: &PriorDensity,
    quad_points: usize,
) -> Result<f64> {
    validate_quad_points(quad_points)?;
    let rule = gauss_legendre(quad_points, SUPPORT_LO, SUPPORT_HI);
    let n = rule.nodes.len();
    let contributions = par::map_indexed(n * n, |idx| -> Result<f64> {
        let (i, j) = (idx / n, idx % n);
        let (a, c) = (rule.nodes[i], rule.nodes[j]);
        let ff = f.density(a) * f.density(c);
        if ff < MASS_CUTOFF {
            return Ok(0.0);
        }
        Ok(rule.weights[i] * rule.weights[j] * trace_j(a, c, params)? * ff)
    });
    let mut main = 0.0;
    for c in contributions {
        main += c?;
    }
    Ok(main)
}

/// `integral of trace_J against the prior, minus I(f)`.
pub fn van_trees_pair_bound(
    params: &ModelParams,
    f: &PriorDensity,
    quad_points: usize,
) -> Result<PairBound> {
    pair_bound_with_step(params, f, quad_points, DEFAULT_FD_STEP)
}

/// Pair bound with an explicit finite-difference step for the prior
/// information term.
pub fn pair_bound_with_step(
    params: &ModelParams,
    f: &PriorDensity,
    quad_points: usize,
    fd_step: f64,
) -> Result<PairBound> {
    let main = trace_j_prior_integral(params, f, quad_points)?;
    let info = prior_information(f, params, quad_points, fd_step)?;
    let value = main - info;
    Ok(PairBound {
        value,
        warning_negative: value < 0.0,
    })
}

/// The aggregated minimax bound and its closed-form target.
#[derive(Debug, Clone, Copy)]
pub struct MinimaxBound {
    /// Aggregate: `(n-1)/2` times the pair bound.
    pub value: f64,
    pub pair_bound: f64,
    /// `sigma^2 / (2p)`.
    pub closed_form_target: f64,
    pub ratio: f64,
    pub warning_negative: bool,
}

/// Aggregates the identical per-pair bounds over all ordered pairs,
/// normalized by `1/(2n)`.
pub fn minimax_lower_bound(
    params: &ModelParams,
    f: &PriorDensity,
    quad_points: usize,
) -> Result<MinimaxBound> {
    let pair = van_trees_pair_bound(params, f, quad_points)?;
    let n = params.n as f64;
    let value = n * (n - 1.0) / (2.0 * n) * pair.value;
    let target = params.sigma * params.sigma / (2.0 * params.p);
    Ok(MinimaxBound {
        value,
        pair_bound: pair.value,
        closed_form_target: target,
        ratio: value / target,
        warning_negative: pair.warning_negative,
    })
}
