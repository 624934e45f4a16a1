//! Minimax-optimal estimation for phase synchronization with missing
//! data.
//!
//! The library covers the full pipeline at desk scale: synthetic
//! instances of the masked pairwise-phase model, spectral initialization,
//! the generalized power method and the MLE as its fixed point, the
//! quotient loss, brute-force and dense-algebra oracles, and a numerical
//! evaluation of the van Trees lower bound whose asymptotic value is
//! `sigma^2 / (2p)`.
//!
//! Estimation, quadrature, and Monte Carlo loops are data-parallel when
//! the `parallel` feature (default) is enabled; all results are
//! deterministic functions of the seeds regardless of thread count.

pub mod error;
pub mod estimators;
pub mod hermitian;
pub mod lower_bound;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod rng;

mod par;

pub use error::{Error, Result};
pub use estimators::{
    contraction_probe, gpm, gpm_step, mle, mle_objective, spectral_init, EstimateResult, GpmConfig,
};
pub use hermitian::{hadamard_mask, leading_eigenvector, EigPair, HermitianMatrix};
pub use lower_bound::{
    fisher_blocks, jacobian, minimax_lower_bound, pair_bound_with_step, prior_information, trace_j,
    trace_j_prior_integral, ts_map, van_trees_pair_bound, FisherComponents, Mat2, MinimaxBound,
    PairBound, PriorDensity,
};
pub use model::{
    align, gram_distance, loss, sample_observation, sample_truth, ModelParams, Observation,
    PhaseVector, TruthMode,
};
pub use oracle::{grid_mle, jacobi_eig, mc_fisher, GridSpec};
pub use rng::{derive_seed, mix64};
