//! Rank-constrained positive semidefinite Grothendieck problem.
//!
//! Given a positive semidefinite `A ∈ R^{m×m}` and a target rank `n`, the
//! problem maximizes `Σ_ij A_ij x_i·x_j` over unit vectors `x_i ∈ S^{n-1}`.
//! This crate solves the unconstrained-rank relaxation by low-rank
//! coordinate ascent, rounds the relaxation to rank `n` by Gaussian
//! projection, and provides the numerical machinery to check the
//! approximation constants: `γ(n)`, `c(m)`, the expected inner product
//! `E_n(t)`, the Laplacian ratio `v(n)`, and positive-type expansions on
//! spheres.
//!
//! Module map:
//!
//! - [`matrix`]: input matrices, PSD validation, generators, file formats.
//! - [`sdp_solver`]: the relaxation solver.
//! - [`rounding`]: Gaussian projection rounding and the reduction check.
//! - [`special`]: `γ(n)`, `c(m)`, Jacobi polynomials, quadrature.
//! - [`en_analysis`]: `E_n(t)`, `f_1`, `v(n)`, positive-type expansions.
//! - [`oracle`]: exhaustive ground truth for tiny instances.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod en_analysis;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod rounding;
pub mod sdp_solver;
pub mod special;
pub mod stats;
pub mod vectors;

pub use en_analysis::{
    check_positive_type_matrix, en_integral, en_monte_carlo, f1_extract, positive_type_expand,
    taylor_expand, v_n, ExpansionBasis, PositiveTypeExpansion, RatioCurvePoint, VnResult,
};
pub use error::{GrothError, Result};
pub use matrix::{laplacian, random_gram, validate_psd, MatrixFormat, PsdMatrix, PsdReport, WeightedGraph};
pub use oracle::{brute_force_sdp1, grid_search_rank2, Assignment, OracleMethod, OracleResult};
pub use rounding::{
    best_of_rounds, expected_ratio_estimate, hardness_reduction_check, round_rank_n,
    ReductionReport, RoundedSolution,
};
pub use sdp_solver::{objective_value, solve_sdp_relaxation, GramSolution, SolverConfig};
pub use special::{c_m, gamma_n, gauss_legendre, inner_product_alpha, jacobi_poly, QuadratureRule};
pub use stats::{Estimate, RunningStats};
pub use vectors::VectorSet;
