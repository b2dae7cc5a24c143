//! Gaussian projection rounding.
//!
//! A relaxation solution `u_1, …, u_m ∈ S^{k-1}` is rounded to rank `n` by
//! drawing `X ∈ R^{n×k}` with i.i.d. N(0, 1) entries and setting
//! `x_i = X u_i / ‖X u_i‖`. For `n = 1` this is random hyperplane rounding,
//! `x_i = sign(ξ·u_i)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GrothError, Result};
use crate::matrix::{min_eigenvalue, PsdMatrix};
use crate::rng::{self, derive_seed};
use crate::sdp_solver::{objective_value, GramSolution};
use crate::special::gamma_n;
use crate::stats::{Estimate, RunningStats};
use crate::vectors::{dot, VectorSet};

/// Projected norms below this trigger a fresh draw of `X`.
const MIN_PROJECTED_NORM: f64 = 1e-300;
/// Inner products may overshoot ±1 by this much before it is an error.
const DOT_OVERSHOOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedSolution {
    pub n: usize,
    /// `m` unit vectors in `R^n`; exactly ±1 when `n = 1`.
    pub vectors: VectorSet,
    pub objective: f64,
    pub seed_used: u64,
}

impl RoundedSolution {
    /// Wraps rank-`n` unit vectors, e.g. an externally produced solution.
    pub fn from_vectors(a: &PsdMatrix, vectors: VectorSet, seed_used: u64) -> Result<Self> {
        let objective = objective_value(a, &vectors)?;
        Ok(Self { n: vectors.dim(), vectors, objective, seed_used })
    }
}

fn check_rank(n: usize) -> Result<()> {
    if n < 1 {
        return Err(GrothError::invalid("target rank n must be ≥ 1"));
    }
    Ok(())
}

/// `sign` with `sign(±0) = +1`.
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn project(g: &GramSolution, n: usize, seed: u64) -> VectorSet {
    let k = g.vectors.dim();
    let m = g.vectors.len();
    let mut rng = rng::stream(seed);
    let mut x = vec![0.0; n * k];
    let mut out = VectorSet::zeros(m, n);
    'draw: loop {
        rng::fill_standard_normal(&mut rng, &mut x);
        for i in 0..m {
            let u = g.vectors.get(i);
            let xi = out.get_mut(i);
            for (r, slot) in xi.iter_mut().enumerate() {
                *slot = dot(&x[r * k..(r + 1) * k], u);
            }
            if n == 1 {
                xi[0] = sign(xi[0]);
                continue;
            }
            let norm = dot(xi, xi).sqrt();
            if norm < MIN_PROJECTED_NORM {
                continue 'draw;
            }
            xi.iter_mut().for_each(|v| *v /= norm);
        }
        return out;
    }
}

/// One rounding of `g` to rank `n` with the stream of `seed`.
pub fn round_rank_n(a: &PsdMatrix, g: &GramSolution, n: usize, seed: u64) -> Result<RoundedSolution> {
    check_rank(n)?;
    if g.vectors.len() != a.order() {
        return Err(GrothError::DimensionMismatch { expected: a.order(), got: g.vectors.len() });
    }
    let vectors = project(g, n, seed);
    let objective = objective_value(a, &vectors)?;
    Ok(RoundedSolution { n, vectors, objective, seed_used: seed })
}

/// Best of `trials` roundings, trial `t` using `derive_seed(seed, t)`.
/// Ties go to the lowest trial index.
pub fn best_of_rounds(
    a: &PsdMatrix,
    g: &GramSolution,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RoundedSolution> {
    check_rank(n)?;
    if trials < 1 {
        return Err(GrothError::invalid("number of rounding trials must be ≥ 1"));
    }
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| round_rank_n(a, g, n, derive_seed(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(results
        .into_iter()
        .reduce(|best, cand| if cand.objective > best.objective { cand } else { best })
        .expect("trials ≥ 1"))
}

/// Mean and standard error of `objective(rounded) / g.objective` over
/// `trials` independent roundings.
pub fn expected_ratio_estimate(
    a: &PsdMatrix,
    g: &GramSolution,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    check_rank(n)?;
    if trials < 2 {
        return Err(GrothError::invalid("ratio estimate needs at least 2 trials"));
    }
    if !(g.objective > 0.0) {
        return Err(GrothError::DegenerateInstance(format!(
            "relaxation objective is {} ≤ 0; the approximation ratio is undefined",
            g.objective
        )));
    }
    let ratios = (0..trials as u64)
        .into_par_iter()
        .map(|t| round_rank_n(a, g, n, derive_seed(seed, t)).map(|r| r.objective / g.objective))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().collect::<RunningStats>().estimate())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionReport {
    /// `(2/π) Σ A_ij arcsin(x_i·x_j)`
    pub lhs: f64,
    /// `(2/(π γ(n))) Σ A_ij x_i·x_j`
    pub rhs: f64,
    pub margin: f64,
    /// Smallest eigenvalue of `(2/π)(arcsin(x_i·x_j) − x_i·x_j/γ(n))`.
    pub min_eig: f64,
    pub margin_ok: bool,
    pub min_eig_ok: bool,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.margin_ok && self.min_eig_ok
    }
}

/// Checks `(2/π) Σ A_ij arcsin(x_i·x_j) ≥ (2/(πγ(n))) Σ A_ij x_i·x_j` for a
/// rank-`n` solution, together with PSD-ness of the kernel matrix that
/// makes it hold.
pub fn hardness_reduction_check(a: &PsdMatrix, s: &RoundedSolution) -> Result<ReductionReport> {
    let m = a.order();
    if s.vectors.len() != m {
        return Err(GrothError::DimensionMismatch { expected: m, got: s.vectors.len() });
    }
    let n = s.vectors.dim();
    let inv_gamma = 1.0 / gamma_n(n)?;

    let mut dots = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let d = s.vectors.dot(i, j);
            if d.abs() > 1.0 + DOT_OVERSHOOT_TOL || !d.is_finite() {
                return Err(GrothError::Numerical(format!(
                    "|x_{i}·x_{j}| = {} exceeds 1; vectors are not unit length",
                    d.abs()
                )));
            }
            let d = d.clamp(-1.0, 1.0);
            dots[i * m + j] = d;
            dots[j * m + i] = d;
        }
    }

    let mut asin_sum = 0.0;
    let mut lin_sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let aij = a.get(i, j);
            let d = dots[i * m + j];
            asin_sum += aij * d.asin();
            lin_sum += aij * d;
        }
    }
    let lhs = 2.0 / PI * asin_sum;
    let rhs = 2.0 / PI * inv_gamma * lin_sum;
    let margin = lhs - rhs;

    let kernel = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        let d = dots[i * m + j];
        2.0 / PI * (d.asin() - d * inv_gamma)
    });
    let min_eig = min_eigenvalue(kernel);

    Ok(ReductionReport {
        lhs,
        rhs,
        margin,
        min_eig,
        margin_ok: margin >= -1e-8 * m as f64 * a.scale(),
        min_eig_ok: min_eig >= -1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::random_gram;
    use crate::sdp_solver::{solve_sdp_relaxation, SolverConfig};

    fn gram(a: &PsdMatrix, rows: &[Vec<f64>]) -> GramSolution {
        GramSolution::from_vectors(a, VectorSet::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn single_vector_objective_is_a11() {
        let a = PsdMatrix::from_rows(&[vec![2.5]]).unwrap();
        let g = gram(&a, &[vec![0.3, 0.4]]);
        for seed in 0..5 {
            for n in 1..4 {
                let r = round_rank_n(&a, &g, n, seed).unwrap();
                assert!((r.objective - 2.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identical_vectors_round_identically() {
        let a = random_gram(4, 2, 3).unwrap();
        let g = gram(&a, &vec![vec![0.0, 1.0, 0.0]; 4]);
        let r = round_rank_n(&a, &g, 3, 12).unwrap();
        for i in 1..4 {
            assert_eq!(r.vectors.get(i), r.vectors.get(0));
        }
        let total: f64 = a.entries().iter().sum();
        assert!((r.objective - total).abs() < 1e-12 * total.abs().max(1.0));
    }

    #[test]
    fn all_ones_rounds_to_m_squared() {
        let a = PsdMatrix::ones(5).unwrap();
        let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
        for n in 1..5 {
            let r = round_rank_n(&a, &g, n, 40 + n as u64).unwrap();
            assert!((r.objective - 25.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_one_outputs_are_signs() {
        let a = random_gram(10, 10, 2).unwrap();
        let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
        let r = round_rank_n(&a, &g, 1, 5).unwrap();
        assert!(r.vectors.as_slice().iter().all(|&x| x == 1.0 || x == -1.0));
        let r = round_rank_n(&a, &g, 3, 5).unwrap();
        assert!(r.vectors.max_norm_defect() < 1e-12);
        assert_eq!(r, round_rank_n(&a, &g, 3, 5).unwrap());
        assert!(matches!(round_rank_n(&a, &g, 0, 5), Err(GrothError::InvalidInput(_))));
    }

    #[test]
    fn sign_of_zero_is_positive() {
        assert_eq!(sign(0.0), 1.0);
        assert_eq!(sign(-0.0), 1.0);
        assert_eq!(sign(-1e-300), -1.0);
    }

    #[test]
    fn best_of_rounds_properties() {
        let a = random_gram(12, 6, 4).unwrap();
        let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
        let one = best_of_rounds(&a, &g, 2, 1, 77).unwrap();
        assert_eq!(one, round_rank_n(&a, &g, 2, derive_seed(77, 0)).unwrap());
        let mut prev = f64::NEG_INFINITY;
        for r in [1, 2, 5, 10, 40] {
            let best = best_of_rounds(&a, &g, 2, r, 77).unwrap();
            assert!(best.objective >= prev);
            prev = best.objective;
        }
        let id = PsdMatrix::identity(6).unwrap();
        let gid = solve_sdp_relaxation(&id, &SolverConfig::default()).unwrap();
        for r in [1, 3, 9] {
            assert!((best_of_rounds(&id, &gid, 2, r, 1).unwrap().objective - 6.0).abs() < 1e-12);
        }
        assert!(best_of_rounds(&a, &g, 2, 0, 1).is_err());
    }

    #[test]
    fn ratio_estimate_trivial_cases() {
        for a in [PsdMatrix::identity(5).unwrap(), PsdMatrix::ones(5).unwrap()] {
            let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
            for n in [1, 3] {
                let est = expected_ratio_estimate(&a, &g, n, 200, 9).unwrap();
                assert!((est.mean - 1.0).abs() < 1e-9);
                assert!(est.stderr < 1e-12);
            }
        }
    }

    #[test]
    fn ratio_estimate_degenerate() {
        let a = PsdMatrix::from_row_major(2, vec![0.0; 4]).unwrap();
        let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
        assert!(matches!(
            expected_ratio_estimate(&a, &g, 1, 10, 0),
            Err(GrothError::DegenerateInstance(_))
        ));
        assert!(expected_ratio_estimate(&PsdMatrix::identity(2).unwrap(), &g, 1, 1, 0).is_err());
    }

    #[test]
    fn reduction_all_equal_vectors() {
        let a = random_gram(6, 3, 8).unwrap();
        for n in 1..5 {
            let v = VectorSet::from_rows(&vec![{
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                e
            }; 6])
            .unwrap();
            let s = RoundedSolution::from_vectors(&a, v, 0).unwrap();
            let rep = hardness_reduction_check(&a, &s).unwrap();
            // M = (2/π)(π/2 − 1/γ(n))·J ⪰ 0
            let c = 2.0 / PI * (PI / 2.0 - 1.0 / gamma_n(n).unwrap());
            assert!(c >= -1e-15);
            assert!(rep.min_eig >= -1e-12);
            assert!(rep.passed());
            if n == 1 {
                assert!(rep.margin.abs() < 1e-12 * a.scale() * 6.0);
            }
        }
    }

    #[test]
    fn reduction_signs_give_zero_kernel() {
        let a = random_gram(5, 5, 1).unwrap();
        let v = VectorSet::new(1, vec![1.0, -1.0, -1.0, 1.0, 1.0]).unwrap();
        let s = RoundedSolution::from_vectors(&a, v, 0).unwrap();
        let rep = hardness_reduction_check(&a, &s).unwrap();
        assert!(rep.min_eig.abs() < 1e-12);
        assert!(rep.margin.abs() < 1e-12 * a.scale() * 5.0);
    }

    #[test]
    fn reduction_rejects_non_unit_vectors() {
        let a = PsdMatrix::identity(2).unwrap();
        let v = VectorSet::new(2, vec![1.0, 0.0, 1.1, 0.0]).unwrap();
        let s = RoundedSolution { n: 2, vectors: v, objective: 0.0, seed_used: 0 };
        assert!(matches!(hardness_reduction_check(&a, &s), Err(GrothError::Numerical(_))));
    }
}
