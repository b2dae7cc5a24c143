//! Low-rank block-coordinate ascent for the unconstrained-rank relaxation
//!
//! ```text
//! maximize  Σ_ij A_ij u_i·u_j   over unit vectors u_i ∈ R^k.
//! ```
//!
//! Each block update replaces `u_i` by `g_i/‖g_i‖` with
//! `g_i = Σ_{j≠i} A_ij u_j`, the exact maximizer of the objective over `u_i`
//! with the other vectors fixed, so the objective never decreases. For
//! `k ≥ ⌈√(2m)⌉+1` the rank exceeds the bound on extreme points of the
//! relaxation, and several random restarts are run; the best restart is
//! returned. The result is always a feasible point, hence a lower bound on
//! the optimum.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GrothError, Result};
use crate::matrix::{PsdMatrix, DEFAULT_PSD_TOL};
use crate::rng;
use crate::vectors::{dot, VectorSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Embedding dimension; `None` selects [`default_rank`].
    pub k: Option<usize>,
    /// Stop once the gain still expected from further sweeps, extrapolated
    /// from the last two sweep gains, is below `tol·|objective|`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Certify the input PSD (at `psd_tol`) if it is not already.
    pub check_psd: bool,
    pub psd_tol: f64,
    /// Keep the per-sweep objective history of the returned restart.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: None,
            tol: 1e-10,
            max_sweeps: 10_000,
            restarts: 5,
            seed: 0,
            check_psd: true,
            psd_tol: DEFAULT_PSD_TOL,
            record_trace: false,
        }
    }
}

/// `min(m, ⌈√(2m)⌉ + 1)`.
pub fn default_rank(m: usize) -> usize {
    let bound = (2.0 * m as f64).sqrt().ceil() as usize + 1;
    bound.min(m).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramSolution {
    pub m: usize,
    pub k: usize,
    pub vectors: VectorSet,
    pub objective: f64,
    /// Sweeps performed by the returned restart.
    pub iterations: usize,
    pub converged: bool,
    /// Index of the restart that produced this solution.
    pub restart: usize,
    /// Objective after initialization and after every sweep, when requested.
    pub trace: Vec<f64>,
}

impl GramSolution {
    /// Wraps externally supplied vectors, normalizing each and evaluating
    /// the objective against `a`.
    pub fn from_vectors(a: &PsdMatrix, mut vectors: VectorSet) -> Result<Self> {
        if vectors.len() != a.order() {
            return Err(GrothError::DimensionMismatch { expected: a.order(), got: vectors.len() });
        }
        for i in 0..vectors.len() {
            let v = vectors.get_mut(i);
            let norm = dot(v, v).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(GrothError::invalid(format!("vector {i} has zero or non-finite norm")));
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let objective = objective_value(a, &vectors)?;
        Ok(Self {
            m: a.order(),
            k: vectors.dim(),
            vectors,
            objective,
            iterations: 0,
            converged: true,
            restart: 0,
            trace: Vec::new(),
        })
    }
}

/// `Σ_i Σ_j A_ij u_i·u_j`, accumulated row by row in index order.
pub fn objective_value(a: &PsdMatrix, vectors: &VectorSet) -> Result<f64> {
    let m = a.order();
    if vectors.len() != m {
        return Err(GrothError::DimensionMismatch { expected: m, got: vectors.len() });
    }
    let mut total = 0.0;
    for i in 0..m {
        let ui = vectors.get(i);
        let row = a.row(i);
        for (aij, uj) in row.iter().zip(vectors.iter()) {
            total += aij * dot(ui, uj);
        }
    }
    Ok(total)
}

pub fn solve_sdp_relaxation(a: &PsdMatrix, cfg: &SolverConfig) -> Result<GramSolution> {
    if !(cfg.tol > 0.0) {
        return Err(GrothError::invalid(format!("solver tolerance must be positive, got {}", cfg.tol)));
    }
    if cfg.k == Some(0) {
        return Err(GrothError::invalid("embedding dimension k must be ≥ 1"));
    }
    let certified;
    let a = if cfg.check_psd && a.psd_certified().is_none() {
        certified = a.clone().certify(cfg.psd_tol)?;
        &certified
    } else {
        a
    };
    let k = cfg.k.unwrap_or_else(|| default_rank(a.order()));
    let restarts = cfg.restarts.max(1);

    let runs: Vec<GramSolution> = (0..restarts)
        .into_par_iter()
        .map(|r| ascend(a, k, cfg, r))
        .collect();

    // max objective, lowest restart index on ties
    let best = runs
        .into_iter()
        .reduce(|best, cand| if cand.objective > best.objective { cand } else { best })
        .expect("at least one restart");
    Ok(best)
}

/// Cap on the estimated contraction rate of successive sweep gains.
const MAX_RATE: f64 = 1.0 - 1e-4;

fn ascend(a: &PsdMatrix, k: usize, cfg: &SolverConfig, restart: usize) -> GramSolution {
    let m = a.order();
    let mut rng = rng::stream(cfg.seed.wrapping_add(restart as u64));
    let mut u = VectorSet::zeros(m, k);
    for i in 0..m {
        u.get_mut(i).copy_from_slice(&rng::random_unit_vector(&mut rng, k));
    }

    let mut objective = objective_value(a, &u).expect("dimensions match");
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(objective);
    }
    let slack = 1e-12 * (m as f64) * a.scale().max(f64::MIN_POSITIVE);
    let mut g = vec![0.0; k];
    let mut sweeps = 0;
    let mut converged = false;
    let mut last_improvement: Option<f64> = None;

    while sweeps < cfg.max_sweeps {
        for i in 0..m {
            g.iter_mut().for_each(|x| *x = 0.0);
            let row = a.row(i);
            for (j, &aij) in row.iter().enumerate() {
                if j == i || aij == 0.0 {
                    continue;
                }
                for (gx, ux) in g.iter_mut().zip(u.get(j)) {
                    *gx += aij * ux;
                }
            }
            let norm = dot(&g, &g).sqrt();
            if norm == 0.0 {
                continue;
            }
            for (ux, gx) in u.get_mut(i).iter_mut().zip(&g) {
                *ux = gx / norm;
            }
        }
        sweeps += 1;

        let next = objective_value(a, &u).expect("dimensions match");
        debug_assert!(
            next >= objective - slack,
            "coordinate ascent decreased the objective: {objective} -> {next}"
        );
        if cfg.record_trace {
            trace.push(next);
        }
        let improvement = next - objective;
        objective = next;
        // Linear convergence leaves about Δ/(1−ρ) still to gain after a
        // sweep that gained Δ, where ρ is the ratio of successive gains.
        let rate = match last_improvement {
            Some(prev) if prev > 0.0 => (improvement / prev).clamp(0.0, MAX_RATE),
            _ => MAX_RATE,
        };
        if improvement <= 0.0 || improvement / (1.0 - rate) <= cfg.tol * objective.abs() {
            converged = true;
            break;
        }
        last_improvement = Some(improvement);
    }

    GramSolution { m, k, vectors: u, objective, iterations: sweeps, converged, restart, trace }
}
