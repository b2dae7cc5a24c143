//! Exhaustive ground truth for tiny instances: the exact sign optimum
//! (`n = 1`) and a grid lower bound for rank 2.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GrothError, Result};
use crate::matrix::PsdMatrix;
use crate::sdp_solver::objective_value;
use crate::vectors::VectorSet;

pub const MAX_BRUTE_FORCE_ORDER: usize = 22;
pub const MAX_GRID_ORDER: usize = 6;
pub const MAX_GRID_RESOLUTION: usize = 720;
pub const GRID_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    Signs(Vec<i8>),
    /// Angles in radians of `u_i = (cos θ_i, sin θ_i)`.
    Angles(Vec<f64>),
}

impl Assignment {
    pub fn to_vectors(&self) -> VectorSet {
        match self {
            Assignment::Signs(s) => VectorSet::new(1, s.iter().map(|&x| x as f64).collect()),
            Assignment::Angles(th) => VectorSet::new(2, th.iter().flat_map(|t| [t.cos(), t.sin()]).collect()),
        }
        .expect("assignment vectors have a consistent dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Exhaustive,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub argmax: Assignment,
    pub method: OracleMethod,
    /// Number of complete candidates evaluated.
    pub work: u64,
}

/// `max xᵀAx` over `x ∈ {±1}^m` with `x_1 = +1`.
///
/// The free signs are split by their leading bits into independent blocks;
/// each block is walked in Gray-code order, updating `Ax` and the objective
/// in `O(m)` per flip.
pub fn brute_force_sdp1(a: &PsdMatrix) -> Result<OracleResult> {
    let m = a.order();
    if m > MAX_BRUTE_FORCE_ORDER {
        return Err(GrothError::TooLarge(format!(
            "exhaustive sign search is limited to m ≤ {MAX_BRUTE_FORCE_ORDER}, got {m}"
        )));
    }
    let free = m.saturating_sub(1);
    let lead = free.min(6);
    let low = free - lead;

    let blocks: Vec<(f64, Vec<i8>)> = (0..1u64 << lead)
        .into_par_iter()
        .map(|block| {
            let mut x = vec![1i8; m];
            for b in 0..lead {
                if block >> b & 1 == 1 {
                    x[1 + low + b] = -1;
                }
            }
            let mut ax: Vec<f64> = (0..m)
                .map(|i| a.row(i).iter().zip(&x).map(|(v, &s)| v * s as f64).sum())
                .collect();
            let mut obj: f64 = ax.iter().zip(&x).map(|(v, &s)| v * s as f64).sum();
            let mut best = (obj, x.clone());
            for step in 1..1u64 << low {
                let j = 1 + step.trailing_zeros() as usize;
                let xj = x[j] as f64;
                obj += 4.0 * (a.get(j, j) - xj * ax[j]);
                for (v, col) in ax.iter_mut().zip(a.row(j)) {
                    *v -= 2.0 * xj * col;
                }
                x[j] = -x[j];
                if obj > best.0 {
                    best = (obj, x.clone());
                }
            }
            best
        })
        .collect();

    let (_, signs) = blocks
        .into_iter()
        .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
        .expect("at least one block");
    let argmax = Assignment::Signs(signs);
    let value = objective_value(a, &argmax.to_vectors())?;
    Ok(OracleResult { value, argmax, method: OracleMethod::Exhaustive, work: 1 << free })
}

struct Grid<'a> {
    a: &'a PsdMatrix,
    m: usize,
    k: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Grid<'_> {
    fn cos_diff(&self, p: usize, q: usize) -> f64 {
        self.cos[(p + self.k - q) % self.k]
    }

    /// Contribution of vector `l` at grid index `kl` against `idx[..l]`.
    fn added(&self, idx: &[usize], l: usize, kl: usize) -> f64 {
        let row = self.a.row(l);
        let cross: f64 = idx[..l].iter().zip(row).map(|(&kj, v)| v * self.cos_diff(kl, kj)).sum();
        row[l] + 2.0 * cross
    }

    /// Best grid angle for the last vector given all the others.
    fn close(&self, idx: &mut [usize], prefix: f64) -> f64 {
        let last = self.m - 1;
        let row = self.a.row(last);
        let (mut gx, mut gy) = (0.0, 0.0);
        for (&kj, v) in idx[..last].iter().zip(row) {
            gx += v * self.cos[kj];
            gy += v * self.sin[kj];
        }
        let pos = gy.atan2(gx).rem_euclid(2.0 * PI) * self.k as f64 / (2.0 * PI);
        let lo = (pos.floor() as usize) % self.k;
        let hi = (lo + 1) % self.k;
        let score = |kl: usize| gx * self.cos[kl] + gy * self.sin[kl];
        let (s_lo, s_hi) = (score(lo), score(hi));
        let (pick, s) = if s_hi > s_lo || (s_hi == s_lo && hi < lo) { (hi, s_hi) } else { (lo, s_lo) };
        idx[last] = pick;
        prefix + row[last] + 2.0 * s
    }

    fn search(&self, idx: &mut Vec<usize>, prefix: f64, best: &mut (f64, Vec<usize>), work: &mut u64) {
        let l = idx.len();
        if l == self.m - 1 {
            idx.push(0);
            let value = self.close(idx, prefix);
            *work += 1;
            if value > best.0 {
                *best = (value, idx.clone());
            }
            idx.pop();
            return;
        }
        for kl in 0..self.k {
            let p = prefix + self.added(idx, l, kl);
            idx.push(kl);
            self.search(idx, p, best, work);
            idx.pop();
        }
    }
}

/// Grid lower bound on the rank-2 optimum: `u_i = (cos 2πk_i/K, sin 2πk_i/K)`
/// with `k_1 = 0`.
///
/// Vectors `2..m−1` are enumerated; for each such choice the last vector's
/// best grid angle is one of the two grid neighbours of the direction of
/// `Σ_j A_mj u_j`, so the search costs `K^{m−2}` complete candidates.
pub fn grid_search_rank2(a: &PsdMatrix, resolution: usize) -> Result<OracleResult> {
    let m = a.order();
    if m > MAX_GRID_ORDER {
        return Err(GrothError::TooLarge(format!("grid search is limited to m ≤ {MAX_GRID_ORDER}, got {m}")));
    }
    if resolution == 0 || resolution > MAX_GRID_RESOLUTION {
        return Err(GrothError::invalid(format!(
            "angular resolution must be in 1..={MAX_GRID_RESOLUTION}, got {resolution}"
        )));
    }
    let budget = (resolution as u64).checked_pow(m.saturating_sub(2) as u32);
    if budget.is_none_or(|b| b > GRID_BUDGET) {
        return Err(GrothError::TooLarge(format!(
            "grid search would evaluate {resolution}^{} > {GRID_BUDGET} candidates",
            m.saturating_sub(2)
        )));
    }

    let step = 2.0 * PI / resolution as f64;
    let grid = Grid {
        a,
        m,
        k: resolution,
        cos: (0..resolution).map(|i| (step * i as f64).cos()).collect(),
        sin: (0..resolution).map(|i| (step * i as f64).sin()).collect(),
    };

    let (indices, work) = if m == 1 {
        (vec![0], 1)
    } else if m == 2 {
        let mut idx = vec![0, 0];
        grid.close(&mut idx, a.get(0, 0));
        (idx, 1)
    } else {
        let first = a.get(0, 0);
        let parts: Vec<((f64, Vec<usize>), u64)> = (0..resolution)
            .into_par_iter()
            .map(|k1| {
                let mut idx = vec![0, k1];
                let prefix = first + grid.added(&idx, 1, k1);
                let mut best = (f64::NEG_INFINITY, Vec::new());
                let mut work = 0;
                grid.search(&mut idx, prefix, &mut best, &mut work);
                (best, work)
            })
            .collect();
        let work = parts.iter().map(|p| p.1).sum();
        let best = parts
            .into_iter()
            .map(|p| p.0)
            .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
            .expect("resolution ≥ 1");
        (best.1, work)
    };

    let argmax = Assignment::Angles(indices.iter().map(|&k| step * k as f64).collect());
    let value = objective_value(a, &argmax.to_vectors())?;
    Ok(OracleResult { value, argmax, method: OracleMethod::Grid, work })
}
