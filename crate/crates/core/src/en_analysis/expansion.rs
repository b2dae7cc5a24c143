//! Expansions of kernels `f: [−1, 1] → R` whose coefficients decide
//! positive type: Jacobi `P_i^{(α,α)}`, `α = (m−3)/2`, for `S^{m−1}`, and
//! the power series for `S^∞`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GrothError, Result};
use crate::matrix::min_eigenvalue;
use crate::special::{jacobi_all, sphere_alpha, AlphaMeasure, DEFAULT_INNER_ORDER};
use crate::vectors::VectorSet;

/// Relative disagreement allowed between quadrature orders `q` and `2q`.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Negative residual tolerated before it is treated as quadrature failure.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpansionBasis {
    Jacobi { alpha: f64 },
    /// Power series, sampled on a circle of the given radius.
    Taylor { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveTypeExpansion {
    /// Sphere parameter; `None` for the power-series basis.
    pub m: Option<usize>,
    pub basis: ExpansionBasis,
    pub max_degree: usize,
    pub coefficients: Vec<f64>,
    /// Tail mass not captured by `coefficients`, clamped at 0.
    pub residual: f64,
}

impl PositiveTypeExpansion {
    pub fn min_coefficient(&self) -> f64 {
        self.coefficients.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_type(&self, tol: f64) -> bool {
        self.min_coefficient() >= -tol
    }
}

struct Projection {
    coefficients: Vec<f64>,
    norms: Vec<f64>,
    self_inner: f64,
}

fn project(f: &impl Fn(f64) -> f64, alpha: f64, max_degree: usize, order: usize) -> Result<Projection> {
    let measure = AlphaMeasure::new(alpha, order)?;
    let mut num = vec![0.0; max_degree + 1];
    let mut norms = vec![0.0; max_degree + 1];
    let mut p = vec![0.0; max_degree + 1];
    let mut self_inner = 0.0;
    for (&t, &w) in measure.points.iter().zip(&measure.weights) {
        let ft = f(t);
        if !ft.is_finite() {
            return Err(GrothError::Numerical(format!("kernel is not finite at t = {t}")));
        }
        self_inner += w * ft * ft;
        jacobi_all(alpha, t, &mut p);
        for ((n, h), &pi) in num.iter_mut().zip(norms.iter_mut()).zip(&p) {
            *n += w * ft * pi;
            *h += w * pi * pi;
        }
    }
    let coefficients = num.iter().zip(&norms).map(|(n, h)| n / h).collect();
    Ok(Projection { coefficients, norms, self_inner })
}

/// Jacobi coefficients of `f` for `S^{m−1}` up to `max_degree`.
pub fn positive_type_expand(f: impl Fn(f64) -> f64, m: usize, max_degree: usize) -> Result<PositiveTypeExpansion> {
    positive_type_expand_with_order(f, m, max_degree, DEFAULT_INNER_ORDER)
}

/// As [`positive_type_expand`], with quadrature order `order`; the result
/// is rejected unless order `2·order` reproduces every coefficient.
pub fn positive_type_expand_with_order(
    f: impl Fn(f64) -> f64,
    m: usize,
    max_degree: usize,
    order: usize,
) -> Result<PositiveTypeExpansion> {
    let alpha = sphere_alpha(m)?;
    let base = project(&f, alpha, max_degree, order)?;
    let check = project(&f, alpha, max_degree, 2 * order)?;
    for (i, (a, b)) in base.coefficients.iter().zip(&check.coefficients).enumerate() {
        if !((a - b).abs() <= CONVERGENCE_TOL * b.abs().max(1.0)) {
            return Err(GrothError::Numerical(format!(
                "coefficient {i} not converged: {a:e} at order {order}, {b:e} at order {}",
                2 * order
            )));
        }
    }

    let captured: f64 = base.coefficients.iter().zip(&base.norms).map(|(c, h)| c * c * h).sum();
    let residual = base.self_inner - captured;
    if residual < -RESIDUAL_TOL * base.self_inner.max(1.0) {
        return Err(GrothError::Numerical(format!("negative residual {residual:e}")));
    }

    Ok(PositiveTypeExpansion {
        m: Some(m),
        basis: ExpansionBasis::Jacobi { alpha },
        max_degree,
        coefficients: base.coefficients,
        residual: residual.max(0.0),
    })
}

/// Power-series coefficients `a_0..a_max_degree` of a kernel analytic on
/// the closed disk of the given radius, from the Cauchy integral on that
/// circle (trapezoidal rule, at least 64 points). The residual is
/// `|f(1) − Σ a_k|`.
pub fn taylor_expand(
    f: impl Fn(Complex64) -> Complex64,
    max_degree: usize,
    radius: f64,
) -> Result<PositiveTypeExpansion> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(GrothError::invalid(format!("radius must lie in (0, 1], got {radius}")));
    }
    let points = (2 * (max_degree + 1)).max(64).next_power_of_two();
    let samples: Vec<Complex64> = (0..points)
        .map(|j| f(Complex64::from_polar(radius, 2.0 * PI * j as f64 / points as f64)))
        .collect();
    if samples.iter().any(|z| !z.is_finite()) {
        return Err(GrothError::Numerical("kernel is not finite on the sampling circle".into()));
    }
    let coefficients: Vec<f64> = (0..=max_degree)
        .map(|k| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, z)| z * Complex64::from_polar(1.0, -2.0 * PI * (j * k % points) as f64 / points as f64))
                .sum();
            sum.re / points as f64 / radius.powi(k as i32)
        })
        .collect();
    let at_one = f(Complex64::new(1.0, 0.0)).re;
    let residual = (at_one - coefficients.iter().sum::<f64>()).abs();
    Ok(PositiveTypeExpansion {
        m: None,
        basis: ExpansionBasis::Taylor { radius },
        max_degree,
        coefficients,
        residual,
    })
}

/// `λ_min` of the kernel matrix `(f(v_i·v_j))` with inner products clamped
/// to `[−1, 1]`.
pub fn check_positive_type_matrix(f: impl Fn(f64) -> f64, vectors: &VectorSet) -> f64 {
    let n = vectors.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = f(vectors.dot(i, j).clamp(-1.0, 1.0));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    min_eigenvalue(k)
}
