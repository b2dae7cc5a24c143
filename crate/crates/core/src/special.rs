//! Closed-form constants, Jacobi polynomials and quadrature.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{GrothError, Result};

/// Default Gauss–Legendre order for `(f, g)_α` inner products.
pub const DEFAULT_INNER_ORDER: usize = 400;

/// `γ(n) = (2/n)·(Γ((n+1)/2)/Γ(n/2))²`, evaluated in log space.
pub fn gamma_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(GrothError::invalid("γ(n) requires n ≥ 1"));
    }
    let x = n as f64;
    Ok((LN_2 - x.ln() + 2.0 * (ln_gamma((x + 1.0) / 2.0) - ln_gamma(x / 2.0))).exp())
}

/// `c(m) = 1/γ(m)`: the largest `c` with `arcsin t − c·t` of positive type
/// on `S^{m-1}`.
pub fn c_m(m: usize) -> Result<f64> {
    Ok(1.0 / gamma_n(m)?)
}

/// Sphere parameter `α = (m−3)/2` for `S^{m-1}`; requires `m ≥ 2`.
pub fn sphere_alpha(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(GrothError::invalid(format!(
            "sphere S^{{m-1}} needs m ≥ 2 for an integrable weight, got m = {m}"
        )));
    }
    Ok((m as f64 - 3.0) / 2.0)
}

/// `(t, t)_α = Γ(3/2)Γ(α+1)/Γ(α+5/2)`.
pub fn linear_moment(alpha: f64) -> f64 {
    (ln_gamma(1.5) + ln_gamma(alpha + 1.0) - ln_gamma(alpha + 2.5)).exp()
}

/// `(arcsin t, t)_α = Γ(1/2)Γ(α+3/2) / ((2α+2)Γ(α+2))`.
pub fn arcsin_moment(alpha: f64) -> f64 {
    (ln_gamma(0.5) + ln_gamma(alpha + 1.5) - ln_gamma(alpha + 2.0)).exp() / (2.0 * alpha + 2.0)
}

/// `c(m)` as the quadrature ratio `(arcsin t, t)_α / (t, t)_α`.
pub fn c_m_quadrature(m: usize, order: usize) -> Result<f64> {
    let measure = AlphaMeasure::new(sphere_alpha(m)?, order)?;
    Ok(measure.inner(f64::asin, |t| t) / measure.inner(|t| t, |t| t))
}

/// `P_i^{(α,α)}(t)` by the three-term recurrence.
pub fn jacobi_poly(i: usize, alpha: f64, t: f64) -> f64 {
    let mut out = vec![0.0; i + 1];
    jacobi_all(alpha, t, &mut out);
    out[i]
}

/// Fills `out[k] = P_k^{(α,α)}(t)` for `k < out.len()`.
pub fn jacobi_all(alpha: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = (alpha + 1.0) * t;
    for k in 2..out.len() {
        let n = k as f64;
        let a = n + alpha;
        out[k] = a * ((2.0 * a - 1.0) * t * out[k - 1] - (a - 1.0) * out[k - 2]) / (n * (n + 2.0 * alpha));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Strictly increasing nodes in (−1, 1).
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        (
            self.nodes.iter().map(|x| mid + half * x).collect(),
            self.weights.iter().map(|w| half * w).collect(),
        )
    }

    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|x| f(mid + half * x))
    }
}

/// Legendre `P_n(x)` and `P_n'(x)`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of the given order by Newton iteration on the roots
/// of `P_order`.
pub fn gauss_legendre(order: usize) -> QuadratureRule {
    assert!(order >= 1, "quadrature order must be ≥ 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        // refresh the derivative at the converged root
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out descending from +1
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights, order }
}

/// Shared, lazily built rules for the orders used by the analysis code.
pub(crate) fn gauss_legendre_cached(order: usize) -> Arc<QuadratureRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(gauss_legendre(order)))
        .clone()
}

/// Discretization of `(1−t²)^α dt` on `[−1, 1]`, computed as
/// `(sin θ)^{2α+1} dθ` on `[0, π]` with `t = cos θ`.
#[derive(Debug, Clone)]
pub struct AlphaMeasure {
    pub alpha: f64,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AlphaMeasure {
    pub fn new(alpha: f64, order: usize) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(GrothError::invalid(format!("weight exponent α must exceed −1, got {alpha}")));
        }
        if order < 1 {
            return Err(GrothError::invalid("quadrature order must be ≥ 1"));
        }
        let rule = gauss_legendre_cached(order);
        let (thetas, ws) = rule.mapped(0.0, PI);
        let exponent = 2.0 * alpha + 1.0;
        let points = thetas.iter().map(|th| th.cos()).collect();
        let weights = thetas.iter().zip(&ws).map(|(th, w)| w * th.sin().powf(exponent)).collect();
        Ok(Self { alpha, points, weights })
    }

    pub fn inner(&self, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * f(t) * g(t)).sum()
    }
}

/// `(f, g)_α = ∫_{−1}^{1} f(t) g(t) (1−t²)^α dt`.
pub fn inner_product_alpha(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    alpha: f64,
    order: usize,
) -> Result<f64> {
    Ok(AlphaMeasure::new(alpha, order)?.inner(f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn gamma_table() {
        assert!((gamma_n(1).unwrap() - 2.0 / PI).abs() < 1e-12);
        assert!((gamma_n(2).unwrap() - PI / 4.0).abs() < 1e-12);
        assert!((gamma_n(3).unwrap() - 8.0 / (3.0 * PI)).abs() < 1e-12);
        assert!(matches!(gamma_n(0), Err(GrothError::InvalidInput(_))));
    }

    #[test]
    fn gamma_monotone_and_bounded() {
        let mut prev = 0.0;
        for n in 1..=10_000 {
            let g = gamma_n(n).unwrap();
            assert!(g > prev && g < 1.0, "n = {n}");
            prev = g;
        }
        assert!(gamma_n(10_000).unwrap() > 0.99995);
        assert!(gamma_n(1_000_000).unwrap().is_finite());
    }

    #[test]
    fn log_path_matches_direct_gamma() {
        for n in 1..=30 {
            let x = n as f64;
            let direct = 2.0 / x * (gamma((x + 1.0) / 2.0) / gamma(x / 2.0)).powi(2);
            let rel = (gamma_n(n).unwrap() - direct).abs() / direct;
            assert!(rel < 1e-13, "n = {n}: rel {rel:e}");
        }
    }

    #[test]
    fn c_m_values() {
        assert!((c_m(1).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((c_m(2).unwrap() - 4.0 / PI).abs() < 1e-12);
        let q = c_m_quadrature(100, DEFAULT_INNER_ORDER).unwrap();
        assert!((c_m(100).unwrap() - q).abs() < 1e-10);
        assert!(c_m_quadrature(1, 10).is_err());
    }

    #[test]
    fn jacobi_low_degrees() {
        for &alpha in &[-0.5, 0.0, 0.5, 3.5] {
            for &t in &[-0.9, -0.1, 0.3, 1.0] {
                assert_eq!(jacobi_poly(0, alpha, t), 1.0);
                assert!((jacobi_poly(1, alpha, t) - (alpha + 1.0) * t).abs() < 1e-15);
            }
        }
        // α = 0 is Legendre: P_2 = (3t² − 1)/2
        assert!((jacobi_poly(2, 0.0, 0.3) - (3.0 * 0.09 - 1.0) / 2.0).abs() < 1e-15);
        // α = 1/2: P_n(1) = (α+1)_n / n! = Γ(n+α+1)/(Γ(α+1) n!)
        let n = 6;
        let expected = (ln_gamma(n as f64 + 1.5) - ln_gamma(1.5) - ln_gamma(n as f64 + 1.0)).exp();
        assert!((jacobi_poly(n, 0.5, 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn jacobi_orthogonality() {
        let ip = inner_product_alpha(|t| jacobi_poly(2, 0.5, t), |t| jacobi_poly(3, 0.5, t), 0.5, 400).unwrap();
        assert!(ip.abs() < 1e-12);
        let ip = inner_product_alpha(|t| jacobi_poly(2, 1.0, t), |t| jacobi_poly(4, 1.0, t), 1.0, 400).unwrap();
        assert!(ip.abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let r2 = gauss_legendre(2);
        assert!((r2.integrate(|t| t * t) - 2.0 / 3.0).abs() < 1e-14);
        for order in [1, 2, 4, 5, 17, 64, 200, 400] {
            let r = gauss_legendre(order);
            assert_eq!(r.nodes.len(), order);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14, "order {order}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            if order >= 4 {
                assert!(r.integrate(|t| t.powi(7)).abs() < 1e-15);
            }
            // exact up to degree 2·order − 1 (capped so monomials stay well scaled)
            for k in (0..(2 * order).min(40)).step_by(2) {
                let exact = 2.0 / (k as f64 + 1.0);
                assert!((r.integrate(|t| t.powi(k as i32)) - exact).abs() < 1e-14, "order {order} k {k}");
            }
        }
    }

    #[test]
    fn moment_closed_forms_against_quadrature() {
        for &alpha in &[-0.5, 0.0, 1.0, 3.5] {
            let tt = inner_product_alpha(|t| t, |t| t, alpha, 400).unwrap();
            assert!((tt - linear_moment(alpha)).abs() < 1e-10, "α = {alpha}");
            let at = inner_product_alpha(f64::asin, |t| t, alpha, 400).unwrap();
            assert!((at - arcsin_moment(alpha)).abs() < 1e-10, "α = {alpha}");
        }
        let one = inner_product_alpha(|_| 1.0, |_| 1.0, 0.0, 400).unwrap();
        assert!((one - 2.0).abs() < 1e-14);
        assert!(inner_product_alpha(|t| t, |t| t, -1.0, 400).is_err());
    }

    #[test]
    fn c_m_closed_form_matches_quadrature() {
        for m in 2..=50 {
            let q = c_m_quadrature(m, DEFAULT_INNER_ORDER).unwrap();
            assert!((q - c_m(m).unwrap()).abs() < 1e-9, "m = {m}");
        }
    }
}
