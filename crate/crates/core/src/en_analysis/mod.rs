//! The expected inner product after Gaussian projection,
//!
//! ```text
//! E_n(t) = E[ Xu/‖Xu‖ · Xv/‖Xv‖ ],   u·v = t,  X ∈ R^{n×m} standard Gaussian,
//! ```
//!
//! and the quantities derived from it: its linear Taylor coefficient `f_1`,
//! the Laplacian ratio `v(n) = min_t (1 − E_n(t))/(1 − t)`, and expansions
//! of kernels in the bases that characterize positive type on spheres.
//!
//! For `n ≥ 2`, `E_n` is evaluated from the double integral obtained by
//! integrating the Wishart density of the 2×2 Gram matrix of the two
//! projected columns over its trace:
//!
//! ```text
//! E_n(t) = (n−1)/(2π) ∫_0^1 ∫_0^{2π} (t + r cos φ) r (1−r²)^{(n−3)/2}
//!                      / √((1 + r t cos φ)² − r²(1−t²) sin² φ)  dφ dr.
//! ```
//!
//! With `r = sin ψ` the weight becomes `cos^{n−2} ψ`, which is bounded for
//! all `n ≥ 2`. The φ-integrand is even, so only `[0, π]` is integrated, and
//! that range is split at `φ* = arccos(−t)`: as `r → 1` the integrand tends
//! to `sign(cos φ + t)`, and a rule that straddles the jump loses several
//! digits. For `n = 1` the closed form `(2/π) arcsin t` is used.

mod expansion;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GrothError, Result};
use crate::rng::{self, derive_seed};
use crate::special::gauss_legendre_cached;
use crate::stats::{Estimate, RunningStats};

pub use expansion::{
    check_positive_type_matrix, positive_type_expand, positive_type_expand_with_order,
    taylor_expand, ExpansionBasis, PositiveTypeExpansion,
};

/// Points per axis of the tensor Gauss–Legendre rule.
pub const EN_QUADRATURE_ORDER: usize = 200;
/// Curve scans keep `|t| ≤ 1 − 1e−6` away from the exact endpoints.
pub const CURVE_T_CAP: f64 = 1.0 - 1e-6;
/// Step of the central difference used for `f_1`.
pub const F1_STEP: f64 = 1e-3;
/// Grid step of the `v(n)` scan.
pub const VN_GRID_STEP: f64 = 1e-3;
/// Golden-section tolerance in `t` for the `v(n)` minimizer.
pub const VN_T_TOL: f64 = 1e-8;

const MC_CHUNK: u64 = 1 << 16;

fn check_args(n: usize, t: f64) -> Result<()> {
    if n < 1 {
        return Err(GrothError::invalid("E_n requires n ≥ 1"));
    }
    if !(t.abs() <= 1.0) {
        return Err(GrothError::invalid(format!("E_n requires t ∈ [−1, 1], got {t}")));
    }
    Ok(())
}

/// `E_n(t)` by quadrature (closed form for `n = 1`).
pub fn en_integral(n: usize, t: f64) -> Result<f64> {
    en_integral_with_order(n, t, EN_QUADRATURE_ORDER)
}

pub fn en_integral_with_order(n: usize, t: f64, order: usize) -> Result<f64> {
    check_args(n, t)?;
    if order < 1 {
        return Err(GrothError::invalid("quadrature order must be ≥ 1"));
    }
    if n == 1 {
        return Ok(2.0 / PI * t.asin());
    }
    if t == 1.0 || t == -1.0 {
        return Ok(t);
    }

    let rule = gauss_legendre_cached(order);
    let kink = (-t).acos();
    let mut cos_phi = Vec::with_capacity(2 * order);
    let mut sin2_phi = Vec::with_capacity(2 * order);
    let mut w_phi = Vec::with_capacity(2 * order);
    for (a, b) in [(0.0, kink), (kink, PI)] {
        let (xs, ws) = rule.mapped(a, b);
        for (phi, w) in xs.into_iter().zip(ws) {
            let (s, c) = phi.sin_cos();
            cos_phi.push(c);
            sin2_phi.push(s * s);
            w_phi.push(w);
        }
    }

    let (psis, w_psi) = rule.mapped(0.0, PI / 2.0);
    let one_minus_t2 = 1.0 - t * t;
    let exponent = (n - 2) as i32;
    let mut total = 0.0;
    for (&psi, &wp) in psis.iter().zip(&w_psi) {
        let (r, c) = psi.sin_cos();
        let weight = wp * r * c.powi(exponent);
        if weight == 0.0 {
            continue;
        }
        let r2 = r * r;
        let mut inner = 0.0;
        for ((&cp, &s2), &w) in cos_phi.iter().zip(&sin2_phi).zip(&w_phi) {
            let lin = 1.0 + r * t * cp;
            let den = (lin * lin - r2 * one_minus_t2 * s2).max(f64::MIN_POSITIVE);
            inner += w * (t + r * cp) / den.sqrt();
        }
        total += weight * inner;
    }
    // (n−1)/(2π) times 2 for the folded φ-range
    Ok((n - 1) as f64 / PI * total)
}

/// Monte Carlo estimate of `E_n(t)` straight from the definition, with
/// `u = (cos θ, sin θ)`, `v = (cos θ, −sin θ)`, `cos 2θ = t`.
///
/// Samples are drawn in fixed-size chunks with per-chunk derived seeds and
/// merged in chunk order, so the result depends only on `(n, t, N, seed)`.
pub fn en_monte_carlo(n: usize, t: f64, samples: u64, seed: u64) -> Result<Estimate> {
    check_args(n, t)?;
    if samples < 2 {
        return Err(GrothError::invalid("Monte Carlo needs at least 2 samples"));
    }
    if t == 1.0 {
        return Ok(Estimate { mean: 1.0, stderr: 0.0, samples });
    }
    let theta = 0.5 * t.acos();
    let (s, c) = theta.sin_cos();
    let chunks = samples.div_ceil(MC_CHUNK);

    let parts: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut rng = rng::stream(derive_seed(seed, chunk));
            let mut cols = vec![0.0; 2 * n];
            let mut stats = RunningStats::new();
            let mut done = 0;
            while done < count {
                rng::fill_standard_normal(&mut rng, &mut cols);
                let (a, b) = cols.split_at(n);
                let (mut pq, mut pp, mut qq) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    let p = c * x + s * y;
                    let q = c * x - s * y;
                    pq += p * q;
                    pp += p * p;
                    qq += q * q;
                }
                if pp == 0.0 || qq == 0.0 {
                    continue;
                }
                stats.push(pq / (pp.sqrt() * qq.sqrt()));
                done += 1;
            }
            stats
        })
        .collect();

    let mut total = RunningStats::new();
    parts.iter().for_each(|p| total.merge(p));
    Ok(total.estimate())
}

/// `f_1 = E_n'(0)` by a Richardson-extrapolated central difference with
/// steps `h` and `h/2`.
pub fn f1_extract(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(GrothError::invalid("f_1 requires n ≥ 1"));
    }
    if n == 1 {
        return Ok(2.0 / PI);
    }
    let central = |h: f64| -> Result<f64> { Ok((en_integral(n, h)? - en_integral(n, -h)?) / (2.0 * h)) };
    let d1 = central(F1_STEP)?;
    let d2 = central(F1_STEP / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCurvePoint {
    pub t: f64,
    pub en_value: f64,
    /// `(1 − E_n(t))/(1 − t)`; undefined at `t = 1`.
    pub ratio: Option<f64>,
}

fn ratio_at(n: usize, t: f64) -> Result<f64> {
    Ok((1.0 - en_integral(n, t)?) / (1.0 - t))
}

/// `E_n` and the Laplacian ratio on `points` evenly spaced nodes of
/// `[−1, 1]`. Interior nodes are capped to `|t| ≤ 1 − 1e−6`.
pub fn ratio_curve(n: usize, points: usize) -> Result<Vec<RatioCurvePoint>> {
    if points < 2 {
        return Err(GrothError::invalid("a curve needs at least 2 points"));
    }
    (0..points)
        .into_par_iter()
        .map(|i| {
            let raw = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            let t = if i == 0 {
                -1.0
            } else if i == points - 1 {
                1.0
            } else {
                raw.clamp(-CURVE_T_CAP, CURVE_T_CAP)
            };
            let en_value = en_integral(n, t)?;
            let ratio = (t < 1.0).then(|| (1.0 - en_value) / (1.0 - t));
            Ok(RatioCurvePoint { t, en_value, ratio })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnResult {
    pub n: usize,
    pub value: f64,
    pub minimizer: f64,
    /// Another grid-local minimum whose value is within 1e−4 of the global
    /// one, if any.
    pub second_local_min: Option<RatioCurvePoint>,
}

/// `v(n) = min_{t ∈ [−1, 1)} (1 − E_n(t))/(1 − t)`: grid scan at step 1e−3
/// on `[−1, 1 − 1e−6]`, then golden-section refinement around the best
/// grid point.
pub fn v_n(n: usize) -> Result<VnResult> {
    if n < 1 {
        return Err(GrothError::invalid("v(n) requires n ≥ 1"));
    }
    let steps = ((2.0 - 1e-6) / VN_GRID_STEP).floor() as usize;
    let mut ts: Vec<f64> = (0..=steps).map(|i| -1.0 + i as f64 * VN_GRID_STEP).collect();
    if *ts.last().unwrap() < CURVE_T_CAP {
        ts.push(CURVE_T_CAP);
    }
    let values = ts.par_iter().map(|&t| ratio_at(n, t)).collect::<Result<Vec<f64>>>()?;

    let best = (0..values.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("grid is nonempty");
    let lo = ts[best.saturating_sub(1)];
    let hi = ts[(best + 1).min(ts.len() - 1)];

    let mut err = None;
    let (t_star, v_star) = golden_section_minimize(
        |t| {
            ratio_at(n, t).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::INFINITY
            })
        },
        lo,
        hi,
        VN_T_TOL,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let (minimizer, value) = if v_star <= values[best] { (t_star, v_star) } else { (ts[best], values[best]) };

    let second_local_min = (1..values.len() - 1)
        .filter(|&i| i.abs_diff(best) > 1)
        .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
        .filter(|&i| values[i] - value <= 1e-4)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .map(|i| RatioCurvePoint {
            t: ts[i],
            en_value: 1.0 - values[i] * (1.0 - ts[i]),
            ratio: Some(values[i]),
        });

    Ok(VnResult { n, value, minimizer, second_local_min })
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when
/// the bracket is narrower than `tol`. Returns `(x_min, f_min)`.
pub fn golden_section_minimize(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_n;

    #[test]
    fn closed_form_branch_for_n1() {
        assert!((en_integral(1, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for &t in &[-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!((en_integral(1, t).unwrap() - 2.0 / PI * f64::asin(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_points_and_errors() {
        for n in 1..8 {
            assert!(en_integral(n, 0.0).unwrap().abs() < 1e-15, "n = {n}");
            assert_eq!(en_integral(n, 1.0).unwrap(), 1.0);
            assert_eq!(en_integral(n, -1.0).unwrap(), -1.0);
        }
        assert!(en_integral(2, 1.0001).is_err());
        assert!(en_integral(2, f64::NAN).is_err());
        assert!(en_integral(0, 0.5).is_err());
    }

    #[test]
    fn odd_and_bounded() {
        for n in [2, 3, 4, 7] {
            for &t in &[0.05, 0.3, 0.61, 0.9, 0.999, CURVE_T_CAP] {
                let p = en_integral(n, t).unwrap();
                let q = en_integral(n, -t).unwrap();
                assert!((p + q).abs() < 1e-9, "n = {n}, t = {t}");
                assert!(p.abs() <= 1.0 + 1e-9);
                // projection can only lose correlation relative to rank ∞
                assert!(p > 0.0 && p <= t + 1e-9 || t < 0.0);
            }
        }
    }

    #[test]
    fn quadrature_order_converged() {
        for n in [2, 3, 5] {
            for &t in &[-0.9, -0.2, 0.4, 0.95] {
                let a = en_integral_with_order(n, t, EN_QUADRATURE_ORDER).unwrap();
                let b = en_integral_with_order(n, t, 2 * EN_QUADRATURE_ORDER).unwrap();
                assert!((a - b).abs() < 1e-8, "n = {n}, t = {t}: {:e}", (a - b).abs());
            }
        }
    }

    #[test]
    fn monte_carlo_trivial_cases() {
        let e = en_monte_carlo(3, 1.0, 1000, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let e = en_monte_carlo(1, 0.0, 200_000, 2).unwrap();
        assert!(e.agrees_with(0.0, 4.0), "{e:?}");
        let e = en_monte_carlo(1, 0.9, 200_000, 3).unwrap();
        assert!(e.agrees_with(2.0 / PI * 0.9f64.asin(), 4.0), "{e:?}");
        assert!(en_monte_carlo(2, 0.5, 1, 0).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = en_monte_carlo(4, 0.3, 100_000, 5).unwrap();
        let b = en_monte_carlo(4, 0.3, 100_000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn integral_agrees_with_monte_carlo() {
        for &(n, t) in &[(2, 0.3), (3, -0.7), (6, 0.5)] {
            let mc = en_monte_carlo(n, t, 1_000_000, 11).unwrap();
            let q = en_integral(n, t).unwrap();
            assert!(mc.agrees_with(q, 4.0), "n = {n}, t = {t}: {q} vs {mc:?}");
        }
    }

    #[test]
    fn f1_matches_gamma() {
        assert!((f1_extract(1).unwrap() - 2.0 / PI).abs() < 1e-10);
        assert!((f1_extract(2).unwrap() - PI / 4.0).abs() < 1e-6);
        assert!((f1_extract(3).unwrap() - 8.0 / (3.0 * PI)).abs() < 1e-6);
        for n in 4..=6 {
            assert!((f1_extract(n).unwrap() - gamma_n(n).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn golden_section_quadratic() {
        // a flat minimum only locates x to about √ε
        let (x, fx) = golden_section_minimize(|x| (x - 0.3).powi(2) + 1.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn v1_is_goemans_williamson() {
        let v = v_n(1).unwrap();
        assert!((v.value - 0.8785).abs() < 5e-4, "{v:?}");
        assert!((v.minimizer + 0.689).abs() < 2e-3, "{v:?}");
        assert!(v.second_local_min.is_none());
    }

    #[test]
    fn curve_endpoints() {
        let c = ratio_curve(3, 11).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c[0].en_value, -1.0);
        assert_eq!(c[0].ratio, Some(1.0));
        assert_eq!(c[10].ratio, None);
        assert!(c[5].en_value.abs() < 1e-15);
    }
}
