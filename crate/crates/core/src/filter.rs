//! The WaveHoltz time filter and its transfer function.
//!
//! One filtered period maps a mode `e^{λt}` to `β(λ) e^{0}`, where
//!
//! ```text
//! β(λ) = (2/T) ∫₀ᵀ (cos ωt − 1/4) e^{λt} dt,   T = 2π/ω,
//! ```
//!
//! and `β(λ) = β̂(λ/ω)` with the frequency-free form
//! `β̂(z) = (1/π) ∫₀^{2π} (cos s − 1/4) e^{zs} ds`. The closed form of `β̂`
//! has removable singularities at `0` and `±i`; inside a small disc around
//! each of them a local Taylor expansion is used instead.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{check_omega, Result};

/// A point of the complex plane, typically a scaled eigenvalue `λ/ω`.
pub type ComplexPoint = Complex64;

const TAU: f64 = 2.0 * PI;

/// Curvature of the parabolas bounding the contraction region.
pub const ALPHA: f64 = (2.0 * PI * PI - 3.0) / (12.0 * PI);

/// Contraction floor: `|β̂(z)| ≤ max{1 − δ, 1 − ε}` away from `±i`.
pub const DELTA: f64 = 0.25;

/// Radius of the discs around `0` and `±i` where the Taylor expansions are used.
pub const SWITCH_RADIUS: f64 = 1e-3;

const LOCAL_DEGREE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConstants {
    pub alpha: f64,
    pub delta: f64,
}

impl Default for FilterConstants {
    fn default() -> Self {
        Self {
            alpha: ALPHA,
            delta: DELTA,
        }
    }
}

/// Taylor coefficients of `β̂` about the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoefficients {
    pub coeffs: Vec<f64>,
    pub n_max: usize,
}

impl SeriesCoefficients {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

/// Result of comparing `|β̂(iy)|` against the piecewise axis bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBound {
    pub bound: f64,
    pub value: f64,
    pub satisfied: bool,
}

/// Filter kernel `cos(ωt) − 1/4`.
pub fn filter_weight(t: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok((omega * t).cos() - 0.25)
}

/// Scaled filter-transfer function `β̂(z)`.
pub fn beta_hat(z: ComplexPoint) -> ComplexPoint {
    let i = Complex64::i();
    if z.norm() < SWITCH_RADIUS {
        return origin_series().evaluate(z);
    }
    if (z - i).norm() < SWITCH_RADIUS {
        return horner(unit_series(), z - i);
    }
    if (z + i).norm() < SWITCH_RADIUS {
        // β̂(z̄) = conj β̂(z)
        return horner(unit_series(), z.conj() - i).conj();
    }
    closed_form(z)
}

fn closed_form(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let numerator = 3.0 * z * z - 1.0;
    let denominator = 4.0 * PI * z * (z - i) * (z + i);
    numerator / denominator * expm1(TAU * z)
}

/// Filter-transfer function `β(λ) = β̂(λ/ω)`.
pub fn beta(lambda: ComplexPoint, omega: f64) -> Result<ComplexPoint> {
    check_omega(omega)?;
    Ok(beta_hat(lambda / omega))
}

/// Coefficients `b̂_n = (1/π) ∫₀^{2π} (cos s − 1/4) sⁿ/n! ds`, `n = 0..=n_max`.
pub fn beta_series(n_max: usize) -> SeriesCoefficients {
    let coeffs = (0..=n_max)
        .map(|n| (cos_moment(n) - 0.25 * scaled_power(n + 1)) / PI)
        .collect();
    SeriesCoefficients { coeffs, n_max }
}

/// `min(−x + α(y−1)², −x + α(y+1)²)` for `z = x + iy`.
pub fn parabolic_distance(z: ComplexPoint) -> f64 {
    let upper = -z.re + ALPHA * (z.im - 1.0).powi(2);
    let lower = -z.re + ALPHA * (z.im + 1.0).powi(2);
    upper.min(lower)
}

/// Piecewise bound on `|β̂(iy)|` and whether it holds at `y`.
///
/// The comparison allows `1e-14` of rounding slack; the bound is attained
/// exactly at `y = ±1`.
pub fn check_axis_bounds(y: f64) -> AxisBound {
    let bound = if (y - 1.0).abs() <= 0.5 {
        1.0 - (y - 1.0).powi(2)
    } else if (y + 1.0).abs() <= 0.5 {
        1.0 - (y + 1.0).powi(2)
    } else {
        0.75
    };
    let value = beta_hat(Complex64::new(0.0, y)).norm();
    AxisBound {
        bound,
        value,
        satisfied: value <= bound + 1e-14,
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn origin_series() -> &'static SeriesCoefficients {
    static SERIES: OnceLock<SeriesCoefficients> = OnceLock::new();
    SERIES.get_or_init(|| beta_series(LOCAL_DEGREE))
}

/// Taylor coefficients of `β̂` about `z = i`:
/// `(1/π) ∫ (½ + ½e^{2is} − ¼e^{is}) sⁿ/n! ds`.
fn unit_series() -> &'static [Complex64] {
    static SERIES: OnceLock<Vec<Complex64>> = OnceLock::new();
    SERIES.get_or_init(|| {
        let one = exp_moments(1.0, LOCAL_DEGREE);
        let two = exp_moments(2.0, LOCAL_DEGREE);
        (0..=LOCAL_DEGREE)
            .map(|n| (0.5 * scaled_power(n + 1) + 0.5 * two[n] - 0.25 * one[n]) / PI)
            .collect()
    })
}

/// `(2π)^k / k!`
fn scaled_power(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * TAU / j as f64)
}

/// `∫₀^{2π} e^{iks} sⁿ/n! ds` for `n = 0..=n_max` and integer `k ≠ 0`, by
/// integration by parts: `J_n = ((2π)ⁿ/n! − J_{n−1}) / (ik)`, `J_0 = 0`.
fn exp_moments(k: f64, n_max: usize) -> Vec<Complex64> {
    let ik = Complex64::new(0.0, k);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Complex64::new(0.0, 0.0));
    for n in 1..=n_max {
        let prev = out[n - 1];
        out.push((scaled_power(n) - prev) / ik);
    }
    out
}

/// `C_n = ∫₀^{2π} cos(s) sⁿ/n! ds`.
///
/// Integration by parts gives `C_n + C_{n+2} = (2π)^{n+1}/(n+1)!` with
/// `C_0 = C_1 = 0`. The forward recurrence cancels catastrophically once the
/// moments become small, so for larger `n` the equivalent tail sum
/// `C_n = Σ_j (−1)^j (2π)^{n+2j+1}/(n+2j+1)!` is used.
fn cos_moment(n: usize) -> f64 {
    const FORWARD_LIMIT: usize = 6;
    if n < FORWARD_LIMIT {
        let mut c = [0.0f64; FORWARD_LIMIT];
        for m in 2..FORWARD_LIMIT {
            c[m] = scaled_power(m - 1) - c[m - 2];
        }
        return c[n];
    }
    let mut term = scaled_power(n + 1);
    let mut sum = 0.0_f64;
    let mut j = 0usize;
    while term.abs() > f64::EPSILON * sum.abs() * 1e-3 || j == 0 {
        sum += term;
        let a = (n + 2 * j + 2) as f64;
        let b = (n + 2 * j + 3) as f64;
        term *= -TAU * TAU / (a * b);
        j += 1;
    }
    sum
}

/// `e^w − 1` without cancellation for small `|w|`.
fn expm1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let half_sin = (0.5 * b).sin();
    let cos_m1 = -2.0 * half_sin * half_sin;
    Complex64::new(a.exp_m1() * b.cos() + cos_m1, a.exp() * b.sin())
}
