//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use waveholtz::system::BoundaryCondition;

/// `(1/π) ∫₀^{2π} (cos s − 1/4) e^{zs} ds` by composite Simpson.
pub fn beta_hat_simpson(z: Complex64) -> Complex64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let g = |s: f64| (s.cos() - 0.25) * (z * s).exp();
    let mut sum = g(0.0) + g(2.0 * PI);
    for k in 1..n {
        let wt = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += wt * g(k as f64 * h);
    }
    sum * h / 3.0 / PI
}

/// The FD velocity-form matrix written out row by row, `(u, v)` ordering.
pub fn fd_1d_by_hand(m: usize, left: BoundaryCondition, right: BoundaryCondition) -> Vec<Vec<f64>> {
    let n = m + 1;
    let h = 2.0 / m as f64;
    let c = 1.0 / (h * h);
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for j in 0..n {
        a[j][n + j] = 1.0;
        // ghost values: u_{-1} = u_1 and u_{n} = u_{n-2} for the Laplacian part
        let lower = if j == 0 { 1 } else { j - 1 };
        let upper = if j == n - 1 { n - 2 } else { j + 1 };
        a[n + j][lower] += c;
        a[n + j][upper] += c;
        a[n + j][j] -= 2.0 * c;
    }
    if left == BoundaryCondition::Outflow {
        a[n][n] -= 2.0 / h;
    }
    if right == BoundaryCondition::Outflow {
        a[2 * n - 1][2 * n - 1] -= 2.0 / h;
    }
    a
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
