//! Legendre-Gauss-Lobatto reference element on `[−1, 1]`.

use crate::error::{Error, Result};

/// Nodal operators on the reference element.
///
/// `mass` is the exact mass matrix `∫ ℓ_i ℓ_j`; its LGL-quadrature
/// (lumped) counterpart is `diag(weights)`. `lift[s]` is `M⁻¹ e_s` for the
/// left (`s = 0`) and right (`s = 1`) end nodes, and `lift_lumped` the
/// corresponding `1/w` of the lumped mass.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperators {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `(P+1)×(P+1)`.
    pub mass: Vec<f64>,
    /// Row-major `(P+1)×(P+1)` differentiation matrix.
    pub diff: Vec<f64>,
    pub lift: [Vec<f64>; 2],
    pub lift_lumped: [f64; 2],
}

impl LocalOperators {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn diff_at(&self, i: usize, j: usize) -> f64 {
        self.diff[i * self.len() + j]
    }

    pub fn mass_at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.len() + j]
    }
}

/// Gauss-Legendre nodes and weights with `n` points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for j in 0..n {
        let mut x = -(std::f64::consts::PI * (j as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (pv, dp) = legendre(n, x);
            let step = pv / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
        .product()
}

/// Solves the small SPD system `m x = b` by Gaussian elimination.
fn solve_small(m: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a = m.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for k in c..n {
                a[r * n + k] -= f * a[c * n + k];
            }
            x[r] -= f * x[c];
        }
    }
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c * n + k] * x[k]).sum();
        x[c] = (x[c] - s) / a[c * n + c];
    }
    x
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // P_n' = n (x P_n − P_{n−1}) / (x² − 1), valid off the endpoints
    let nf = n as f64;
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

pub fn lgl_reference(p: usize) -> Result<LocalOperators> {
    if p < 1 {
        return Err(Error::config(format!("polynomial degree must be at least 1, got {p}")));
    }
    let np = p + 1;
    let pf = p as f64;
    let mut nodes = vec![0.0; np];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    // interior nodes: roots of P_p', Newton from Chebyshev-Lobatto guesses
    for j in 1..p {
        let mut x = -(std::f64::consts::PI * j as f64 / pf).cos();
        for _ in 0..100 {
            let (pv, dp) = legendre(p, x);
            let ddp = (2.0 * x * dp - pf * (pf + 1.0) * pv) / (1.0 - x * x);
            let step = dp / ddp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[j] = x;
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (pv, _) = legendre(p, x);
            2.0 / (pf * (pf + 1.0) * pv * pv)
        })
        .collect();

    // barycentric weights give the Lagrange derivative matrix
    let bary: Vec<f64> = (0..np)
        .map(|i| {
            1.0 / (0..np)
                .filter(|&k| k != i)
                .map(|k| nodes[i] - nodes[k])
                .product::<f64>()
        })
        .collect();
    let mut diff = vec![0.0; np * np];
    for i in 0..np {
        let mut row_sum = 0.0;
        for j in 0..np {
            if i != j {
                let d = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                diff[i * np + j] = d;
                row_sum += d;
            }
        }
        diff[i * np + i] = -row_sum;
    }
    // exact mass by Gauss quadrature, exact for degree 2P + 1
    let (gx, gw) = gauss_legendre(np);
    let mut mass = vec![0.0; np * np];
    for i in 0..np {
        for j in 0..np {
            mass[i * np + j] = gx
                .iter()
                .zip(&gw)
                .map(|(&x, &w)| w * lagrange(&nodes, i, x) * lagrange(&nodes, j, x))
                .sum();
        }
    }
    let unit = |k: usize| (0..np).map(|i| (i == k) as u8 as f64).collect::<Vec<_>>();
    let lift = [solve_small(&mass, &unit(0)), solve_small(&mass, &unit(p))];
    Ok(LocalOperators {
        degree: p,
        lift_lumped: [1.0 / weights[0], 1.0 / weights[p]],
        lift,
        mass,
        nodes,
        weights,
        diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_element() {
        let r = lgl_reference(1).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 1.0]);
        assert_eq!(r.weights, vec![1.0, 1.0]);
        assert_eq!(r.diff, vec![-0.5, 0.5, -0.5, 0.5]);
        let m = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (a, b) in r.mass.iter().zip(m) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in r.lift[0].iter().zip([2.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in r.lift[1].iter().zip([-1.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_element() {
        let r = lgl_reference(2).unwrap();
        for (a, b) in r.nodes.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in r.weights.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        // d/dx x² = 2x
        for i in 0..3 {
            let d: f64 = (0..3).map(|j| r.diff_at(i, j) * r.nodes[j].powi(2)).sum();
            assert!((d - 2.0 * r.nodes[i]).abs() < 1e-14);
        }
        assert_eq!(r.lift_lumped, [3.0, 3.0]);
        // exact mass of P=2: (1/15)[[4, 2, −1], [2, 16, 2], [−1, 2, 4]]
        let m = [4.0, 2.0, -1.0, 2.0, 16.0, 2.0, -1.0, 2.0, 4.0];
        for (a, b) in r.mass.iter().zip(m) {
            assert!((a - b / 15.0).abs() < 1e-14);
        }
    }

    #[test]
    fn higher_degree_quadrature_and_differentiation() {
        for p in 3..=8 {
            let r = lgl_reference(p).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // rows of the exact mass sum to the LGL weights (∫ ℓ_i = w_i)
            for i in 0..=p {
                let row: f64 = (0..=p).map(|j| r.mass_at(i, j)).sum();
                assert!((row - r.weights[i]).abs() < 1e-13, "p={p}");
            }
            // exact for degree ≤ 2P − 1
            let q = 2 * p - 1;
            let integral: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(q as i32 - 1)).sum();
            let exact = if (q - 1) % 2 == 0 { 2.0 / q as f64 } else { 0.0 };
            assert!((integral - exact).abs() < 1e-13, "p={p}");
            for i in 0..=p {
                let d: f64 = (0..=p).map(|j| r.diff_at(i, j) * r.nodes[j].powi(p as i32)).sum();
                let exact = p as f64 * r.nodes[i].powi(p as i32 - 1);
                assert!((d - exact).abs() < 1e-11, "p={p}");
            }
        }
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(lgl_reference(0).is_err());
    }
}
