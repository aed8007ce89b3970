//! Small dense and Krylov helpers over `faer`.

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn norm2(x: &[f64]) -> f64 {
    // scaled to stay finite for large entries
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn cnorm2(x: &[Complex64]) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.re.abs()).max(v.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖ / ‖b‖`, or `‖a‖` when `b = 0`.
pub fn relative_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&d)
    } else {
        norm2(&d) / nb
    }
}

pub fn crelative_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nb = cnorm2(b);
    if nb == 0.0 {
        cnorm2(&d)
    } else {
        cnorm2(&d) / nb
    }
}

pub fn column(x: &[Complex64]) -> Mat<c64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn to_vec(m: &Mat<c64>) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Solves `a x = b` with partially pivoted LU.
pub fn dense_complex_solve(a: &Mat<c64>, b: &[Complex64]) -> Result<Vec<Complex64>> {
    Error::check_len(a.nrows(), b.len())?;
    let x = a.partial_piv_lu().solve(&column(b));
    let x = to_vec(&x);
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Resonance {
            residual: f64::INFINITY,
        });
    }
    Ok(x)
}

/// Outcome of a Krylov solve.
#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unpreconditioned BiCGStab for `A x = b` with a matrix-free `A`.
pub fn bicgstab(
    apply: impl Fn(&[Complex64], &mut [Complex64]),
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> KrylovResult {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let nb = cnorm2(b);
    let mut x = vec![zero; n];
    if nb == 0.0 {
        return KrylovResult {
            x,
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut s = vec![zero; n];
    let mut t = vec![zero; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            return KrylovResult { x, iterations: it, relative_residual: rel };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if cnorm2(&s) / nb <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            rel = cnorm2(&s) / nb;
            return KrylovResult { x, iterations: it, relative_residual: rel };
        }
        apply(&s, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = cnorm2(&r) / nb;
        if rel <= tol || !rel.is_finite() {
            return KrylovResult { x, iterations: it, relative_residual: rel };
        }
    }
    KrylovResult {
        x,
        iterations: max_iter,
        relative_residual: rel,
    }
}
