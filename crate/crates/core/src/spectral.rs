//! Dense spectral diagnostics: where the eigenvalues of `A` sit relative to
//! `±iω`, how well conditioned the eigenbasis is, and what that predicts for
//! the iteration.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{check_omega, Error, Result};
use crate::filter::{beta_hat, ALPHA, DELTA};
use crate::linalg::{cnorm2, column, to_vec};
use crate::system::DiscreteSystem;

pub const DEFAULT_DOF_CAP: usize = 5000;

/// Columns of `R` whose smallest-to-largest singular value ratio falls below
/// this are treated as rank-deficient.
pub const DIAGONALIZABLE_TOL: f64 = 1e-12;

/// `A = R Λ R⁻¹` with unit-norm columns of `R`.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub eigenvalues: Vec<Complex64>,
    vectors: Mat<c64>,
    lu: PartialPivLu<c64>,
    /// `σ_max(R) / σ_min(R)`
    pub kappa: f64,
    /// `σ_min(R) / σ_max(R)`
    pub singular_ratio: f64,
    pub diagonalizable: bool,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vectors(&self) -> &Mat<c64> {
        &self.vectors
    }

    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, j)]).collect()
    }

    /// Eigen-coefficients `μ = R⁻¹ e` of a real vector.
    pub fn coefficients(&self, e: &[f64]) -> Result<Vec<Complex64>> {
        Error::check_len(self.len(), e.len())?;
        let b: Vec<Complex64> = e.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(to_vec(&self.lu.solve(&column(&b))))
    }
}

/// Power-of-two diagonal `d` making rows and columns of `D⁻¹AD` comparable
/// in norm. The scaling is exact in floating point and shrinks the absolute
/// eigenvalue error when the blocks of `A` differ widely in magnitude.
fn balance(a: &mut Mat<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * total {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    d
}

/// Decomposition of an explicit real matrix.
pub fn eigendecompose_matrix(a: &Mat<f64>) -> Result<EigenBasis> {
    let mut balanced = a.clone();
    let d = balance(&mut balanced);
    let evd = balanced
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<Complex64> = (0..a.nrows()).map(|j| s[j]).collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..vectors.ncols() {
        for (i, &di) in d.iter().enumerate() {
            vectors[(i, j)] *= di;
        }
    }
    for j in 0..vectors.ncols() {
        let col: Vec<Complex64> = (0..vectors.nrows()).map(|i| vectors[(i, j)]).collect();
        let nrm = cnorm2(&col);
        if nrm > 0.0 {
            for i in 0..vectors.nrows() {
                vectors[(i, j)] /= nrm;
            }
        }
    }
    let sv = vectors
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular values failed: {e:?}")))?;
    let s_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let s_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let singular_ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    let kappa = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if eigenvalues.iter().any(|l| !(l.re.is_finite() && l.im.is_finite())) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(EigenBasis {
        eigenvalues,
        lu: vectors.partial_piv_lu(),
        vectors,
        kappa,
        singular_ratio,
        diagonalizable: singular_ratio >= DIAGONALIZABLE_TOL,
    })
}

pub fn eigendecompose(system: &DiscreteSystem) -> Result<EigenBasis> {
    eigendecompose_capped(system, DEFAULT_DOF_CAP)
}

pub fn eigendecompose_capped(system: &DiscreteSystem, cap: usize) -> Result<EigenBasis> {
    if system.len() > cap {
        return Err(Error::Size {
            dofs: system.len(),
            cap,
        });
    }
    eigendecompose_matrix(&system.assemble_dense())
}

/// The eigenvalue whose scaled image is closest to `i` in parabolic distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaStar {
    pub index: usize,
    pub lambda: Complex64,
    pub epsilon: f64,
    /// `|λ* − iω|`
    pub gap: f64,
}

pub fn epsilon_star(eigenvalues: &[Complex64], omega: f64) -> Result<LambdaStar> {
    check_omega(omega)?;
    let target = Complex64::new(0.0, omega);
    let mut best: Option<LambdaStar> = None;
    for (index, &lambda) in eigenvalues.iter().enumerate() {
        let z = lambda / omega;
        let cand = LambdaStar {
            index,
            lambda,
            epsilon: -z.re + ALPHA * (z.im - 1.0).powi(2),
            gap: (lambda - target).norm(),
        };
        best = match best {
            None => Some(cand),
            Some(b) if cand.epsilon < b.epsilon || (cand.epsilon == b.epsilon && cand.gap < b.gap) => {
                Some(cand)
            }
            keep => keep,
        };
    }
    best.ok_or_else(|| Error::Domain("empty spectrum".into()))
}

/// `ρ(S_h) = max_j |β̂(λ_j/ω)|`
pub fn rho_filtered(eigenvalues: &[Complex64], omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if eigenvalues.is_empty() {
        return Err(Error::Domain("empty spectrum".into()));
    }
    Ok(eigenvalues
        .iter()
        .map(|&l| beta_hat(l / omega).norm())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub omega: f64,
    pub eigenvalues: Vec<Complex64>,
    pub kappa: f64,
    pub lambda_star: LambdaStar,
    pub rho_filtered: f64,
    /// `max{1 − ε*, 1 − δ}`
    pub rate_bound: f64,
    pub max_real_part: f64,
    pub diagonalizable: bool,
}

impl SpectralReport {
    pub fn from_basis(basis: &EigenBasis, omega: f64) -> Result<Self> {
        let lambda_star = epsilon_star(&basis.eigenvalues, omega)?;
        Ok(Self {
            omega,
            eigenvalues: basis.eigenvalues.clone(),
            kappa: basis.kappa,
            lambda_star,
            rho_filtered: rho_filtered(&basis.eigenvalues, omega)?,
            rate_bound: (1.0 - lambda_star.epsilon).max(1.0 - DELTA),
            max_real_part: basis
                .eigenvalues
                .iter()
                .map(|l| l.re)
                .fold(f64::NEG_INFINITY, f64::max),
            diagonalizable: basis.diagonalizable,
        })
    }

    pub fn epsilon_star(&self) -> f64 {
        self.lambda_star.epsilon
    }
}

/// `N = (γ ln(Mω) − ln τ) / ε`, the iteration count the contraction bound
/// gives for reducing the error by `τ` when `κ ≤ Mω^γ`.
pub fn predicted_iterations(tau: f64, omega: f64, m: f64, gamma: f64, eps: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidBound(format!("contraction margin must be positive, got {eps}")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidBound(format!("tolerance must lie in (0, 1), got {tau}")));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidBound(format!("constant M must be positive, got {m}")));
    }
    Ok((gamma * (m * omega).ln() - tau.ln()) / eps)
}

/// Least-squares line through `(ln ω, ln value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepFit {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

impl SweepFit {
    pub fn predict(&self, omega: f64) -> f64 {
        (self.intercept + self.slope * omega.ln()).exp()
    }
}

pub fn fit_power_law(omegas: &[f64], values: &[f64]) -> Result<SweepFit> {
    Error::check_len(omegas.len(), values.len())?;
    if omegas.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 points, got {}", omegas.len())));
    }
    if omegas.iter().chain(values).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("power-law fit needs positive finite data".into()));
    }
    let n = omegas.len() as f64;
    let xs: Vec<f64> = omegas.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("frequencies must not all coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(SweepFit {
        omegas: omegas.to_vec(),
        values: values.to_vec(),
        slope,
        intercept: my - slope * mx,
    })
}
