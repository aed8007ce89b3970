//! The WaveHoltz fixed-point iteration and its reference solutions.

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{check_omega, Error, Result};
use crate::linalg::{bicgstab, cnorm2, dense_complex_solve, norm2};
use crate::spectral::EigenBasis;
use crate::system::DiscreteSystem;
use crate::time::{Propagator, TimeGrid};

/// Systems up to this size are solved by dense LU.
pub const DENSE_SOLVE_LIMIT: usize = 4000;

/// Relative residual above which the Helmholtz system counts as singular.
pub const RESONANCE_TOL: f64 = 1e-8;

const KRYLOV_TOL: f64 = 1e-10;

/// `(A − iω) x`
fn apply_shifted(system: &DiscreteSystem, x: &[Complex64], out: &mut [Complex64]) {
    let re: Vec<f64> = x.iter().map(|v| v.re).collect();
    let im: Vec<f64> = x.iter().map(|v| v.im).collect();
    let ar = system.apply_vec(&re);
    let ai = system.apply_vec(&im);
    let iw = Complex64::new(0.0, system.omega());
    for i in 0..x.len() {
        out[i] = Complex64::new(ar[i], ai[i]) - iw * x[i];
    }
}

fn shifted_residual(system: &DiscreteSystem, x: &[Complex64], b: &[Complex64]) -> f64 {
    let mut r = vec![Complex64::new(0.0, 0.0); x.len()];
    apply_shifted(system, x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    cnorm2(&r) / cnorm2(b)
}

/// Solves `(A − iω) ŵ = F_c`; the real part of `ŵ` is the fixed point of
/// the real iteration.
pub fn direct_helmholtz_solve(system: &DiscreteSystem) -> Result<Vec<Complex64>> {
    let b = system.complex_forcing();
    let n = system.len();
    if cnorm2(&b) == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let x = if n <= DENSE_SOLVE_LIMIT {
        let a = system.assemble_dense();
        let omega = system.omega();
        let shifted = Mat::<c64>::from_fn(n, n, |i, j| {
            let d = if i == j { Complex64::new(0.0, -omega) } else { Complex64::new(0.0, 0.0) };
            Complex64::new(a[(i, j)], 0.0) + d
        });
        dense_complex_solve(&shifted, &b)?
    } else {
        let k = bicgstab(|x, out| apply_shifted(system, x, out), &b, KRYLOV_TOL, 20 * n);
        if k.relative_residual > KRYLOV_TOL {
            return Err(Error::Numerical(format!(
                "Krylov oracle stalled at relative residual {:e} after {} iterations",
                k.relative_residual, k.iterations
            )));
        }
        k.x
    };
    let residual = shifted_residual(system, &x, &b);
    if !(residual <= RESONANCE_TOL) {
        return Err(Error::Resonance { residual });
    }
    Ok(x)
}

/// Real state at `t = 0` of the time-harmonic solution `Re(ŵ e^{iωt})`.
pub fn real_pair(w: &[Complex64]) -> Vec<f64> {
    w.iter().map(|v| v.re).collect()
}

/// A complex field recovered from a real iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSolution {
    pub values: Vec<Complex64>,
}

impl ComplexSolution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `û = u − (i/ω) v`
pub fn recover_complex_fd(u: &[f64], v: &[f64], omega: f64) -> Result<ComplexSolution> {
    check_omega(omega)?;
    Error::check_len(u.len(), v.len())?;
    Ok(ComplexSolution {
        values: u
            .iter()
            .zip(v)
            .map(|(&a, &b)| Complex64::new(a, -b / omega))
            .collect(),
    })
}

/// Full complex state `ŵ = w + i(Re F_c − A w)/ω` of a real time-harmonic
/// iterate, valid for either forcing phase.
pub fn recover_complex(system: &DiscreteSystem, w: &[f64]) -> Result<Vec<Complex64>> {
    Error::check_len(system.len(), w.len())?;
    let aw = system.apply_vec(w);
    let omega = system.omega();
    Ok(w
        .iter()
        .zip(&aw)
        .zip(system.complex_forcing())
        .map(|((&x, &a), f)| Complex64::new(x, (f.re - a) / omega))
        .collect())
}

/// `p̂ = p − (i/ω)(A w)_p`, where `(A w)_p = −∇_h·u` carries the face terms of
/// the assembled DG operator.
pub fn recover_complex_dg(system: &DiscreteSystem, w: &[f64]) -> Result<ComplexSolution> {
    let full = recover_complex(system, w)?;
    let n = system.layout().primary_len();
    Ok(ComplexSolution {
        values: full[..n].to_vec(),
    })
}

/// The fixed point, and optionally an eigenbasis for coefficient errors.
#[derive(Clone, Copy, Debug)]
pub struct Oracle<'a> {
    pub fixed_point: &'a [f64],
    pub basis: Option<&'a EigenBasis>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationReport {
    /// `res^{(n)}` for `n = 1, 2, …`; the first entry is 1.
    pub residuals: Vec<f64>,
    /// `‖ê^{(n)}‖` for `n = 0, 1, …` when an oracle is given.
    pub err_e: Vec<f64>,
    /// `‖μ^{(n)}‖` for `n = 0, 1, …` when the oracle carries a basis.
    pub err_mu: Vec<f64>,
    /// Iterations until `res ≤ tol`, if reached.
    pub iterations: Option<usize>,
    pub converged_at_start: bool,
    pub final_state: Vec<f64>,
}

impl IterationReport {
    /// `‖ê^{(1)}‖ / ‖ê^{(0)}‖`
    pub fn first_iteration_rate(&self) -> Option<f64> {
        match self.err_e.as_slice() {
            [e0, e1, ..] if *e0 > 0.0 => Some(e1 / e0),
            _ => None,
        }
    }
}

/// Iterates `w ← Π_h w` until `res^{(n)} ≤ tol` or `max_iters`.
pub fn waveholtz_iterate(
    system: &DiscreteSystem,
    w0: &[f64],
    tgrid: &TimeGrid,
    tol: f64,
    max_iters: usize,
    oracle: Option<Oracle<'_>>,
) -> Result<IterationReport> {
    Error::check_len(system.len(), w0.len())?;
    if !(tol > 0.0) {
        return Err(Error::config("tol must be positive"));
    }
    if max_iters < 1 {
        return Err(Error::config("max_iters must be at least 1"));
    }
    if let Some(o) = &oracle {
        Error::check_len(system.len(), o.fixed_point.len())?;
    }
    let mut report = IterationReport::default();
    let record = |w: &[f64], report: &mut IterationReport| -> Result<()> {
        if let Some(o) = &oracle {
            let e: Vec<f64> = w.iter().zip(o.fixed_point).map(|(a, b)| a - b).collect();
            report.err_e.push(norm2(&e));
            if let Some(basis) = o.basis {
                report.err_mu.push(cnorm2(&basis.coefficients(&e)?));
            }
        }
        Ok(())
    };
    let mut prop = Propagator::new(system);
    let mut w = w0.to_vec();
    let mut next = vec![0.0; w.len()];
    record(&w, &mut report)?;
    let mut first_step = 0.0;
    for n in 1..=max_iters {
        prop.filter(&w, tgrid, &mut next)?;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { iteration: n });
        }
        let diff: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        let step = norm2(&diff);
        std::mem::swap(&mut w, &mut next);
        record(&w, &mut report)?;
        if n == 1 {
            first_step = step;
            report.residuals.push(1.0);
            if step == 0.0 || step <= tol * norm2(w0) {
                report.converged_at_start = true;
                report.iterations = Some(1);
                break;
            }
        } else {
            let res = step / first_step;
            report.residuals.push(res);
            if res <= tol {
                report.iterations = Some(n);
                break;
            }
        }
    }
    report.final_state = w;
    Ok(report)
}

/// Step-to-step contraction of the homogeneous recurrence `ê ← S_h ê`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecurrenceHistory {
    /// `‖ê^{(n+1)}‖ / ‖ê^{(n)}‖`
    pub ratios_e: Vec<f64>,
    /// `‖μ^{(n+1)}‖ / ‖μ^{(n)}‖`, when a basis is given
    pub ratios_mu: Vec<f64>,
    /// `ln(‖ê^{(n)}‖ / ‖ê^{(0)}‖)` for `n = 0, 1, …`
    pub log_norm_e: Vec<f64>,
    pub log_norm_mu: Vec<f64>,
}

/// Runs `iterations` steps of `ê ← S_h ê` from `e0`, renormalizing after
/// every step so long runs neither underflow nor lose the ratios.
pub fn error_recurrence(
    system: &DiscreteSystem,
    e0: &[f64],
    tgrid: &TimeGrid,
    iterations: usize,
    basis: Option<&EigenBasis>,
) -> Result<RecurrenceHistory> {
    Error::check_len(system.len(), e0.len())?;
    let homogeneous = system.homogeneous();
    let mut prop = Propagator::new(&homogeneous);
    let mut e = e0.to_vec();
    let n0 = norm2(&e);
    if n0 == 0.0 {
        return Err(Error::DegenerateHistory { index: 0 });
    }
    let mut hist = RecurrenceHistory {
        log_norm_e: vec![0.0],
        ..Default::default()
    };
    let mut mu_norm = match basis {
        Some(b) => {
            hist.log_norm_mu.push(0.0);
            Some(cnorm2(&b.coefficients(&e)?))
        }
        None => None,
    };
    let mut next = vec![0.0; e.len()];
    let (mut log_e, mut log_mu) = (0.0, 0.0);
    for n in 1..=iterations {
        prop.filter(&e, tgrid, &mut next)?;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { iteration: n });
        }
        let ne = norm2(&next);
        let before = norm2(&e);
        if before == 0.0 || ne == 0.0 {
            return Err(Error::DegenerateHistory { index: n });
        }
        let r = ne / before;
        hist.ratios_e.push(r);
        log_e += r.ln();
        hist.log_norm_e.push(log_e);
        if let (Some(b), Some(prev)) = (basis, mu_norm) {
            let m = cnorm2(&b.coefficients(&next)?);
            let rm = m / prev;
            hist.ratios_mu.push(rm);
            log_mu += rm.ln();
            hist.log_norm_mu.push(log_mu);
            mu_norm = Some(m / ne);
        }
        // keep ‖e‖ = 1 between steps
        for (x, &y) in e.iter_mut().zip(&next) {
            *x = y / ne;
        }
    }
    Ok(hist)
}

/// `(1/K) Σ_{k<K} h[k+1]/h[k]`
pub fn average_rate(history: &[f64], k: usize) -> Result<f64> {
    if k == 0 || history.len() < k + 1 {
        return Err(Error::Domain(format!(
            "average over {k} steps needs {} entries, got {}",
            k + 1,
            history.len()
        )));
    }
    let mut sum = 0.0;
    for j in 0..k {
        if history[j] == 0.0 {
            return Err(Error::DegenerateHistory { index: j });
        }
        sum += history[j + 1] / history[j];
    }
    Ok(sum / k as f64)
}

/// Mean of the first `k` one-step ratios.
pub fn average_ratio(ratios: &[f64], k: usize) -> Result<f64> {
    if k == 0 || ratios.len() < k {
        return Err(Error::Domain(format!("need {k} ratios, got {}", ratios.len())));
    }
    Ok(ratios[..k].iter().sum::<f64>() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{DenseOperator, ForcingPhase};

    #[test]
    fn scalar_oracle() {
        let sys = DiscreteSystem::from_dense(
            DenseOperator::from_fn(1, |_, _| -1.0),
            vec![1.0],
            ForcingPhase::Cosine,
            1.0,
        )
        .unwrap();
        let x = direct_helmholtz_solve(&sys).unwrap();
        assert!((x[0] - Complex64::new(-0.5, 0.5)).norm() < 1e-15);
        let zero = sys.homogeneous();
        assert_eq!(direct_helmholtz_solve(&zero).unwrap(), vec![Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn resonance_is_reported() {
        // undamped oscillator at its own frequency
        let omega = 2.0;
        let op = DenseOperator::from_rows(&[vec![0.0, 1.0], vec![-omega * omega, 0.0]]).unwrap();
        let sys = DiscreteSystem::from_dense(op, vec![0.0, 1.0], ForcingPhase::Cosine, omega).unwrap();
        assert!(matches!(direct_helmholtz_solve(&sys), Err(Error::Resonance { .. })));
    }

    #[test]
    fn average_rate_examples() {
        let h: Vec<f64> = (0..6).map(|k| 3.0 * 0.7f64.powi(k)).collect();
        assert!((average_rate(&h, 5).unwrap() - 0.7).abs() < 1e-15);
        assert!((average_rate(&h, 1).unwrap() - 0.7).abs() < 1e-15);
        assert!(average_rate(&[0.0, 1.0], 1).is_err());
        assert!(average_rate(&h, 6).is_err());
    }

    #[test]
    fn fd_recovery_identity() {
        let omega = 5.0;
        let xs: Vec<f64> = (0..9).map(|j| j as f64 * 0.1).collect();
        let u: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let v: Vec<f64> = xs.iter().map(|x| -omega * x.sin()).collect();
        let r = recover_complex_fd(&u, &v, omega).unwrap();
        for (z, x) in r.values.iter().zip(&xs) {
            assert!((z - Complex64::new(x.cos(), x.sin())).norm() < 1e-15);
        }
        assert!(recover_complex_fd(&u, &v[1..], omega).is_err());
    }

    #[test]
    fn zero_problem_converges_at_start() {
        let sys = DiscreteSystem::from_dense(
            DenseOperator::from_fn(2, |i, j| if i == j { -1.0 } else { 0.0 }),
            vec![0.0; 2],
            ForcingPhase::Cosine,
            1.0,
        )
        .unwrap();
        let g = TimeGrid::new(1.0, 20).unwrap();
        let r = waveholtz_iterate(&sys, &[0.0, 0.0], &g, 1e-6, 10, None).unwrap();
        assert!(r.converged_at_start);
        assert_eq!(r.iterations, Some(1));
        assert_eq!(r.residuals, vec![1.0]);
    }
}
