//! Self-checks behind `waveholtz verify`.
//!
//! `quick` covers the filter, 1D operators, 1D spectra and short 1D
//! iterations; `full` adds the larger spectra and a 2D run.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::output::{now, write_csv, write_text};
use super::{build_problem, time_grid, Discretization, ExperimentConfig, ForcingPreset, InitialPreset};
use super::{RunContext, RunSummary};
use crate::dg::{gauss_legendre, FluxKind};
use crate::error::Result;
use crate::filter::{beta_hat, beta_series, check_axis_bounds, parabolic_distance};
use crate::iteration::{
    direct_helmholtz_solve, error_recurrence, real_pair, recover_complex, recover_complex_fd,
    waveholtz_iterate,
};
use crate::linalg::{crelative_diff, relative_diff};
use crate::spectral::{eigendecompose, eigendecompose_matrix, SpectralReport};
use crate::time::{propagate_and_filter, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub level: Level,
    /// Replace `β̂` by a slightly scaled copy in the filter checks, to
    /// confirm that they can fail.
    pub corrupt_filter: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        check: name.into(),
        passed,
        detail,
    }
}

fn failed(name: &str, err: crate::Error) -> Check {
    check(name, false, format!("error: {err}"))
}

type Transfer = fn(Complex64) -> Complex64;

fn corrupted(z: Complex64) -> Complex64 {
    beta_hat(z) * (1.0 + 1e-6)
}

/// `(1/π) ∫₀^{2π} (cos s − 1/4) e^{zs} ds` by composite Gauss-Legendre.
pub fn beta_hat_quadrature(z: Complex64) -> Complex64 {
    let (x, w) = gauss_legendre(16);
    let panels = 64;
    let h = 2.0 * PI / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = mid + 0.5 * h * xi;
            sum += 0.5 * h * wi * (s.cos() - 0.25) * (z * s).exp();
        }
    }
    sum / PI
}

fn filter_checks(beta: Transfer, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let i = Complex64::i();
    let dev = [
        (beta(Complex64::new(0.0, 0.0)) + 0.5).norm(),
        (beta(i) - 1.0).norm(),
        (beta(-i) - 1.0).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(check(
        "filter identities at 0 and ±i",
        dev <= 1e-14,
        format!("max deviation {dev:e}"),
    ));

    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let z = Complex64::new(rng.gen_range(-4.0..=0.0), rng.gen_range(-4.0..=4.0));
        let q = beta_hat_quadrature(z);
        worst = worst.max((beta(z) - q).norm() / q.norm().max(1.0));
    }
    out.push(check(
        "filter closed form against quadrature",
        worst <= 1e-10,
        format!("max deviation {worst:e} over 1000 points"),
    ));

    let series = beta_series(40);
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let r = rng.gen_range(0.0..=1.0_f64).sqrt();
        let t = rng.gen_range(0.0..2.0 * PI);
        let z = Complex64::from_polar(r, t);
        worst = worst.max((series.evaluate(z) - beta(z)).norm());
    }
    out.push(check(
        "series reconstructs the filter on the unit disc",
        worst <= 1e-10,
        format!("max deviation {worst:e}"),
    ));

    let violations = (0..=10_000)
        .map(|k| -10.0 + 20.0 * k as f64 / 10_000.0)
        .filter(|&y| !check_axis_bounds(y).satisfied)
        .count();
    out.push(check(
        "axis bound on [-10, 10]",
        violations == 0,
        format!("{violations} violations"),
    ));

    let mut violations = 0;
    let mut tested = 0;
    for eps in [0.01, 0.05, 0.1] {
        let bound = f64::max(0.75, 1.0 - eps);
        let mut accepted = 0;
        while accepted < 2000 {
            let z = Complex64::new(rng.gen_range(-3.0..=0.0), rng.gen_range(-3.0..=3.0));
            // the bound is stated on the closed left half-plane
            if parabolic_distance(z) < eps {
                continue;
            }
            accepted += 1;
            if beta(z).norm() > bound + 1e-14 {
                violations += 1;
            }
        }
        tested += accepted;
    }
    out.push(check(
        "parabolic bound",
        violations == 0,
        format!("{violations} violations in {tested} samples"),
    ));
    out
}

fn default_at(disc: Discretization, omega_over_pi: f64) -> ExperimentConfig {
    ExperimentConfig {
        discretization: disc,
        omega_over_pi,
        ..Default::default()
    }
}

fn assembly_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let cases = [
        (Discretization::Fd, 1, FluxKind::Central, 1),
        (Discretization::Fd, 2, FluxKind::Central, 1),
        (Discretization::Dg, 1, FluxKind::Central, 2),
        (Discretization::Dg, 1, FluxKind::Upwind, 3),
        (Discretization::Dg, 2, FluxKind::Upwind, 2),
    ];
    for (disc, dim, flux, degree) in cases {
        let cfg = ExperimentConfig {
            discretization: disc,
            dimension: dim,
            flux,
            degree,
            omega_over_pi: 1.0,
            resolution: if dim == 2 { 2.0 } else { 10.0 },
            ..Default::default()
        };
        let name = format!("{disc:?} {dim}D action matches assembly");
        match build_problem(&cfg, cfg.omega_over_pi * PI) {
            Ok(p) => {
                let a = p.system.assemble_dense();
                let b = p.system.dense_from_action();
                let diff = (&a - &b).norm_max();
                out.push(check(&name, diff <= 1e-12 * a.norm_max().max(1.0), format!("max entry difference {diff:e}")));
            }
            Err(e) => out.push(failed(&name, e)),
        }
    }
    out
}

fn spectrum_check(disc: Discretization, omega_over_pi: f64) -> (Check, Option<SpectralReport>) {
    let name = format!("{disc:?} 1D spectrum at {omega_over_pi}π in the closed left half-plane");
    let run = || -> Result<SpectralReport> {
        let p = build_problem(&default_at(disc, omega_over_pi), omega_over_pi * PI)?;
        SpectralReport::from_basis(&eigendecompose(&p.system)?, p.omega)
    };
    match run() {
        Ok(r) => (
            check(
                &name,
                r.max_real_part <= 1e-10 && r.epsilon_star() > 0.0,
                format!("max Re = {:e}, eps* = {:e}", r.max_real_part, r.epsilon_star()),
            ),
            Some(r),
        ),
        Err(e) => (failed(&name, e), None),
    }
}

fn fixed_point_check(disc: Discretization) -> Check {
    let name = format!("{disc:?} 1D direct solution is a fixed point");
    let run = || -> Result<f64> {
        let p = build_problem(&default_at(disc, 10.0), 10.0 * PI)?;
        let w = real_pair(&direct_helmholtz_solve(&p.system)?);
        let tg = TimeGrid::new(p.omega, 2000)?;
        Ok(relative_diff(&propagate_and_filter(&p.system, &w, &tg)?, &w))
    };
    match run() {
        Ok(d) => check(&name, d <= 1e-5, format!("relative deviation {d:e}")),
        Err(e) => failed(&name, e),
    }
}

fn contraction_check() -> Check {
    let name = "FD 1D error contracts at the filtered spectral radius";
    let run = || -> Result<(f64, f64, f64)> {
        let cfg = ExperimentConfig {
            forcing: ForcingPreset::ImplicitFromInitialError,
            initial: InitialPreset::WavePacket,
            ..Default::default()
        };
        let p = build_problem(&cfg, 10.0 * PI)?;
        let basis = eigendecompose(&p.system)?;
        let report = SpectralReport::from_basis(&basis, p.omega)?;
        let tg = time_grid(&cfg, &p)?;
        let h = error_recurrence(&p.system, &p.w0, &tg, 200, Some(&basis))?;
        let max_mu = h.ratios_mu.iter().copied().fold(0.0, f64::max);
        let rho = report.rho_filtered;
        // ln‖ê⁽ⁿ⁾‖/‖ê⁽⁰⁾‖ against ln(κ ρⁿ · 1.001)
        let slack = h
            .log_norm_e
            .iter()
            .enumerate()
            .map(|(n, &l)| l - (report.kappa.ln() + n as f64 * rho.ln() + 1.001_f64.ln()))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((max_mu, rho, slack))
    };
    match run() {
        Ok((max_mu, rho, slack)) => check(
            name,
            max_mu <= rho + 1e-6 && slack <= 0.0,
            format!("max coefficient ratio {max_mu:.8} vs rho {rho:.8}; log-bound slack {slack:.3e}"),
        ),
        Err(e) => failed(name, e),
    }
}

fn recovery_check() -> Check {
    let name = "complex recovery from a time-harmonic real state";
    let run = || -> Result<f64> {
        let p = build_problem(&default_at(Discretization::Fd, 5.0), 5.0 * PI)?;
        let exact = direct_helmholtz_solve(&p.system)?;
        let w = real_pair(&exact);
        let full = recover_complex(&p.system, &w)?;
        let n = w.len() / 2;
        let fd = recover_complex_fd(&w[..n], &w[n..], p.omega)?;
        let dg = build_problem(&default_at(Discretization::Dg, 5.0), 5.0 * PI)?;
        let exact_dg = direct_helmholtz_solve(&dg.system)?;
        let full_dg = recover_complex(&dg.system, &real_pair(&exact_dg))?;
        Ok(crelative_diff(&full, &exact)
            .max(crelative_diff(&fd.values, &exact[..n]))
            .max(crelative_diff(&full_dg, &exact_dg)))
    };
    match run() {
        Ok(d) => check(name, d <= 1e-12, format!("relative deviation {d:e}")),
        Err(e) => failed(name, e),
    }
}

fn defective_check() -> Check {
    let n = 6;
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            -1.0
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    });
    let name = "defective bidiagonal matrix flagged";
    match eigendecompose_matrix(&a) {
        Ok(b) => check(name, !b.diagonalizable, format!("kappa {:e}", b.kappa)),
        Err(e) => check(name, true, format!("rejected: {e}")),
    }
}

fn trivial_check() -> Check {
    let name = "zero forcing and zero start converge at once";
    let run = || -> Result<bool> {
        let cfg = ExperimentConfig {
            forcing: ForcingPreset::Zero,
            ..Default::default()
        };
        let p = build_problem(&cfg, 10.0 * PI)?;
        let r = waveholtz_iterate(&p.system, &p.w0, &time_grid(&cfg, &p)?, 1e-6, 10, None)?;
        Ok(r.converged_at_start && r.iterations == Some(1))
    };
    match run() {
        Ok(ok) => check(name, ok, String::new()),
        Err(e) => failed(name, e),
    }
}

fn two_d_check() -> Check {
    let name = "2D FD point source reaches 1e-6 within 1000 iterations at 10π";
    let run = || -> Result<Option<usize>> {
        let cfg = ExperimentConfig {
            dimension: 2,
            max_iters: 1000,
            ..Default::default()
        };
        let p = build_problem(&cfg, 10.0 * PI)?;
        let r = waveholtz_iterate(&p.system, &p.w0, &time_grid(&cfg, &p)?, 1e-6, 1000, None)?;
        Ok(r.iterations)
    };
    match run() {
        Ok(n) => check(name, n.is_some(), format!("iterations {n:?}")),
        Err(e) => failed(name, e),
    }
}

pub fn run_checks(opts: VerifyOptions, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Transfer = if opts.corrupt_filter { corrupted } else { beta_hat };
    let mut out = filter_checks(beta, &mut rng);
    out.extend(assembly_checks());
    let freqs: &[f64] = match opts.level {
        Level::Quick => &[10.0],
        Level::Full => &[10.0, 20.0, 30.0],
    };
    for &w in freqs {
        let (fd_check, fd) = spectrum_check(Discretization::Fd, w);
        let (dg_check, dg) = spectrum_check(Discretization::Dg, w);
        out.push(fd_check);
        out.push(dg_check);
        if let (Some(fd), Some(dg)) = (fd, dg) {
            out.push(check(
                &format!("DG eps* above FD eps* at {w}π"),
                dg.epsilon_star() > fd.epsilon_star(),
                format!("{:e} vs {:e}", dg.epsilon_star(), fd.epsilon_star()),
            ));
        }
    }
    out.push(fixed_point_check(Discretization::Fd));
    out.push(fixed_point_check(Discretization::Dg));
    out.push(contraction_check());
    out.push(recovery_check());
    out.push(defective_check());
    out.push(trivial_check());
    if opts.level == Level::Full {
        out.push(two_d_check());
    }
    out
}

#[derive(Serialize)]
struct VerifyManifest {
    command: &'static str,
    level: Level,
    corrupt_filter: bool,
    version: &'static str,
    seed: u64,
    started_unix: u64,
    finished_unix: u64,
    passed: usize,
    failed: Vec<String>,
}

/// Runs the checks and writes `verify.csv` and `manifest.toml`.
pub fn cmd_verify(opts: VerifyOptions, ctx: &RunContext) -> Result<(RunSummary, Vec<Check>)> {
    let started = now();
    let checks = run_checks(opts, ctx.seed);
    std::fs::create_dir_all(&ctx.out)?;
    let mut summary = RunSummary::default();
    summary.files.push(write_csv(&ctx.out, "verify.csv", &checks)?);
    let manifest = VerifyManifest {
        command: "verify",
        level: opts.level,
        corrupt_filter: opts.corrupt_filter,
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        started_unix: started,
        finished_unix: now(),
        passed: checks.iter().filter(|c| c.passed).count(),
        failed: checks.iter().filter(|c| !c.passed).map(|c| c.check.clone()).collect(),
    };
    let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
    summary.files.push(write_text(&ctx.out, "manifest.toml", &text)?);
    Ok((summary, checks))
}
