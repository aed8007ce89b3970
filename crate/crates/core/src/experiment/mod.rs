//! Experiment runners: build a problem from a config, run it at one or
//! more frequencies, and write tables, charts and a manifest.

pub mod config;
mod output;
pub mod svg;
pub mod verify;

use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;

pub use config::{
    Diagnostics, Discretization, ExperimentConfig, ForcingPreset, InitialPreset, SweepRange,
    TimeSettings,
};
pub use output::{FitRow, ResidualRow, SpectrumRow, SweepRow};

use crate::dg::{build_dg, dg_resolution};
use crate::error::{Error, Result};
use crate::fd::{build_fd_1d, build_fd_2d, fd_resolution};
use crate::filter::beta_hat;
use crate::iteration::{
    average_ratio, direct_helmholtz_solve, error_recurrence, real_pair, waveholtz_iterate,
    IterationReport, Oracle,
};
use crate::linalg::norm2;
use crate::spectral::{eigendecompose_capped, fit_power_law, EigenBasis, SpectralReport};
use crate::system::DiscreteSystem;
use crate::time::{choose_time_grid, TimeGrid};

/// Where and how a run writes its artifacts.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out: PathBuf,
    pub workers: usize,
    pub seed: u64,
}

impl RunContext {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            workers: 1,
            seed: 0,
        }
    }
}

/// What a command produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Per-frequency failures; the rest of a sweep still ran.
    pub failures: Vec<String>,
    pub points: Vec<PointResult>,
    pub fits: Vec<FitRow>,
}

/// A discretized problem at one frequency.
#[derive(Clone, Debug)]
pub struct Problem {
    pub omega: f64,
    pub system: DiscreteSystem,
    pub w0: Vec<f64>,
    /// The fixed point is zero, so iterates are errors.
    pub implicit: bool,
}

/// `π⁻¹ω² exp(−ω²|x − c|²)`
pub fn point_source(omega: f64, center: [f64; 2], dim: usize) -> impl Fn(f64, f64) -> f64 {
    move |x, y| {
        let dy = if dim == 2 { y - center[1] } else { 0.0 };
        let r2 = (x - center[0]).powi(2) + dy * dy;
        omega * omega / PI * (-omega * omega * r2).exp()
    }
}

/// `u₀ = 2 sin²(πx) sin(ωx)` and its derivative.
pub fn wave_packet(x: f64, omega: f64) -> (f64, f64) {
    let s = (PI * x).sin();
    let u = 2.0 * s * s * (omega * x).sin();
    let du = 2.0 * PI * (2.0 * PI * x).sin() * (omega * x).sin()
        + 2.0 * omega * s * s * (omega * x).cos();
    (u, du)
}

pub fn build_problem(cfg: &ExperimentConfig, omega: f64) -> Result<Problem> {
    cfg.validate()?;
    let bc = cfg.boundary_spec();
    let dim = cfg.dimension;
    let source = match cfg.forcing {
        ForcingPreset::GaussianPointSource { center } => Some(point_source(omega, center, dim)),
        _ => None,
    };
    let f = |x: f64, y: f64| source.as_ref().map_or(0.0, |s| s(x, y));
    let (system, coords) = match cfg.discretization {
        Discretization::Fd => {
            let grid = fd_resolution(omega, cfg.resolution, dim)?;
            let sys = if dim == 1 {
                build_fd_1d(omega, &grid, &bc, f)?
            } else {
                build_fd_2d(omega, &grid, &bc, f)?
            };
            (sys, (0..grid.points_per_dim()).map(|i| grid.coord(i)).collect::<Vec<_>>())
        }
        Discretization::Dg => {
            let mesh = dg_resolution(omega, cfg.degree, cfg.resolution, dim)?.with_mass(cfg.mass);
            (build_dg(omega, &mesh, cfg.flux, &bc, f)?, mesh.line_coords())
        }
    };
    let mut w0 = vec![0.0; system.len()];
    if cfg.initial == InitialPreset::WavePacket {
        let n = coords.len();
        for (i, &x) in coords.iter().enumerate() {
            let (u, du) = wave_packet(x, omega);
            w0[i] = u;
            // right-going: v = u_t = −u_x in velocity form, p = u in conservative form
            w0[n + i] = match cfg.discretization {
                Discretization::Fd => -du,
                Discretization::Dg => u,
            };
        }
    }
    Ok(Problem {
        omega,
        system,
        w0,
        implicit: cfg.forcing == ForcingPreset::ImplicitFromInitialError,
    })
}

pub fn time_grid(cfg: &ExperimentConfig, problem: &Problem) -> Result<TimeGrid> {
    choose_time_grid(&problem.system, problem.omega, cfg.time.cfl, cfg.time.min_steps)
}

/// Averaged contraction of the error over `rate_iters` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    /// `‖ê^{(1)}‖ / ‖ê^{(0)}‖`
    pub first: f64,
    pub avg_e: f64,
    pub avg_mu: Option<f64>,
}

/// Everything measured at one frequency.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub omega: f64,
    pub dofs: usize,
    pub tgrid: TimeGrid,
    pub spectrum: Option<SpectralReport>,
    pub iteration: Option<IterationReport>,
    pub rates: Option<Rates>,
}

impl PointResult {
    fn new(problem: &Problem, tgrid: TimeGrid) -> Self {
        Self {
            omega: problem.omega,
            dofs: problem.system.len(),
            tgrid,
            spectrum: None,
            iteration: None,
            rates: None,
        }
    }
}

fn basis_for(cfg: &ExperimentConfig, problem: &Problem) -> Result<Option<EigenBasis>> {
    if cfg.wants_spectrum() {
        Ok(Some(eigendecompose_capped(&problem.system, cfg.dof_cap)?))
    } else {
        Ok(None)
    }
}

/// Spectrum only.
pub fn spectrum_point(cfg: &ExperimentConfig, omega: f64) -> Result<PointResult> {
    let problem = build_problem(cfg, omega)?;
    let basis = eigendecompose_capped(&problem.system, cfg.dof_cap)?;
    let mut r = PointResult::new(&problem, time_grid(cfg, &problem)?);
    r.spectrum = Some(SpectralReport::from_basis(&basis, omega)?);
    Ok(r)
}

/// Iterates to `tol`; with `rates`, also runs the error recurrence.
pub fn iterate_point(cfg: &ExperimentConfig, omega: f64, rates: bool) -> Result<PointResult> {
    let problem = build_problem(cfg, omega)?;
    let tgrid = time_grid(cfg, &problem)?;
    let mut result = PointResult::new(&problem, tgrid);
    let basis = basis_for(cfg, &problem)?;
    if let Some(b) = &basis {
        result.spectrum = Some(SpectralReport::from_basis(b, omega)?);
    }
    let fixed_point = if problem.implicit {
        Some(vec![0.0; problem.system.len()])
    } else if cfg.diagnostics.oracle_error {
        Some(real_pair(&direct_helmholtz_solve(&problem.system)?))
    } else {
        None
    };
    let mu_basis = basis.as_ref().filter(|_| cfg.diagnostics.eigen_coefficients);
    let oracle = fixed_point.as_deref().map(|fp| Oracle {
        fixed_point: fp,
        basis: mu_basis,
    });
    result.iteration = Some(waveholtz_iterate(
        &problem.system,
        &problem.w0,
        &tgrid,
        cfg.tol,
        cfg.max_iters,
        oracle,
    )?);
    if rates {
        if let Some(fp) = &fixed_point {
            let e0: Vec<f64> = problem.w0.iter().zip(fp).map(|(a, b)| a - b).collect();
            if norm2(&e0) > 0.0 {
                let k = cfg.rate_iters;
                let h = error_recurrence(&problem.system, &e0, &tgrid, k, mu_basis)?;
                result.rates = Some(Rates {
                    first: h.ratios_e[0],
                    avg_e: average_ratio(&h.ratios_e, k)?,
                    avg_mu: if h.ratios_mu.is_empty() {
                        None
                    } else {
                        Some(average_ratio(&h.ratios_mu, k)?)
                    },
                });
            }
        }
    }
    Ok(result)
}

/// Runs `f` on every frequency with up to `workers` threads, keeping order.
fn run_all<T: Send>(
    omegas: &[f64],
    workers: usize,
    f: impl Fn(f64) -> Result<T> + Sync,
) -> Result<Vec<Result<T>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| omegas.par_iter().map(|&w| f(w)).collect()))
}

fn suffix(cfg: &ExperimentConfig, k: usize) -> String {
    if cfg.sweep.is_some() {
        format!("_{k:02}")
    } else {
        String::new()
    }
}

fn large_2d_warning(cfg: &ExperimentConfig) -> Option<String> {
    cfg.is_large_2d().then(|| {
        "2D run above the desk-scale frequency; expect long runtimes".to_string()
    })
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunSummary> {
    let started = output::now();
    cfg.validate()?;
    for w in cfg.omegas() {
        let dofs = cfg.dofs(w)?;
        if dofs > cfg.dof_cap {
            return Err(Error::Size {
                dofs,
                cap: cfg.dof_cap,
            });
        }
    }
    let mut summary = RunSummary::default();
    summary.warnings.extend(large_2d_warning(cfg));
    let omegas = cfg.omegas();
    let results = run_all(&omegas, ctx.workers, |w| spectrum_point(cfg, w))?;
    std::fs::create_dir_all(&ctx.out)?;
    for (k, r) in results.into_iter().enumerate() {
        let r = r?;
        let report = r.spectrum.as_ref().expect("spectrum computed");
        let tag = suffix(cfg, k);
        let rows = output::spectrum_rows(report);
        summary.files.push(output::write_csv(&ctx.out, &format!("spectrum{tag}.csv"), &rows)?);
        let levels = output::level_set_rows(report);
        summary.files.push(output::write_csv(&ctx.out, &format!("levelsets{tag}.csv"), &levels)?);
        let chart = output::spectrum_chart(report, &rows, &levels);
        summary.files.push(output::write_text(&ctx.out, &format!("spectrum{tag}.svg"), &chart.render())?);
        summary.points.push(r);
    }
    if cfg.sweep.is_some() {
        let rows = output::spectrum_sweep_rows(&summary.points);
        summary.files.push(output::write_csv(&ctx.out, "spectrum_sweep.csv", &rows)?);
        let omegas: Vec<f64> = rows.iter().map(|r| r.omega).collect();
        for (name, values) in [
            ("eps_star", rows.iter().map(|r| r.eps_star).collect::<Vec<_>>()),
            ("kappa", rows.iter().map(|r| r.kappa).collect()),
        ] {
            summary.fits.extend(fit_row(name, &omegas, &values));
        }
        summary.files.push(output::write_csv(&ctx.out, "fits.csv", &summary.fits)?);
        let chart = output::spectrum_sweep_chart(&rows);
        summary.files.push(output::write_text(&ctx.out, "spectrum_sweep.svg", &chart.render())?);
    }
    output::write_manifest(cfg, ctx, "spectrum", started, &mut summary)?;
    Ok(summary)
}

pub fn cmd_iterate(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunSummary> {
    let started = output::now();
    cfg.validate()?;
    let mut summary = RunSummary::default();
    summary.warnings.extend(large_2d_warning(cfg));
    let omegas = cfg.omegas();
    let results = run_all(&omegas, ctx.workers, |w| iterate_point(cfg, w, false))?;
    std::fs::create_dir_all(&ctx.out)?;
    for (k, r) in results.into_iter().enumerate() {
        let r = r?;
        let it = r.iteration.as_ref().expect("iteration ran");
        if it.iterations.is_none() {
            summary.warnings.push(format!(
                "omega = {}: residual did not reach tol within {} iterations",
                r.omega, cfg.max_iters
            ));
        }
        let tag = suffix(cfg, k);
        let rows = output::residual_rows(it);
        summary.files.push(output::write_csv(&ctx.out, &format!("residuals{tag}.csv"), &rows)?);
        let chart = output::residual_chart(&rows, r.omega);
        summary.files.push(output::write_text(&ctx.out, &format!("residuals{tag}.svg"), &chart.render())?);
        summary.points.push(r);
    }
    output::write_manifest(cfg, ctx, "iterate", started, &mut summary)?;
    Ok(summary)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunSummary> {
    let started = output::now();
    cfg.validate()?;
    if cfg.sweep.is_none() {
        return Err(Error::config("the sweep command needs a [sweep] section"));
    }
    let mut summary = RunSummary::default();
    summary.warnings.extend(large_2d_warning(cfg));
    let omegas = cfg.omegas();
    let results = run_all(&omegas, ctx.workers, |w| iterate_point(cfg, w, true))?;
    std::fs::create_dir_all(&ctx.out)?;
    let mut rows = Vec::new();
    for (k, (r, &w)) in results.into_iter().zip(&omegas).enumerate() {
        match r {
            Ok(r) => {
                let it = r.iteration.as_ref().expect("iteration ran");
                let res = output::residual_rows(it);
                summary.files.push(output::write_csv(&ctx.out, &format!("residuals_{k:02}.csv"), &res)?);
                rows.push(output::sweep_row(&r));
                summary.points.push(r);
            }
            Err(e) => {
                summary.failures.push(format!("omega = {w}: {e}"));
                rows.push(SweepRow::empty(w));
            }
        }
    }
    summary.files.push(output::write_csv(&ctx.out, "sweep.csv", &rows)?);
    let column_points = |col: &dyn Fn(&SweepRow) -> Option<f64>| -> (Vec<f64>, Vec<f64>) {
        rows.iter()
            .filter_map(|r| col(r).map(|v| (r.omega, v)))
            .unzip()
    };
    let columns: [(&str, &dyn Fn(&SweepRow) -> Option<f64>); 6] = [
        ("N", &|r| r.n.map(|n| n as f64)),
        ("1-rate_first", &|r| r.rate_first.map(|v| 1.0 - v)),
        ("1-rate_avg_e", &|r| r.rate_avg_e.map(|v| 1.0 - v)),
        ("1-rate_avg_mu", &|r| r.rate_avg_mu.map(|v| 1.0 - v)),
        ("eps_star", &|r| r.eps_star),
        ("kappa", &|r| r.kappa),
    ];
    for (name, col) in columns {
        let (w, v) = column_points(col);
        summary.fits.extend(fit_row(name, &w, &v));
    }
    summary.files.push(output::write_csv(&ctx.out, "fits.csv", &summary.fits)?);
    for (file, chart) in output::sweep_charts(&rows) {
        summary.files.push(output::write_text(&ctx.out, file, &chart.render())?);
    }
    output::write_manifest(cfg, ctx, "sweep", started, &mut summary)?;
    Ok(summary)
}

fn fit_row(name: &str, omegas: &[f64], values: &[f64]) -> Option<FitRow> {
    let usable: (Vec<f64>, Vec<f64>) = omegas
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite() && **v > 0.0)
        .map(|(&w, &v)| (w, v))
        .unzip();
    let fit = fit_power_law(&usable.0, &usable.1).ok()?;
    Some(FitRow {
        quantity: name.to_string(),
        slope: fit.slope,
        intercept: fit.intercept,
        points: usable.0.len(),
    })
}

/// `|β̂(λ/ω)|` for a spectrum entry.
pub fn beta_abs(lambda: num_complex::Complex64, omega: f64) -> f64 {
    beta_hat(lambda / omega).norm()
}

