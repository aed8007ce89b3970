//! Table rows, charts and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::svg::{Chart, Series, Style};
use super::{beta_abs, ExperimentConfig, PointResult, RunContext, RunSummary};
use crate::error::Result;
use crate::filter::{ALPHA, DELTA, SWITCH_RADIUS};
use crate::iteration::{IterationReport, DENSE_SOLVE_LIMIT, RESONANCE_TOL};
use crate::spectral::{SpectralReport, DIAGONALIZABLE_TOL};

/// Level sets of the parabolic distance drawn with every spectrum.
pub const LEVEL_SET_EPS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub j: usize,
    pub re_lambda_over_omega: f64,
    pub im_lambda_over_omega: f64,
    pub beta_abs: f64,
    pub is_lambda_star: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRow {
    pub eps: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: usize,
    pub res: Option<f64>,
    pub err_e: Option<f64>,
    pub err_mu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub rate_first: Option<f64>,
    pub rate_avg_e: Option<f64>,
    pub rate_avg_mu: Option<f64>,
    pub eps_star: Option<f64>,
    pub kappa: Option<f64>,
}

impl SweepRow {
    pub fn empty(omega: f64) -> Self {
        Self {
            omega,
            n: None,
            rate_first: None,
            rate_avg_e: None,
            rate_avg_mu: None,
            eps_star: None,
            kappa: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweepRow {
    pub omega: f64,
    pub eps_star: f64,
    pub kappa: f64,
    pub rho_filtered: f64,
    pub max_real_part: f64,
}

/// Power-law fit `value ≈ C ω^slope`; `intercept` is `ln C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub(super) fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub(super) fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

pub(super) fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub(super) fn spectrum_rows(report: &SpectralReport) -> Vec<SpectrumRow> {
    let w = report.omega;
    report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &l)| SpectrumRow {
            j,
            re_lambda_over_omega: l.re / w,
            im_lambda_over_omega: l.im / w,
            beta_abs: beta_abs(l, w),
            is_lambda_star: j == report.lambda_star.index,
        })
        .collect()
}

/// `Re z = α min((y−1)², (y+1)²) − ε` over the imaginary range of the spectrum.
pub(super) fn level_set_rows(report: &SpectralReport) -> Vec<LevelSetRow> {
    let w = report.omega;
    let top = report
        .eigenvalues
        .iter()
        .map(|l| (l.im / w).abs())
        .fold(1.5_f64, f64::max);
    let floor = report
        .eigenvalues
        .iter()
        .map(|l| l.re / w)
        .fold(-0.05_f64, f64::min);
    let n = 400;
    let mut rows = Vec::new();
    for eps in LEVEL_SET_EPS {
        for k in 0..=n {
            let y = -top + 2.0 * top * k as f64 / n as f64;
            let x = ALPHA * (y - 1.0).powi(2).min((y + 1.0).powi(2)) - eps;
            if x >= floor {
                rows.push(LevelSetRow { eps, re: x, im: y });
            }
        }
    }
    rows
}

pub(super) fn spectrum_chart(report: &SpectralReport, rows: &[SpectrumRow], levels: &[LevelSetRow]) -> Chart {
    let mut chart = Chart::new(
        &format!("Eigenvalues / omega at omega = {:.4}", report.omega),
        "Re(lambda/omega)",
        "Im(lambda/omega)",
    )
    .with(Series::new(
        "lambda_j/omega",
        Style::Scatter,
        rows.iter()
            .map(|r| (r.re_lambda_over_omega, r.im_lambda_over_omega))
            .collect(),
    ))
    .with(Series::new(
        "lambda*",
        Style::Diamond,
        rows.iter()
            .filter(|r| r.is_lambda_star)
            .map(|r| (r.re_lambda_over_omega, r.im_lambda_over_omega))
            .collect(),
    ));
    for eps in LEVEL_SET_EPS {
        chart = chart.with(Series::new(
            format!("distance {eps}"),
            Style::Line,
            levels.iter().filter(|r| r.eps == eps).map(|r| (r.re, r.im)).collect(),
        ));
    }
    chart
}

pub(super) fn spectrum_sweep_rows(points: &[PointResult]) -> Vec<SpectrumSweepRow> {
    points
        .iter()
        .filter_map(|p| p.spectrum.as_ref())
        .map(|s| SpectrumSweepRow {
            omega: s.omega,
            eps_star: s.epsilon_star(),
            kappa: s.kappa,
            rho_filtered: s.rho_filtered,
            max_real_part: s.max_real_part,
        })
        .collect()
}

pub(super) fn spectrum_sweep_chart(rows: &[SpectrumSweepRow]) -> Chart {
    Chart::new("Spectral diagnostics against frequency", "omega", "value")
        .log_log()
        .with(Series::new("eps_star", Style::Line, rows.iter().map(|r| (r.omega, r.eps_star)).collect()))
        .with(Series::new("kappa", Style::Line, rows.iter().map(|r| (r.omega, r.kappa)).collect()))
}

/// Row `n` holds `res^{(n)}` and the errors after `n` iterations,
/// relative to the initial error; `res` is blank at `n = 0`.
pub(super) fn residual_rows(it: &IterationReport) -> Vec<ResidualRow> {
    let rel = |h: &[f64], n: usize| -> Option<f64> {
        let (first, v) = (h.first()?, h.get(n)?);
        Some(if *first > 0.0 { v / first } else { *v })
    };
    (0..=it.residuals.len())
        .map(|n| ResidualRow {
            n,
            res: if n == 0 { None } else { Some(it.residuals[n - 1]) },
            err_e: rel(&it.err_e, n),
            err_mu: rel(&it.err_mu, n),
        })
        .collect()
}

pub(super) fn residual_chart(rows: &[ResidualRow], omega: f64) -> Chart {
    let col = |f: &dyn Fn(&ResidualRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).map(|v| (r.n as f64, v))).collect()
    };
    let mut chart = Chart::new(&format!("Iteration history at omega = {omega:.4}"), "n", "relative value")
        .log_y()
        .with(Series::new("res", Style::Line, col(&|r| r.res)));
    for (name, pts) in [("err_e", col(&|r| r.err_e)), ("err_mu", col(&|r| r.err_mu))] {
        if !pts.is_empty() {
            chart = chart.with(Series::new(name, Style::Line, pts));
        }
    }
    chart
}

pub(super) fn sweep_row(p: &PointResult) -> SweepRow {
    let it = p.iteration.as_ref();
    SweepRow {
        omega: p.omega,
        n: it.and_then(|i| i.iterations),
        rate_first: p.rates.map(|r| r.first),
        rate_avg_e: p.rates.map(|r| r.avg_e),
        rate_avg_mu: p.rates.and_then(|r| r.avg_mu),
        eps_star: p.spectrum.as_ref().map(|s| s.epsilon_star()),
        kappa: p.spectrum.as_ref().map(|s| s.kappa),
    }
}

pub(super) fn sweep_charts(rows: &[SweepRow]) -> Vec<(&'static str, Chart)> {
    let col = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).map(|v| (r.omega, v))).collect()
    };
    let mut charts = vec![(
        "sweep_iterations.svg",
        Chart::new("Iterations to tolerance", "omega", "N")
            .log_log()
            .with(Series::new("N", Style::Line, col(&|r| r.n.map(|n| n as f64)))),
    )];
    let rates: Vec<Series> = [
        ("rate_first", col(&|r| r.rate_first)),
        ("rate_avg_e", col(&|r| r.rate_avg_e)),
        ("rate_avg_mu", col(&|r| r.rate_avg_mu)),
    ]
    .into_iter()
    .filter(|(_, p)| !p.is_empty())
    .map(|(n, p)| Series::new(n, Style::Line, p))
    .collect();
    if !rates.is_empty() {
        let mut chart = Chart::new("Contraction rates", "omega", "rate");
        chart.series = rates;
        charts.push(("sweep_rates.svg", chart));
    }
    let spectral: Vec<Series> = [("eps_star", col(&|r| r.eps_star)), ("kappa", col(&|r| r.kappa))]
        .into_iter()
        .filter(|(_, p)| !p.is_empty())
        .map(|(n, p)| Series::new(n, Style::Line, p))
        .collect();
    if !spectral.is_empty() {
        let mut chart = Chart::new("Spectral diagnostics", "omega", "value").log_log();
        chart.series = spectral;
        charts.push(("sweep_spectrum.svg", chart));
    }
    charts
}

#[derive(Serialize)]
struct Constants {
    alpha: f64,
    delta: f64,
    series_switch_radius: f64,
    dense_solve_limit: usize,
    resonance_tol: f64,
    diagonalizable_tol: f64,
    level_set_eps: [f64; 3],
}

#[derive(Serialize)]
struct PointEntry {
    omega: f64,
    omega_over_pi: f64,
    dofs: usize,
    n_steps: usize,
    dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged_at_start: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_filtered: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_real_part: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagonalizable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_first: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_avg_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_avg_mu: Option<f64>,
}

impl PointEntry {
    fn new(p: &PointResult) -> Self {
        let it = p.iteration.as_ref();
        let s = p.spectrum.as_ref();
        Self {
            omega: p.omega,
            omega_over_pi: p.omega / std::f64::consts::PI,
            dofs: p.dofs,
            n_steps: p.tgrid.n_steps,
            dt: p.tgrid.dt,
            iterations: it.and_then(|i| i.iterations),
            converged_at_start: it.map(|i| i.converged_at_start),
            final_residual: it.and_then(|i| i.residuals.last().copied()),
            eps_star: s.map(|s| s.epsilon_star()),
            kappa: s.map(|s| s.kappa),
            rho_filtered: s.map(|s| s.rho_filtered),
            max_real_part: s.map(|s| s.max_real_part),
            diagonalizable: s.map(|s| s.diagonalizable),
            rate_first: p.rates.map(|r| r.first),
            rate_avg_e: p.rates.map(|r| r.avg_e),
            rate_avg_mu: p.rates.and_then(|r| r.avg_mu),
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    seed: u64,
    workers: usize,
    started_unix: u64,
    finished_unix: u64,
    files: Vec<String>,
    warnings: Vec<String>,
    failures: Vec<String>,
    config: toml::Table,
    constants: Constants,
    points: Vec<PointEntry>,
    fits: Vec<FitRow>,
}

/// Writes `manifest.toml` and records it in the summary.
pub(super) fn write_manifest(
    cfg: &ExperimentConfig,
    ctx: &RunContext,
    command: &str,
    started: u64,
    summary: &mut RunSummary,
) -> Result<()> {
    let config: toml::Table = toml::from_str(&cfg.to_toml()).expect("config echo parses");
    let manifest = Manifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: ctx.seed,
        workers: ctx.workers,
        started_unix: started,
        finished_unix: now(),
        files: summary
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        warnings: summary.warnings.clone(),
        failures: summary.failures.clone(),
        config,
        constants: Constants {
            alpha: ALPHA,
            delta: DELTA,
            series_switch_radius: SWITCH_RADIUS,
            dense_solve_limit: DENSE_SOLVE_LIMIT,
            resonance_tol: RESONANCE_TOL,
            diagonalizable_tol: DIAGONALIZABLE_TOL,
            level_set_eps: LEVEL_SET_EPS,
        },
        points: summary.points.iter().map(PointEntry::new).collect(),
        fits: summary.fits.clone(),
    };
    let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
    summary.files.push(write_text(&ctx.out, "manifest.toml", &text)?);
    Ok(())
}
