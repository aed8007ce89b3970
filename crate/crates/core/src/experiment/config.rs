//! Declarative experiment configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid 1D FD run at
//! `ω = 10π`. Frequencies are given as multiples of `π`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dg::{dg_resolution, FluxKind, MassKind};
use crate::error::{Error, Result};
use crate::fd::fd_resolution;
use crate::system::{BoundaryCondition, BoundarySpec};

/// Frequencies above this multiple of `π` in 2D need `allow_large_2d`.
pub const DESK_SCALE_2D: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discretization {
    #[default]
    Fd,
    Dg,
}

/// `count` uniformly spaced frequencies from `start·π` to `stop·π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepRange {
    pub fn omegas(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|j| PI * (self.start + step * j as f64))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForcingPreset {
    Zero,
    /// `f = π⁻¹ω² exp(−ω²|x − c|²)`; in 1D only `center[0]` is used.
    GaussianPointSource { center: [f64; 2] },
    /// Homogeneous system whose fixed point is zero, so the initial state
    /// is the initial error.
    ImplicitFromInitialError,
}

impl Default for ForcingPreset {
    fn default() -> Self {
        ForcingPreset::GaussianPointSource {
            center: [-0.7, -0.1],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPreset {
    #[default]
    Zero,
    /// `u₀ = 2 sin²(πx) sin(ωx)` as a right-going wave.
    #[serde(rename = "paper-1d-ic")]
    WavePacket,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSettings {
    pub cfl: f64,
    pub min_steps: usize,
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            min_steps: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    /// Dense eigendecomposition: spectrum, `ε*`, `κ`, `ρ(S_h)`.
    pub spectrum: bool,
    /// Errors against the direct-solve fixed point.
    pub oracle_error: bool,
    /// Errors in eigenvector coefficients `μ = R⁻¹ê`; implies `spectrum`.
    pub eigen_coefficients: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub discretization: Discretization,
    pub dimension: usize,
    /// DG polynomial degree.
    pub degree: usize,
    pub flux: FluxKind,
    pub mass: MassKind,
    pub omega_over_pi: f64,
    pub sweep: Option<SweepRange>,
    pub resolution: f64,
    /// Defaults to Neumann on the low sides and outflow on the high sides.
    pub boundary: Option<BoundarySpec>,
    pub forcing: ForcingPreset,
    pub initial: InitialPreset,
    pub time: TimeSettings,
    pub tol: f64,
    pub max_iters: usize,
    /// Iterations `K` behind the averaged rate.
    pub rate_iters: usize,
    pub dof_cap: usize,
    pub allow_large_2d: bool,
    pub diagnostics: Diagnostics,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            discretization: Discretization::Fd,
            dimension: 1,
            degree: 1,
            flux: FluxKind::Central,
            mass: MassKind::Exact,
            omega_over_pi: 10.0,
            sweep: None,
            resolution: 10.0,
            boundary: None,
            forcing: ForcingPreset::default(),
            initial: InitialPreset::Zero,
            time: TimeSettings::default(),
            tol: 1e-6,
            max_iters: 5000,
            rate_iters: 1000,
            dof_cap: crate::spectral::DEFAULT_DOF_CAP,
            allow_large_2d: false,
            diagnostics: Diagnostics::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// TOML with every field spelled out, defaults included.
    pub fn to_toml(&self) -> String {
        let mut echo = self.clone();
        echo.boundary = Some(self.boundary_spec());
        toml::to_string(&echo).expect("config serializes")
    }

    pub fn boundary_spec(&self) -> BoundarySpec {
        self.boundary.unwrap_or_else(|| {
            use BoundaryCondition::{Neumann, Outflow};
            if self.dimension == 2 {
                BoundarySpec::two_d(Neumann, Outflow, Neumann, Outflow)
            } else {
                BoundarySpec::one_d(Neumann, Outflow)
            }
        })
    }

    pub fn wants_spectrum(&self) -> bool {
        self.diagnostics.spectrum || self.diagnostics.eigen_coefficients
    }

    /// Angular frequencies of the run: the sweep if present, else the single one.
    pub fn omegas(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => s.omegas(),
            None => vec![PI * self.omega_over_pi],
        }
    }

    /// Degrees of freedom at `omega`, without assembling anything.
    pub fn dofs(&self, omega: f64) -> Result<usize> {
        Ok(match self.discretization {
            Discretization::Fd => {
                let g = fd_resolution(omega, self.resolution, self.dimension)?;
                2 * g.points()
            }
            Discretization::Dg => {
                let m = dg_resolution(omega, self.degree, self.resolution, self.dimension)?;
                (self.dimension + 1) * m.nodes()
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::config(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.discretization == Discretization::Dg && self.degree == 0 {
            return Err(Error::config("DG degree must be at least 1"));
        }
        if !(self.omega_over_pi.is_finite() && self.omega_over_pi > 0.0) {
            return Err(Error::config("omega_over_pi must be positive"));
        }
        if let Some(s) = &self.sweep {
            if s.count < 2 {
                return Err(Error::config("a sweep needs count >= 2"));
            }
            if !(s.start > 0.0 && s.stop > s.start && s.stop.is_finite()) {
                return Err(Error::config("a sweep needs 0 < start < stop"));
            }
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::config("resolution constant must be positive"));
        }
        if !(self.time.cfl.is_finite() && self.time.cfl > 0.0) {
            return Err(Error::config("cfl must be positive"));
        }
        if self.time.min_steps < 2 {
            return Err(Error::config("min_steps must be at least 2"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config("tol must be positive"));
        }
        if self.max_iters == 0 || self.rate_iters == 0 {
            return Err(Error::config("max_iters and rate_iters must be positive"));
        }
        if self.boundary_spec().dim() != self.dimension {
            return Err(Error::config(format!(
                "boundary specification does not match dimension {}",
                self.dimension
            )));
        }
        if self.initial == InitialPreset::WavePacket && self.dimension != 1 {
            return Err(Error::config("paper-1d-ic is a 1D initial condition"));
        }
        if self.forcing == ForcingPreset::ImplicitFromInitialError
            && self.initial == InitialPreset::Zero
        {
            return Err(Error::config(
                "implicit-from-initial-error forcing needs a nonzero initial condition",
            ));
        }
        let top = self.omegas().into_iter().fold(0.0, f64::max) / PI;
        if self.dimension == 2 && top > DESK_SCALE_2D * (1.0 + 1e-12) && !self.allow_large_2d {
            return Err(Error::config(format!(
                "2D runs above omega = {DESK_SCALE_2D}π take minutes to hours; \
                 set allow_large_2d = true to proceed"
            )));
        }
        Ok(())
    }

    /// Whether any frequency exceeds the 2D desk scale.
    pub fn is_large_2d(&self) -> bool {
        self.dimension == 2
            && self.omegas().iter().any(|w| w / PI > DESK_SCALE_2D * (1.0 + 1e-12))
    }
}
