//! The semi-discrete system `dw/dt = A w − F·phase(ωt)`.

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_omega, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Zero normal derivative (a reflecting wall in the first-order form).
    Neumann,
    /// `u_t + n·∇u = 0`, the time-domain form of the impedance condition.
    Outflow,
}

/// One condition per side of `[−1, 1]^dim`; the `y` sides are absent in 1D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub x_lo: BoundaryCondition,
    pub x_hi: BoundaryCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_lo: Option<BoundaryCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_hi: Option<BoundaryCondition>,
}

impl BoundarySpec {
    pub fn one_d(left: BoundaryCondition, right: BoundaryCondition) -> Self {
        Self {
            x_lo: left,
            x_hi: right,
            y_lo: None,
            y_hi: None,
        }
    }

    pub fn two_d(
        x_lo: BoundaryCondition,
        x_hi: BoundaryCondition,
        y_lo: BoundaryCondition,
        y_hi: BoundaryCondition,
    ) -> Self {
        Self {
            x_lo,
            x_hi,
            y_lo: Some(y_lo),
            y_hi: Some(y_hi),
        }
    }

    pub fn uniform(dim: usize, bc: BoundaryCondition) -> Self {
        if dim == 1 {
            Self::one_d(bc, bc)
        } else {
            Self::two_d(bc, bc, bc, bc)
        }
    }

    pub fn dim(&self) -> usize {
        if self.y_lo.is_some() || self.y_hi.is_some() {
            2
        } else {
            1
        }
    }

    /// Conditions on the y sides, or a configuration error if either is missing.
    pub(crate) fn y_sides(&self) -> Result<(BoundaryCondition, BoundaryCondition)> {
        match (self.y_lo, self.y_hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::config(
                "2D discretization needs conditions on all four sides",
            )),
        }
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        match (dim, self.y_lo, self.y_hi) {
            (1, None, None) => Ok(()),
            (2, Some(_), Some(_)) => Ok(()),
            _ => Err(Error::config(format!(
                "boundary specification does not match a {dim}D discretization"
            ))),
        }
    }

    pub fn has_outflow(&self) -> bool {
        [Some(self.x_lo), Some(self.x_hi), self.y_lo, self.y_hi]
            .into_iter()
            .flatten()
            .any(|bc| bc == BoundaryCondition::Outflow)
    }
}

/// Time dependence of the forcing term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingPhase {
    Cosine,
    Sine,
}

impl ForcingPhase {
    pub fn eval(self, omega: f64, t: f64) -> f64 {
        match self {
            ForcingPhase::Cosine => (omega * t).cos(),
            ForcingPhase::Sine => (omega * t).sin(),
        }
    }

    /// Complex amplitude `c` with `phase(ωt) = Re(c e^{iωt})`.
    pub fn amplitude(self) -> Complex64 {
        match self {
            ForcingPhase::Cosine => Complex64::new(1.0, 0.0),
            ForcingPhase::Sine => Complex64::new(0.0, -1.0),
        }
    }
}

/// How the state vector splits into fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateLayout {
    /// `(u, v)` with `v = u_t`, each block `points` long.
    Velocity { points: usize },
    /// `(p, u₁[, u₂])`, each block `nodes` long.
    Conservative { nodes: usize, components: usize },
    /// No field structure (surrogate matrices).
    Plain { len: usize },
}

impl StateLayout {
    pub fn len(&self) -> usize {
        match *self {
            StateLayout::Velocity { points } => 2 * points,
            StateLayout::Conservative { nodes, components } => nodes * (1 + components),
            StateLayout::Plain { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of the leading block (`u` or `p`).
    pub fn primary_len(&self) -> usize {
        match *self {
            StateLayout::Velocity { points } => points,
            StateLayout::Conservative { nodes, .. } => nodes,
            StateLayout::Plain { len } => len,
        }
    }
}

/// Matrix-free action of a real spatial operator `A`.
pub trait SpatialOperator: Send + Sync + fmt::Debug {
    fn len(&self) -> usize;

    /// `out = A w`
    fn apply(&self, w: &[f64], out: &mut [f64]);

    /// Explicit assembly of the nonzeros of `A` as `(row, col, value)`,
    /// written independently of [`SpatialOperator::apply`]. Duplicates add.
    fn entries(&self) -> Vec<(usize, usize, f64)>;

    /// Largest explicit step permitted at the given CFL number.
    fn stable_step(&self, cfl: f64) -> f64;
}

/// An explicitly stored matrix, used for small surrogate systems.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::config("dense operator must be square"));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }
}

impl SpatialOperator for DenseOperator {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks_exact(self.n).zip(out.iter_mut()) {
            *o = row.iter().zip(w).map(|(a, b)| a * b).sum();
        }
    }

    fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (k / self.n, k % self.n, v))
            .collect()
    }

    fn stable_step(&self, cfl: f64) -> f64 {
        let norm_inf = self
            .data
            .chunks_exact(self.n.max(1))
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if norm_inf == 0.0 {
            f64::INFINITY
        } else {
            cfl / norm_inf
        }
    }
}

/// A spatially discretized wave system together with its forcing.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    operator: Arc<dyn SpatialOperator>,
    forcing: Vec<f64>,
    phase: ForcingPhase,
    omega: f64,
    layout: StateLayout,
}

impl DiscreteSystem {
    pub fn new(
        operator: Arc<dyn SpatialOperator>,
        forcing: Vec<f64>,
        phase: ForcingPhase,
        omega: f64,
        layout: StateLayout,
    ) -> Result<Self> {
        check_omega(omega)?;
        Error::check_len(operator.len(), forcing.len())?;
        Error::check_len(operator.len(), layout.len())?;
        Ok(Self {
            operator,
            forcing,
            phase,
            omega,
            layout,
        })
    }

    /// A plain system around an explicit matrix.
    pub fn from_dense(
        op: DenseOperator,
        forcing: Vec<f64>,
        phase: ForcingPhase,
        omega: f64,
    ) -> Result<Self> {
        let len = op.len();
        Self::new(Arc::new(op), forcing, phase, omega, StateLayout::Plain { len })
    }

    pub fn len(&self) -> usize {
        self.forcing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forcing.is_empty()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phase(&self) -> ForcingPhase {
        self.phase
    }

    pub fn forcing(&self) -> &[f64] {
        &self.forcing
    }

    pub fn layout(&self) -> StateLayout {
        self.layout
    }

    pub fn operator(&self) -> &dyn SpatialOperator {
        self.operator.as_ref()
    }

    /// `out = A w`
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        self.operator.apply(w, out);
    }

    pub fn apply_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply(w, &mut out);
        out
    }

    pub fn stable_step(&self, cfl: f64) -> f64 {
        self.operator.stable_step(cfl)
    }

    /// Same operator, forcing replaced.
    pub fn with_forcing(&self, forcing: Vec<f64>) -> Result<Self> {
        Error::check_len(self.len(), forcing.len())?;
        Ok(Self {
            forcing,
            ..self.clone()
        })
    }

    /// Same operator with `F = 0`; its filtered propagation is `S_h`.
    pub fn homogeneous(&self) -> Self {
        Self {
            forcing: vec![0.0; self.len()],
            ..self.clone()
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.forcing.iter().all(|&f| f == 0.0)
    }

    /// The complex vector `F_c` with `F·phase(ωt) = Re(F_c e^{iωt})`.
    pub fn complex_forcing(&self) -> Vec<Complex64> {
        let a = self.phase.amplitude();
        self.forcing.iter().map(|&f| a * f).collect()
    }

    /// Dense `A` from the explicit entry list.
    pub fn assemble_dense(&self) -> Mat<f64> {
        let n = self.len();
        let mut a = Mat::<f64>::zeros(n, n);
        for (i, j, v) in self.operator.entries() {
            a[(i, j)] += v;
        }
        a
    }

    /// Dense `A` column by column from the matrix-free action.
    pub fn dense_from_action(&self) -> Mat<f64> {
        let n = self.len();
        let mut a = Mat::<f64>::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for (i, &v) in col.iter().enumerate() {
                a[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        a
    }
}
