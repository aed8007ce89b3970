//! Nodal discontinuous Galerkin for the conservative system
//! `p_t + ∇·u = −(1/ω) f sin(ωt)`, `u_t + ∇p = 0`.
//!
//! Strong form on uniform elements with LGL nodes. The element mass is the
//! exact one by default; the diagonal LGL-quadrature mass is available too.
//! Tensor-product elements in 2D split into independent sweeps along rows
//! (`p`, `u₁`) and columns (`p`, `u₂`), so corners collect both face terms.
//! Nodes live in a global array of `K(P+1)` points per direction with
//! interface nodes duplicated.

pub mod lgl;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_omega, Error, Result};
use crate::system::{
    BoundaryCondition, BoundarySpec, DiscreteSystem, ForcingPhase, SpatialOperator, StateLayout,
};

pub use lgl::{gauss_legendre, lgl_reference, LocalOperators};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Central,
    Upwind,
}

impl FluxKind {
    fn penalty(self) -> f64 {
        match self {
            FluxKind::Central => 0.0,
            FluxKind::Upwind => 1.0,
        }
    }
}

/// Element mass matrix: exact `∫ ℓ_i ℓ_j`, or diagonal from LGL quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    #[default]
    Exact,
    Lumped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DGMesh {
    pub dim: usize,
    pub elements_per_dim: usize,
    pub h: f64,
    pub degree: usize,
    pub mass: MassKind,
}

impl DGMesh {
    pub fn new(dim: usize, elements_per_dim: usize, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::config(format!("unsupported dimension {dim}")));
        }
        if elements_per_dim == 0 {
            return Err(Error::config("mesh needs at least one element"));
        }
        if degree < 1 {
            return Err(Error::config("polynomial degree must be at least 1"));
        }
        Ok(Self {
            dim,
            elements_per_dim,
            h: 2.0 / elements_per_dim as f64,
            degree,
            mass: MassKind::default(),
        })
    }

    pub fn with_mass(self, mass: MassKind) -> Self {
        Self { mass, ..self }
    }

    /// Nodes along one direction, `K(P+1)`.
    pub fn nodes_per_dim(&self) -> usize {
        self.elements_per_dim * (self.degree + 1)
    }

    pub fn nodes(&self) -> usize {
        self.nodes_per_dim().pow(self.dim as u32)
    }

    /// Physical coordinates of the nodes along one direction.
    pub fn line_coords(&self) -> Vec<f64> {
        let r = lgl_reference(self.degree).expect("degree checked at construction");
        (0..self.elements_per_dim)
            .flat_map(|k| {
                let left = -1.0 + k as f64 * self.h;
                r.nodes
                    .iter()
                    .map(move |&x| left + 0.5 * (x + 1.0) * self.h)
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Largest uniform `h = 2/K` with `h^{P+1/2} ω^{P+3/2} ≤ constant`.
pub fn dg_resolution(omega: f64, degree: usize, constant: f64, dim: usize) -> Result<DGMesh> {
    check_omega(omega)?;
    if !(constant.is_finite() && constant > 0.0) {
        return Err(Error::config("resolution constant must be positive"));
    }
    let p = degree as f64;
    let h_max = (constant / omega.powf(p + 1.5)).powf(1.0 / (p + 0.5));
    let k = ((2.0 / h_max).ceil() as usize).max(1);
    DGMesh::new(dim, k, degree)
}

/// Flux numbers for one face seen from one side: the interior state,
/// the exterior state, and the outward normal sign.
#[derive(Clone, Copy)]
struct FaceState {
    p_in: f64,
    un_in: f64,
    p_out: f64,
    un_out: f64,
}

/// `(p#, (u·n)#)`
fn numerical_flux(s: FaceState, tau: f64) -> (f64, f64) {
    let p = 0.5 * (s.p_in + s.p_out) + 0.5 * tau * (s.un_in - s.un_out);
    let un = 0.5 * (s.un_in + s.un_out) + 0.5 * tau * (s.p_in - s.p_out);
    (p, un)
}

#[derive(Clone, Debug)]
struct Line {
    elements: usize,
    h: f64,
    flux: FluxKind,
    reference: LocalOperators,
    /// `M⁻¹ e_s` on the reference element for the left and right faces
    lift: [Vec<f64>; 2],
}

impl Line {
    fn np(&self) -> usize {
        self.reference.len()
    }

    /// Adds this direction's contribution to `(dp, dq)`, where `q` is the
    /// velocity component along the line. `lanes` parallel lines are
    /// processed together: node `i` of lane `l` sits at `start + i·stride + l`.
    #[allow(clippy::too_many_arguments)]
    fn apply(
        &self,
        p: &[f64],
        q: &[f64],
        dp: &mut [f64],
        dq: &mut [f64],
        start: usize,
        stride: usize,
        lanes: usize,
        lo: BoundaryCondition,
        hi: BoundaryCondition,
    ) {
        let np = self.np();
        let scale = 2.0 / self.h;
        let at = |i: usize| start + i * stride;
        let r = &self.reference;
        for k in 0..self.elements {
            let base = k * np;
            for a in 0..np {
                let ia = at(base + a);
                for b in 0..np {
                    let d = scale * r.diff[a * np + b];
                    let ib = at(base + b);
                    let (pb, qb) = (&p[ib..ib + lanes], &q[ib..ib + lanes]);
                    for (x, &v) in dp[ia..ia + lanes].iter_mut().zip(qb) {
                        *x -= d * v;
                    }
                    for (x, &v) in dq[ia..ia + lanes].iter_mut().zip(pb) {
                        *x -= d * v;
                    }
                }
            }
        }

        let tau = self.flux.penalty();
        let last = self.elements * np - 1;
        // face terms `(p, q)` before lifting, seen from one side with
        // outward normal `n`; `out` is the exterior `(p, q)` if there is one
        let face = |p_in: f64, q_in: f64, n: f64, out: Option<(f64, f64)>, bc: BoundaryCondition| {
            let un_in = n * q_in;
            let (p_out, un_out, tau) = match (out, bc) {
                (Some((po, qo)), _) => (po, n * qo, tau),
                (None, BoundaryCondition::Neumann) => (p_in, -un_in, tau),
                // characteristic closure: nothing enters from outside
                (None, BoundaryCondition::Outflow) => (0.0, 0.0, 1.0),
            };
            let state = FaceState {
                p_in,
                un_in,
                p_out,
                un_out,
            };
            let (p_star, un_star) = numerical_flux(state, tau);
            (un_in - un_star, n * (p_in - p_star))
        };
        for k in 0..self.elements {
            let left = k * np;
            let right = left + np - 1;
            for l in 0..lanes {
                let node = |i: usize| (p[at(i) + l], q[at(i) + l]);
                let (pl, ql) = node(left);
                let (pr, qr) = node(right);
                let terms = [
                    face(pl, ql, -1.0, (k > 0).then(|| node(left - 1)), lo),
                    face(pr, qr, 1.0, (right < last).then(|| node(right + 1)), hi),
                ];
                for (side, (tp, tq)) in terms.into_iter().enumerate() {
                    for (a, &lift) in self.lift[side].iter().enumerate() {
                        if lift != 0.0 {
                            dp[at(left + a) + l] += scale * lift * tp;
                            dq[at(left + a) + l] += scale * lift * tq;
                        }
                    }
                }
            }
        }
    }

    /// Entries of the line operator in line-local numbering, `p` at `i` and
    /// `q` at `n + i` for a line of `n` nodes.
    fn entries(&self, lo: BoundaryCondition, hi: BoundaryCondition) -> Vec<(usize, usize, f64)> {
        let np = self.np();
        let n = self.elements * np;
        let s = 2.0 / self.h;
        let tau = self.flux.penalty();
        let r = &self.reference;
        let mut e = Vec::new();
        for k in 0..self.elements {
            let base = k * np;
            for a in 0..np {
                for b in 0..np {
                    let d = -s * r.diff_at(a, b);
                    e.push((base + a, n + base + b, d));
                    e.push((n + base + a, base + b, d));
                }
            }
        }
        // Face terms before lifting, as (element start, side, field, coefficients).
        // Interior face between node `i` (left element) and `j = i + 1`:
        //   p-term at i: ½(q_i − q_j) − τ/2 (p_i − p_j)
        //   q-term at i: ½(p_i − p_j) − τ/2 (q_i − q_j)
        //   p-term at j: ½(q_i − q_j) + τ/2 (p_i − p_j)
        //   q-term at j: ½(p_i − p_j) + τ/2 (q_i − q_j)
        let mut terms: Vec<(usize, usize, usize, Vec<(usize, f64)>)> = Vec::new();
        for k in 1..self.elements {
            let i = k * np - 1;
            let j = i + 1;
            let (h, t) = (0.5, 0.5 * tau);
            terms.push((i + 1 - np, 1, 0, vec![(n + i, h), (n + j, -h), (i, -t), (j, t)]));
            terms.push((i + 1 - np, 1, 1, vec![(i, h), (j, -h), (n + i, -t), (n + j, t)]));
            terms.push((j, 0, 0, vec![(n + i, h), (n + j, -h), (i, t), (j, -t)]));
            terms.push((j, 0, 1, vec![(i, h), (j, -h), (n + i, t), (n + j, -t)]));
        }
        // Boundary faces with un = n q:
        //   wall:    p-term un,         q-term −τ q
        //   outflow: p-term (un − p)/2, q-term n (p − un)/2
        for (i, start, side, nrm, bc) in [(0, 0, 0, -1.0, lo), (n - 1, n - np, 1, 1.0, hi)] {
            match bc {
                BoundaryCondition::Neumann => {
                    terms.push((start, side, 0, vec![(n + i, nrm)]));
                    terms.push((start, side, 1, vec![(n + i, -tau)]));
                }
                BoundaryCondition::Outflow => {
                    terms.push((start, side, 0, vec![(n + i, 0.5 * nrm), (i, -0.5)]));
                    terms.push((start, side, 1, vec![(i, 0.5 * nrm), (n + i, -0.5)]));
                }
            }
        }
        for (start, side, field, coeffs) in terms {
            for (a, &l) in self.lift[side].iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                for &(col, c) in &coeffs {
                    e.push((field * n + start + a, col, s * l * c));
                }
            }
        }
        e
    }
}

#[derive(Clone, Debug)]
pub struct Dg1d {
    line: Line,
    lo: BoundaryCondition,
    hi: BoundaryCondition,
}

impl SpatialOperator for Dg1d {
    fn len(&self) -> usize {
        2 * self.line.elements * self.line.np()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let n = self.len() / 2;
        out.fill(0.0);
        let (p, q) = w.split_at(n);
        let (dp, dq) = out.split_at_mut(n);
        self.line.apply(p, q, dp, dq, 0, 1, 1, self.lo, self.hi);
    }

    fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.line.entries(self.lo, self.hi)
    }

    fn stable_step(&self, cfl: f64) -> f64 {
        cfl * self.line.h / (2 * self.line.reference.degree + 1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct Dg2d {
    line: Line,
    bc: [BoundaryCondition; 4],
}

impl Dg2d {
    fn nx(&self) -> usize {
        self.line.elements * self.line.np()
    }
}

impl SpatialOperator for Dg2d {
    fn len(&self) -> usize {
        3 * self.nx() * self.nx()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let nx = self.nx();
        let n = nx * nx;
        out.fill(0.0);
        let (p, rest) = w.split_at(n);
        let (u1, u2) = rest.split_at(n);
        let (dp, rest) = out.split_at_mut(n);
        let (du1, du2) = rest.split_at_mut(n);
        let [x_lo, x_hi, y_lo, y_hi] = self.bc;
        for iy in 0..nx {
            self.line.apply(p, u1, dp, du1, iy * nx, 1, 1, x_lo, x_hi);
        }
        // all columns at once, so the innermost loops run along rows
        self.line.apply(p, u2, dp, du2, 0, nx, nx, y_lo, y_hi);
    }

    fn entries(&self) -> Vec<(usize, usize, f64)> {
        let nx = self.nx();
        let n = nx * nx;
        let [x_lo, x_hi, y_lo, y_hi] = self.bc;
        let rows = self.line.entries(x_lo, x_hi);
        let cols = self.line.entries(y_lo, y_hi);
        // line-local index → global index for row `iy` / column `ix`
        let row_map = |iy: usize, a: usize| {
            if a < nx {
                iy * nx + a
            } else {
                n + iy * nx + (a - nx)
            }
        };
        let col_map = |ix: usize, a: usize| {
            if a < nx {
                a * nx + ix
            } else {
                2 * n + (a - nx) * nx + ix
            }
        };
        let mut e = Vec::with_capacity(nx * (rows.len() + cols.len()));
        for line in 0..nx {
            e.extend(rows.iter().map(|&(r, c, v)| (row_map(line, r), row_map(line, c), v)));
            e.extend(cols.iter().map(|&(r, c, v)| (col_map(line, r), col_map(line, c), v)));
        }
        e
    }

    fn stable_step(&self, cfl: f64) -> f64 {
        cfl * self.line.h / (2 * self.line.reference.degree + 1) as f64
    }
}

/// Conservative DG system; `F` holds `f/ω` at the nodes of the `p` block with
/// sine phase, so the right-hand side carries `−(1/ω) f sin(ωt)`.
pub fn build_dg(
    omega: f64,
    mesh: &DGMesh,
    flux: FluxKind,
    bc: &BoundarySpec,
    f: impl Fn(f64, f64) -> f64,
) -> Result<DiscreteSystem> {
    check_omega(omega)?;
    bc.require_dim(mesh.dim)?;
    let reference = lgl_reference(mesh.degree)?;
    let lift = match mesh.mass {
        MassKind::Exact => reference.lift.clone(),
        MassKind::Lumped => {
            let end = |k: usize, v: f64| (0..reference.len()).map(|i| if i == k { v } else { 0.0 }).collect();
            [end(0, reference.lift_lumped[0]), end(mesh.degree, reference.lift_lumped[1])]
        }
    };
    let line = Line {
        elements: mesh.elements_per_dim,
        h: mesh.h,
        flux,
        reference,
        lift,
    };
    let coords = mesh.line_coords();
    let nx = coords.len();
    let (op, layout, forcing): (Arc<dyn SpatialOperator>, _, _) = if mesh.dim == 1 {
        let mut forcing = vec![0.0; 2 * nx];
        for (fi, &x) in forcing.iter_mut().zip(&coords) {
            *fi = f(x, 0.0) / omega;
        }
        (
            Arc::new(Dg1d {
                line,
                lo: bc.x_lo,
                hi: bc.x_hi,
            }),
            StateLayout::Conservative {
                nodes: nx,
                components: 1,
            },
            forcing,
        )
    } else {
        let (y_lo, y_hi) = bc.y_sides()?;
        let n = nx * nx;
        let mut forcing = vec![0.0; 3 * n];
        for (iy, &y) in coords.iter().enumerate() {
            for (ix, &x) in coords.iter().enumerate() {
                forcing[iy * nx + ix] = f(x, y) / omega;
            }
        }
        (
            Arc::new(Dg2d {
                line,
                bc: [bc.x_lo, bc.x_hi, y_lo, y_hi],
            }),
            StateLayout::Conservative {
                nodes: n,
                components: 2,
            },
            forcing,
        )
    };
    DiscreteSystem::new(op, forcing, ForcingPhase::Sine, omega, layout)
}
