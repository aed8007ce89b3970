//! Second-order finite differences for the velocity form
//! `u_t = v`, `v_t = Δu − f cos(ωt)` on `[−1, 1]^dim`.
//!
//! Boundary rows come from eliminating a ghost point with a centred
//! difference of the boundary condition: a mirror for Neumann, and
//! `v + n·(u_ghost − u_inner)/(2h) = 0` for outflow, which adds `−(2/h) v`
//! to the boundary row. In 2D each direction is eliminated on its own, so a
//! corner node carries both contributions.

use std::sync::Arc;

use crate::error::{check_omega, Error, Result};
use crate::system::{
    BoundaryCondition, BoundarySpec, DiscreteSystem, ForcingPhase, SpatialOperator, StateLayout,
};

/// Uniform grid `x_j = −1 + j h`, `j = 0..=m`, in each direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub m: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::config(format!("unsupported dimension {dim}")));
        }
        if m < 2 {
            return Err(Error::config(format!("grid needs m >= 2, got {m}")));
        }
        Ok(Self {
            dim,
            m,
            h: 2.0 / m as f64,
        })
    }

    pub fn points_per_dim(&self) -> usize {
        self.m + 1
    }

    pub fn points(&self) -> usize {
        self.points_per_dim().pow(self.dim as u32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        -1.0 + j as f64 * self.h
    }
}

/// Coarsest grid `h = 2/m` with `h²ω³ ≤ constant`.
pub fn fd_resolution(omega: f64, constant: f64, dim: usize) -> Result<Grid> {
    check_omega(omega)?;
    if !(constant.is_finite() && constant > 0.0) {
        return Err(Error::config("resolution constant must be positive"));
    }
    let h_max = (constant / omega.powi(3)).sqrt();
    let m = ((2.0 / h_max).ceil() as usize).max(2);
    Grid::new(dim, m)
}

fn outflow(bc: BoundaryCondition) -> bool {
    bc == BoundaryCondition::Outflow
}

#[derive(Clone, Debug)]
pub struct Fd1d {
    n: usize,
    h: f64,
    left: BoundaryCondition,
    right: BoundaryCondition,
}

impl SpatialOperator for Fd1d {
    fn len(&self) -> usize {
        2 * self.n
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (u, v) = w.split_at(n);
        let (du, dv) = out.split_at_mut(n);
        du.copy_from_slice(v);
        let inv_h2 = 1.0 / (self.h * self.h);
        for j in 1..n - 1 {
            dv[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_h2;
        }
        dv[0] = 2.0 * (u[1] - u[0]) * inv_h2;
        dv[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv_h2;
        if outflow(self.left) {
            dv[0] -= 2.0 * v[0] / self.h;
        }
        if outflow(self.right) {
            dv[n - 1] -= 2.0 * v[n - 1] / self.h;
        }
    }

    fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n;
        let c = 1.0 / (self.h * self.h);
        let mut e = Vec::with_capacity(5 * n);
        for j in 0..n {
            e.push((j, n + j, 1.0));
            let row = n + j;
            if j == 0 {
                e.push((row, 0, -2.0 * c));
                e.push((row, 1, 2.0 * c));
            } else if j == n - 1 {
                e.push((row, n - 1, -2.0 * c));
                e.push((row, n - 2, 2.0 * c));
            } else {
                e.push((row, j - 1, c));
                e.push((row, j, -2.0 * c));
                e.push((row, j + 1, c));
            }
        }
        if outflow(self.left) {
            e.push((n, n, -2.0 / self.h));
        }
        if outflow(self.right) {
            e.push((2 * n - 1, 2 * n - 1, -2.0 / self.h));
        }
        e
    }

    fn stable_step(&self, cfl: f64) -> f64 {
        cfl * self.h
    }
}

#[derive(Clone, Debug)]
pub struct Fd2d {
    nx: usize,
    h: f64,
    bc: [BoundaryCondition; 4],
}

impl SpatialOperator for Fd2d {
    fn len(&self) -> usize {
        2 * self.nx * self.nx
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        let n = nx * nx;
        let (u, v) = w.split_at(n);
        let (du, dv) = out.split_at_mut(n);
        du.copy_from_slice(v);
        let inv_h2 = 1.0 / (self.h * self.h);
        let damp = 2.0 / self.h;
        let [x_lo, x_hi, y_lo, y_hi] = self.bc.map(outflow);
        for iy in 0..nx {
            let row = &u[iy * nx..(iy + 1) * nx];
            let below = if iy == 0 { 1 } else { iy - 1 };
            let above = if iy == nx - 1 { nx - 2 } else { iy + 1 };
            let below = &u[below * nx..(below + 1) * nx];
            let above = &u[above * nx..(above + 1) * nx];
            let out_row = &mut dv[iy * nx..(iy + 1) * nx];
            out_row[0] = (2.0 * row[1] + below[0] + above[0] - 4.0 * row[0]) * inv_h2;
            for ix in 1..nx - 1 {
                out_row[ix] = (row[ix - 1] + row[ix + 1] + below[ix] + above[ix]
                    - 4.0 * row[ix])
                    * inv_h2;
            }
            out_row[nx - 1] =
                (2.0 * row[nx - 2] + below[nx - 1] + above[nx - 1] - 4.0 * row[nx - 1]) * inv_h2;

            let v_row = &v[iy * nx..(iy + 1) * nx];
            if x_lo {
                out_row[0] -= damp * v_row[0];
            }
            if x_hi {
                out_row[nx - 1] -= damp * v_row[nx - 1];
            }
            if (iy == 0 && y_lo) || (iy == nx - 1 && y_hi) {
                for (o, &vv) in out_row.iter_mut().zip(v_row) {
                    *o -= damp * vv;
                }
            }
        }
    }

    fn entries(&self) -> Vec<(usize, usize, f64)> {
        let nx = self.nx;
        let n = nx * nx;
        let c = 1.0 / (self.h * self.h);
        let idx = |ix: usize, iy: usize| iy * nx + ix;
        // 1D second-difference weights along one direction, ghost folded in
        let stencil = |i: usize| -> Vec<(usize, f64)> {
            if i == 0 {
                vec![(0, -2.0 * c), (1, 2.0 * c)]
            } else if i == nx - 1 {
                vec![(nx - 1, -2.0 * c), (nx - 2, 2.0 * c)]
            } else {
                vec![(i - 1, c), (i, -2.0 * c), (i + 1, c)]
            }
        };
        let mut e = Vec::with_capacity(11 * n);
        for iy in 0..nx {
            for ix in 0..nx {
                let k = idx(ix, iy);
                e.push((k, n + k, 1.0));
                for (jx, wt) in stencil(ix) {
                    e.push((n + k, idx(jx, iy), wt));
                }
                for (jy, wt) in stencil(iy) {
                    e.push((n + k, idx(ix, jy), wt));
                }
                let sides = [
                    (ix == 0, self.bc[0]),
                    (ix == nx - 1, self.bc[1]),
                    (iy == 0, self.bc[2]),
                    (iy == nx - 1, self.bc[3]),
                ];
                for (on_side, bc) in sides {
                    if on_side && outflow(bc) {
                        e.push((n + k, n + k, -2.0 / self.h));
                    }
                }
            }
        }
        e
    }

    fn stable_step(&self, cfl: f64) -> f64 {
        cfl * self.h
    }
}

/// Velocity-form system on a 1D grid; `F` holds `f(x_j)` in the `v` block.
pub fn build_fd_1d(
    omega: f64,
    grid: &Grid,
    bc: &BoundarySpec,
    f: impl Fn(f64, f64) -> f64,
) -> Result<DiscreteSystem> {
    check_omega(omega)?;
    if grid.dim != 1 {
        return Err(Error::config("build_fd_1d needs a 1D grid"));
    }
    bc.require_dim(1)?;
    let n = grid.points_per_dim();
    let op = Fd1d {
        n,
        h: grid.h,
        left: bc.x_lo,
        right: bc.x_hi,
    };
    let mut forcing = vec![0.0; 2 * n];
    for j in 0..n {
        forcing[n + j] = f(grid.coord(j), 0.0);
    }
    DiscreteSystem::new(
        Arc::new(op),
        forcing,
        ForcingPhase::Cosine,
        omega,
        StateLayout::Velocity { points: n },
    )
}

/// Velocity-form system on a 2D grid, nodes ordered row-major (`x` fastest).
pub fn build_fd_2d(
    omega: f64,
    grid: &Grid,
    bc: &BoundarySpec,
    f: impl Fn(f64, f64) -> f64,
) -> Result<DiscreteSystem> {
    check_omega(omega)?;
    if grid.dim != 2 {
        return Err(Error::config("build_fd_2d needs a 2D grid"));
    }
    let (y_lo, y_hi) = bc.y_sides()?;
    let nx = grid.points_per_dim();
    let n = nx * nx;
    let op = Fd2d {
        nx,
        h: grid.h,
        bc: [bc.x_lo, bc.x_hi, y_lo, y_hi],
    };
    let mut forcing = vec![0.0; 2 * n];
    for iy in 0..nx {
        for ix in 0..nx {
            forcing[n + iy * nx + ix] = f(grid.coord(ix), grid.coord(iy));
        }
    }
    DiscreteSystem::new(
        Arc::new(op),
        forcing,
        ForcingPhase::Cosine,
        omega,
        StateLayout::Velocity { points: n },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::BoundaryCondition::{Neumann, Outflow};
    use std::f64::consts::PI;

    fn zero(_: f64, _: f64) -> f64 {
        0.0
    }

    #[test]
    fn resolution_rule() {
        let g = fd_resolution(10.0 * PI, 10.0, 1).unwrap();
        assert_eq!(g.m, 112);
        let omega = 30.0 * PI;
        let g = fd_resolution(omega, 10.0, 1).unwrap();
        assert_eq!(g.m, (2.0 / (10.0 / omega.powi(3)).sqrt()).ceil() as usize);
        assert!(g.h * g.h * omega.powi(3) <= 10.0);
        // doubling the constant scales the admissible h by √2
        let a = (10.0f64 / omega.powi(3)).sqrt();
        let b = (20.0f64 / omega.powi(3)).sqrt();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hand_eliminated_rows_m2() {
        let grid = Grid::new(1, 2).unwrap();
        assert_eq!(grid.h, 1.0);
        let sys = build_fd_1d(1.0, &grid, &BoundarySpec::one_d(Neumann, Outflow), zero).unwrap();
        let a = sys.assemble_dense();
        // v-block rows, columns (u0 u1 u2 v0 v1 v2)
        let expect = [
            [-2.0, 2.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, -2.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, -2.0, 0.0, 0.0, -2.0],
        ];
        for (r, row) in expect.iter().enumerate() {
            for (c, &val) in row.iter().enumerate() {
                assert_eq!(a[(3 + r, c)], val, "row {r} col {c}");
            }
        }
        assert_eq!(sys.dense_from_action(), a);
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let grid = Grid::new(1, 10).unwrap();
        let sys = build_fd_1d(3.0, &grid, &BoundarySpec::one_d(Neumann, Outflow), zero).unwrap();
        assert!(sys.apply_vec(&vec![0.0; sys.len()]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn neumann_laplacian_is_self_adjoint_in_trapezoid_weights() {
        // The ghost-eliminated rows are not symmetric as stored; W·L is, with W
        // the trapezoid weights (1/2 at the ends).
        let m = 8;
        let grid = Grid::new(1, m).unwrap();
        let sys = build_fd_1d(1.0, &grid, &BoundarySpec::uniform(1, Neumann), zero).unwrap();
        let a = sys.assemble_dense();
        let n = m + 1;
        let w = |j: usize| if j == 0 || j == m { 0.5 } else { 1.0 };
        let block = |i: usize, j: usize| w(i) * a[(n + i, j)];
        for i in 0..n {
            for j in 0..n {
                assert!((block(i, j) - block(j, i)).abs() < 1e-12);
            }
        }
        // negative semi-definite: Gershgorin on the symmetric weighted block
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| block(i, j).abs()).sum();
            assert!(block(i, i) + off <= 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated_2d() {
        let grid = Grid::new(2, 6).unwrap();
        let sys = build_fd_2d(2.0, &grid, &BoundarySpec::uniform(2, Neumann), zero).unwrap();
        let n = grid.points();
        let mut w = vec![0.0; 2 * n];
        w[..n].fill(1.0);
        assert!(sys.apply_vec(&w).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn interior_row_is_five_point() {
        let grid = Grid::new(2, 3).unwrap();
        let bc = BoundarySpec::two_d(Neumann, Outflow, Neumann, Outflow);
        let sys = build_fd_2d(2.0, &grid, &bc, zero).unwrap();
        let a = sys.assemble_dense();
        let n = 16;
        let c = 1.0 / (grid.h * grid.h);
        let centre = 4 + 1; // (ix, iy) = (1, 1)
        for col in 0..2 * n {
            let expect = match col {
                _ if col == centre => -4.0 * c,
                _ if [centre - 1, centre + 1, centre - 4, centre + 4].contains(&col) => c,
                _ => 0.0,
            };
            assert!((a[(n + centre, col)] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn action_matches_assembly_2d() {
        let grid = Grid::new(2, 4).unwrap();
        let bc = BoundarySpec::two_d(Outflow, Neumann, Outflow, Outflow);
        let sys = build_fd_2d(2.0, &grid, &bc, zero).unwrap();
        let a = sys.assemble_dense();
        let b = sys.dense_from_action();
        for i in 0..sys.len() {
            for j in 0..sys.len() {
                assert!((a[(i, j)] - b[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let g1 = Grid::new(1, 4).unwrap();
        let g2 = Grid::new(2, 4).unwrap();
        let b1 = BoundarySpec::one_d(Neumann, Outflow);
        let b2 = BoundarySpec::uniform(2, Outflow);
        assert!(build_fd_1d(1.0, &g2, &b1, zero).is_err());
        assert!(build_fd_1d(1.0, &g1, &b2, zero).is_err());
        assert!(build_fd_2d(1.0, &g2, &b1, zero).is_err());
        assert!(Grid::new(1, 1).is_err());
    }
}
