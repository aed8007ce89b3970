//! RK4 over one period with a trapezoid-rule time filter.

use std::f64::consts::PI;

use crate::error::{check_omega, Error, Result};
use crate::system::DiscreteSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub period: f64,
    pub n_steps: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(omega: f64, n_steps: usize) -> Result<Self> {
        check_omega(omega)?;
        if n_steps < 2 {
            return Err(Error::config(format!("need at least 2 steps per period, got {n_steps}")));
        }
        let period = 2.0 * PI / omega;
        Ok(Self {
            period,
            n_steps,
            dt: period / n_steps as f64,
        })
    }

    /// Time of step `k`, computed as `kT/N` so the last step lands on `T`.
    pub fn time(&self, k: usize) -> f64 {
        self.period * k as f64 / self.n_steps as f64
    }

    /// Trapezoid weight of `(2/T)(cos ωt − 1/4)` at step `k`.
    pub fn filter_weight(&self, k: usize) -> f64 {
        let theta = 2.0 * PI * k as f64 / self.n_steps as f64;
        let end = if k == 0 || k == self.n_steps { 0.5 } else { 1.0 };
        2.0 / self.n_steps as f64 * end * (theta.cos() - 0.25)
    }
}

/// `n_steps = max(min_steps, ⌈T/dt_stable⌉)`.
pub fn choose_time_grid(
    system: &DiscreteSystem,
    omega: f64,
    cfl: f64,
    min_steps: usize,
) -> Result<TimeGrid> {
    check_omega(omega)?;
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(Error::config("cfl must be positive"));
    }
    if min_steps < 2 {
        return Err(Error::config("min_steps must be at least 2"));
    }
    let period = 2.0 * PI / omega;
    let dt = system.stable_step(cfl);
    let cfl_steps = if dt.is_finite() {
        (period / dt).ceil() as usize
    } else {
        0
    };
    TimeGrid::new(omega, min_steps.max(cfl_steps))
}

/// Right-hand side `Aw − F·phase(ωt)`.
fn rhs(system: &DiscreteSystem, forced: bool, w: &[f64], t: f64, out: &mut [f64]) {
    system.apply(w, out);
    if forced {
        let s = system.phase().eval(system.omega(), t);
        for (o, f) in out.iter_mut().zip(system.forcing()) {
            *o -= s * f;
        }
    }
}

/// One classical RK4 step.
pub fn rk4_step(system: &DiscreteSystem, w: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    Error::check_len(system.len(), w.len())?;
    let mut p = Propagator::new(system);
    let mut out = w.to_vec();
    p.step(&mut out, t, dt);
    Ok(out)
}

/// Reusable RK4 workspace for one system.
#[derive(Debug)]
pub struct Propagator<'a> {
    system: &'a DiscreteSystem,
    forced: bool,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(system: &'a DiscreteSystem) -> Self {
        let n = system.len();
        Self {
            system,
            forced: !system.is_homogeneous(),
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
        }
    }

    /// Advances `w` from `t` to `t + dt` in place.
    pub fn step(&mut self, w: &mut [f64], t: f64, dt: f64) {
        let (sys, forced) = (self.system, self.forced);
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        rhs(sys, forced, w, t, k1);
        for ((s, &x), &k) in stage.iter_mut().zip(w.iter()).zip(k1.iter()) {
            *s = x + 0.5 * dt * k;
        }
        rhs(sys, forced, stage, t + 0.5 * dt, k2);
        for ((s, &x), &k) in stage.iter_mut().zip(w.iter()).zip(k2.iter()) {
            *s = x + 0.5 * dt * k;
        }
        rhs(sys, forced, stage, t + 0.5 * dt, k3);
        for ((s, &x), &k) in stage.iter_mut().zip(w.iter()).zip(k3.iter()) {
            *s = x + dt * k;
        }
        rhs(sys, forced, stage, t + dt, k4);
        let c = dt / 6.0;
        for i in 0..w.len() {
            w[i] += c * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }

    /// `out = Π_h w0`.
    pub fn filter(&mut self, w0: &[f64], tgrid: &TimeGrid, out: &mut [f64]) -> Result<()> {
        let n = self.system.len();
        Error::check_len(n, w0.len())?;
        Error::check_len(n, out.len())?;
        let mut w = w0.to_vec();
        let c0 = tgrid.filter_weight(0);
        for (o, &x) in out.iter_mut().zip(&w) {
            *o = c0 * x;
        }
        for k in 0..tgrid.n_steps {
            self.step(&mut w, tgrid.time(k), tgrid.dt);
            let c = tgrid.filter_weight(k + 1);
            for (o, &x) in out.iter_mut().zip(&w) {
                *o += c * x;
            }
        }
        Ok(())
    }
}

/// Filtered one-period propagation `Π_h w0`.
pub fn propagate_and_filter(
    system: &DiscreteSystem,
    w0: &[f64],
    tgrid: &TimeGrid,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; system.len()];
    Propagator::new(system).filter(w0, tgrid, &mut out)?;
    Ok(out)
}
