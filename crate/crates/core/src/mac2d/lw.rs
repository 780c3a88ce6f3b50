//! The Lax–Wendroff functional of the discrete mass equation and the weak
//! form it approximates.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::{mass_residual, EdgeDensity, MacGrid, MacState};
use crate::error::{Error, Result};
use crate::mesh::TimeGrid;
use crate::quadrature::{integrate_rect, mapped, rect_mean, GAUSS2};
use crate::smooth::{RadialBump, SmoothCutoff};

type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Smooth test function with compact support in `Omega x [0, T)`.
#[derive(Clone)]
pub struct TestFunction2D {
    value: SpaceTimeFn,
    time_derivative: SpaceTimeFn,
    x_derivative: SpaceTimeFn,
    y_derivative: SpaceTimeFn,
    /// `(x_min, x_max, y_min, y_max)` enclosing the spatial support.
    support: (f64, f64, f64, f64),
    /// `phi(., t) = 0` for `t >= vanishes_after`.
    vanishes_after: f64,
}

impl fmt::Debug for TestFunction2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction2D")
            .field("support", &self.support)
            .field("vanishes_after", &self.vanishes_after)
            .finish()
    }
}

impl TestFunction2D {
    pub fn new(
        value: SpaceTimeFn,
        time_derivative: SpaceTimeFn,
        x_derivative: SpaceTimeFn,
        y_derivative: SpaceTimeFn,
        support: (f64, f64, f64, f64),
        vanishes_after: f64,
    ) -> Self {
        Self {
            value,
            time_derivative,
            x_derivative,
            y_derivative,
            support,
            vanishes_after,
        }
    }

    /// `bump(x, y) cutoff(t)`.
    pub fn bump(bump: RadialBump, cutoff: SmoothCutoff) -> Self {
        let (cx, cy) = bump.center;
        let r = bump.radius;
        Self {
            value: Arc::new(move |x, y, t| bump.value(x, y) * cutoff.value(t)),
            time_derivative: Arc::new(move |x, y, t| bump.value(x, y) * cutoff.derivative(t)),
            x_derivative: Arc::new(move |x, y, t| bump.gradient(x, y).0 * cutoff.value(t)),
            y_derivative: Arc::new(move |x, y, t| bump.gradient(x, y).1 * cutoff.value(t)),
            support: (cx - r, cx + r, cy - r, cy + r),
            vanishes_after: cutoff.end,
        }
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.value)(x, y, t)
    }

    pub fn time_derivative(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.time_derivative)(x, y, t)
    }

    pub fn gradient(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        ((self.x_derivative)(x, y, t), (self.y_derivative)(x, y, t))
    }

    /// Support strictly inside the grid's rectangle and vanishing before `final_time`.
    pub fn check_support(&self, grid: &MacGrid, final_time: f64) -> Result<()> {
        let (x0, x1, y0, y1) = self.support;
        let xf = grid.x_faces();
        let yf = grid.y_faces();
        let inside =
            xf[0] < x0 && x1 < xf[xf.len() - 1] && yf[0] < y0 && y1 < yf[yf.len() - 1];
        if !inside || self.vanishes_after > final_time {
            return Err(Error::InvalidArgument(format!(
                "test function support {:?} x [0, {}] not compactly inside the grid x [0, {final_time})",
                self.support, self.vanishes_after
            )));
        }
        Ok(())
    }

    fn touches(&self, grid: &MacGrid, i: usize, j: usize) -> bool {
        let ((a, b), (c, d)) = grid.cell_bounds(i, j);
        let (x0, x1, y0, y1) = self.support;
        a < x1 && x0 < b && c < y1 && y0 < d
    }

    /// Cells meeting the support, as `(i, j)`.
    fn support_cells(&self, grid: &MacGrid) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if self.touches(grid, i, j) {
                    cells.push((i, j));
                }
            }
        }
        cells
    }
}

/// Sampled histories: cell means of `rho(., t_n)` and edge-midpoint values of
/// `velocity(., t_n)` for `n = 0..=N`.
pub fn sample_history(
    grid: &MacGrid,
    time_grid: &TimeGrid,
    rho: impl Fn(f64, f64, f64) -> f64,
    velocity: impl Fn(f64, f64, f64) -> (f64, f64),
) -> Result<Vec<MacState>> {
    (0..=time_grid.steps())
        .map(|n| {
            let t = time_grid.time(n);
            let density = grid.project_density(|x, y| rho(x, y, t));
            let (u, v) = grid.sample_velocity(|x, y| velocity(x, y, t));
            MacState::new(grid, density, u, v, n)
        })
        .collect()
}

/// `sum_{n<N} dt sum_K |K| C(rho, u)_K^n phi_K^n`, with `phi_K^n` the cell mean of
/// `phi(., t_n)`.
pub fn lw_functional(
    states: &[MacState],
    phi: &TestFunction2D,
    grid: &MacGrid,
    time_grid: &TimeGrid,
    mode: EdgeDensity,
) -> Result<f64> {
    let steps = time_grid.steps();
    if states.len() != steps + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} states for {steps} steps",
            states.len()
        )));
    }
    let dt = time_grid.dt();
    let cells = phi.support_cells(grid);
    let mut total = 0.0;
    for n in 0..steps {
        let t = time_grid.time(n);
        let c = mass_residual(&states[n], &states[n + 1], dt, grid, mode)?;
        let mut level = 0.0;
        for &(i, j) in &cells {
            let (xr, yr) = grid.cell_bounds(i, j);
            let mean = rect_mean(|x, y| phi.value(x, y, t), xr, yr);
            level += grid.cell_area(i, j) * c[grid.cell_index(i, j)] * mean;
        }
        total += dt * level;
    }
    Ok(total)
}

/// `-int rho0 phi(., 0) - int_0^T int (rho d_t phi + rho u . grad phi)` with the
/// 3x3 Gauss rule on the grid cells and the 2-point Gauss rule on each time slab.
pub fn weak_form_value(
    rho: impl Fn(f64, f64, f64) -> f64,
    velocity: impl Fn(f64, f64, f64) -> (f64, f64),
    phi: &TestFunction2D,
    rho0: impl Fn(f64, f64) -> f64,
    grid: &MacGrid,
    time_grid: &TimeGrid,
) -> f64 {
    let cells = phi.support_cells(grid);
    let space = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        cells
            .iter()
            .map(|&(i, j)| {
                let (xr, yr) = grid.cell_bounds(i, j);
                integrate_rect(f, xr, yr)
            })
            .sum()
    };
    let initial = space(&|x, y| rho0(x, y) * phi.value(x, y, 0.0));
    let mut bulk = 0.0;
    for n in 0..time_grid.steps() {
        for (t, w) in mapped(&GAUSS2, time_grid.time(n), time_grid.time(n + 1)) {
            bulk += w * space(&|x, y| {
                let r = rho(x, y, t);
                let (u, v) = velocity(x, y, t);
                let (px, py) = phi.gradient(x, y, t);
                r * phi.time_derivative(x, y, t) + r * (u * px + v * py)
            });
        }
    }
    -initial - bulk
}

/// One row of a Lax–Wendroff refinement study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LwRow {
    pub h: f64,
    pub dt: f64,
    pub lw_value: f64,
    pub weak_value: f64,
    pub gap: f64,
}

/// CSV with columns `h,dt,lw_value,weak_value,gap`.
pub fn write_lw_csv<W: Write>(mut out: W, rows: &[LwRow]) -> Result<()> {
    writeln!(out, "h,dt,lw_value,weak_value,gap")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.h, r.dt, r.lw_value, r.weak_value, r.gap)?;
    }
    Ok(())
}
