//! Explicit finite volume schemes for scalar conservation laws on periodic
//! meshes, with weak-BV, total variation and discrete entropy diagnostics.

mod flux;
mod riemann;

use std::io::Write;

use serde::Serialize;

pub use flux::{
    flux_godunov, flux_lax_friedrichs, flux_upwind, ConservationLaw, FluxRule,
    MonotonicityReport, NumericalFlux,
};
pub use riemann::{burgers_riemann, BurgersPulse};

use crate::error::{check_cfl, Error, Result};
use crate::mesh::{CellField, Mesh1D, TimeGrid};
use crate::transport1d::{relative_drift, write_history_csv};

/// Entropy levels used by the default diagnostics.
pub const KAPPAS: [f64; 3] = [-0.5, 0.0, 0.5];

#[derive(Clone, Debug)]
pub struct ConservationRun {
    pub flux: NumericalFlux,
    pub mesh: Mesh1D,
    pub time_grid: TimeGrid,
    /// Largest `dt L / |K_i|`.
    pub cfl: f64,
    pub history: Vec<Vec<f64>>,
}

impl ConservationRun {
    pub fn law(&self) -> ConservationLaw {
        self.flux.law
    }

    pub fn field(&self, n: usize) -> CellField<'_> {
        CellField::new(&self.mesh, self.history[n].clone(), self.time_grid.time(n))
            .expect("history rows match the mesh")
    }

    pub fn final_values(&self) -> &[f64] {
        &self.history[self.history.len() - 1]
    }

    /// `sum_i |K_i| u_i^n`.
    pub fn mass(&self, n: usize) -> f64 {
        self.field(n).integral()
    }

    pub fn relative_mass_drift(&self) -> f64 {
        relative_drift(
            (0..self.history.len()).map(|n| self.mass(n)),
            &self.mesh.widths(),
            &self.history[0],
        )
    }

    /// `(min, max)` over all levels.
    pub fn range(&self) -> (f64, f64) {
        self.history
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
                (lo.min(u), hi.max(u))
            })
    }

    /// CSV with columns `n,i,x_i,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_history_csv(out, &self.mesh, &self.history)
    }
}

fn face_fluxes(flux: &NumericalFlux, u: &[f64]) -> Vec<f64> {
    let m = u.len();
    (0..m).map(|i| flux.evaluate(u[i], u[(i + 1) % m])).collect()
}

/// `|K_i| (u_i^{n+1} - u_i^n)/dt + F_{i+1/2}^n - F_{i-1/2}^n = 0` on the periodic
/// mesh, under `dt L <= min |K_i|` with `L` the flux's Lipschitz bound on the
/// initial range.
pub fn run_conservation_scheme(
    flux: NumericalFlux,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
    initial: Vec<f64>,
) -> Result<ConservationRun> {
    let m = mesh.cells();
    if initial.len() != m {
        return Err(Error::InvalidArgument(format!(
            "initial vector has {} entries for {m} cells",
            initial.len()
        )));
    }
    let (lo, hi) = initial
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
            (lo.min(u), hi.max(u))
        });
    let widths = mesh.widths();
    let dt = time_grid.dt();
    let lipschitz = flux.lipschitz_bound(lo, hi);
    let cfl = if lipschitz > 0.0 {
        check_cfl(dt, mesh.min_width() / lipschitz)?;
        dt * lipschitz / mesh.min_width()
    } else {
        0.0
    };
    let mut history = Vec::with_capacity(time_grid.steps() + 1);
    history.push(initial);
    for _ in 0..time_grid.steps() {
        let u = &history[history.len() - 1];
        let f = face_fluxes(&flux, u);
        let next = (0..m)
            .map(|i| {
                let left = if i == 0 { f[m - 1] } else { f[i - 1] };
                u[i] - dt / widths[i] * (f[i] - left)
            })
            .collect();
        history.push(next);
    }
    Ok(ConservationRun {
        flux,
        mesh: mesh.clone(),
        time_grid: *time_grid,
        cfl,
        history,
    })
}

/// Periodic total variation `sum_i |u_{i+1} - u_i|`.
pub fn total_variation(values: &[f64]) -> f64 {
    let m = values.len();
    (0..m).map(|i| (values[(i + 1) % m] - values[i]).abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakBv {
    /// `sum_i |f(u_{i+1}^n) - f(u_i^n)|` for `n = 0..N-1`.
    pub per_step: Vec<f64>,
    /// `sum_n dt per_step[n]`.
    pub aggregate: f64,
}

pub fn weak_bv_sum(run: &ConservationRun) -> WeakBv {
    let law = run.law();
    let dt = run.time_grid.dt();
    let per_step: Vec<f64> = run.history[..run.history.len() - 1]
        .iter()
        .map(|u| {
            let f: Vec<f64> = u.iter().map(|&v| law.flux(v)).collect();
            total_variation(&f)
        })
        .collect();
    let aggregate = per_step.iter().map(|s| dt * s).sum();
    WeakBv {
        per_step,
        aggregate,
    }
}

/// Largest positive part of
/// `|K_i| (eta(u_i^{n+1}) - eta(u_i^n))/dt + Q_{i+1/2}^n - Q_{i-1/2}^n`
/// for `eta(u) = |u - kappa|` and
/// `Q(a, b) = F(a v kappa, b v kappa) - F(a ^ kappa, b ^ kappa)`.
pub fn entropy_residual(run: &ConservationRun, flux: &NumericalFlux, kappa: f64) -> f64 {
    let m = run.mesh.cells();
    let widths = run.mesh.widths();
    let dt = run.time_grid.dt();
    let q = |a: f64, b: f64| {
        flux.evaluate(a.max(kappa), b.max(kappa)) - flux.evaluate(a.min(kappa), b.min(kappa))
    };
    let mut worst = 0.0_f64;
    for n in 0..run.time_grid.steps() {
        let (u, v) = (&run.history[n], &run.history[n + 1]);
        let faces: Vec<f64> = (0..m).map(|i| q(u[i], u[(i + 1) % m])).collect();
        for i in 0..m {
            let left = if i == 0 { faces[m - 1] } else { faces[i - 1] };
            let r = widths[i] * ((v[i] - kappa).abs() - (u[i] - kappa).abs()) / dt
                + faces[i]
                - left;
            worst = worst.max(r);
        }
    }
    worst
}

/// `sum_i |K_i| |u_i - exact(x_i)|`.
pub fn l1_error(mesh: &Mesh1D, values: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    mesh.widths()
        .iter()
        .zip(mesh.points())
        .zip(values)
        .map(|((w, &x), u)| w * (u - exact(x)).abs())
        .sum()
}

/// Position where the piecewise-linear interpolant through `(x_i, u_i)`, scanned
/// rightwards from `from`, first falls through `level`.
pub fn falling_crossing(mesh: &Mesh1D, values: &[f64], level: f64, from: f64) -> Option<f64> {
    let m = mesh.cells();
    let p = mesh.points();
    let start = p.iter().position(|&x| x >= from)?;
    for k in start..start + m - 1 {
        let (i, j) = (k % m, (k + 1) % m);
        if values[i] >= level && values[j] < level {
            let xj = if j < i { p[j] + mesh.period() } else { p[j] };
            let s = (values[i] - level) / (values[i] - values[j]);
            return Some(p[i] + s * (xj - p[i]));
        }
    }
    None
}

/// Diagnostics exported per run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub h: f64,
    pub dt: f64,
    pub tv_series: Vec<f64>,
    pub weak_bv_aggregate: f64,
    pub entropy_max: f64,
}

impl Diagnostics {
    /// Entropy residual taken over [`KAPPAS`].
    pub fn of(run: &ConservationRun) -> Self {
        Self {
            h: run.mesh.max_width(),
            dt: run.time_grid.dt(),
            tv_series: run.history.iter().map(|u| total_variation(u)).collect(),
            weak_bv_aggregate: weak_bv_sum(run).aggregate,
            entropy_max: KAPPAS
                .iter()
                .map(|&k| entropy_residual(run, &run.flux, k))
                .fold(0.0, f64::max),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
