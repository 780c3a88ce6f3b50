//! MAC staggered grid on a rectangle: densities on primal cells, normal
//! velocities on edges, and the discrete mass equation.
//!
//! Cells are indexed `(i, j)` with `k = j nx + i`. Vertical edge `(i, j)`,
//! `i = 0..=nx`, sits at `x_faces[i]` and carries `u`; horizontal edge `(i, j)`,
//! `j = 0..=ny`, sits at `y_faces[j]` and carries `v`. The domain boundary is
//! an impermeable wall: boundary edge velocities never enter a flux.

mod lw;

use serde::{Deserialize, Serialize};

pub use lw::{
    lw_functional, sample_history, weak_form_value, write_lw_csv, LwRow, TestFunction2D,
};

use crate::error::{check_cfl, Error, Result};
use crate::quadrature::rect_mean;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacGrid {
    x_faces: Vec<f64>,
    y_faces: Vec<f64>,
}

fn check_faces(name: &str, faces: &[f64]) -> Result<()> {
    if faces.len() < 2 {
        return Err(Error::InvalidMesh(format!(
            "{name} needs at least two entries, got {}",
            faces.len()
        )));
    }
    if let Some(w) = faces.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidMesh(format!(
            "{name} not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl MacGrid {
    pub fn new(x_faces: Vec<f64>, y_faces: Vec<f64>) -> Result<Self> {
        check_faces("x_faces", &x_faces)?;
        check_faces("y_faces", &y_faces)?;
        Ok(Self { x_faces, y_faces })
    }

    pub fn uniform(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let faces = |(a, b): (f64, f64), n: usize| -> Vec<f64> {
            (0..=n)
                .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
                .collect()
        };
        Self::new(faces(x_range, nx), faces(y_range, ny))
    }

    /// Faces `map(k / n)` for monotone maps of `[0, 1]`.
    pub fn mapped(
        nx: usize,
        ny: usize,
        x_map: impl Fn(f64) -> f64,
        y_map: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let x = (0..=nx).map(|k| x_map(k as f64 / nx as f64)).collect();
        let y = (0..=ny).map(|k| y_map(k as f64 / ny as f64)).collect();
        Self::new(x, y)
    }

    pub fn x_faces(&self) -> &[f64] {
        &self.x_faces
    }

    pub fn y_faces(&self) -> &[f64] {
        &self.y_faces
    }

    pub fn nx(&self) -> usize {
        self.x_faces.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y_faces.len() - 1
    }

    pub fn cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn vertical_edges(&self) -> usize {
        (self.nx() + 1) * self.ny()
    }

    pub fn horizontal_edges(&self) -> usize {
        self.nx() * (self.ny() + 1)
    }

    pub fn dx(&self, i: usize) -> f64 {
        self.x_faces[i + 1] - self.x_faces[i]
    }

    pub fn dy(&self, j: usize) -> f64 {
        self.y_faces[j + 1] - self.y_faces[j]
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    pub fn vertical_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx() + 1) + i
    }

    pub fn horizontal_index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        self.dx(i) * self.dy(j)
    }

    pub fn cell_areas(&self) -> Vec<f64> {
        let mut a = Vec::with_capacity(self.cells());
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                a.push(self.cell_area(i, j));
            }
        }
        a
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> ((f64, f64), (f64, f64)) {
        (
            (self.x_faces[i], self.x_faces[i + 1]),
            (self.y_faces[j], self.y_faces[j + 1]),
        )
    }

    pub fn domain_area(&self) -> f64 {
        let x = &self.x_faces;
        let y = &self.y_faces;
        (x[x.len() - 1] - x[0]) * (y[y.len() - 1] - y[0])
    }

    /// `|D_sigma|` for vertical edges: half of each adjacent cell.
    pub fn vertical_dual_areas(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut a = Vec::with_capacity(self.vertical_edges());
        for j in 0..ny {
            for i in 0..=nx {
                let left = if i > 0 { self.cell_area(i - 1, j) } else { 0.0 };
                let right = if i < nx { self.cell_area(i, j) } else { 0.0 };
                a.push(0.5 * (left + right));
            }
        }
        a
    }

    /// `|D_sigma|` for horizontal edges.
    pub fn horizontal_dual_areas(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut a = Vec::with_capacity(self.horizontal_edges());
        for j in 0..=ny {
            for i in 0..nx {
                let below = if j > 0 { self.cell_area(i, j - 1) } else { 0.0 };
                let above = if j < ny { self.cell_area(i, j) } else { 0.0 };
                a.push(0.5 * (below + above));
            }
        }
        a
    }

    /// `max(max dx / min dy, max dy / min dx)`.
    pub fn quasi_uniformity_ratio(&self) -> f64 {
        let extremes = |faces: &[f64]| {
            faces
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d), hi.max(d)))
        };
        let (dx_min, dx_max) = extremes(&self.x_faces);
        let (dy_min, dy_max) = extremes(&self.y_faces);
        (dx_max / dy_min).max(dy_max / dx_min)
    }

    /// Smallest side over all cells.
    pub fn min_side(&self) -> f64 {
        self.x_faces
            .windows(2)
            .chain(self.y_faces.windows(2))
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest side over all cells.
    pub fn max_side(&self) -> f64 {
        self.x_faces
            .windows(2)
            .chain(self.y_faces.windows(2))
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// `max_K |dK| / |K|`.
    pub fn max_perimeter_ratio(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                let (dx, dy) = (self.dx(i), self.dy(j));
                worst = worst.max(2.0 * (dx + dy) / (dx * dy));
            }
        }
        worst
    }

    /// Midpoint of vertical edge `(i, j)`.
    pub fn vertical_midpoint(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x_faces[i], 0.5 * (self.y_faces[j] + self.y_faces[j + 1]))
    }

    /// Midpoint of horizontal edge `(i, j)`.
    pub fn horizontal_midpoint(&self, i: usize, j: usize) -> (f64, f64) {
        (0.5 * (self.x_faces[i] + self.x_faces[i + 1]), self.y_faces[j])
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            0.5 * (self.x_faces[i] + self.x_faces[i + 1]),
            0.5 * (self.y_faces[j] + self.y_faces[j + 1]),
        )
    }

    /// Cell means by the 3x3 tensor Gauss rule, `rho_K = (1/|K|) int_K f`.
    pub fn project_density(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut rho = Vec::with_capacity(self.cells());
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                let (xr, yr) = self.cell_bounds(i, j);
                rho.push(rect_mean(&f, xr, yr));
            }
        }
        rho
    }

    /// Edge velocities sampled at edge midpoints.
    pub fn sample_velocity(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx(), self.ny());
        let mut u = Vec::with_capacity(self.vertical_edges());
        for j in 0..ny {
            for i in 0..=nx {
                let (x, y) = self.vertical_midpoint(i, j);
                u.push(f(x, y).0);
            }
        }
        let mut v = Vec::with_capacity(self.horizontal_edges());
        for j in 0..=ny {
            for i in 0..nx {
                let (x, y) = self.horizontal_midpoint(i, j);
                v.push(f(x, y).1);
            }
        }
        (u, v)
    }

    /// Discretely divergence-free velocity from a vertex stream function:
    /// `u = (psi(x_i, y_{j+1}) - psi(x_i, y_j)) / dy_j`,
    /// `v = -(psi(x_{i+1}, y_j) - psi(x_i, y_j)) / dx_i`.
    /// A `psi` constant on the boundary gives zero wall velocities.
    pub fn stream_velocity(&self, psi: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx(), self.ny());
        let (x, y) = (&self.x_faces, &self.y_faces);
        let mut u = Vec::with_capacity(self.vertical_edges());
        for j in 0..ny {
            for i in 0..=nx {
                u.push((psi(x[i], y[j + 1]) - psi(x[i], y[j])) / self.dy(j));
            }
        }
        let mut v = Vec::with_capacity(self.horizontal_edges());
        for j in 0..=ny {
            for i in 0..nx {
                v.push(-(psi(x[i + 1], y[j]) - psi(x[i], y[j])) / self.dx(i));
            }
        }
        (u, v)
    }

    /// `(1/|K|) sum_sigma |sigma| u_sigma . n_{K,sigma}` with wall edges dropped.
    pub fn divergence(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let ones = vec![1.0; self.cells()];
        self.net_outflow(&ones, u, v, EdgeDensity::Centered)
            .iter()
            .zip(self.cell_areas())
            .map(|(q, a)| q / a)
            .collect()
    }

    /// `sum_{sigma in E(K)} |sigma| rho_sigma u_sigma . n_{K,sigma}` per cell, each
    /// interior edge flux evaluated once and applied with opposite signs.
    pub fn net_outflow(&self, rho: &[f64], u: &[f64], v: &[f64], mode: EdgeDensity) -> Vec<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut out = vec![0.0; self.cells()];
        for j in 0..ny {
            for i in 1..nx {
                let (k, l) = (self.cell_index(i - 1, j), self.cell_index(i, j));
                let vel = u[self.vertical_index(i, j)];
                let flux = self.dy(j) * edge_density(rho[k], rho[l], vel, mode) * vel;
                out[k] += flux;
                out[l] -= flux;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let (k, l) = (self.cell_index(i, j - 1), self.cell_index(i, j));
                let vel = v[self.horizontal_index(i, j)];
                let flux = self.dx(i) * edge_density(rho[k], rho[l], vel, mode) * vel;
                out[k] += flux;
                out[l] -= flux;
            }
        }
        out
    }

    /// Largest interior edge speed; wall edges carry no flux.
    pub fn max_interior_speed(&self, u: &[f64], v: &[f64]) -> f64 {
        let (nx, ny) = (self.nx(), self.ny());
        let mut s = 0.0_f64;
        for j in 0..ny {
            for i in 1..nx {
                s = s.max(u[self.vertical_index(i, j)].abs());
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                s = s.max(v[self.horizontal_index(i, j)].abs());
            }
        }
        s
    }
}

/// Edge density rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeDensity {
    Upwind,
    Centered,
}

/// Density on the edge between `K` and `L`; `normal_velocity` is `u . n_{K,sigma}`.
/// Upwind takes the cell the flow leaves and falls back to the average when
/// the velocity vanishes.
pub fn edge_density(rho_k: f64, rho_l: f64, normal_velocity: f64, mode: EdgeDensity) -> f64 {
    match mode {
        EdgeDensity::Upwind if normal_velocity > 0.0 => rho_k,
        EdgeDensity::Upwind if normal_velocity < 0.0 => rho_l,
        _ => 0.5 * (rho_k + rho_l),
    }
}

/// Density per cell and normal velocity per edge at one time level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacState {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub level: usize,
}

impl MacState {
    pub fn new(grid: &MacGrid, rho: Vec<f64>, u: Vec<f64>, v: Vec<f64>, level: usize) -> Result<Self> {
        if rho.len() != grid.cells() || u.len() != grid.vertical_edges() || v.len() != grid.horizontal_edges() {
            return Err(Error::InvalidArgument(format!(
                "state sizes rho {}, u {}, v {} do not match grid ({}, {}, {})",
                rho.len(),
                u.len(),
                v.len(),
                grid.cells(),
                grid.vertical_edges(),
                grid.horizontal_edges()
            )));
        }
        if rho.iter().chain(&u).chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("state contains non-finite values".into()));
        }
        Ok(Self { rho, u, v, level })
    }

    /// `sum_K |K| rho_K`.
    pub fn mass(&self, grid: &MacGrid) -> f64 {
        grid.cell_areas().iter().zip(&self.rho).map(|(a, r)| a * r).sum()
    }

    /// JSON document `{x_faces, y_faces, rho, u, v}`.
    pub fn to_json(&self, grid: &MacGrid) -> Result<String> {
        #[derive(Serialize)]
        struct Snapshot<'a> {
            x_faces: &'a [f64],
            y_faces: &'a [f64],
            rho: &'a [f64],
            u: &'a [f64],
            v: &'a [f64],
        }
        Ok(serde_json::to_string(&Snapshot {
            x_faces: grid.x_faces(),
            y_faces: grid.y_faces(),
            rho: &self.rho,
            u: &self.u,
            v: &self.v,
        })?)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// `C_K = (rho_K^{n+1} - rho_K^n)/dt + (1/|K|) sum |sigma| rho_sigma^n u_sigma^n . n_{K,sigma}`.
pub fn mass_residual(
    state_n: &MacState,
    state_np1: &MacState,
    dt: f64,
    grid: &MacGrid,
    mode: EdgeDensity,
) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let outflow = grid.net_outflow(&state_n.rho, &state_n.u, &state_n.v, mode);
    Ok(grid
        .cell_areas()
        .iter()
        .enumerate()
        .map(|(k, a)| (state_np1.rho[k] - state_n.rho[k]) / dt + outflow[k] / a)
        .collect())
}

/// Solves `C = 0` for `rho^{n+1}`, keeping the velocity. In upwind mode the
/// step must satisfy `dt max|u| max(|dK|/|K|) <= 1`, which keeps densities
/// nonnegative.
pub fn step_mass(state: &MacState, dt: f64, grid: &MacGrid, mode: EdgeDensity) -> Result<MacState> {
    check_dt(dt)?;
    if mode == EdgeDensity::Upwind {
        let rate = grid.max_interior_speed(&state.u, &state.v) * grid.max_perimeter_ratio();
        if rate > 0.0 {
            check_cfl(dt, 1.0 / rate)?;
        }
    }
    let outflow = grid.net_outflow(&state.rho, &state.u, &state.v, mode);
    let rho = grid
        .cell_areas()
        .iter()
        .enumerate()
        .map(|(k, a)| state.rho[k] - dt * outflow[k] / a)
        .collect();
    Ok(MacState {
        rho,
        u: state.u.clone(),
        v: state.v.clone(),
        level: state.level + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut SplitMix64) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn sum(v: &[f64]) -> f64 {
        v.iter().sum()
    }

    #[test]
    fn dual_cells_partition_the_domain() {
        let g = MacGrid::uniform((0.0, 2.0), (0.0, 2.0), 2, 2).unwrap();
        assert_eq!(g.cells(), 4);
        assert_eq!(g.vertical_edges(), 6);
        assert_eq!(sum(&g.vertical_dual_areas()), 4.0);
        assert_eq!(sum(&g.horizontal_dual_areas()), 4.0);

        let one = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 1, 1).unwrap();
        assert_eq!(one.vertical_dual_areas(), vec![0.5, 0.5]);
        assert_eq!(one.horizontal_dual_areas(), vec![0.5, 0.5]);

        let g = MacGrid::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(g.vertical_dual_areas(), vec![1.0, 3.0, 2.0]);
        assert_eq!(g.horizontal_dual_areas(), vec![1.0, 2.0, 1.0, 2.0]);
        assert_eq!(sum(&g.vertical_dual_areas()), 6.0);
        assert_eq!(sum(&g.horizontal_dual_areas()), 6.0);
    }

    #[test]
    fn invalid_faces_rejected() {
        assert!(MacGrid::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(MacGrid::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(MacGrid::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn quasi_uniformity() {
        assert_eq!(MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 8, 8).unwrap().quasi_uniformity_ratio(), 1.0);
        let g = MacGrid::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.quasi_uniformity_ratio(), 2.0);
        let stretch = |s: f64| s + 0.05 * (2.0 * PI * s).sin();
        let ratios: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&n| MacGrid::mapped(n, n, stretch, |s| s).unwrap().quasi_uniformity_ratio())
            .collect();
        let limit = (1.0 + 0.1 * PI) / (1.0 - 0.1 * PI);
        assert!(ratios.iter().all(|&r| r <= limit * 1.0001), "{ratios:?}");
        assert!(ratios.windows(2).all(|w| (w[1] - w[0]).abs() < 0.1 * w[0]));
    }

    #[test]
    fn projection_examples() {
        let g = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 3, 2).unwrap();
        assert!(g.project_density(|_, _| 1.5).iter().all(|&r| (r - 1.5).abs() < 1e-15));
        let single = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 1, 1).unwrap();
        assert!((single.project_density(|x, _| x)[0] - 0.5).abs() < 1e-15);
        let sine = single.project_density(|x, y| (PI * x).sin() * (PI * y).sin())[0];
        // Gauss 3-point on a single cell is not exact for sin; 3e-3 is its known error size
        assert!((sine - (2.0 / PI).powi(2)).abs() < 3e-3);
        let fine = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 8, 8).unwrap();
        let total: f64 = fine
            .project_density(|x, y| (PI * x).sin() * (PI * y).sin())
            .iter()
            .zip(fine.cell_areas())
            .map(|(r, a)| r * a)
            .sum();
        assert!((total - (2.0 / PI).powi(2)).abs() < 1e-8);
    }

    #[test]
    fn edge_density_rules() {
        for mode in [EdgeDensity::Upwind, EdgeDensity::Centered] {
            assert_eq!(edge_density(1.25, 1.25, 0.3, mode), 1.25);
            assert_eq!(edge_density(2.0, 1.0, 0.0, mode), 1.5);
        }
        assert_eq!(edge_density(2.0, 1.0, 0.5, EdgeDensity::Upwind), 2.0);
        assert_eq!(edge_density(2.0, 1.0, -0.5, EdgeDensity::Upwind), 1.0);
        let mut rng = SplitMix64::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b, w) = (random_unit(&mut rng), random_unit(&mut rng), random_unit(&mut rng) - 0.5);
            for mode in [EdgeDensity::Upwind, EdgeDensity::Centered] {
                let r = edge_density(a, b, w, mode);
                assert!(a.min(b) <= r && r <= a.max(b));
            }
        }
    }

    #[test]
    fn stream_function_velocity_is_divergence_free() {
        let g = MacGrid::mapped(12, 9, |s| s * s + s, |s| 2.0 * s).unwrap();
        let psi = |x: f64, y: f64| (PI * x / 2.0).sin() * (PI * y / 2.0).sin() * (1.0 + x * y);
        let (u, v) = g.stream_velocity(psi);
        assert!(g.divergence(&u, &v).iter().all(|d| d.abs() < 1e-12));
        // psi vanishes on the walls, so do the wall normal velocities
        for j in 0..g.ny() {
            assert!(u[g.vertical_index(0, j)].abs() < 1e-12);
            assert!(u[g.vertical_index(g.nx(), j)].abs() < 1e-12);
        }
    }

    fn swirl(grid: &MacGrid) -> (Vec<f64>, Vec<f64>) {
        grid.stream_velocity(|x, y| (PI * x).sin() * (PI * y).sin() / PI)
    }

    #[test]
    fn constant_density_has_zero_residual() {
        let g = MacGrid::mapped(10, 10, |s| s + 0.05 * (2.0 * PI * s).sin(), |s| s).unwrap();
        let (u, v) = swirl(&g);
        let s = MacState::new(&g, vec![1.7; g.cells()], u, v, 0).unwrap();
        for mode in [EdgeDensity::Upwind, EdgeDensity::Centered] {
            let c = mass_residual(&s, &s, 0.01, &g, mode).unwrap();
            assert!(c.iter().all(|x| x.abs() < 1e-12), "{mode:?}");
        }
        assert!(mass_residual(&s, &s, 0.0, &g, EdgeDensity::Upwind).is_err());
    }

    #[test]
    fn step_mass_zeroes_the_residual_and_conserves_mass() {
        let g = MacGrid::mapped(16, 12, |s| s + 0.05 * (2.0 * PI * s).sin(), |s| s * (1.5 - 0.5 * s)).unwrap();
        let (u, v) = swirl(&g);
        let rho = g.project_density(|x, y| 1.0 + (3.0 * x).sin() * y);
        let mut state = MacState::new(&g, rho, u, v, 0).unwrap();
        let m0 = state.mass(&g);
        let dt = 0.9 / (g.max_interior_speed(&state.u, &state.v) * g.max_perimeter_ratio());
        for _ in 0..100 {
            let next = step_mass(&state, dt, &g, EdgeDensity::Upwind).unwrap();
            let c = mass_residual(&state, &next, dt, &g, EdgeDensity::Upwind).unwrap();
            assert!(c.iter().all(|x| x.abs() < 1e-10));
            assert!(next.rho.iter().all(|&r| r >= 0.0));
            state = next;
        }
        assert_eq!(state.level, 100);
        assert!((state.mass(&g) - m0).abs() / m0 < 1e-13);
        assert!(matches!(
            step_mass(&state, 1.5 * dt / 0.9, &g, EdgeDensity::Upwind),
            Err(Error::Cfl { .. })
        ));
        assert!(step_mass(&state, 1.5 * dt / 0.9, &g, EdgeDensity::Centered).is_ok());
    }

    #[test]
    fn trivial_steps() {
        let g = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 5, 5).unwrap();
        let rho = g.project_density(|x, y| x + y);
        let still = MacState::new(&g, rho.clone(), vec![0.0; 30], vec![0.0; 30], 0).unwrap();
        assert_eq!(step_mass(&still, 0.1, &g, EdgeDensity::Upwind).unwrap().rho, rho);
        // tangential-only velocity: nonzero only on the walls, which carry no flux
        let mut u = vec![0.0; 30];
        for j in 0..5 {
            u[g.vertical_index(0, j)] = 1.0;
        }
        let flat = MacState::new(&g, vec![2.0; 25], u, vec![0.0; 30], 0).unwrap();
        assert_eq!(step_mass(&flat, 0.1, &g, EdgeDensity::Upwind).unwrap().rho, vec![2.0; 25]);
    }

    #[test]
    fn residual_matches_the_continuous_operator_inside() {
        // rho = 2 + sin(x + t), u = (1, 0): C ~ d_t rho + d_x rho = 2 cos(x + t)
        let rho = |x: f64, _y: f64, t: f64| 2.0 + (x + t).sin();
        let mut gaps = Vec::new();
        for n in [16, 32, 64] {
            let g = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), n, n).unwrap();
            let dt = 0.4 / n as f64;
            let (u, v) = g.sample_velocity(|_, _| (1.0, 0.0));
            let s0 = MacState::new(&g, g.project_density(|x, y| rho(x, y, 0.0)), u.clone(), v.clone(), 0).unwrap();
            let s1 = MacState::new(&g, g.project_density(|x, y| rho(x, y, dt)), u, v, 1).unwrap();
            let c = mass_residual(&s0, &s1, dt, &g, EdgeDensity::Centered).unwrap();
            let mut worst = 0.0_f64;
            for j in 0..n {
                for i in 1..n - 1 {
                    let (x, _) = g.cell_center(i, j);
                    worst = worst.max((c[g.cell_index(i, j)] - 2.0 * x.cos()).abs());
                }
            }
            gaps.push(worst);
        }
        assert!(gaps.windows(2).all(|w| w[1] < 0.6 * w[0]), "{gaps:?}");
    }

    #[test]
    fn json_export() {
        let g = MacGrid::uniform((0.0, 1.0), (0.0, 1.0), 1, 1).unwrap();
        let s = MacState::new(&g, vec![1.0], vec![0.0, 0.0], vec![0.0, 0.0], 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json(&g).unwrap()).unwrap();
        assert_eq!(v["x_faces"], serde_json::json!([0.0, 1.0]));
        assert_eq!(v["rho"], serde_json::json!([1.0]));
        assert!(MacState::new(&g, vec![1.0, 2.0], vec![0.0; 2], vec![0.0; 2], 0).is_err());
    }
}
