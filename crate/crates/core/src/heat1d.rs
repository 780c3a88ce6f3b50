//! Implicit two-point-flux finite volumes for the heat equation on `[0, 1]`
//! with homogeneous Dirichlet conditions.
//!
//! The boundary unknowns are pinned to zero and sit at the endpoints, so the
//! M + 1 flux spacings are `x_0 - 0`, `x_i - x_{i-1}` and `1 - x_{M-1}`.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{CellField, Mesh1D, TimeGrid};
use crate::transport1d::write_history_csv;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Relative residual tolerance of the tridiagonal solve.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

#[derive(Clone)]
pub struct HeatProblem {
    initial: ScalarFn,
    source: Option<SourceFn>,
    final_time: f64,
}

impl fmt::Debug for HeatProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeatProblem")
            .field("final_time", &self.final_time)
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl HeatProblem {
    pub fn new(initial: ScalarFn, final_time: f64) -> Result<Self> {
        if !(final_time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        for x in [0.0, 1.0] {
            let u = initial(x);
            if u.abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "initial data must vanish at the boundary, u({x}) = {u}"
                )));
            }
        }
        Ok(Self {
            initial,
            source: None,
            final_time,
        })
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    /// `u(x, t) = e^{-t} sin(pi x)` with its matching source
    /// `g = (pi^2 - 1) e^{-t} sin(pi x)`.
    pub fn manufactured(final_time: f64) -> Result<Self> {
        use std::f64::consts::PI;
        let problem = Self::new(Arc::new(|x: f64| (PI * x).sin()), final_time)?;
        Ok(problem.with_source(Arc::new(|x: f64, t: f64| {
            (PI * PI - 1.0) * (-t).exp() * (PI * x).sin()
        })))
    }

    /// Exact solution of [`HeatProblem::manufactured`].
    pub fn manufactured_exact(x: f64, t: f64) -> f64 {
        (-t).exp() * (std::f64::consts::PI * x).sin()
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    pub fn source(&self, x: f64, t: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |g| g(x, t))
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }
}

/// `F = -(u_right - u_left) / h_half`.
pub fn heat_flux(u_left: f64, u_right: f64, h_half: f64) -> Result<f64> {
    if !(h_half > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "flux spacing must be positive, got {h_half}"
        )));
    }
    Ok(-(u_right - u_left) / h_half)
}

fn check_unit_interval(mesh: &Mesh1D) -> Result<()> {
    let f = mesh.faces();
    if f[0] != 0.0 || f[f.len() - 1] != 1.0 {
        return Err(Error::InvalidMesh(format!(
            "heat meshes must span [0, 1], got [{}, {}]",
            f[0],
            f[f.len() - 1]
        )));
    }
    Ok(())
}

/// The M + 1 spacings `h_{i+1/2}`, boundary half-spacings included.
pub fn dirichlet_spacings(mesh: &Mesh1D) -> Vec<f64> {
    let p = mesh.points();
    let m = p.len();
    let mut h = Vec::with_capacity(m + 1);
    h.push(p[0] - mesh.faces()[0]);
    h.extend(p.windows(2).map(|w| w[1] - w[0]));
    h.push(mesh.faces()[m] - p[m - 1]);
    h
}

/// Face fluxes `F_{i+1/2}`, `i = 0..=M`, with zero boundary values.
pub fn face_fluxes(values: &[f64], spacings: &[f64]) -> Vec<f64> {
    let m = values.len();
    (0..=m)
        .map(|k| {
            let left = if k == 0 { 0.0 } else { values[k - 1] };
            let right = if k == m { 0.0 } else { values[k] };
            -(right - left) / spacings[k]
        })
        .collect()
}

/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`; `sub` and `sup`
/// have one entry fewer than `diag`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "inconsistent tridiagonal sizes: sub {}, diag {n}, sup {}, rhs {}",
                sub.len(),
                sup.len(),
                rhs.len()
            )));
        }
        Ok(Self {
            sub,
            diag,
            sup,
            rhs,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|i| {
            let off = if i > 0 { self.sub[i - 1].abs() } else { 0.0 }
                + self.sup.get(i).map_or(0.0, |s| s.abs());
            self.diag[i].abs() > off
        })
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < self.len() {
                    y += self.sup[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let inf = |v: &[f64]| v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let ax = self.apply(x);
        let r = ax
            .iter()
            .zip(&self.rhs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let norm_a = (0..self.len())
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.sub[i - 1].abs() } else { 0.0 }
                    + self.sup.get(i).map_or(0.0, |s| s.abs())
            })
            .fold(0.0, f64::max);
        let scale = norm_a * inf(x) + inf(&self.rhs);
        if scale == 0.0 {
            0.0
        } else {
            r / scale
        }
    }

    /// Thomas elimination without pivoting, followed by a residual check.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.sub[i - 1] * c[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SolverResidual {
                    residual: f64::INFINITY,
                    tolerance: SOLVER_TOLERANCE,
                });
            }
            if i + 1 < n {
                c[i] = self.sup[i] / pivot;
            }
            let carried = if i > 0 { self.sub[i - 1] * d[i - 1] } else { 0.0 };
            d[i] = (self.rhs[i] - carried) / pivot;
        }
        let mut x = d;
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        let residual = self.relative_residual(&x);
        if !(residual <= SOLVER_TOLERANCE) {
            return Err(Error::SolverResidual {
                residual,
                tolerance: SOLVER_TOLERANCE,
            });
        }
        Ok(x)
    }
}

/// Assembles the implicit step from `values` at time `t` to `t + dt`.
pub fn implicit_system(
    mesh: &Mesh1D,
    values: &[f64],
    t: f64,
    dt: f64,
    problem: &HeatProblem,
) -> Result<TridiagonalSystem> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let m = mesh.cells();
    if values.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} values for {m} cells",
            values.len()
        )));
    }
    let h = dirichlet_spacings(mesh);
    let widths = mesh.widths();
    let t_next = t + dt;
    let diag = (0..m)
        .map(|i| widths[i] / dt + 1.0 / h[i] + 1.0 / h[i + 1])
        .collect();
    let off: Vec<f64> = (1..m).map(|k| -1.0 / h[k]).collect();
    let rhs = (0..m)
        .map(|i| widths[i] * (values[i] / dt + problem.source(mesh.points()[i], t_next)))
        .collect();
    TridiagonalSystem::new(off.clone(), diag, off, rhs)
}

/// One backward Euler step:
/// `|K_i| (u_i^{n+1} - u_i^n) / dt + F_{i+1/2}^{n+1} - F_{i-1/2}^{n+1} = |K_i| g(x_i, t_{n+1})`.
pub fn implicit_heat_step<'m>(
    field: &CellField<'m>,
    dt: f64,
    problem: &HeatProblem,
) -> Result<CellField<'m>> {
    let mesh = field.mesh();
    check_unit_interval(mesh)?;
    let system = implicit_system(mesh, field.values(), field.time(), dt, problem)?;
    CellField::new(mesh, system.solve()?, field.time() + dt)
}

/// All time levels of one heat run.
#[derive(Clone, Debug)]
pub struct HeatRun {
    pub mesh: Mesh1D,
    pub time_grid: TimeGrid,
    pub history: Vec<Vec<f64>>,
}

impl HeatRun {
    pub fn field(&self, n: usize) -> CellField<'_> {
        CellField::new(&self.mesh, self.history[n].clone(), self.time_grid.time(n))
            .expect("history rows match the mesh")
    }

    pub fn final_values(&self) -> &[f64] {
        &self.history[self.history.len() - 1]
    }

    /// CSV with columns `n,i,x_i,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_history_csv(out, &self.mesh, &self.history)
    }
}

/// Runs the implicit scheme from `u_i^0 = u_ini(x_i)`.
pub fn run_heat(problem: &HeatProblem, mesh: &Mesh1D, time_grid: &TimeGrid) -> Result<HeatRun> {
    check_unit_interval(mesh)?;
    let dt = time_grid.dt();
    let mut history = Vec::with_capacity(time_grid.steps() + 1);
    history.push(
        mesh.points()
            .iter()
            .map(|&x| problem.initial(x))
            .collect::<Vec<_>>(),
    );
    for n in 0..time_grid.steps() {
        let system = implicit_system(mesh, &history[n], time_grid.time(n), dt, problem)?;
        history.push(system.solve()?);
    }
    Ok(HeatRun {
        mesh: mesh.clone(),
        time_grid: *time_grid,
        history,
    })
}

/// Discrete `H^1_0` norm `(sum_{k=0}^{M} h_{k+1/2} ((u_{k+1} - u_k)/h_{k+1/2})^2)^{1/2}`
/// with zero boundary unknowns.
pub fn h10_norm(field: &CellField<'_>) -> f64 {
    let h = dirichlet_spacings(field.mesh());
    face_fluxes(field.values(), &h)
        .iter()
        .zip(&h)
        .map(|(q, hk)| hk * q * q)
        .sum::<f64>()
        .sqrt()
}

/// `(sum_i |K_i| u_i^2)^{1/2}`.
pub fn l2_norm(field: &CellField<'_>) -> f64 {
    field
        .mesh()
        .widths()
        .iter()
        .zip(field.values())
        .map(|(w, u)| w * u * u)
        .sum::<f64>()
        .sqrt()
}

/// `||u||_{L^2} / ||u||_{H^1_0,d}`; at most `diam = 1` on `[0, 1]`.
pub fn poincare_ratio(field: &CellField<'_>) -> Result<f64> {
    let denominator = h10_norm(field);
    if denominator == 0.0 {
        return Err(Error::InvalidArgument(
            "Poincare ratio of the zero field".into(),
        ));
    }
    Ok(l2_norm(field) / denominator)
}

/// `sum_{n=0}^{N-1} dt ||u^{n+1}||^2_{H^1_0,d}`; bounded by `||u^0||^2_{L^2} / 2`
/// for source-free runs.
pub fn energy_estimate(run: &HeatRun) -> f64 {
    let dt = run.time_grid.dt();
    (1..run.history.len())
        .map(|n| {
            let norm = h10_norm(&run.field(n));
            dt * norm * norm
        })
        .sum()
}

/// Discrete `L^2(0,T; L^2)` error against `exact(x, t)` over levels `1..=N`.
pub fn l2l2_error(run: &HeatRun, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let dt = run.time_grid.dt();
    let widths = run.mesh.widths();
    let mut sum = 0.0;
    for n in 1..run.history.len() {
        let t = run.time_grid.time(n);
        for ((u, x), w) in run.history[n].iter().zip(run.mesh.points()).zip(&widths) {
            let e = u - exact(*x, t);
            sum += dt * w * e * e;
        }
    }
    sum.sqrt()
}

/// Worst relative defect of the global balance
/// `sum |K| u^{n+1} - sum |K| u^n = dt (F_{1/2} - F_{M+1/2}) + dt sum |K| g(x_i, t_{n+1})`,
/// i.e. conservation with the Dirichlet boundary fluxes accounted for.
pub fn balance_defect(run: &HeatRun, problem: &HeatProblem) -> f64 {
    let h = dirichlet_spacings(&run.mesh);
    let widths = run.mesh.widths();
    let dt = run.time_grid.dt();
    let mass = |u: &[f64]| widths.iter().zip(u).map(|(w, u)| w * u).sum::<f64>();
    let scale = widths
        .iter()
        .zip(&run.history[0])
        .map(|(w, u)| (w * u).abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let mut expected = mass(&run.history[0]);
    let mut worst = 0.0_f64;
    for n in 0..run.time_grid.steps() {
        let next = &run.history[n + 1];
        let fluxes = face_fluxes(next, &h);
        let t = run.time_grid.time(n + 1);
        let source: f64 = widths
            .iter()
            .zip(run.mesh.points())
            .map(|(w, &x)| w * problem.source(x, t))
            .sum();
        expected += dt * (fluxes[0] - fluxes[fluxes.len() - 1]) + dt * source;
        worst = worst.max((mass(next) - expected).abs());
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;
    use std::f64::consts::PI;

    fn sine_problem(final_time: f64) -> HeatProblem {
        HeatProblem::new(Arc::new(|x: f64| (PI * x).sin()), final_time).unwrap()
    }

    fn random_values(m: usize, seed: u64) -> Vec<f64> {
        let mut rng = SplitMix64::seed_from_u64(seed);
        (0..m)
            .map(|_| 2.0 * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) - 1.0)
            .collect()
    }

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(system: &TridiagonalSystem) -> Vec<f64> {
        let n = system.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = system.diag[i];
            if i > 0 {
                a[i][i - 1] = system.sub[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = system.sup[i];
            }
            a[i][n] = system.rhs[i];
        }
        for k in 0..n {
            let p = (k..n)
                .max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs()))
                .unwrap();
            a.swap(k, p);
            for r in k + 1..n {
                let f = a[r][k] / a[k][k];
                for c in k..=n {
                    a[r][c] -= f * a[k][c];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|c| a[i][c] * x[c]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn flux_examples() {
        assert_eq!(heat_flux(0.7, 0.7, 0.1).unwrap(), 0.0);
        for (a, b) in [(0.1, 0.3), (0.2, 0.9), (0.45, 0.5)] {
            assert!((heat_flux(a, b, b - a).unwrap() + 1.0).abs() < 1e-14);
        }
        let q = |x: f64| x * x;
        assert_eq!(heat_flux(q(0.25), q(0.75), 0.5).unwrap(), -1.0);
        assert_eq!(heat_flux(3.0, 1.0, 0.5).unwrap(), -heat_flux(1.0, 3.0, 0.5).unwrap());
        assert!(heat_flux(1.0, 2.0, 0.0).is_err());
        assert!(heat_flux(1.0, 2.0, -0.1).is_err());
    }

    #[test]
    fn spacings_include_boundary_halves() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(dirichlet_spacings(&mesh), vec![0.125, 0.25, 0.25, 0.25, 0.125]);
    }

    #[test]
    fn thomas_matches_dense_elimination() {
        for seed in 0..5 {
            let n = 12;
            let r = random_values(4 * n, seed);
            let sub: Vec<f64> = r[..n - 1].to_vec();
            let sup: Vec<f64> = r[n..2 * n - 1].to_vec();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + r[2 * n + i]).collect();
            let rhs = r[3 * n..].to_vec();
            let system = TridiagonalSystem::new(sub, diag, sup, rhs).unwrap();
            assert!(system.is_strictly_diagonally_dominant());
            let x = system.solve().unwrap();
            let y = dense_solve(&system);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        assert!(TridiagonalSystem::new(vec![1.0], vec![1.0], vec![], vec![0.0]).is_err());
        let singular =
            TridiagonalSystem::new(vec![1.0], vec![1.0, 1.0], vec![1.0], vec![1.0, 2.0]).unwrap();
        assert!(singular.solve().is_err());
    }

    #[test]
    fn implicit_system_is_diagonally_dominant() {
        let mesh = Mesh1D::random(0.0, 1.0, 30, 3.0, 2).unwrap();
        let values = random_values(30, 3);
        for dt in [1e-6, 1e-2, 10.0] {
            let system = implicit_system(&mesh, &values, 0.0, dt, &sine_problem(1.0)).unwrap();
            assert!(system.is_strictly_diagonally_dominant());
        }
        assert!(implicit_system(&mesh, &values, 0.0, 0.0, &sine_problem(1.0)).is_err());
    }

    #[test]
    fn zero_stays_zero() {
        let problem = HeatProblem::new(Arc::new(|_| 0.0), 1.0).unwrap();
        let mesh = Mesh1D::uniform(0.0, 1.0, 10).unwrap();
        let run = run_heat(&problem, &mesh, &TimeGrid::new(1.0, 10).unwrap()).unwrap();
        assert!(run.history.iter().flatten().all(|&u| u == 0.0));
        assert_eq!(energy_estimate(&run), 0.0);
    }

    #[test]
    fn nonzero_boundary_data_rejected() {
        assert!(HeatProblem::new(Arc::new(|x: f64| x), 1.0).is_err());
        assert!(HeatProblem::new(Arc::new(|_| 0.0), 0.0).is_err());
        let wide = Mesh1D::uniform(0.0, 2.0, 4).unwrap();
        assert!(run_heat(&sine_problem(1.0), &wide, &TimeGrid::new(1.0, 4).unwrap()).is_err());
    }

    #[test]
    fn sine_mode_decays_by_the_discrete_eigenvalue() {
        for m in [8, 16, 50] {
            let h = 1.0 / m as f64;
            let lambda = 4.0 * (PI * h / 2.0).sin().powi(2) / (h * h);
            let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
            let dt = 0.01;
            let field = CellField::sample(&mesh, 0.0, |x| (PI * x).sin());
            let next = implicit_heat_step(&field, dt, &sine_problem(1.0)).unwrap();
            let factor = 1.0 / (1.0 + dt * lambda);
            for (u, v) in field.values().iter().zip(next.values()) {
                assert!((v - factor * u).abs() < 1e-14, "m = {m}");
            }
            assert!((next.time() - dt).abs() < 1e-15);
        }
    }

    #[test]
    fn manufactured_error_is_second_order_when_dt_is_h_squared() {
        let problem = HeatProblem::manufactured(0.5).unwrap();
        let errors: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&m| {
                let h = 1.0 / m as f64;
                let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
                let tg = TimeGrid::with_max_step(0.5, h * h).unwrap();
                l2l2_error(&run_heat(&problem, &mesh, &tg).unwrap(), HeatProblem::manufactured_exact)
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "errors {errors:?}");
        }
    }

    #[test]
    fn manufactured_error_is_first_order_when_dt_is_h() {
        // backward Euler contributes O(dt) and dominates once dt = h
        let problem = HeatProblem::manufactured(0.5).unwrap();
        let errors: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&m| {
                let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
                let tg = TimeGrid::with_max_step(0.5, 1.0 / m as f64).unwrap();
                l2l2_error(&run_heat(&problem, &mesh, &tg).unwrap(), HeatProblem::manufactured_exact)
            })
            .collect();
        let last = (errors[2] / errors[3]).log2();
        assert!((last - 1.0).abs() < 0.2, "errors {errors:?}");
    }

    #[test]
    fn h10_norm_examples() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 20).unwrap();
        assert_eq!(h10_norm(&CellField::zeros(&mesh, 0.0)), 0.0);
        // two boundary jumps of size 1 over h/2 each: 2 * (h/2) * (2/h)^2 = 4/h
        let ones = CellField::sample(&mesh, 0.0, |_| 1.0);
        assert!((h10_norm(&ones) - (4.0 * 20.0_f64).sqrt()).abs() < 1e-12);
        let mut previous = f64::INFINITY;
        for m in [16, 64, 256, 1024] {
            let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
            let gap = (h10_norm(&CellField::sample(&mesh, 0.0, |x| x * (1.0 - x)))
                - (1.0_f64 / 3.0).sqrt())
            .abs();
            assert!(gap < previous);
            previous = gap;
        }
        assert!(previous < 1e-5);
    }

    #[test]
    fn poincare_examples() {
        for seed in 0..20 {
            let mesh = Mesh1D::random(0.0, 1.0, 40, 4.0, seed).unwrap();
            let field = CellField::new(&mesh, random_values(40, seed + 100), 0.0).unwrap();
            assert!(poincare_ratio(&field).unwrap() <= 1.0);
        }
        let mesh = Mesh1D::uniform(0.0, 1.0, 200).unwrap();
        let mut spike = vec![0.0; 200];
        spike[100] = 1.0;
        let r = poincare_ratio(&CellField::new(&mesh, spike, 0.0).unwrap()).unwrap();
        assert!(r < 0.01);
        assert!(poincare_ratio(&CellField::zeros(&mesh, 0.0)).is_err());
        let sine = CellField::sample(&mesh, 0.0, |x| (PI * x).sin());
        assert!((poincare_ratio(&sine).unwrap() - 1.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn energy_estimate_is_uniformly_bounded() {
        let problem = sine_problem(0.5);
        for m in [8, 32, 128] {
            let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
            let run = run_heat(&problem, &mesh, &TimeGrid::new(0.5, m).unwrap()).unwrap();
            let u0 = l2_norm(&run.field(0));
            let e = energy_estimate(&run);
            assert!(e <= 0.5 * u0 * u0, "m = {m}");
            assert!(e > 0.3 * u0 * u0);
        }
    }

    #[test]
    fn maximum_principle_and_dissipation() {
        let mesh = Mesh1D::random(0.0, 1.0, 50, 3.0, 11).unwrap();
        let problem = sine_problem(1.0);
        let mut field = CellField::new(&mesh, random_values(50, 12), 0.0).unwrap();
        for _ in 0..20 {
            let next = implicit_heat_step(&field, 0.003, &problem).unwrap();
            let lo = field.values().iter().copied().fold(0.0, f64::min);
            let hi = field.values().iter().copied().fold(0.0, f64::max);
            assert!(next.values().iter().all(|&u| lo <= u && u <= hi));
            assert!(l2_norm(&next) <= l2_norm(&field));
            field = next;
        }
    }

    #[test]
    fn global_balance_with_boundary_fluxes() {
        let problem = HeatProblem::manufactured(0.5).unwrap();
        let mesh = Mesh1D::random(0.0, 1.0, 64, 2.0, 4).unwrap();
        let run = run_heat(&problem, &mesh, &TimeGrid::new(0.5, 64).unwrap()).unwrap();
        assert!(balance_defect(&run, &problem) < 1e-12);
    }

    #[test]
    fn csv_export() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        let run = run_heat(&sine_problem(0.1), &mesh, &TimeGrid::new(0.1, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 3);
    }
}
