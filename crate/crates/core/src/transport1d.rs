//! Linear transport `∂t u + ∂x(a u) = 0`, `a > 0`, on a periodic line.
//!
//! Two explicit upwind schemes share one kernel,
//! `u_i^{n+1} = u_i^n - (a dt / d_i)(u_i^n - u_{i-1}^n)`:
//!
//! * [`SchemeId::Fd3`], the finite-difference scheme, with `d_i = x_i - x_{i-1}`;
//! * [`SchemeId::Fv4`], the finite-volume scheme on the cells
//!   `](x_{i-1}+x_i)/2, (x_i+x_{i+1})/2[`, with `d_i = (x_{i+1} - x_{i-1})/2`.
//!
//! On the alternating mesh `Fv4` is not consistent in the finite-difference
//! sense (its truncation residual does not vanish) and yet it converges.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_cfl, Error, Result};
use crate::mesh::{wrap_into, CellField, Mesh1D, TimeGrid};
use crate::smooth::{max_abs_sampled, Profile};

#[derive(Clone)]
pub struct TransportProblem {
    speed: f64,
    profile: Arc<dyn Profile>,
    origin: f64,
    period: f64,
    final_time: f64,
}

impl std::fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportProblem")
            .field("speed", &self.speed)
            .field("origin", &self.origin)
            .field("period", &self.period)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

impl TransportProblem {
    /// `profile` is extended periodically from the period `[a, b)`.
    pub fn new(
        speed: f64,
        profile: Arc<dyn Profile>,
        domain: (f64, f64),
        final_time: f64,
    ) -> Result<Self> {
        if !(speed > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "advection speed must be positive, got {speed}"
            )));
        }
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidArgument("empty domain".into()));
        }
        if !(final_time > 0.0) {
            return Err(Error::InvalidArgument("final time must be positive".into()));
        }
        Ok(Self {
            speed,
            profile,
            origin: domain.0,
            period: domain.1 - domain.0,
            final_time,
        })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn profile(&self) -> &dyn Profile {
        self.profile.as_ref()
    }

    pub fn initial(&self, x: f64) -> f64 {
        self.profile.value(wrap_into(x, self.origin, self.period))
    }

    pub fn initial_derivative(&self, x: f64) -> f64 {
        self.profile.derivative(wrap_into(x, self.origin, self.period))
    }

    /// `u_ini(x - a t)`, periodically wrapped.
    pub fn exact(&self, x: f64, t: f64) -> f64 {
        self.initial(x - self.speed * t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "FD3")]
    Fd3,
    #[serde(rename = "FV4")]
    Fv4,
}

impl SchemeId {
    /// Upwind denominators `d_i` of the scheme on `mesh`.
    pub fn denominators(self, mesh: &Mesh1D) -> Vec<f64> {
        let s = mesh.spacings();
        match self {
            SchemeId::Fd3 => s.h_half,
            SchemeId::Fv4 => s.h_center,
        }
    }
}

/// All time levels of one explicit transport run.
#[derive(Clone, Debug)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    /// Largest realized Courant number `a dt / d_i`.
    pub cfl: f64,
    pub mesh: Mesh1D,
    pub time_grid: TimeGrid,
    /// `history[n][i] = u_i^n`, `n = 0..=N`.
    pub history: Vec<Vec<f64>>,
    /// Control-volume measures `d_i` whose weighted sum the run conserves.
    pub weights: Vec<f64>,
}

impl SchemeRun {
    pub fn field(&self, n: usize) -> CellField<'_> {
        CellField::new(&self.mesh, self.history[n].clone(), self.time_grid.time(n))
            .expect("history rows match the mesh")
    }

    pub fn final_values(&self) -> &[f64] {
        &self.history[self.history.len() - 1]
    }

    /// `sum_i d_i u_i^n`.
    pub fn mass(&self, n: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.history[n])
            .map(|(d, u)| d * u)
            .sum()
    }

    /// `max_n |mass(n) - mass(0)| / sum_i d_i |u_i^0|`.
    pub fn relative_mass_drift(&self) -> f64 {
        relative_drift(
            (0..self.history.len()).map(|n| self.mass(n)),
            &self.weights,
            &self.history[0],
        )
    }

    /// CSV with columns `n,i,x_i,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_history_csv(out, &self.mesh, &self.history)
    }
}

pub(crate) fn relative_drift(
    masses: impl Iterator<Item = f64>,
    weights: &[f64],
    initial: &[f64],
) -> f64 {
    let masses: Vec<f64> = masses.collect();
    let scale = weights
        .iter()
        .zip(initial)
        .map(|(w, u)| (w * u).abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    masses
        .iter()
        .map(|m| (m - masses[0]).abs())
        .fold(0.0, f64::max)
        / scale
}

pub(crate) fn write_history_csv<W: Write>(
    mut out: W,
    mesh: &Mesh1D,
    history: &[Vec<f64>],
) -> Result<()> {
    writeln!(out, "n,i,x_i,value")?;
    for (n, row) in history.iter().enumerate() {
        for (i, (x, u)) in mesh.points().iter().zip(row).enumerate() {
            writeln!(out, "{n},{i},{x},{u}")?;
        }
    }
    Ok(())
}

fn upwind_history(initial: Vec<f64>, courant: &[f64], steps: usize) -> Vec<Vec<f64>> {
    let m = initial.len();
    let mut history = Vec::with_capacity(steps + 1);
    history.push(initial);
    for _ in 0..steps {
        let u = &history[history.len() - 1];
        let next: Vec<f64> = (0..m)
            .map(|i| {
                let left = if i == 0 { u[m - 1] } else { u[i - 1] };
                u[i] - courant[i] * (u[i] - left)
            })
            .collect();
        history.push(next);
    }
    history
}

/// Runs `scheme` from an explicit initial vector.
pub fn run_scheme_from(
    scheme: SchemeId,
    problem: &TransportProblem,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
    initial: Vec<f64>,
) -> Result<SchemeRun> {
    if initial.len() != mesh.cells() {
        return Err(Error::InvalidArgument(format!(
            "initial vector has {} entries for {} cells",
            initial.len(),
            mesh.cells()
        )));
    }
    let denominators = scheme.denominators(mesh);
    let dt = time_grid.dt();
    let a = problem.speed();
    let d_min = denominators.iter().copied().fold(f64::INFINITY, f64::min);
    check_cfl(dt, d_min / a)?;
    let courant: Vec<f64> = denominators.iter().map(|d| a * dt / d).collect();
    let cfl = courant.iter().copied().fold(0.0, f64::max);
    let history = upwind_history(initial, &courant, time_grid.steps());
    Ok(SchemeRun {
        scheme,
        cfl,
        mesh: mesh.clone(),
        time_grid: *time_grid,
        history,
        weights: denominators,
    })
}

fn sampled_initial(problem: &TransportProblem, mesh: &Mesh1D) -> Vec<f64> {
    mesh.points().iter().map(|&x| problem.initial(x)).collect()
}

/// Finite-difference upwind scheme, `u_i^0 = u_ini(x_i)`.
pub fn run_fd_scheme(
    problem: &TransportProblem,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
) -> Result<SchemeRun> {
    run_scheme_from(
        SchemeId::Fd3,
        problem,
        mesh,
        time_grid,
        sampled_initial(problem, mesh),
    )
}

/// Finite-volume upwind scheme, `u_i^0 = u_ini(x_i)`.
pub fn run_fv_scheme(
    problem: &TransportProblem,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
) -> Result<SchemeRun> {
    run_scheme_from(
        SchemeId::Fv4,
        problem,
        mesh,
        time_grid,
        sampled_initial(problem, mesh),
    )
}

/// The scheme stencil applied to the exact solution, maximized over
/// `i` and `n = 0..N-1`.
pub fn truncation_residual(
    scheme: SchemeId,
    problem: &TransportProblem,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
) -> f64 {
    let denominators = scheme.denominators(mesh);
    let dt = time_grid.dt();
    let a = problem.speed();
    let mut worst = 0.0_f64;
    for n in 0..time_grid.steps() {
        let (t0, t1) = (time_grid.time(n), time_grid.time(n + 1));
        for (i, (&x, d)) in mesh.points().iter().zip(&denominators).enumerate() {
            let here = problem.exact(x, t0);
            let left = problem.exact(mesh.left_point(i), t0);
            let r = (problem.exact(x, t1) - here) / dt + a * (here - left) / d;
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// `max_{i,n} |u_i^n - u(x_i, t_n)|` over every stored level.
pub fn sup_error(run: &SchemeRun, problem: &TransportProblem) -> f64 {
    run.history
        .iter()
        .enumerate()
        .flat_map(|(n, row)| {
            let t = run.time_grid.time(n);
            run.mesh
                .points()
                .iter()
                .zip(row)
                .map(move |(&x, u)| (u - problem.exact(x, t)).abs())
        })
        .fold(0.0, f64::max)
}

/// Outcome of comparing the finite-volume run with the finite-difference run
/// on the midpoint-shifted points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftComparison {
    /// `max_{i,n} |ũ_i^n - u_i^n|`.
    pub max_difference: f64,
    /// Largest point spacing of the mesh.
    pub h: f64,
    /// Sampled `max |u_ini'|`.
    pub max_derivative: f64,
}

impl ShiftComparison {
    /// `h max|u_ini'|`, the maximum-principle bound on `max_difference`.
    pub fn bound(&self) -> f64 {
        self.h * self.max_derivative
    }
}

/// Runs the finite-volume scheme on `mesh` from `u_ini(x_i)` and the
/// finite-difference scheme on the shifted points from `u_ini(x̃_i)`, and
/// measures the largest difference of the iterates.
pub fn compare_shifted(
    problem: &TransportProblem,
    mesh: &Mesh1D,
    time_grid: &TimeGrid,
) -> Result<ShiftComparison> {
    let fv = run_fv_scheme(problem, mesh, time_grid)?;
    let shifted = mesh.midpoint_shift();
    let fd = run_fd_scheme(problem, &shifted, time_grid)?;
    let max_difference = fv
        .history
        .iter()
        .zip(&fd.history)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let start = mesh.faces()[0];
    let max_derivative = max_abs_sampled(
        |x| problem.initial_derivative(x),
        start,
        start + mesh.period(),
        10 * mesh.cells(),
    );
    Ok(ShiftComparison {
        max_difference,
        h: mesh.max_spacing(),
        max_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::{Bump, Constant};

    fn bump_problem(final_time: f64) -> TransportProblem {
        TransportProblem::new(
            1.0,
            Arc::new(Bump::new(0.25, 0.2, 1.0)),
            (0.0, 1.0),
            final_time,
        )
        .unwrap()
    }

    fn constant_problem(c: f64) -> TransportProblem {
        TransportProblem::new(1.0, Arc::new(Constant(c)), (0.0, 1.0), 0.5).unwrap()
    }

    fn cfl_grid(final_time: f64, limit: f64) -> TimeGrid {
        TimeGrid::with_max_step(final_time, 0.9 * limit).unwrap()
    }

    fn order(e: &[f64]) -> Vec<f64> {
        e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }

    #[test]
    fn exact_solution_translates() {
        let p = TransportProblem::new(1.0, Arc::new(Bump::new(0.3, 0.1, 1.0)), (0.0, 1.0), 1.0)
            .unwrap();
        assert_eq!(p.exact(0.5, 0.2), p.initial(0.3));
        assert_eq!(p.exact(0.5, 0.2), 1.0);
        assert_eq!(p.exact(0.42, 0.0), p.initial(0.42));
        // wraps around the period
        assert_eq!(p.exact(0.1, 0.8), p.initial(0.3));
        let c = constant_problem(2.5);
        assert_eq!(c.exact(0.77, 0.4), 2.5);
    }

    #[test]
    fn constants_are_fixed_points() {
        let p = constant_problem(3.0);
        for mesh in [
            Mesh1D::random(0.0, 1.0, 40, 3.0, 5).unwrap(),
            Mesh1D::alternating(0.0, 1.0, 1.0 / 24.0).unwrap(),
        ] {
            let tg = cfl_grid(0.5, mesh.min_spacing());
            for run in [
                run_fd_scheme(&p, &mesh, &tg).unwrap(),
                run_fv_scheme(&p, &mesh, &tg).unwrap(),
            ] {
                assert!(run.history.iter().flatten().all(|&u| u == 3.0));
                assert_eq!(sup_error(&run, &p), 0.0);
            }
            for scheme in [SchemeId::Fd3, SchemeId::Fv4] {
                assert_eq!(truncation_residual(scheme, &p, &mesh, &tg), 0.0);
            }
            assert_eq!(compare_shifted(&p, &mesh, &tg).unwrap().max_difference, 0.0);
        }
    }

    #[test]
    fn unit_courant_number_shifts_exactly() {
        let p = bump_problem(0.5);
        let mesh = Mesh1D::uniform(0.0, 1.0, 8).unwrap();
        let tg = TimeGrid::new(0.5, 4).unwrap();
        let run = run_fd_scheme(&p, &mesh, &tg).unwrap();
        assert_eq!(run.cfl, 1.0);
        for n in 0..4 {
            let (u, v) = (&run.history[n], &run.history[n + 1]);
            for i in 0..8 {
                assert!((v[i] - u[(i + 7) % 8]).abs() < 1e-15);
            }
        }
        assert!(sup_error(&run, &p) < 1e-14);
    }

    #[test]
    fn cfl_violation_is_refused() {
        let p = bump_problem(0.5);
        let mesh = Mesh1D::alternating(0.0, 1.0, 1.0 / 12.0).unwrap();
        // a dt = h/2 * 1.2 exceeds the smallest FD spacing h/2
        let tg = TimeGrid::with_max_step(0.5, 0.6 / 12.0).unwrap();
        match run_fd_scheme(&p, &mesh, &tg) {
            Err(Error::Cfl { ratio, .. }) => assert!(ratio > 1.0),
            other => panic!("expected CFL refusal, got {other:?}"),
        }
        // the FV denominators are 3h/4, so the same dt is accepted there
        assert!(run_fv_scheme(&p, &mesh, &tg).is_ok());
    }

    #[test]
    fn maximum_principle_and_conservation() {
        let p = bump_problem(0.5);
        let mesh = Mesh1D::random(0.0, 1.0, 64, 3.0, 9).unwrap();
        let tg = cfl_grid(0.5, mesh.min_spacing());
        for run in [
            run_fd_scheme(&p, &mesh, &tg).unwrap(),
            run_fv_scheme(&p, &mesh, &tg).unwrap(),
        ] {
            let lo = run.history[0].iter().copied().fold(f64::INFINITY, f64::min);
            let hi = run.history[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(run.history.iter().flatten().all(|&u| lo <= u && u <= hi));
            assert!(run.relative_mass_drift() < 1e-13);
        }
    }

    #[test]
    fn fv_equals_fd_on_shifted_mesh() {
        let p = bump_problem(0.5);
        let mesh = Mesh1D::random(0.0, 1.0, 50, 2.5, 17).unwrap();
        let tg = cfl_grid(0.5, mesh.spacings().h_center.iter().copied().fold(1.0, f64::min));
        let initial: Vec<f64> = mesh.points().iter().map(|&x| p.initial(x).sin() + 0.3).collect();
        let fv = run_scheme_from(SchemeId::Fv4, &p, &mesh, &tg, initial.clone()).unwrap();
        let fd = run_scheme_from(SchemeId::Fd3, &p, &mesh.midpoint_shift(), &tg, initial).unwrap();
        let worst = fv
            .history
            .iter()
            .flatten()
            .zip(fd.history.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-14, "difference {worst}");
    }

    #[test]
    fn fd_converges_at_first_order_on_uniform_meshes() {
        let p = bump_problem(0.5);
        let errors: Vec<f64> = [256, 512, 1024]
            .iter()
            .map(|&m| {
                let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
                let tg = cfl_grid(0.5, mesh.min_spacing());
                sup_error(&run_fd_scheme(&p, &mesh, &tg).unwrap(), &p)
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        for q in order(&errors) {
            assert!((q - 1.0).abs() < 0.25, "orders {:?}", order(&errors));
        }
    }

    #[test]
    fn fd_residual_vanishes_on_uniform_meshes() {
        let p = bump_problem(0.2);
        let residuals: Vec<f64> = [32, 64, 128, 256]
            .iter()
            .map(|&m| {
                let mesh = Mesh1D::uniform(0.0, 1.0, m).unwrap();
                let tg = cfl_grid(0.2, mesh.min_spacing());
                truncation_residual(SchemeId::Fd3, &p, &mesh, &tg)
            })
            .collect();
        let q = order(&residuals);
        assert!((q[q.len() - 1] - 1.0).abs() < 0.2, "orders {q:?}");
    }

    #[test]
    fn fv_residual_does_not_vanish_on_alternating_meshes() {
        let p = bump_problem(0.2);
        for k in [24, 96] {
            let h = 1.0 / k as f64;
            let mesh = Mesh1D::alternating(0.0, 1.0, h).unwrap();
            let tg = cfl_grid(0.2, 0.75 * h);
            let r = truncation_residual(SchemeId::Fv4, &p, &mesh, &tg);
            // Taylor oracle: the stencil reduces to a u'(x - a t)(h_half/h_center - 1)
            let s = mesh.spacings();
            let mut taylor = 0.0_f64;
            for n in 0..tg.steps() {
                let t = tg.time(n);
                for (i, &x) in mesh.points().iter().enumerate() {
                    let g = s.h_half[i] / s.h_center[i] - 1.0;
                    taylor = taylor.max((p.initial_derivative(x - t) * g).abs());
                }
            }
            let sup_derivative = max_abs_sampled(|x| p.initial_derivative(x), 0.0, 1.0, 100_000);
            assert!(taylor > 0.3 * sup_derivative);
            assert!((r - taylor).abs() < 20.0 * h * sup_derivative, "r = {r}, taylor = {taylor}");
        }
    }

    #[test]
    fn fv_converges_on_alternating_meshes() {
        let p = bump_problem(0.5);
        let errors: Vec<f64> = [96, 192, 384, 768]
            .iter()
            .map(|&k| {
                let h = 1.0 / k as f64;
                let mesh = Mesh1D::alternating(0.0, 1.0, h).unwrap();
                let tg = cfl_grid(0.5, 0.75 * h);
                sup_error(&run_fv_scheme(&p, &mesh, &tg).unwrap(), &p)
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        let q = order(&errors);
        assert!((q[q.len() - 1] - 1.0).abs() < 0.2, "orders {q:?}");
    }

    #[test]
    fn shift_comparison_respects_the_bound() {
        let base = Bump::new(0.4, 0.3, 1.0);
        let slope = max_abs_sampled(|x| base.derivative(x), 0.0, 1.5, 1_000_000);
        let profile = Bump::new(0.4, 0.3, 1.0 / slope);
        let p = TransportProblem::new(1.0, Arc::new(profile), (0.0, 1.5), 0.5).unwrap();
        let mut diffs = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let mesh = Mesh1D::alternating(0.0, 1.5, h).unwrap();
            let tg = cfl_grid(0.5, 0.75 * h);
            let c = compare_shifted(&p, &mesh, &tg).unwrap();
            assert!((c.max_derivative - 1.0).abs() < 1e-2);
            assert!(c.max_difference <= h * 1.0 + 1e-12, "h = {h}: {c:?}");
            assert!(c.max_difference <= c.bound() * (1.0 + 1e-8));
            diffs.push(c.max_difference);
        }
        assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    }

    #[test]
    fn csv_export() {
        let p = bump_problem(0.5);
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let tg = TimeGrid::new(0.5, 4).unwrap();
        let run = run_fd_scheme(&p, &mesh, &tg).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,i,x_i,value");
        assert_eq!(lines.len(), 1 + 5 * 4);
        assert!(lines[1].starts_with("0,0,0.125,"));
    }
}
