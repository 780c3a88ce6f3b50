use std::sync::Arc;

use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

use super::{per_level, ConvergenceReport, Experiment, ExperimentConfig, FluxChoice, MeshFamily};
use crate::error::{Error, Result};
use crate::heat1d::{
    balance_defect, energy_estimate, l2_norm, l2l2_error, poincare_ratio, run_heat, HeatProblem,
};
use crate::hyperbolic1d::{
    entropy_residual, falling_crossing, l1_error, run_conservation_scheme, total_variation,
    weak_bv_sum, BurgersPulse, ConservationLaw, ConservationRun, NumericalFlux, KAPPAS,
};
use crate::mac2d::{lw_functional, sample_history, step_mass, weak_form_value, MacGrid, MacState, TestFunction2D};
use crate::mesh::{unit_draw, CellField, Mesh1D, TimeGrid};
use crate::smooth::{Harmonic, RadialBump, SmoothCutoff};
use crate::transport1d::{
    compare_shifted, run_fd_scheme, run_fv_scheme, sup_error, truncation_residual, SchemeId,
    TransportProblem,
};

/// Conservation checks allow this relative drift.
const DRIFT_TOLERANCE: f64 = 1e-12;
/// Refinement orders of first-order schemes must fall within this distance of 1.
const FIRST_ORDER_BAND: f64 = 0.2;

fn sci(v: f64) -> String {
    format!("{v:.4e}")
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| sci(v)).collect();
    format!("[{}]", parts.join(", "))
}

fn list_orders(orders: &[Option<f64>]) -> String {
    let parts: Vec<String> = orders
        .iter()
        .map(|o| o.map_or("n/a".to_string(), |o| format!("{o:.3}")))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn orders_within(orders: &[Option<f64>], lo: f64, hi: f64) -> bool {
    orders.iter().all(|o| o.is_some_and(|o| lo <= o && o <= hi))
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn level_cells(base: usize, level: usize) -> usize {
    base << level
}

/// Periodic 1D mesh on `[0, 1]` for refinement `level`.
fn periodic_mesh(family: MeshFamily, base: usize, level: usize, config: &ExperimentConfig) -> Result<Mesh1D> {
    let cells = level_cells(base, level);
    match family {
        MeshFamily::Uniform => Mesh1D::uniform(0.0, 1.0, cells),
        MeshFamily::Random => Mesh1D::random(
            0.0,
            1.0,
            cells,
            config.ratio_bound,
            config.seed.wrapping_add(level as u64),
        ),
        MeshFamily::Alternating => Mesh1D::alternating(0.0, 1.0, 1.0 / cells as f64),
    }
}

fn harmonic_problem(final_time: f64) -> Result<(TransportProblem, Harmonic)> {
    let profile = Harmonic::new(1.0, 1.0);
    let problem = TransportProblem::new(1.0, Arc::new(profile), (0.0, 1.0), final_time)?;
    Ok((problem, profile))
}

fn scheme_grid(scheme: SchemeId, mesh: &Mesh1D, config: &ExperimentConfig, final_time: f64) -> Result<TimeGrid> {
    let d_min = min_of(&scheme.denominators(mesh));
    TimeGrid::with_max_step(final_time, config.cfl * d_min)
}

pub(super) fn transport_fd(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let family = config.mesh.unwrap_or(MeshFamily::Uniform);
    let base = config.base_cells.unwrap_or(32);
    let final_time = config.final_time.unwrap_or(0.5);
    let (problem, _) = harmonic_problem(final_time)?;
    let rows = per_level(config.levels, |k| {
        let mesh = periodic_mesh(family, base, k, config)?;
        let tg = scheme_grid(SchemeId::Fd3, &mesh, config, final_time)?;
        let run = run_fd_scheme(&problem, &mesh, &tg)?;
        Ok((mesh.max_spacing(), tg.dt(), vec![sup_error(&run, &problem), run.relative_mass_drift()]))
    })?;
    let mut report = ConvergenceReport::new(Experiment::TransportFd, config, &["sup_error", "mass_drift"]);
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let orders = report.orders("sup_error").expect("column");
    report.check(
        "sup_error_order",
        orders_within(&orders, 1.0 - FIRST_ORDER_BAND, 1.0 + FIRST_ORDER_BAND),
        format!("orders {} expected 1 +- {FIRST_ORDER_BAND}", list_orders(&orders)),
    );
    let drift = max_of(&report.column("mass_drift").expect("column"));
    report.check(
        "conservation",
        drift <= DRIFT_TOLERANCE,
        format!("max relative drift {}", sci(drift)),
    );
    Ok(report)
}

pub(super) fn transport_fv_counterexample(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let family = config.mesh.unwrap_or(MeshFamily::Alternating);
    let base = config.base_cells.unwrap_or(12);
    let final_time = config.final_time.unwrap_or(0.5);
    let (problem, _) = harmonic_problem(final_time)?;
    let rows = per_level(config.levels, |k| {
        let mesh = periodic_mesh(family, base, k, config)?;
        let tg = scheme_grid(SchemeId::Fv4, &mesh, config, final_time)?;
        let run = run_fv_scheme(&problem, &mesh, &tg)?;
        Ok((
            mesh.max_spacing(),
            tg.dt(),
            vec![
                truncation_residual(SchemeId::Fv4, &problem, &mesh, &tg),
                sup_error(&run, &problem),
                run.relative_mass_drift(),
            ],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::TransportFvCounterexample,
        config,
        &["truncation_residual", "sup_error", "mass_drift"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let residual = report.column("truncation_residual").expect("column");
    let coarsest = residual[0];
    report.check(
        "residual_non_decay",
        residual.iter().all(|&r| 0.5 * coarsest <= r && r <= 2.0 * coarsest),
        format!("residuals {} within a factor 2 of the coarsest", list(&residual)),
    );
    let orders = report.orders("sup_error").expect("column");
    report.check(
        "sup_error_order",
        orders_within(&orders, 1.0 - FIRST_ORDER_BAND, 1.0 + FIRST_ORDER_BAND),
        format!("orders {} expected 1 +- {FIRST_ORDER_BAND}", list_orders(&orders)),
    );
    let drift = max_of(&report.column("mass_drift").expect("column"));
    report.check(
        "conservation",
        drift <= DRIFT_TOLERANCE,
        format!("max relative drift {}", sci(drift)),
    );
    Ok(report)
}

pub(super) fn shift_bound(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let family = config.mesh.unwrap_or(MeshFamily::Alternating);
    let base = config.base_cells.unwrap_or(12);
    let final_time = config.final_time.unwrap_or(0.5);
    let (problem, profile) = harmonic_problem(final_time)?;
    let slope = profile.max_slope();
    let rows = per_level(config.levels, |k| {
        let mesh = periodic_mesh(family, base, k, config)?;
        // both schemes must be stable: FD on the shifted points uses h_center
        let tg = scheme_grid(SchemeId::Fv4, &mesh, config, final_time)?;
        let c = compare_shifted(&problem, &mesh, &tg)?;
        Ok((c.h, tg.dt(), vec![c.max_difference, c.h * slope]))
    })?;
    let mut report = ConvergenceReport::new(Experiment::ShiftBound, config, &["max_difference", "bound"]);
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let diff = report.column("max_difference").expect("column");
    let bound = report.column("bound").expect("column");
    let worst = diff
        .iter()
        .zip(&bound)
        .map(|(d, b)| d / b)
        .fold(0.0, f64::max);
    report.check(
        "shift_bound",
        diff.iter().zip(&bound).all(|(d, b)| *d <= b * (1.0 + 1e-8)),
        format!("largest difference / (h max|u'|) = {worst:.4}"),
    );
    Ok(report)
}

fn random_values(count: usize, rng: &mut SplitMix64) -> Vec<f64> {
    (0..count).map(|_| 2.0 * unit_draw(rng) - 1.0).collect()
}

fn max_random_poincare(mesh: &Mesh1D, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let field = CellField::new(mesh, random_values(mesh.cells(), &mut rng), 0.0)?;
        worst = worst.max(poincare_ratio(&field)?);
    }
    Ok(worst)
}

pub(super) fn heat_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    if config.mesh.is_some_and(|m| m != MeshFamily::Uniform) {
        return Err(Error::InvalidArgument(
            "heat-convergence runs on uniform meshes".into(),
        ));
    }
    let base = config.base_cells.unwrap_or(16);
    let final_time = config.final_time.unwrap_or(0.5);
    let manufactured = HeatProblem::manufactured(final_time)?;
    let free = HeatProblem::new(Arc::new(|x: f64| (std::f64::consts::PI * x).sin()), final_time)?;
    let rows = per_level(config.levels, |k| {
        let cells = level_cells(base, k);
        let h = 1.0 / cells as f64;
        let mesh = Mesh1D::uniform(0.0, 1.0, cells)?;
        let tg = TimeGrid::with_max_step(final_time, h.powf(config.dt_exponent))?;
        let run = run_heat(&manufactured, &mesh, &tg)?;
        let error = l2l2_error(&run, HeatProblem::manufactured_exact);
        let defect = balance_defect(&run, &manufactured);
        let decay = run_heat(&free, &mesh, &tg)?;
        let u0 = l2_norm(&decay.field(0));
        let ratio = max_random_poincare(&mesh, config.samples, config.seed.wrapping_add(k as u64))?;
        Ok((
            h,
            tg.dt(),
            vec![error, energy_estimate(&decay), 0.5 * u0 * u0, ratio, defect],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::HeatConvergence,
        config,
        &["l2l2_error", "energy", "energy_bound", "max_poincare_ratio", "balance_defect"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let orders = report.orders("l2l2_error").expect("column");
    report.check(
        "error_order",
        orders.iter().all(|o| o.is_some_and(|o| o >= 1.8)),
        format!("orders {} expected >= 1.8", list_orders(&orders)),
    );
    let energy = report.column("energy").expect("column");
    let bound = report.column("energy_bound").expect("column");
    report.check(
        "energy_estimate",
        energy.iter().zip(&bound).all(|(e, b)| e <= b),
        format!("energy {} against bound {}", list(&energy), list(&bound)),
    );
    let ratio = max_of(&report.column("max_poincare_ratio").expect("column"));
    report.check(
        "poincare",
        ratio <= 1.0,
        format!("largest ratio over {} random fields per mesh {}", config.samples, sci(ratio)),
    );
    let defect = max_of(&report.column("balance_defect").expect("column"));
    report.check(
        "conservation",
        defect <= DRIFT_TOLERANCE,
        format!("largest relative balance defect with boundary fluxes {}", sci(defect)),
    );
    Ok(report)
}

pub(super) fn poincare(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let family = config.mesh.unwrap_or(MeshFamily::Random);
    let base = config.base_cells.unwrap_or(16);
    let rows = per_level(config.levels, |k| {
        let cells = level_cells(base, k);
        let mesh = match family {
            MeshFamily::Uniform => Mesh1D::uniform(0.0, 1.0, cells)?,
            MeshFamily::Random => Mesh1D::random(
                0.0,
                1.0,
                cells,
                config.ratio_bound,
                config.seed.wrapping_add(k as u64),
            )?,
            MeshFamily::Alternating => Mesh1D::alternating(0.0, 1.0, 1.0 / cells as f64)?,
        };
        let ratio = max_random_poincare(&mesh, config.samples, config.seed.wrapping_add(1000 + k as u64))?;
        let sine = CellField::sample(&mesh, 0.0, |x| (std::f64::consts::PI * x).sin());
        let gap = (poincare_ratio(&sine)? - 1.0 / std::f64::consts::PI).abs();
        Ok((mesh.max_width(), 0.0, vec![ratio, gap]))
    })?;
    let mut report = ConvergenceReport::new(Experiment::Poincare, config, &["max_random_ratio", "sine_ratio_gap"]);
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let ratio = max_of(&report.column("max_random_ratio").expect("column"));
    report.check("poincare_bound", ratio <= 1.0, format!("largest ratio {}", sci(ratio)));
    let gaps = report.column("sine_ratio_gap").expect("column");
    report.check(
        "sine_ratio_converges",
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("|ratio - 1/pi| {}", list(&gaps)),
    );
    Ok(report)
}

fn burgers_flux(choice: FluxChoice) -> NumericalFlux {
    match choice {
        FluxChoice::Godunov => NumericalFlux::godunov(ConservationLaw::Burgers),
        FluxChoice::LaxFriedrichs => NumericalFlux::lax_friedrichs(ConservationLaw::Burgers, 2.0),
    }
}

fn shock_pulse() -> BurgersPulse {
    BurgersPulse::new((0.0, 1.0), (0.1, 0.5), 1.0, 0.0).expect("valid pulse")
}

/// Explicit run at `cfl` times the stability limit of `flux` on the data range.
fn conservation_run(
    flux: NumericalFlux,
    mesh: &Mesh1D,
    initial: Vec<f64>,
    cfl: f64,
    final_time: f64,
) -> Result<ConservationRun> {
    let lo = min_of(&initial);
    let hi = max_of(&initial);
    let lipschitz = flux.lipschitz_bound(lo, hi);
    let tg = TimeGrid::with_max_step(final_time, cfl * mesh.min_width() / lipschitz)?;
    run_conservation_scheme(flux, mesh, &tg, initial)
}

fn burgers_mesh(config: &ExperimentConfig, base: usize, level: usize) -> Result<Mesh1D> {
    match config.mesh.unwrap_or(MeshFamily::Uniform) {
        MeshFamily::Alternating => Err(Error::InvalidArgument(
            "conservation-law experiments use uniform or random meshes".into(),
        )),
        family => periodic_mesh(family, base, level, config),
    }
}

/// Largest amount by which a run leaves `[lo, hi]`.
fn range_excess(run: &ConservationRun, lo: f64, hi: f64) -> f64 {
    let (a, b) = run.range();
    (lo - a).max(b - hi).max(0.0)
}

pub(super) fn burgers_shock(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let base = config.base_cells.unwrap_or(100);
    let final_time = config.final_time.unwrap_or(0.3);
    let pulse = shock_pulse();
    if final_time >= pulse.valid_until() {
        return Err(Error::InvalidArgument(format!(
            "final_time must stay below {} for the exact solution",
            pulse.valid_until()
        )));
    }
    let flux = burgers_flux(config.flux);
    // f = u^2: the jump 1 -> 0 moves at speed 1
    let shock_at = pulse.right + (pulse.inner + pulse.outer) * final_time;
    let rows = per_level(config.levels, |k| {
        let mesh = burgers_mesh(config, base, k)?;
        let initial = mesh.points().iter().map(|&x| pulse.initial(x)).collect();
        let run = conservation_run(flux, &mesh, initial, config.cfl, final_time)?;
        let u = run.final_values();
        let error = l1_error(&mesh, u, |x| pulse.exact(x, final_time));
        let found = falling_crossing(&mesh, u, 0.5, shock_at - 0.1).unwrap_or(f64::INFINITY);
        Ok((
            mesh.max_width(),
            run.time_grid.dt(),
            vec![
                error,
                (found - shock_at).abs(),
                run.relative_mass_drift(),
                range_excess(&run, 0.0, 1.0),
            ],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::BurgersShock,
        config,
        &["l1_error", "shock_position_error", "mass_drift", "range_excess"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let errors = report.column("l1_error").expect("column");
    let orders = report.orders("l1_error").expect("column");
    report.check(
        "l1_error_decreases",
        errors.windows(2).all(|w| w[1] < w[0]) && orders.iter().all(|o| o.is_some_and(|o| o >= 0.5)),
        format!("L1 errors {} orders {}", list(&errors), list_orders(&orders)),
    );
    let position = report.column("shock_position_error").expect("column");
    let hs = report.hs();
    report.check(
        "shock_speed",
        position.iter().zip(&hs).all(|(e, h)| *e <= 2.0 * h),
        format!("position errors {} against 2h", list(&position)),
    );
    let drift = max_of(&report.column("mass_drift").expect("column"));
    report.check("conservation", drift <= DRIFT_TOLERANCE, format!("max relative drift {}", sci(drift)));
    let excess = max_of(&report.column("range_excess").expect("column"));
    report.check("invariant_interval", excess == 0.0, format!("largest excursion {}", sci(excess)));
    Ok(report)
}

pub(super) fn weak_bv(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let base = config.base_cells.unwrap_or(64);
    let final_time = config.final_time.unwrap_or(0.3);
    let pulse = shock_pulse();
    let flux = burgers_flux(config.flux);
    let rows = per_level(config.levels, |k| {
        let mesh = burgers_mesh(config, base, k)?;
        let h = mesh.max_width();
        let shock = pulse_run(flux, &mesh, &pulse, config.cfl, final_time)?;
        let aggregate = weak_bv_sum(&shock).aggregate;
        // characteristics of 0.5 + 0.25 sin(2 pi x) first cross at t = 1/pi
        let smooth: Vec<f64> = mesh
            .points()
            .iter()
            .map(|&x| 0.5 + 0.25 * (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        let early = conservation_run(flux, &mesh, smooth, config.cfl, 0.15)?;
        Ok((
            h,
            shock.time_grid.dt(),
            vec![aggregate, aggregate * h.sqrt(), weak_bv_sum(&early).aggregate],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::WeakBv,
        config,
        &["aggregate", "scaled_aggregate", "smooth_aggregate"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let scaled = report.column("scaled_aggregate").expect("column");
    let spread = max_of(&scaled) / min_of(&scaled);
    report.check(
        "scaled_aggregate_bounded",
        spread < 3.0,
        format!("aggregate * h^(1/2) {} varies by a factor {spread:.4}", list(&scaled)),
    );
    let smooth = report.column("smooth_aggregate").expect("column");
    let smooth_spread = max_of(&smooth) / min_of(&smooth);
    report.check(
        "smooth_aggregate_bounded",
        smooth_spread < 1.5,
        format!("pre-shock aggregates {} vary by a factor {smooth_spread:.4}", list(&smooth)),
    );
    Ok(report)
}

fn pulse_run(
    flux: NumericalFlux,
    mesh: &Mesh1D,
    pulse: &BurgersPulse,
    cfl: f64,
    final_time: f64,
) -> Result<ConservationRun> {
    let initial = mesh.points().iter().map(|&x| pulse.initial(x)).collect();
    conservation_run(flux, mesh, initial, cfl, final_time)
}

fn max_entropy_residual(run: &ConservationRun) -> f64 {
    KAPPAS
        .iter()
        .map(|&k| entropy_residual(run, &run.flux, k))
        .fold(0.0, f64::max)
}

/// Broken-control runs last this many mesh widths in time.
const BROKEN_CONTROL_WIDTHS: f64 = 5.0;

/// Lax–Friedrichs with a viscosity far below `max |f'|`.
fn broken_flux() -> NumericalFlux {
    NumericalFlux::lax_friedrichs(ConservationLaw::Burgers, 0.2)
}

pub(super) fn entropy(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let base = config.base_cells.unwrap_or(100);
    let final_time = config.final_time.unwrap_or(0.3);
    let pulse = shock_pulse();
    let rows = per_level(config.levels, |k| {
        let mesh = burgers_mesh(config, base, k)?;
        let godunov = pulse_run(burgers_flux(FluxChoice::Godunov), &mesh, &pulse, config.cfl, final_time)?;
        let lf = pulse_run(burgers_flux(FluxChoice::LaxFriedrichs), &mesh, &pulse, config.cfl, final_time)?;
        // the broken scheme is unstable; a few steps expose the violation before blow-up
        let broken = pulse_run(broken_flux(), &mesh, &pulse, config.cfl, (BROKEN_CONTROL_WIDTHS * mesh.max_width()).min(final_time))?;
        Ok((
            mesh.max_width(),
            godunov.time_grid.dt(),
            vec![
                max_entropy_residual(&godunov),
                max_entropy_residual(&lf),
                max_entropy_residual(&broken),
            ],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::Entropy,
        config,
        &["godunov", "lax_friedrichs", "broken_control"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    for (name, column) in [("godunov_entropy", "godunov"), ("lax_friedrichs_entropy", "lax_friedrichs")] {
        let worst = max_of(&report.column(column).expect("column"));
        report.check(
            name,
            worst <= 1e-10,
            format!("largest positive residual over kappa {KAPPAS:?}: {}", sci(worst)),
        );
    }
    let control = report.column("broken_control").expect("column");
    let sampled = broken_flux().check_monotone(0.0, 1.0, 21);
    report.check(
        "broken_control_detected",
        control.iter().all(|&r| r > 1e-6) && !sampled.is_monotone(),
        format!(
            "residuals {}; sampled monotonicity violations {}",
            list(&control),
            sampled.violations
        ),
    );
    Ok(report)
}

/// Largest single-step increase of the total variation.
fn tv_increase(run: &ConservationRun) -> f64 {
    run.history
        .windows(2)
        .map(|w| total_variation(&w[1]) - total_variation(&w[0]))
        .fold(0.0, f64::max)
}

pub(super) fn tvd(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let base = config.base_cells.unwrap_or(100);
    let final_time = config.final_time.unwrap_or(0.3);
    if config.mesh.is_some_and(|m| m != MeshFamily::Uniform) {
        return Err(Error::InvalidArgument("tvd runs on uniform meshes".into()));
    }
    let rows = per_level(config.levels, |k| {
        let mesh = Mesh1D::uniform(0.0, 1.0, level_cells(base, k))?;
        let initial: Vec<f64> = mesh
            .points()
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        let mut values = Vec::new();
        let mut dt = 0.0;
        for choice in [FluxChoice::Godunov, FluxChoice::LaxFriedrichs] {
            let run = conservation_run(burgers_flux(choice), &mesh, initial.clone(), config.cfl, final_time)?;
            dt = run.time_grid.dt();
            values.push(tv_increase(&run));
            values.push(range_excess(&run, min_of(&initial), max_of(&initial)));
            values.push(run.relative_mass_drift());
        }
        Ok((mesh.max_width(), dt, values))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::Tvd,
        config,
        &[
            "godunov_tv_increase",
            "godunov_range_excess",
            "godunov_mass_drift",
            "lax_friedrichs_tv_increase",
            "lax_friedrichs_range_excess",
            "lax_friedrichs_mass_drift",
        ],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    for flux in ["godunov", "lax_friedrichs"] {
        let increase = max_of(&report.column(&format!("{flux}_tv_increase")).expect("column"));
        // only roundoff of a sum of O(1) terms is tolerated
        report.check(
            &format!("{flux}_tvd"),
            increase <= 1e-13,
            format!("largest one-step TV increase {}", sci(increase)),
        );
        let excess = max_of(&report.column(&format!("{flux}_range_excess")).expect("column"));
        report.check(
            &format!("{flux}_invariant_interval"),
            excess == 0.0,
            format!("largest excursion {}", sci(excess)),
        );
        let drift = max_of(&report.column(&format!("{flux}_mass_drift")).expect("column"));
        report.check(
            &format!("{flux}_conservation"),
            drift <= DRIFT_TOLERANCE,
            format!("max relative drift {}", sci(drift)),
        );
    }
    Ok(report)
}

/// Smooth interior weight of the Lax–Wendroff instance.
fn lw_weight() -> RadialBump {
    RadialBump::new((0.5, 0.5), 0.4)
}

/// `rho = 2 + sin(x + y - 2t) w(x, y)`.
pub fn lw_density(x: f64, y: f64, t: f64) -> f64 {
    2.0 + (x + y - 2.0 * t).sin() * lw_weight().value(x, y)
}

/// `u = (1, 1) w(x, y)`.
pub fn lw_velocity(x: f64, y: f64, _t: f64) -> (f64, f64) {
    let w = lw_weight().value(x, y);
    (w, w)
}

pub fn lw_test_function() -> TestFunction2D {
    TestFunction2D::bump(RadialBump::new((0.45, 0.55), 0.3), SmoothCutoff::new(0.15, 0.4))
}

/// Quasi-uniform stretched grid with `n x n` cells on the unit square.
pub fn lw_grid(n: usize) -> Result<MacGrid> {
    use std::f64::consts::PI;
    MacGrid::mapped(
        n,
        n,
        |s| s + 0.05 * (2.0 * PI * s).sin(),
        |s| s - 0.04 * (2.0 * PI * s).sin(),
    )
}

pub(super) fn mac_lw(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let base = config.base_cells.unwrap_or(16);
    let final_time = config.final_time.unwrap_or(0.5);
    let mode = config.edge_density;
    let phi = lw_test_function();
    let rows = per_level(config.levels, |k| {
        let grid = lw_grid(level_cells(base, k))?;
        phi.check_support(&grid, final_time)?;
        // max |u| = 1
        let tg = TimeGrid::with_max_step(final_time, 0.4 * grid.min_side())?;
        let states = sample_history(&grid, &tg, lw_density, lw_velocity)?;
        let lw = lw_functional(&states, &phi, &grid, &tg, mode)?;
        let weak = weak_form_value(lw_density, lw_velocity, &phi, |x, y| lw_density(x, y, 0.0), &grid, &tg);

        let start = states[0].clone();
        let rate = grid.max_interior_speed(&start.u, &start.v) * grid.max_perimeter_ratio();
        let scheme_tg = TimeGrid::with_max_step(final_time, config.cfl / rate)?;
        let mut scheme: Vec<MacState> = vec![start];
        for _ in 0..scheme_tg.steps() {
            let next = step_mass(&scheme[scheme.len() - 1], scheme_tg.dt(), &grid, mode)?;
            scheme.push(next);
        }
        let scheme_lw = lw_functional(&scheme, &phi, &grid, &scheme_tg, mode)?;
        let m0 = scheme[0].mass(&grid);
        let drift = scheme
            .iter()
            .map(|s| (s.mass(&grid) - m0).abs())
            .fold(0.0, f64::max)
            / m0.abs();
        Ok((
            grid.max_side(),
            tg.dt(),
            vec![lw, weak, (lw - weak).abs(), scheme_lw.abs(), drift, grid.quasi_uniformity_ratio()],
        ))
    })?;
    let mut report = ConvergenceReport::new(
        Experiment::MacLw,
        config,
        &["lw_value", "weak_value", "gap", "scheme_lw", "mass_drift", "quasi_uniformity"],
    );
    for (h, dt, values) in rows {
        report.push_row(h, dt, values);
    }
    let orders = report.orders("gap").expect("column");
    report.check(
        "gap_order",
        orders.iter().all(|o| o.is_some_and(|o| o >= 0.8)),
        format!("gaps {} orders {}", list(&report.column("gap").expect("column")), list_orders(&orders)),
    );
    let scheme_lw = max_of(&report.column("scheme_lw").expect("column"));
    report.check(
        "scheme_histories_vanish",
        scheme_lw <= 1e-12,
        format!("largest |functional| on scheme histories {}", sci(scheme_lw)),
    );
    let drift = max_of(&report.column("mass_drift").expect("column"));
    report.check("conservation", drift <= DRIFT_TOLERANCE, format!("max relative drift {}", sci(drift)));
    let ratios = report.column("quasi_uniformity").expect("column");
    report.check(
        "quasi_uniform",
        max_of(&ratios) / min_of(&ratios) <= 1.1,
        format!("ratios {}", list(&ratios)),
    );
    Ok(report)
}
