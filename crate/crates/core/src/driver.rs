//! Time-marching driver for nonlinear simulations: fixed macroscopic step,
//! snapshot collection, and abort diagnostics carrying the failing time and
//! cell.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, RelaxationProfile};
use crate::linalg;
use crate::model::ModelSystem;
use crate::pvm::ViscosityScheme;
use crate::rhs::{BoundaryCondition, NonlinearRhs, NonlinearSplit};
use crate::stepping::{self, IntegratorConfig};

/// Everything needed to march a nonlinear problem in time.
pub struct SimulationSetup<'a> {
    pub model: &'a ModelSystem,
    pub grid: &'a Grid1D,
    pub profile: &'a RelaxationProfile,
    pub scheme: &'a ViscosityScheme,
    pub bc: BoundaryCondition,
    pub integrator: IntegratorConfig,
    pub end_time: f64,
    /// Capture the state at these times (clamped into [0, end_time]).
    pub snapshot_times: Vec<f64>,
    pub quad_points: usize,
}

/// A captured state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: DVector<f64>,
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub snapshots: Vec<Snapshot>,
    pub steps_taken: usize,
    pub macro_dt: f64,
    pub final_field: DVector<f64>,
}

fn wrap_abort(err: Error, time: f64, step: usize) -> Error {
    match err {
        Error::NonFiniteField { cell, component } => Error::SimulationAborted {
            time,
            step,
            cell,
            component,
        },
        other => other,
    }
}

/// March the nonlinear system to `end_time` with the configured integrator.
/// The final step is shortened (all step sizes scaled together) to land on
/// `end_time` exactly.
pub fn run_simulation(setup: &SimulationSetup, w0: DVector<f64>) -> Result<SimulationRun> {
    setup.integrator.validate()?;
    if !(setup.end_time > 0.0) {
        return Err(Error::NonPositive {
            name: "end_time",
            value: setup.end_time,
        });
    }
    let n_vars = setup.model.n_vars();
    if w0.len() != n_vars * setup.grid.n_cells() {
        return Err(Error::invalid(format!(
            "initial field has {} entries, expected {}",
            w0.len(),
            n_vars * setup.grid.n_cells()
        )));
    }

    let macro_dt = setup.integrator.macro_dt();
    let rhs = NonlinearRhs::new(
        setup.model,
        setup.grid,
        setup.profile,
        setup.scheme,
        setup.bc,
        macro_dt,
    )?
    .quad_points(setup.quad_points);
    let split_index = setup.profile.split_index();
    let needs_split = matches!(
        setup.integrator,
        IntegratorConfig::Afe { .. } | IntegratorConfig::Apfe { .. } | IntegratorConfig::Appfe { .. }
    );
    if needs_split && (split_index == 0 || split_index >= setup.grid.n_cells()) {
        return Err(Error::invalid(
            "adaptive integrators need the relaxation split strictly inside the grid",
        ));
    }
    let split = if needs_split {
        Some(NonlinearSplit::new(&rhs, split_index)?)
    } else {
        None
    };
    let n_left = split_index * n_vars;

    let mut snapshot_times: Vec<f64> = setup
        .snapshot_times
        .iter()
        .map(|t| t.clamp(0.0, setup.end_time))
        .collect();
    snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut snapshots = Vec::new();
    let mut w = w0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut snap_idx = 0usize;

    let capture = |t: f64, w: &DVector<f64>, snap_idx: &mut usize, out: &mut Vec<Snapshot>| {
        while *snap_idx < snapshot_times.len() && snapshot_times[*snap_idx] <= t + 1e-12 {
            out.push(Snapshot {
                time: snapshot_times[*snap_idx],
                field: w.clone(),
            });
            *snap_idx += 1;
        }
    };
    capture(t, &w, &mut snap_idx, &mut snapshots);

    while t < setup.end_time - 1e-12 * setup.end_time {
        let remaining = setup.end_time - t;
        let cfg = if remaining < macro_dt * (1.0 - 1e-12) {
            setup.integrator.scaled(remaining / macro_dt)
        } else {
            setup.integrator
        };
        let step_dt = cfg.macro_dt();

        w = match (&cfg, &split) {
            (IntegratorConfig::Fe { dt }, _) => {
                stepping::fe_step(|v| rhs.eval(v), &w, *dt).map_err(|e| wrap_abort(e, t, steps))?
            }
            (IntegratorConfig::Pfe { delta_t, k, dt }, _) => {
                stepping::pfe_step(|v| rhs.eval(v), &w, *delta_t, *k, *dt)
                    .map_err(|e| wrap_abort(e, t, steps))?
            }
            (_, Some(split)) => {
                let (wl, wr) = stepping::split_vec(&w, n_left);
                let (nl, nr) = stepping::split_step(split, &cfg, &wl, &wr)
                    .map_err(|e| wrap_abort(e, t, steps))?;
                stepping::concat_vec(&nl, &nr)
            }
            _ => unreachable!("adaptive integrator without split"),
        };
        linalg::check_finite(&w, n_vars).map_err(|e| wrap_abort(e, t + step_dt, steps))?;

        t += step_dt;
        steps += 1;
        capture(t, &w, &mut snap_idx, &mut snapshots);
    }

    Ok(SimulationRun {
        snapshots,
        steps_taken: steps,
        macro_dt,
        final_field: w,
    })
}

/// Riemann initial data: `left` for cells with center < split_x, else `right`.
pub fn riemann_field(
    grid: &Grid1D,
    n_vars: usize,
    left: &[f64],
    right: &[f64],
    split_x: f64,
) -> Result<DVector<f64>> {
    if left.len() != n_vars || right.len() != n_vars {
        return Err(Error::invalid(format!(
            "Riemann states must have {n_vars} components"
        )));
    }
    let mut w = DVector::zeros(grid.n_cells() * n_vars);
    for i in 0..grid.n_cells() {
        let src = if grid.center(i) < split_x { left } else { right };
        w.rows_mut(i * n_vars, n_vars)
            .copy_from_slice(src);
    }
    Ok(w)
}

/// Cell-sum of one state component over the field.
pub fn component_sum(w: &DVector<f64>, n_vars: usize, component: usize) -> f64 {
    w.as_slice()
        .iter()
        .skip(component)
        .step_by(n_vars)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hme_model, scalar_model};
    use crate::pvm::PvmScheme;
    use approx::assert_relative_eq;

    #[test]
    fn equilibrium_is_a_fixed_point() {
        // uniform zero-velocity Maxwellian data stays constant in time
        let model = hme_model(4).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let profile = RelaxationProfile::new(&grid, 1e-3, 1e-2, 0.0).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Force, 0.5).unwrap();
        let eq_cell = [1.0, 0.0, 1.0, 0.0, 0.0];
        let w0 = riemann_field(&grid, 5, &eq_cell, &eq_cell, 0.0).unwrap();
        let setup = SimulationSetup {
            model: &model,
            grid: &grid,
            profile: &profile,
            scheme: &vs,
            bc: BoundaryCondition::ZeroGradient,
            integrator: IntegratorConfig::Fe { dt: 1e-4 },
            end_time: 2e-3,
            snapshot_times: vec![],
            quad_points: 3,
        };
        let run = run_simulation(&setup, w0.clone()).unwrap();
        assert_relative_eq!((run.final_field - w0).abs().max(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn final_partial_step_lands_on_end_time() {
        let model = scalar_model(0.0);
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let profile = RelaxationProfile::constant(&grid, 1.0).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let w0 = DVector::from_element(4, 1.0);
        let setup = SimulationSetup {
            model: &model,
            grid: &grid,
            profile: &profile,
            scheme: &vs,
            bc: BoundaryCondition::Periodic,
            integrator: IntegratorConfig::Fe { dt: 0.03 },
            end_time: 0.1,
            snapshot_times: vec![0.0, 0.1],
            quad_points: 1,
        };
        let run = run_simulation(&setup, w0).unwrap();
        assert_eq!(run.steps_taken, 4); // 3 full steps + one shortened
        assert_eq!(run.snapshots.len(), 2);
        // pure decay w' = -w: w(0.1) = exp(-0.1) up to Euler error
        let exact = (-0.1f64).exp();
        assert!((run.final_field[0] - exact).abs() < 2e-3);
    }

    #[test]
    fn abort_carries_time_and_cell() {
        // blow up quickly with an unstable configuration
        let model = scalar_model(1.0);
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let profile = RelaxationProfile::constant(&grid, 1e-12).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let mut w0 = DVector::from_element(8, 1.0);
        w0[3] = 1e300;
        let setup = SimulationSetup {
            model: &model,
            grid: &grid,
            profile: &profile,
            scheme: &vs,
            bc: BoundaryCondition::Periodic,
            integrator: IntegratorConfig::Fe { dt: 1.0 },
            end_time: 10.0,
            snapshot_times: vec![],
            quad_points: 1,
        };
        match run_simulation(&setup, w0) {
            Err(Error::SimulationAborted { .. }) => (),
            other => panic!("expected abort, got {other:?}"),
        }
    }
}
