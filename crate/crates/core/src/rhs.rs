//! Nonlinear fluctuation-form right-hand side of the PVM finite volume
//! scheme, with periodic or zero-gradient boundaries, and its split form for
//! the adaptive integrators.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, RelaxationProfile};
use crate::linalg;
use crate::model::ModelSystem;
use crate::pvm::{self, ViscosityScheme};
use crate::stepping::SplitSystem;

/// Outer boundary treatment of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Periodic,
    /// Ghost cells copy the adjacent interior cell (outgoing waves).
    ZeroGradient,
}

/// Evaluator for dW/dt of the nonlinear scheme. The macroscopic time step
/// `macro_dt` enters the LF and FORCE viscosity matrices.
#[derive(Debug, Clone)]
pub struct NonlinearRhs<'a> {
    model: &'a ModelSystem,
    grid: &'a Grid1D,
    profile: &'a RelaxationProfile,
    scheme: ViscosityScheme,
    bc: BoundaryCondition,
    macro_dt: f64,
    quad_points: usize,
}

impl<'a> NonlinearRhs<'a> {
    pub fn new(
        model: &'a ModelSystem,
        grid: &'a Grid1D,
        profile: &'a RelaxationProfile,
        scheme: &ViscosityScheme,
        bc: BoundaryCondition,
        macro_dt: f64,
    ) -> Result<Self> {
        if !(macro_dt > 0.0) {
            return Err(Error::NonPositive {
                name: "macro_dt",
                value: macro_dt,
            });
        }
        if profile.per_cell().len() != grid.n_cells() {
            return Err(Error::invalid("profile does not match grid"));
        }
        Ok(Self {
            model,
            grid,
            profile,
            scheme: *scheme,
            bc,
            macro_dt,
            quad_points: 3,
        })
    }

    pub fn quad_points(mut self, quad_points: usize) -> Self {
        self.quad_points = quad_points;
        self
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n_vars(&self) -> usize {
        self.model.n_vars()
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    fn interface_fluctuations(
        &self,
        w_a: &[f64],
        w_b: &[f64],
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.model.n_vars();
        let a_phi = pvm::roe_matrix(self.model, w_a, w_b, self.quad_points)?;
        let q_phi =
            pvm::viscosity_matrix_with_dt(self.scheme.scheme, &a_phi, self.grid.dx(), self.macro_dt)?;
        let jump = DVector::from_fn(n, |i, _| w_b[i] - w_a[i]);
        let a_jump = &a_phi * &jump;
        let q_jump = &q_phi * &jump;
        let d_minus = (&a_jump - &q_jump) / 2.0;
        let d_plus = (&a_jump + &q_jump) / 2.0;
        Ok((d_minus, d_plus))
    }

    /// dW/dt over a contiguous cell range `first_cell..first_cell+len` given
    /// explicit ghost states at both ends of the range.
    fn eval_with_ghosts(
        &self,
        w: &DVector<f64>,
        first_cell: usize,
        ghost_left: &[f64],
        ghost_right: &[f64],
    ) -> Result<DVector<f64>> {
        let n = self.model.n_vars();
        let n_cells = w.len() / n;
        linalg::check_finite(w, n)?;
        let dx = self.grid.dx();
        let s_diag = self.model.source_diag();
        let mut out = DVector::zeros(w.len());

        let cell = |i: usize| -> &[f64] { &w.as_slice()[i * n..(i + 1) * n] };

        // Interfaces j-1/2 for j = 0..=n_cells; D+ feeds cell j, D- feeds cell j-1.
        for j in 0..=n_cells {
            let left_state: &[f64] = if j == 0 { ghost_left } else { cell(j - 1) };
            let right_state: &[f64] = if j == n_cells { ghost_right } else { cell(j) };
            let (d_minus, d_plus) = self.interface_fluctuations(left_state, right_state)?;
            if j > 0 {
                let mut view = out.rows_mut((j - 1) * n, n);
                view.axpy(-1.0 / dx, &d_minus, 1.0);
            }
            if j < n_cells {
                let mut view = out.rows_mut(j * n, n);
                view.axpy(-1.0 / dx, &d_plus, 1.0);
            }
        }

        for i in 0..n_cells {
            let inv_eps = 1.0 / self.profile.eps(first_cell + i);
            let mut view = out.rows_mut(i * n, n);
            for k in 0..n {
                view[k] -= inv_eps * s_diag[k] * w[i * n + k];
            }
        }
        Ok(out)
    }

    /// dW/dt for the full field with the configured boundary condition.
    pub fn eval(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.model.n_vars();
        let n_cells = self.grid.n_cells();
        if w.len() != n * n_cells {
            return Err(Error::invalid(format!(
                "field length {} does not match {} cells x {} vars",
                w.len(),
                n_cells,
                n
            )));
        }
        let slice = w.as_slice();
        let first = &slice[0..n];
        let last = &slice[(n_cells - 1) * n..];
        let (ghost_left, ghost_right) = match self.bc {
            BoundaryCondition::Periodic => (last, first),
            BoundaryCondition::ZeroGradient => (first, last),
        };
        self.eval_with_ghosts(w, 0, ghost_left, ghost_right)
    }
}

/// The nonlinear system split at `split_index`, for the adaptive steppers.
/// The left part owns cells `0..split_index`, the right part the rest.
#[derive(Debug, Clone)]
pub struct NonlinearSplit<'a> {
    rhs: &'a NonlinearRhs<'a>,
    split_index: usize,
}

impl<'a> NonlinearSplit<'a> {
    pub fn new(rhs: &'a NonlinearRhs<'a>, split_index: usize) -> Result<Self> {
        if split_index == 0 || split_index >= rhs.n_cells() {
            return Err(Error::invalid(format!(
                "split index {split_index} must lie strictly inside 1..{}",
                rhs.n_cells()
            )));
        }
        Ok(Self { rhs, split_index })
    }

    fn n(&self) -> usize {
        self.rhs.n_vars()
    }

    fn n_left(&self) -> usize {
        self.split_index
    }

    fn n_right(&self) -> usize {
        self.rhs.n_cells() - self.split_index
    }
}

fn cell_entries(cells: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(cells.len() * n);
    for &c in cells {
        out.extend(c * n..(c + 1) * n);
    }
    out
}

impl SplitSystem for NonlinearSplit<'_> {
    fn left_len(&self) -> usize {
        self.n_left() * self.n()
    }

    fn right_len(&self) -> usize {
        self.n_right() * self.n()
    }

    fn coupled_right_entries(&self) -> Vec<usize> {
        let mut cells = vec![0];
        if self.rhs.bc == BoundaryCondition::Periodic && self.n_right() > 1 {
            cells.push(self.n_right() - 1);
        }
        cell_entries(&cells, self.n())
    }

    fn coupled_left_entries(&self) -> Vec<usize> {
        let mut cells = vec![self.n_left() - 1];
        if self.rhs.bc == BoundaryCondition::Periodic && self.n_left() > 1 {
            cells.insert(0, 0);
        }
        cell_entries(&cells, self.n())
    }

    fn rhs_left(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        let rs = w_r.as_slice();
        let ls = w_l.as_slice();
        let ghost_right = &rs[0..n]; // first right cell across the interface
        let ghost_left: &[f64] = match self.rhs.bc {
            BoundaryCondition::Periodic => &rs[(self.n_right() - 1) * n..],
            BoundaryCondition::ZeroGradient => &ls[0..n],
        };
        self.rhs.eval_with_ghosts(w_l, 0, ghost_left, ghost_right)
    }

    fn rhs_right(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        let ls = w_l.as_slice();
        let rs = w_r.as_slice();
        let ghost_left = &ls[(self.n_left() - 1) * n..]; // last left cell
        let ghost_right: &[f64] = match self.rhs.bc {
            BoundaryCondition::Periodic => &ls[0..n],
            BoundaryCondition::ZeroGradient => &rs[(self.n_right() - 1) * n..],
        };
        self.rhs
            .eval_with_ghosts(w_r, self.split_index, ghost_left, ghost_right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hme_linearized, scalar_model, EquilibriumState};
    use crate::operator::assemble_semi_discrete;
    use crate::pvm::PvmScheme;
    use approx::assert_relative_eq;

    #[test]
    fn constant_field_without_source_is_steady() {
        let model = scalar_model(1.0);
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let profile = RelaxationProfile::constant(&grid, f64::INFINITY).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let rhs = NonlinearRhs::new(&model, &grid, &profile, &vs, BoundaryCondition::Periodic, 0.1)
            .unwrap();
        let w = DVector::from_element(8, 3.5);
        let dw = rhs.eval(&w).unwrap();
        assert_relative_eq!(dw.abs().max(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn scalar_upwind_delta_field_stencil() {
        // a = 1, upwind: dW_i = -(W_i - W_{i-1})/dx; delta at cell 0 gives
        // -1/dx at cell 0 and +1/dx at cell 1.
        let model = scalar_model(1.0);
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        let profile = RelaxationProfile::constant(&grid, f64::INFINITY).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let rhs = NonlinearRhs::new(&model, &grid, &profile, &vs, BoundaryCondition::Periodic, 0.1)
            .unwrap();
        let mut w = DVector::zeros(5);
        w[0] = 1.0;
        let dw = rhs.eval(&w).unwrap();
        let dx = grid.dx();
        assert_relative_eq!(dw[0], -1.0 / dx, epsilon = 1e-12);
        assert_relative_eq!(dw[1], 1.0 / dx, epsilon = 1e-12);
        for i in 2..5 {
            assert_relative_eq!(dw[i], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_model_matches_dense_operator() {
        let eq = EquilibriumState::new(1.0, std::f64::consts::PI, 1.0).unwrap();
        let model = hme_linearized(&eq, 4).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 12).unwrap();
        let profile = RelaxationProfile::new(&grid, 1e-3, 1e-2, 0.0).unwrap();
        for scheme in [PvmScheme::Upwind, PvmScheme::LaxFriedrichs, PvmScheme::Force] {
            let vs = ViscosityScheme::new(scheme, 0.75).unwrap();
            let op = assemble_semi_discrete(&model, &grid, &profile, &vs).unwrap();
            let lambda_max = crate::model::spectral_bound(&model, None).unwrap().lambda_max;
            let macro_dt = vs.cfl * grid.dx() / lambda_max;
            let rhs = NonlinearRhs::new(
                &model,
                &grid,
                &profile,
                &vs,
                BoundaryCondition::Periodic,
                macro_dt,
            )
            .unwrap();
            let w = DVector::from_fn(op.len(), |i, _| ((i * 7 % 13) as f64 - 6.0) / 6.0);
            let via_rhs = rhs.eval(&w).unwrap();
            let via_op = op.apply(&w);
            let scale = via_op.abs().max().max(1.0);
            assert_relative_eq!(
                (via_rhs - via_op).abs().max() / scale,
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn split_rhs_matches_global_rhs() {
        let eq = EquilibriumState::new(1.0, 0.3, 1.0).unwrap();
        let model = hme_linearized(&eq, 4).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 10).unwrap();
        let profile = RelaxationProfile::new(&grid, 1e-3, 1e-2, 0.0).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Force, 0.5).unwrap();
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::ZeroGradient] {
            let rhs = NonlinearRhs::new(&model, &grid, &profile, &vs, bc, 1e-3).unwrap();
            let split = NonlinearSplit::new(&rhs, profile.split_index()).unwrap();
            let w = DVector::from_fn(50, |i, _| ((i as f64) * 0.11).sin());
            let wl = DVector::from_row_slice(&w.as_slice()[..split.left_len()]);
            let wr = DVector::from_row_slice(&w.as_slice()[split.left_len()..]);
            let global = rhs.eval(&w).unwrap();
            let left = split.rhs_left(&wl, &wr).unwrap();
            let right = split.rhs_right(&wl, &wr).unwrap();
            for i in 0..left.len() {
                assert_relative_eq!(left[i], global[i], epsilon = 1e-13);
            }
            for i in 0..right.len() {
                assert_relative_eq!(right[i], global[left.len() + i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn non_finite_field_is_reported_with_cell() {
        let model = scalar_model(1.0);
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let profile = RelaxationProfile::constant(&grid, 1.0).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let rhs = NonlinearRhs::new(&model, &grid, &profile, &vs, BoundaryCondition::Periodic, 0.1)
            .unwrap();
        let mut w = DVector::zeros(4);
        w[2] = f64::NAN;
        match rhs.eval(&w) {
            Err(Error::NonFiniteField { cell: 2, component: 0 }) => (),
            other => panic!("expected non-finite error at cell 2, got {other:?}"),
        }
    }
}
