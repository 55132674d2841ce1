//! Polynomial viscosity matrix (PVM) schemes and the generalized Roe
//! linearization along a linear path.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ModelSystem;

/// Spatial discretization choice for the PVM flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PvmScheme {
    /// Q = |A|, minimal viscosity; needs the full eigenstructure.
    Upwind,
    /// Q = (dx/dt) I.
    LaxFriedrichs,
    /// Q = dx/(2 dt) I + dt/(2 dx) A^2.
    Force,
}

impl PvmScheme {
    pub fn name(&self) -> &'static str {
        match self {
            PvmScheme::Upwind => "upwind",
            PvmScheme::LaxFriedrichs => "lax_friedrichs",
            PvmScheme::Force => "force",
        }
    }
}

/// A PVM scheme together with the CFL number that fixes dt = cfl * dx / lambda_max
/// inside the LF and FORCE viscosity matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityScheme {
    pub scheme: PvmScheme,
    pub cfl: f64,
}

impl ViscosityScheme {
    pub fn new(scheme: PvmScheme, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::invalid(format!("CFL must be in (0, 1], got {cfl}")));
        }
        Ok(Self { scheme, cfl })
    }
}

/// Viscosity matrix Q for the given time step dt.
pub fn viscosity_matrix_with_dt(
    scheme: PvmScheme,
    a_mat: &DMatrix<f64>,
    dx: f64,
    dt: f64,
) -> Result<DMatrix<f64>> {
    let n = a_mat.nrows();
    match scheme {
        PvmScheme::Upwind => linalg::matrix_abs(a_mat),
        PvmScheme::LaxFriedrichs => Ok(DMatrix::identity(n, n) * (dx / dt)),
        PvmScheme::Force => {
            Ok(DMatrix::identity(n, n) * (dx / (2.0 * dt)) + a_mat * a_mat * (dt / (2.0 * dx)))
        }
    }
}

/// Viscosity matrix Q with dt derived from the scheme's CFL number as
/// dt = cfl * dx / lambda_max.
pub fn viscosity_matrix(
    vs: &ViscosityScheme,
    a_mat: &DMatrix<f64>,
    dx: f64,
    lambda_max: f64,
) -> Result<DMatrix<f64>> {
    if !(lambda_max > 0.0) && vs.scheme != PvmScheme::Upwind {
        return Err(Error::NonPositive {
            name: "lambda_max",
            value: lambda_max,
        });
    }
    let dt = vs.cfl * dx / lambda_max;
    viscosity_matrix_with_dt(vs.scheme, a_mat, dx, dt)
}

/// Generalized Roe matrix on the linear path between two states, by
/// Gauss-Legendre quadrature of the path integral of A.
pub fn roe_matrix(
    model: &ModelSystem,
    w_left: &[f64],
    w_right: &[f64],
    quad_points: usize,
) -> Result<DMatrix<f64>> {
    if quad_points == 0 {
        return Err(Error::invalid("Roe quadrature needs at least one point"));
    }
    if let Some(a) = model.constant_matrix() {
        return Ok(a.clone());
    }
    let n = model.n_vars();
    let (nodes, weights) = linalg::gauss_legendre_unit(quad_points);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut state = vec![0.0; n];
    for (s, w) in nodes.iter().zip(weights.iter()) {
        for i in 0..n {
            state[i] = w_left[i] + s * (w_right[i] - w_left[i]);
        }
        acc += model.system_matrix(&state)? * *w;
    }
    Ok(acc)
}
