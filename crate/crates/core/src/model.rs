//! Balance-law models: scalar relaxation, nonlinear and linearized hyperbolic
//! moment equations (HME), and the Hermite spectral model (HSM).
//!
//! Every model provides a system matrix A(w), a diagonal 0/1 relaxation matrix
//! S, and the mask of conserved components (zero diagonal entries of S).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Equilibrium macroscopic state (density, bulk velocity, temperature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState {
    rho: f64,
    vel: f64,
    theta: f64,
}

impl EquilibriumState {
    pub fn new(rho: f64, vel: f64, theta: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::NonPositive {
                name: "rho",
                value: rho,
            });
        }
        if !(theta > 0.0) {
            return Err(Error::NonPositive {
                name: "theta",
                value: theta,
            });
        }
        Ok(Self { rho, vel, theta })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn vel(&self) -> f64 {
        self.vel
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Moment-state representation (rho, u, theta, 0, ..., 0) of length m+1.
    pub fn moments(&self, m: usize) -> MomentState {
        let mut v = vec![0.0; m + 1];
        v[0] = self.rho;
        v[1] = self.vel;
        v[2] = self.theta;
        MomentState::new(v)
    }
}

/// A per-cell state vector; (rho, u, theta, f_3, ..., f_M) for HME or
/// (f_0, ..., f_M) for HSM.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    values: Vec<f64>,
}

impl MomentState {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// How the system matrix depends on the state.
#[derive(Debug, Clone)]
enum SystemMatrix {
    /// Linear(ized) model: constant matrix.
    Constant(DMatrix<f64>),
    /// Nonlinear HME with M+1 = m+1 equations.
    HmeNonlinear { m: usize },
}

/// A balance-law model: state dimension, system matrix, diagonal relaxation
/// matrix, conserved-component mask.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    n_vars: usize,
    matrix: SystemMatrix,
    conserved_mask: Vec<bool>,
}

impl ModelSystem {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// True if the system matrix does not depend on the state.
    pub fn is_constant(&self) -> bool {
        matches!(self.matrix, SystemMatrix::Constant(_))
    }

    /// The constant system matrix, if the model is linear.
    pub fn constant_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.matrix {
            SystemMatrix::Constant(a) => Some(a),
            _ => None,
        }
    }

    /// Evaluate the system matrix at a per-cell state.
    pub fn system_matrix(&self, state: &[f64]) -> Result<DMatrix<f64>> {
        match &self.matrix {
            SystemMatrix::Constant(a) => Ok(a.clone()),
            SystemMatrix::HmeNonlinear { m } => hme_system_matrix(state, *m),
        }
    }

    /// Conserved components (zero diagonal entries of the relaxation matrix).
    pub fn conserved_mask(&self) -> &[bool] {
        &self.conserved_mask
    }

    /// Diagonal of the relaxation matrix S (0 on conserved components, 1 else).
    pub fn source_diag(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_vars,
            self.conserved_mask
                .iter()
                .map(|&c| if c { 0.0 } else { 1.0 }),
        )
    }

    /// The relaxation matrix S as a dense diagonal matrix.
    pub fn source_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.source_diag())
    }
}

/// Scalar advection-relaxation model with advection speed `a`.
pub fn scalar_model(a: f64) -> ModelSystem {
    ModelSystem {
        n_vars: 1,
        matrix: SystemMatrix::Constant(DMatrix::from_element(1, 1, a)),
        conserved_mask: vec![false],
    }
}

fn check_moment_count(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::invalid(format!(
            "moment order m={m} too small, need m >= {min}"
        )));
    }
    Ok(())
}

/// System matrix of the nonlinear hyperbolic moment equations for the state
/// (rho, u, theta, f_3, ..., f_M), m = M >= 4.
///
/// Rows 0..=3 follow the printed leading block; interior rows carry the
/// tridiagonal band (theta, u, k+1) plus f-weighted entries in the first four
/// columns; the last two rows carry the closure correction terms.
pub fn hme_system_matrix(state: &[f64], m: usize) -> Result<DMatrix<f64>> {
    check_moment_count(m, 4)?;
    if state.len() != m + 1 {
        return Err(Error::invalid(format!(
            "state length {} does not match m+1 = {}",
            state.len(),
            m + 1
        )));
    }
    let rho = state[0];
    let u = state[1];
    let theta = state[2];
    if !(rho > 0.0) {
        return Err(Error::NonPositive {
            name: "rho",
            value: rho,
        });
    }
    if !(theta > 0.0) {
        return Err(Error::NonPositive {
            name: "theta",
            value: theta,
        });
    }
    // Hermite coefficients; indices below 3 are not state variables.
    let f = |j: usize| -> f64 {
        if (3..=m).contains(&j) {
            state[j]
        } else {
            0.0
        }
    };

    let n = m + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        a[(k, k)] = u;
    }
    a[(0, 1)] = rho;
    a[(1, 0)] = theta / rho;
    a[(1, 2)] = 1.0;
    a[(2, 1)] = 2.0 * theta;
    a[(2, 3)] = 6.0 / rho;
    a[(3, 2)] = rho * theta / 2.0;
    a[(3, 4)] = 4.0;
    for k in 4..=m {
        a[(k, k - 1)] = theta;
        if k < m {
            a[(k, k + 1)] = (k + 1) as f64;
        }
    }
    // f-weighted low-order columns of rows 3..=M.
    for k in 3..=m {
        let kf = k as f64;
        a[(k, 0)] += -theta * f(k - 1) / rho;
        a[(k, 1)] += (kf + 1.0) * f(k);
        a[(k, 2)] += ((kf - 1.0) * f(k - 1) + theta * f(k - 3)) / 2.0;
        a[(k, 3)] += -3.0 * f(k - 2) / rho;
    }
    // Closure corrections in the last two rows.
    let mf = m as f64;
    a[(m - 1, 2)] += -mf * (mf + 1.0) * f(m) / (2.0 * theta);
    a[(m, 2)] += -(mf + 1.0) / 2.0 * f(m - 1);
    a[(m, 3)] += 3.0 * (mf + 1.0) * f(m) / (rho * theta);
    Ok(a)
}

fn moment_source_mask(n: usize) -> Vec<bool> {
    (0..n).map(|i| i < 3).collect()
}

/// Nonlinear HME model with m+1 equations and BGK relaxation of f_3..f_M.
pub fn hme_model(m: usize) -> Result<ModelSystem> {
    check_moment_count(m, 4)?;
    Ok(ModelSystem {
        n_vars: m + 1,
        matrix: SystemMatrix::HmeNonlinear { m },
        conserved_mask: moment_source_mask(m + 1),
    })
}

/// HME linearized around an equilibrium state: constant system matrix equal to
/// the nonlinear matrix at (rho0, u0, theta0, 0, ..., 0).
pub fn hme_linearized(eq: &EquilibriumState, m: usize) -> Result<ModelSystem> {
    let a = hme_system_matrix(eq.moments(m).as_slice(), m)?;
    Ok(ModelSystem {
        n_vars: m + 1,
        matrix: SystemMatrix::Constant(a),
        conserved_mask: moment_source_mask(m + 1),
    })
}

/// Hermite spectral model: symmetric tridiagonal matrix with off-diagonal
/// entries sqrt(1), ..., sqrt(M), diagonal relaxation of components 3..=M.
///
/// Requires m >= 2 so the conserved mask has its three leading zeros.
pub fn hsm_model(m: usize) -> Result<ModelSystem> {
    check_moment_count(m, 2)?;
    let n = m + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for k in 1..=m {
        let s = (k as f64).sqrt();
        a[(k - 1, k)] = s;
        a[(k, k - 1)] = s;
    }
    Ok(ModelSystem {
        n_vars: n,
        matrix: SystemMatrix::Constant(a),
        conserved_mask: moment_source_mask(n),
    })
}

/// Maxwellian density at microscopic velocity `c`.
pub fn maxwellian(eq: &EquilibriumState, c: f64) -> f64 {
    let d = c - eq.vel;
    eq.rho / (2.0 * std::f64::consts::PI * eq.theta).sqrt() * (-d * d / (2.0 * eq.theta)).exp()
}

/// Spectral bound of a model's system matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpectralBound {
    /// Largest magnitude of the eigenvalue real parts.
    pub lambda_max: f64,
    /// True if the spectrum had non-negligible imaginary parts (possible for
    /// nonlinear HME states outside the hyperbolicity region).
    pub has_complex: bool,
}

/// Largest-magnitude real eigenvalue of the system matrix, used in all
/// CFL-style time step formulas. For states with complex eigenvalues the
/// largest real part is returned and flagged.
pub fn spectral_bound(model: &ModelSystem, state: Option<&MomentState>) -> Result<SpectralBound> {
    let a = match (model.constant_matrix(), state) {
        (Some(a), _) => a.clone(),
        (None, Some(s)) => model.system_matrix(s.as_slice())?,
        (None, None) => {
            return Err(Error::invalid(
                "nonlinear model requires a state for its spectral bound",
            ))
        }
    };
    let eigs = linalg::complex_eigenvalues(&a);
    let lambda_max = eigs.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let has_complex = eigs.iter().any(|z| z.im.abs() > 1e-9 * scale);
    Ok(SpectralBound {
        lambda_max,
        has_complex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Largest root of the degree-(m+1) probabilists' Hermite polynomial via
    /// its Jacobi matrix (symmetric tridiagonal with off-diagonals sqrt(k)).
    fn hermite_roots(n: usize) -> Vec<f64> {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let s = (k as f64).sqrt();
            jac[(k - 1, k)] = s;
            jac[(k, k - 1)] = s;
        }
        let mut roots: Vec<f64> = nalgebra::SymmetricEigen::new(jac)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    #[test]
    fn scalar_model_matrices() {
        for a in [1.0, 0.0, -2.0] {
            let m = scalar_model(a);
            assert_eq!(m.n_vars(), 1);
            assert_eq!(m.system_matrix(&[0.0]).unwrap()[(0, 0)], a);
            assert_eq!(m.source_matrix()[(0, 0)], 1.0);
            assert_eq!(m.conserved_mask(), &[false]);
        }
    }

    #[test]
    fn hme_equilibrium_matrix_entries_m4() {
        let state = [1.0, std::f64::consts::PI, 1.0, 0.0, 0.0];
        let a = hme_system_matrix(&state, 4).unwrap();
        for k in 0..5 {
            assert_relative_eq!(a[(k, k)], std::f64::consts::PI);
        }
        // super-diagonal (rho, 1, 6/rho, 4), sub-diagonal (theta/rho, 2theta, rho*theta/2, theta)
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 2)], 1.0);
        assert_eq!(a[(2, 3)], 6.0);
        assert_eq!(a[(3, 4)], 4.0);
        assert_eq!(a[(1, 0)], 1.0);
        assert_eq!(a[(2, 1)], 2.0);
        assert_eq!(a[(3, 2)], 0.5);
        assert_eq!(a[(4, 3)], 1.0);
        // everything off the band vanishes at equilibrium
        for i in 0..5usize {
            for j in 0..5usize {
                if i.abs_diff(j) > 1 {
                    assert_eq!(a[(i, j)], 0.0, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn hme_corrections_proportional_to_f() {
        // With all f_i = 0 the correction terms vanish for any m.
        for m in [4usize, 6, 9] {
            let mut state = vec![0.0; m + 1];
            state[0] = 2.0;
            state[1] = -0.3;
            state[2] = 1.5;
            let a = hme_system_matrix(&state, m).unwrap();
            for i in 0..=m {
                for j in 0..=m {
                    if i.abs_diff(j) > 1 {
                        assert_eq!(a[(i, j)], 0.0, "m={m} entry ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn hme_nonlinear_low_order_columns() {
        // Printed f-weighted entries, checked at m=6 with distinct coefficients.
        let m = 6;
        let (rho, u, theta) = (1.2, 0.4, 0.9);
        let f3 = 0.01;
        let f4 = -0.02;
        let f5 = 0.03;
        let f6 = -0.04;
        let state = [rho, u, theta, f3, f4, f5, f6];
        let a = hme_system_matrix(&state, m).unwrap();
        // row 3: (0, 4 f3, rho theta/2, u, 4)
        assert_relative_eq!(a[(3, 0)], 0.0);
        assert_relative_eq!(a[(3, 1)], 4.0 * f3);
        assert_relative_eq!(a[(3, 2)], rho * theta / 2.0);
        // row 4: (-theta f3/rho, 5 f4, 3 f3/2, theta, u, 5)
        assert_relative_eq!(a[(4, 0)], -theta * f3 / rho);
        assert_relative_eq!(a[(4, 1)], 5.0 * f4);
        assert_relative_eq!(a[(4, 2)], 3.0 * f3 / 2.0);
        assert_relative_eq!(a[(4, 3)], theta);
        assert_relative_eq!(a[(4, 5)], 5.0);
        // row M-1 = 5: col2 has ((M-2) f_{M-2} + theta f_{M-4}) / 2 - M(M+1) f_M / (2 theta)
        assert_relative_eq!(a[(5, 0)], -theta * f4 / rho);
        assert_relative_eq!(a[(5, 1)], 6.0 * f5);
        assert_relative_eq!(
            a[(5, 2)],
            (4.0 * f4 + theta * 0.0) / 2.0 - 6.0 * 7.0 * f6 / (2.0 * theta)
        );
        assert_relative_eq!(a[(5, 3)], -3.0 * f3 / rho);
        assert_relative_eq!(a[(5, 4)], theta);
        assert_relative_eq!(a[(5, 6)], 6.0);
        // row M = 6: col2 = -f_{M-1} + theta f_{M-3}/2, col3 = 3(M+1) f_M/(rho theta) - 3 f_{M-2}/rho
        assert_relative_eq!(a[(6, 0)], -theta * f5 / rho);
        assert_relative_eq!(a[(6, 1)], 7.0 * f6);
        assert_relative_eq!(a[(6, 2)], -f5 + theta * f3 / 2.0);
        assert_relative_eq!(a[(6, 3)], 3.0 * 7.0 * f6 / (rho * theta) - 3.0 * f4 / rho);
        assert_relative_eq!(a[(6, 5)], theta);
    }

    #[test]
    fn hme_rejects_bad_state() {
        let state = [1.0, 0.0, -1.0, 0.0, 0.0];
        assert!(matches!(
            hme_system_matrix(&state, 4),
            Err(Error::NonPositive { name: "theta", .. })
        ));
        let state = [-1.0, 0.0, 1.0, 0.0, 0.0];
        assert!(matches!(
            hme_system_matrix(&state, 4),
            Err(Error::NonPositive { name: "rho", .. })
        ));
    }

    #[test]
    fn hme_linearized_spectrum_is_shifted_hermite() {
        // lambda_max = u + sqrt(theta) * largest He_5 root = pi + 2.856970...
        let eq = EquilibriumState::new(1.0, std::f64::consts::PI, 1.0).unwrap();
        let model = hme_linearized(&eq, 4).unwrap();
        let bound = spectral_bound(&model, None).unwrap();
        let he5_max = (5.0 + 10f64.sqrt()).sqrt(); // largest root of He_5
        assert_relative_eq!(
            bound.lambda_max,
            std::f64::consts::PI + he5_max,
            epsilon = 1e-10
        );
        assert!((bound.lambda_max - 6.0).abs() < 0.01); // the "approximately 6" of the reference setup
        assert!(!bound.has_complex);
    }

    #[test]
    fn hme_equilibrium_eigenvalue_law() {
        // eigenvalues(A_eq) = u0 + sqrt(theta0) * roots(He_{m+1}), to 1e-8, m <= 10.
        let cases = [
            (1.0, 0.0, 1.0),
            (2.0, -1.3, 0.5),
            (0.7, 3.1, 2.4),
            (1.5, 0.2, 0.1),
        ];
        for m in 4..=10usize {
            for &(rho, u, theta) in &cases {
                let eq = EquilibriumState::new(rho, u, theta).unwrap();
                let a = hme_system_matrix(eq.moments(m).as_slice(), m).unwrap();
                let eigs = linalg::real_eigenvalues(&a, "hme equilibrium").unwrap();
                let expected: Vec<f64> = hermite_roots(m + 1)
                    .into_iter()
                    .map(|r| u + theta.sqrt() * r)
                    .collect();
                for (got, want) in eigs.iter().zip(&expected) {
                    assert_relative_eq!(got, want, epsilon = 1e-8, max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn hsm_matrix_and_spectrum() {
        let model = hsm_model(3).unwrap();
        let a = model.constant_matrix().unwrap();
        assert_relative_eq!(a[(0, 1)], 1.0);
        assert_relative_eq!(a[(1, 2)], 2f64.sqrt());
        assert_relative_eq!(a[(2, 3)], 3f64.sqrt());
        assert_eq!(a, &a.transpose());

        // m=2: eigenvalues {0, +sqrt(3), -sqrt(3)}
        let model2 = hsm_model(2).unwrap();
        let eigs = linalg::real_eigenvalues(model2.constant_matrix().unwrap(), "hsm").unwrap();
        assert_relative_eq!(eigs[0], -3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(eigs[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(eigs[2], 3f64.sqrt(), epsilon = 1e-12);

        assert!(hsm_model(1).is_err());
    }

    #[test]
    fn hsm_eigenvalues_pair_up() {
        for m in 2..=10usize {
            let model = hsm_model(m).unwrap();
            let eigs =
                linalg::real_eigenvalues(model.constant_matrix().unwrap(), "hsm pairing").unwrap();
            for i in 0..eigs.len() {
                let mirrored = -eigs[eigs.len() - 1 - i];
                assert!(
                    (eigs[i] - mirrored).abs() < 1e-10,
                    "m={m}: {} vs {}",
                    eigs[i],
                    mirrored
                );
            }
        }
    }

    #[test]
    fn source_conserves_first_three_components() {
        for model in [hme_model(5).unwrap(), hsm_model(4).unwrap()] {
            let s = model.source_matrix();
            let v = DVector::from_fn(model.n_vars(), |i, _| (i + 1) as f64);
            let sv = &s * &v;
            for i in 0..3 {
                assert_eq!(sv[i], 0.0);
            }
            for i in 3..model.n_vars() {
                assert_eq!(sv[i], v[i]);
            }
        }
    }

    #[test]
    fn maxwellian_values_and_mass() {
        let eq = EquilibriumState::new(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(
            maxwellian(&eq, 0.0),
            1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-12
        );
        let eq2 = EquilibriumState::new(2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(maxwellian(&eq2, 0.0), 2.0 * maxwellian(&eq, 0.0));
        let eq3 = EquilibriumState::new(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(maxwellian(&eq3, 0.5), maxwellian(&eq, 0.0));

        // integral over c equals rho (Simpson on [u - 10 sqrt(theta), u + 10 sqrt(theta)])
        for (rho, u, theta) in [(1.0, 0.0, 1.0), (2.5, -1.0, 0.3), (0.4, 2.0, 4.0)] {
            let eq = EquilibriumState::new(rho, u, theta).unwrap();
            let lo = u - 10.0 * theta.sqrt();
            let hi = u + 10.0 * theta.sqrt();
            let n = 2000;
            let h = (hi - lo) / n as f64;
            let mut integral = maxwellian(&eq, lo) + maxwellian(&eq, hi);
            for i in 1..n {
                let w = if i % 2 == 0 { 2.0 } else { 4.0 };
                integral += w * maxwellian(&eq, lo + i as f64 * h);
            }
            integral *= h / 3.0;
            assert_relative_eq!(integral, rho, epsilon = 1e-8, max_relative = 1e-8);
        }
    }

    #[test]
    fn spectral_bound_examples() {
        let b = spectral_bound(&hsm_model(2).unwrap(), None).unwrap();
        assert_relative_eq!(b.lambda_max, 3f64.sqrt(), epsilon = 1e-12);

        let b = spectral_bound(&scalar_model(-2.0), None).unwrap();
        assert_relative_eq!(b.lambda_max, 2.0);

        // symmetric spectrum around 0 for u = 0
        let eq = EquilibriumState::new(1.0, 0.0, 1.0).unwrap();
        let model = hme_linearized(&eq, 4).unwrap();
        let eigs =
            linalg::real_eigenvalues(model.constant_matrix().unwrap(), "hme symmetric").unwrap();
        for i in 0..eigs.len() {
            assert_relative_eq!(eigs[i], -eigs[eigs.len() - 1 - i], epsilon = 1e-10);
        }
    }
}
