//! Gershgorin cluster bounds for the semi-discrete operator, its numerical
//! spectrum, and containment verification.
//!
//! The spectrum splits into one slow cluster near -lambda(Q)/dx and one fast
//! cluster per distinct relaxation time, shifted by -1/eps. All disks share
//! the radius R = (|lambda_max(Q-A)| + |lambda_max(Q+A)|) / (2 dx).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::SemiDiscreteOperator;
use crate::pvm::{PvmScheme, ViscosityScheme};

/// Size guard for dense eigensolves of the semi-discrete operator.
pub const DENSE_EIG_GUARD: usize = 2000;

/// A disk in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Self { center, radius }
    }

    pub fn real(center: f64, radius: f64) -> Self {
        Self::new(Complex64::new(center, 0.0), radius)
    }

    /// Signed distance to the disk: negative inside, positive outside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.signed_distance(z) <= tol
    }
}

/// The slow cluster disks plus one fast disk family per distinct relaxation
/// time, keyed by eps in first-occurrence order.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    pub slow: Vec<Disk>,
    pub fast: Vec<(f64, Vec<Disk>)>,
}

impl ClusterSet {
    pub fn all_disks(&self) -> impl Iterator<Item = &Disk> {
        self.slow
            .iter()
            .chain(self.fast.iter().flat_map(|(_, d)| d.iter()))
    }

    pub fn n_disks(&self) -> usize {
        self.slow.len() + self.fast.iter().map(|(_, d)| d.len()).sum::<usize>()
    }
}

fn dedup_finite_eps(eps_values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &e in eps_values {
        if e.is_finite() && !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

/// Largest eigenvalue magnitude of a matrix expected to have real spectrum.
fn max_abs_eigenvalue(m: &DMatrix<f64>) -> f64 {
    linalg::complex_eigenvalues(m)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Cluster disks of the general theorem: slow centers -lambda_k(Q)/dx, fast
/// centers -lambda_k(Q)/dx - 1/eps per distinct finite eps, common radius
/// R = (|lambda_max(Q-A)| + |lambda_max(Q+A)|)/(2 dx). One disk is emitted per
/// eigenvalue of Q. Infinite eps values contribute no fast family.
pub fn clusters_theorem1(
    a_mat: &DMatrix<f64>,
    q_mat: &DMatrix<f64>,
    dx: f64,
    eps_values: &[f64],
) -> Result<ClusterSet> {
    if !(dx > 0.0) {
        return Err(Error::NonPositive {
            name: "dx",
            value: dx,
        });
    }
    let q_eigs = linalg::real_eigenvalues(q_mat, "viscosity matrix eigenvalues")?;
    let radius = (max_abs_eigenvalue(&(q_mat - a_mat)) + max_abs_eigenvalue(&(q_mat + a_mat)))
        / (2.0 * dx);

    let slow: Vec<Disk> = q_eigs
        .iter()
        .map(|&lq| Disk::real(-lq / dx, radius))
        .collect();
    let fast = dedup_finite_eps(eps_values)
        .into_iter()
        .map(|eps| {
            let disks = q_eigs
                .iter()
                .map(|&lq| Disk::real(-lq / dx - 1.0 / eps, radius))
                .collect();
            (eps, disks)
        })
        .collect();
    Ok(ClusterSet { slow, fast })
}

/// Closed-form cluster summary per scheme, with the worst-case center over
/// lambda(A) and the printed radius:
///   Upwind: center -lambda_max/dx,                  R = lambda_max/dx
///   LF:     center -lambda_max/(CFL dx),            R = lambda_max/(CFL dx)
///   FORCE:  center -(lambda_max/2dx)(1/CFL + CFL),  R = same magnitude
/// FORCE per-eigenvalue centers spread towards -1/(2 dt); the emitted single
/// disk keeps the printed (conservative, boundary-anchored) form.
pub fn clusters_scheme(
    scheme: &ViscosityScheme,
    lambda_max: f64,
    dx: f64,
    eps_values: &[f64],
) -> Result<ClusterSet> {
    if !(lambda_max > 0.0) {
        return Err(Error::NonPositive {
            name: "lambda_max",
            value: lambda_max,
        });
    }
    if !(dx > 0.0) {
        return Err(Error::NonPositive {
            name: "dx",
            value: dx,
        });
    }
    let magnitude = match scheme.scheme {
        PvmScheme::Upwind => lambda_max / dx,
        PvmScheme::LaxFriedrichs => lambda_max / (scheme.cfl * dx),
        PvmScheme::Force => lambda_max / (2.0 * dx) * (1.0 / scheme.cfl + scheme.cfl),
    };
    let slow = vec![Disk::real(-magnitude, magnitude)];
    let fast = dedup_finite_eps(eps_values)
        .into_iter()
        .map(|eps| (eps, vec![Disk::real(-magnitude - 1.0 / eps, magnitude)]))
        .collect();
    Ok(ClusterSet { slow, fast })
}

/// All eigenvalues of the dense realization of the semi-discrete operator.
pub fn numerical_spectrum(op: &SemiDiscreteOperator) -> Result<Vec<Complex64>> {
    let size = op.len();
    if size > DENSE_EIG_GUARD {
        return Err(Error::SizeGuard {
            size,
            guard: DENSE_EIG_GUARD,
        });
    }
    let mut eigs = linalg::complex_eigenvalues(&op.dense());
    eigs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(eigs)
}

/// Result of checking a spectrum against a cluster set.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub clusters: ClusterSet,
    pub contained: bool,
    /// Max over eigenvalues of the distance to the nearest disk; negative if
    /// every eigenvalue is strictly inside some disk.
    pub worst_margin: f64,
}

/// Check that every eigenvalue lies within distance `tol` of some disk.
pub fn containment_check(
    eigs: &[Complex64],
    clusters: &ClusterSet,
    tol: f64,
) -> SpectrumReport {
    let mut worst = f64::NEG_INFINITY;
    for &z in eigs {
        let nearest = clusters
            .all_disks()
            .map(|d| d.signed_distance(z))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    if eigs.is_empty() {
        worst = 0.0;
    }
    SpectrumReport {
        eigenvalues: eigs.to_vec(),
        clusters: clusters.clone(),
        contained: worst <= tol,
        worst_margin: worst,
    }
}
