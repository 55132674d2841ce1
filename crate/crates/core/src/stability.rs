//! Closed-form stability bounds: CFL and inner-step selection per integrator
//! and spatial scheme, printed stability-region disks, and spectral-radius
//! verification of transition matrices.
//!
//! The printed disk unions are reported for reproducing the reference
//! figures; the amplification factor is the ground truth where the two
//! disagree (two printed radius exponents are mutually inconsistent).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pvm::PvmScheme;
use crate::spectral::{Disk, DENSE_EIG_GUARD};
use crate::stepping::{IntegratorConfig, ModeFamily};
use crate::transition::TransitionMatrix;

/// Integrator choice without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegratorKind {
    Fe,
    Pfe,
    Afe,
    Apfe,
    Appfe,
}

impl IntegratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            IntegratorKind::Fe => "fe",
            IntegratorKind::Pfe => "pfe",
            IntegratorKind::Afe => "afe",
            IntegratorKind::Apfe => "apfe",
            IntegratorKind::Appfe => "appfe",
        }
    }

    pub const ALL: [IntegratorKind; 5] = [
        IntegratorKind::Fe,
        IntegratorKind::Pfe,
        IntegratorKind::Afe,
        IntegratorKind::Apfe,
        IntegratorKind::Appfe,
    ];
}

/// Outcome of the closed-form parameter selection.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub cfl_bound: Option<f64>,
    pub delta_t: Option<f64>,
    /// Inner step of the right (semi-stiff) region, APPFE only.
    pub delta_t_r: Option<f64>,
    pub k: Option<usize>,
    pub reason: String,
}

impl StabilityVerdict {
    fn unstable(reason: impl Into<String>) -> Self {
        Self {
            stable: false,
            cfl_bound: None,
            delta_t: None,
            delta_t_r: None,
            k: None,
            reason: reason.into(),
        }
    }

    /// Build the integrator configuration at the selected parameters for a
    /// grid spacing `dx` and spectral bound `lambda_max`.
    pub fn config(
        &self,
        kind: IntegratorKind,
        lambda_max: f64,
        dx: f64,
        k_fallback: usize,
    ) -> Result<IntegratorConfig> {
        if !self.stable {
            return Err(Error::invalid(format!("no stable parameters: {}", self.reason)));
        }
        let cfl = self
            .cfl_bound
            .ok_or_else(|| Error::invalid("verdict carries no CFL bound"))?;
        let dt = cfl * dx / lambda_max;
        let k = self.k.unwrap_or(k_fallback);
        Ok(match kind {
            IntegratorKind::Fe => IntegratorConfig::Fe { dt },
            IntegratorKind::Pfe => IntegratorConfig::Pfe {
                delta_t: self.delta_t.unwrap(),
                k,
                dt,
            },
            IntegratorKind::Afe => IntegratorConfig::Afe {
                delta_t: self.delta_t.unwrap(),
                dt,
            },
            IntegratorKind::Apfe => IntegratorConfig::Apfe {
                delta_t: self.delta_t.unwrap(),
                k,
                dt,
            },
            IntegratorKind::Appfe => IntegratorConfig::Appfe {
                delta_t_l: self.delta_t.unwrap(),
                k_l: k,
                delta_t_r: self.delta_t_r.unwrap(),
                k_r: k,
                dt,
            },
        })
    }
}

/// FE-type CFL bound from fitting the eps-cluster into the macro step disk,
/// upwind spatial scheme.
fn fe_cfl_upwind(lambda_max: f64, dx: f64, eps: f64) -> f64 {
    2.0 * eps * lambda_max / (dx + 2.0 * eps * lambda_max)
}

/// FE-type CFL bound, FORCE spatial scheme.
fn fe_cfl_force(lambda_max: f64, dx: f64, eps: f64) -> f64 {
    let r = dx / (2.0 * eps * lambda_max);
    -r + (r * r + 1.0).sqrt()
}

fn check_positive_inputs(lambda_max: f64, dx: f64, eps_l: f64, eps_r: f64) -> Result<()> {
    for (name, v) in [
        ("lambda_max", lambda_max),
        ("dx", dx),
        ("eps_l", eps_l),
        ("eps_r", eps_r),
    ] {
        if !(v > 0.0) {
            return Err(Error::NonPositive { name, value: v });
        }
    }
    Ok(())
}

/// Closed-form parameter selection per (integrator, spatial scheme).
///
/// `eps_l <= eps_r` is the stiff/semi-stiff pair of the piecewise profile;
/// pass `eps_l == eps_r` for a constant relaxation time. `k` is the inner
/// iteration count of the projective schemes.
pub fn select_params(
    integrator: IntegratorKind,
    scheme: PvmScheme,
    lambda_max: f64,
    dx: f64,
    eps_l: f64,
    eps_r: f64,
    k: usize,
) -> Result<StabilityVerdict> {
    check_positive_inputs(lambda_max, dx, eps_l, eps_r)?;
    if eps_l > eps_r {
        return Err(Error::invalid("select_params expects eps_l <= eps_r"));
    }
    if k == 0 {
        return Err(Error::invalid("projective schemes need k >= 1"));
    }
    let varying = eps_l != eps_r;
    let verdict = match integrator {
        IntegratorKind::Fe => match scheme {
            PvmScheme::Upwind => StabilityVerdict {
                stable: true,
                cfl_bound: Some(fe_cfl_upwind(lambda_max, dx, eps_l)),
                delta_t: None,
                delta_t_r: None,
                k: None,
                reason: "FE/upwind: CFL <= 2 eps_L lambda_max / (dx + 2 eps_L lambda_max)".into(),
            },
            PvmScheme::LaxFriedrichs => {
                StabilityVerdict::unstable("FE/Lax-Friedrichs is unconditionally unstable")
            }
            PvmScheme::Force => StabilityVerdict {
                stable: true,
                cfl_bound: Some(fe_cfl_force(lambda_max, dx, eps_l)),
                delta_t: None,
                delta_t_r: None,
                k: None,
                reason: "FE/FORCE: CFL <= -dx/(2 eps_L lambda_max) + sqrt((dx/(2 eps_L lambda_max))^2 + 1)"
                    .into(),
            },
        },
        IntegratorKind::Pfe => {
            // The inner step resolves the fastest cluster (eps_L). With a
            // spatially varying profile the intermediate eps_R cluster must
            // additionally fit into the macro-step disk, which caps the CFL
            // below the printed constant-eps value of 1.
            let (cfl, note): (Option<f64>, &str) = match scheme {
                PvmScheme::Upwind => (
                    Some(if varying {
                        fe_cfl_upwind(lambda_max, dx, eps_r).min(1.0)
                    } else {
                        1.0
                    }),
                    "PFE/upwind",
                ),
                PvmScheme::Force => (
                    Some(if varying {
                        fe_cfl_force(lambda_max, dx, eps_r).min(1.0)
                    } else {
                        1.0
                    }),
                    "PFE/FORCE",
                ),
                PvmScheme::LaxFriedrichs => {
                    if varying {
                        (None, "")
                    } else {
                        (Some(1.0), "PFE/Lax-Friedrichs")
                    }
                }
            };
            let Some(cfl) = cfl else {
                return Ok(StabilityVerdict::unstable(
                    "PFE/Lax-Friedrichs with a spatially varying relaxation time: the intermediate cluster fits neither stability disk",
                ));
            };
            let delta_t = match scheme {
                PvmScheme::Upwind => 1.0 / (lambda_max / dx + 1.0 / eps_l),
                PvmScheme::LaxFriedrichs => 1.0 / (lambda_max / (cfl * dx) + 1.0 / eps_l),
                PvmScheme::Force => {
                    // Printed variants differ by a factor 1/2 on the viscosity
                    // part; both are stable, the smaller is returned.
                    let full = 1.0
                        / (lambda_max / dx * (1.0 / cfl + cfl) + 1.0 / eps_l);
                    let half = 1.0
                        / (lambda_max / (2.0 * dx) * (1.0 / cfl + cfl) + 1.0 / eps_l);
                    full.min(half)
                }
            };
            StabilityVerdict {
                stable: true,
                cfl_bound: Some(cfl),
                delta_t: Some(delta_t),
                delta_t_r: None,
                k: Some(k),
                reason: format!("{note}: delta_t resolves the eps_L cluster; macro CFL capped by the eps_R cluster"),
            }
        }
        IntegratorKind::Afe => match scheme {
            PvmScheme::LaxFriedrichs => StabilityVerdict::unstable(
                "AFE/Lax-Friedrichs: the intermediate cluster cannot be integrated in a stable way",
            ),
            _ => {
                let cfl = match scheme {
                    PvmScheme::Upwind => fe_cfl_upwind(lambda_max, dx, eps_r),
                    PvmScheme::Force => fe_cfl_force(lambda_max, dx, eps_r),
                    PvmScheme::LaxFriedrichs => unreachable!(),
                };
                let dt = cfl * dx / lambda_max;
                let delta_t_raw = match scheme {
                    PvmScheme::Upwind => 1.0 / (lambda_max / dx + 1.0 / (2.0 * eps_l)),
                    PvmScheme::Force => {
                        1.0 / (lambda_max / (2.0 * dx) * (1.0 / cfl + cfl) + 1.0 / (2.0 * eps_l))
                    }
                    PvmScheme::LaxFriedrichs => unreachable!(),
                };
                // AFE needs dt = (K+1) delta_t exactly; shrink delta_t onto
                // the next integer subdivision of dt.
                let substeps = (dt / delta_t_raw).ceil().max(1.0);
                let delta_t = dt / substeps;
                StabilityVerdict {
                    stable: true,
                    cfl_bound: Some(cfl),
                    delta_t: Some(delta_t),
                    delta_t_r: None,
                    k: Some(substeps as usize - 1),
                    reason: format!(
                        "AFE/{}: delta_t = dt/{} <= closed-form bound {delta_t_raw:.3e}",
                        scheme.name(),
                        substeps
                    ),
                }
            }
        },
        IntegratorKind::Apfe => match scheme {
            PvmScheme::LaxFriedrichs => StabilityVerdict::unstable(
                "APFE/Lax-Friedrichs: the intermediate cluster cannot be integrated in a stable way",
            ),
            _ => {
                let cfl = match scheme {
                    PvmScheme::Upwind => fe_cfl_upwind(lambda_max, dx, eps_r),
                    PvmScheme::Force => fe_cfl_force(lambda_max, dx, eps_r),
                    PvmScheme::LaxFriedrichs => unreachable!(),
                };
                let delta_t = match scheme {
                    PvmScheme::Upwind => 1.0 / (lambda_max / dx + 1.0 / eps_l),
                    PvmScheme::Force => {
                        1.0 / (lambda_max / (2.0 * dx) * (1.0 / cfl + cfl) + 1.0 / eps_l)
                    }
                    PvmScheme::LaxFriedrichs => unreachable!(),
                };
                StabilityVerdict {
                    stable: true,
                    cfl_bound: Some(cfl),
                    delta_t: Some(delta_t),
                    delta_t_r: None,
                    k: Some(k),
                    reason: format!(
                        "APFE/{}: inner step resolves eps_L, macro CFL capped by the eps_R cluster",
                        scheme.name()
                    ),
                }
            }
        },
        IntegratorKind::Appfe => {
            let cfl = 1.0;
            let (delta_t_l, delta_t_r) = match scheme {
                PvmScheme::Upwind => (
                    1.0 / (lambda_max / dx + 1.0 / eps_l),
                    1.0 / (lambda_max / dx + 1.0 / eps_r),
                ),
                PvmScheme::LaxFriedrichs => (
                    1.0 / (lambda_max / (cfl * dx) + 1.0 / eps_l),
                    1.0 / (lambda_max / (cfl * dx) + 1.0 / eps_r),
                ),
                PvmScheme::Force => (
                    1.0 / (lambda_max / (2.0 * dx) * (1.0 / cfl + cfl) + 1.0 / eps_l),
                    1.0 / (lambda_max / (2.0 * dx) * (1.0 / cfl + cfl) + 1.0 / eps_r),
                ),
            };
            StabilityVerdict {
                stable: true,
                cfl_bound: Some(cfl),
                delta_t: Some(delta_t_l),
                delta_t_r: Some(delta_t_r),
                k: Some(k),
                reason: format!(
                    "APPFE/{}: per-region inner steps resolve both clusters, CFL <= 1",
                    scheme.name()
                ),
            }
        }
    };
    Ok(verdict)
}

/// Printed stability-region disks per mode family.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub global: Vec<Disk>,
    pub left: Vec<Disk>,
    pub right: Vec<Disk>,
}

impl RegionSpec {
    pub fn family(&self, family: ModeFamily) -> &[Disk] {
        match family {
            ModeFamily::Global => &self.global,
            ModeFamily::Left => &self.left,
            ModeFamily::Right => &self.right,
        }
    }
}

fn macro_disk(dt: f64) -> Disk {
    Disk::real(-1.0 / dt, 1.0 / dt)
}

/// Small disk around -1/delta_t with the printed radius exponent.
fn projective_disk(delta_t: f64, dt: f64, exponent: f64) -> Disk {
    Disk::real(-1.0 / delta_t, (delta_t / dt).powf(exponent) / delta_t)
}

/// The printed stability-region disk unions.
///
/// PFE prints the small-disk radius exponent 1/K while APFE prints K+1 for
/// the same construction; both are kept as printed. The APPFE macro disks are
/// printed centered at -1/delta_t with radius 1/dt; also kept as printed.
pub fn stability_region(config: &IntegratorConfig) -> Result<RegionSpec> {
    config.validate()?;
    Ok(match *config {
        IntegratorConfig::Fe { dt } => RegionSpec {
            global: vec![macro_disk(dt)],
            left: vec![],
            right: vec![],
        },
        IntegratorConfig::Pfe { delta_t, k, dt } => RegionSpec {
            global: vec![macro_disk(dt), projective_disk(delta_t, dt, 1.0 / k as f64)],
            left: vec![],
            right: vec![],
        },
        IntegratorConfig::Afe { delta_t, dt } => RegionSpec {
            global: vec![],
            left: vec![macro_disk(delta_t)],
            right: vec![macro_disk(dt)],
        },
        IntegratorConfig::Apfe { delta_t, k, dt } => RegionSpec {
            global: vec![],
            left: vec![macro_disk(dt), projective_disk(delta_t, dt, (k + 1) as f64)],
            right: vec![macro_disk(dt)],
        },
        IntegratorConfig::Appfe {
            delta_t_l,
            k_l,
            delta_t_r,
            k_r,
            dt,
        } => RegionSpec {
            global: vec![],
            left: vec![
                Disk::real(-1.0 / delta_t_l, 1.0 / dt),
                projective_disk(delta_t_l, dt, (k_l + 1) as f64),
            ],
            right: vec![
                Disk::real(-1.0 / delta_t_r, 1.0 / dt),
                projective_disk(delta_t_r, dt, (k_r + 1) as f64),
            ],
        },
    })
}

/// Point-in-disk-union test with absolute tolerance 1e-12.
pub fn region_contains(region: &RegionSpec, lam: Complex64, family: ModeFamily) -> bool {
    region.family(family).iter().any(|d| d.contains(lam, 1e-12))
}

/// Largest eigenvalue magnitude of a transition matrix.
pub fn spectral_radius(t: &TransitionMatrix) -> Result<f64> {
    let size = t.len();
    if size > DENSE_EIG_GUARD {
        return Err(Error::SizeGuard {
            size,
            guard: DENSE_EIG_GUARD,
        });
    }
    Ok(linalg::spectral_radius_of(t.matrix()))
}
