//! Step-count model and speedup estimates of the adaptive schemes relative to
//! a global forward Euler integration, for the upwind spatial scheme.
//!
//! Step counts are reciprocal step sizes over a unit time interval; the
//! extrapolation and boundary-interpolation work of the projective schemes is
//! not counted.

use crate::error::{Error, Result};
use crate::stability::IntegratorKind;

/// Scenario of the speedup model: spectral bound, grid spacing, the two
/// relaxation times, the stiff-domain fraction, and inner iteration counts.
#[derive(Debug, Clone, Copy)]
pub struct SpeedupScenario {
    pub lambda_max: f64,
    pub dx: f64,
    pub eps_l: f64,
    pub eps_r: f64,
    /// Fraction of the domain governed by eps_l.
    pub theta_frac: f64,
    pub k: usize,
    pub k_l: usize,
    pub k_r: usize,
}

impl SpeedupScenario {
    pub fn new(
        lambda_max: f64,
        dx: f64,
        eps_l: f64,
        eps_r: f64,
        theta_frac: f64,
        k: usize,
    ) -> Result<Self> {
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
        if !(0.0..=1.0).contains(&theta_frac) {
            return Err(Error::invalid(format!(
                "theta_frac must lie in [0, 1], got {theta_frac}"
            )));
        }
        Ok(Self {
            lambda_max,
            dx,
            eps_l,
            eps_r,
            theta_frac,
            k,
            k_l: k,
            k_r: k,
        })
    }

    fn fe_cfl(&self, eps: f64) -> f64 {
        1.0 / (self.dx / (2.0 * eps * self.lambda_max) + 1.0)
    }

    fn macro_dt(&self, cfl: f64) -> f64 {
        cfl * self.dx / self.lambda_max
    }
}

/// Steps per unit time of the given scheme on the scenario (upwind formulas).
pub fn step_count(scheme: IntegratorKind, s: &SpeedupScenario) -> f64 {
    let theta = s.theta_frac;
    match scheme {
        IntegratorKind::Fe => 1.0 / s.macro_dt(s.fe_cfl(s.eps_l)),
        IntegratorKind::Pfe => (s.k + 1) as f64 / s.macro_dt(s.fe_cfl(s.eps_r)),
        IntegratorKind::Afe => {
            let delta_t = 1.0 / (s.lambda_max / s.dx + 1.0 / (2.0 * s.eps_l));
            let dt = s.macro_dt(s.fe_cfl(s.eps_r));
            theta / delta_t + (1.0 - theta) / dt
        }
        IntegratorKind::Apfe => {
            let dt = s.macro_dt(s.fe_cfl(s.eps_r));
            (theta * (s.k + 1) as f64 + (1.0 - theta)) / dt
        }
        IntegratorKind::Appfe => {
            let dt = s.macro_dt(1.0);
            (theta * (s.k_l + 1) as f64 + (1.0 - theta) * (s.k_r + 1) as f64) / dt
        }
    }
}

/// Speedup S = n_FE / n_scheme.
pub fn speedup(scheme: IntegratorKind, s: &SpeedupScenario) -> Result<f64> {
    let n = step_count(scheme, s);
    if !(n > 0.0) {
        return Err(Error::invalid(format!(
            "non-positive step count {n} for {}",
            scheme.name()
        )));
    }
    Ok(step_count(IntegratorKind::Fe, s) / n)
}

/// The three reference scenarios: lambda_max = 6, dx = 1/50, K = 1, with
/// (A) eps = (1e-4, 1e-3), theta = 1/2
/// (B) eps = (1e-6, 1e-4), theta = 1/2
/// (C) eps = (1e-6, 1e-4), theta = 1/10.
pub fn reference_scenarios() -> [(char, SpeedupScenario); 3] {
    let mk = |eps_l, eps_r, theta| {
        SpeedupScenario::new(6.0, 1.0 / 50.0, eps_l, eps_r, theta, 1).unwrap()
    };
    [
        ('A', mk(1e-4, 1e-3, 0.5)),
        ('B', mk(1e-6, 1e-4, 0.5)),
        ('C', mk(1e-6, 1e-4, 0.1)),
    ]
}

/// The 5 x 3 speedup table over {FE, PFE, AFE, APFE, APPFE} x {A, B, C}.
pub fn table1() -> [(IntegratorKind, [f64; 3]); 5] {
    let scenarios = reference_scenarios();
    IntegratorKind::ALL.map(|kind| {
        let mut row = [0.0; 3];
        for (i, (_, sc)) in scenarios.iter().enumerate() {
            row[i] = speedup(kind, sc).expect("reference scenarios are valid");
        }
        (kind, row)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fe_step_counts_case_a() {
        let (_, a) = reference_scenarios()[0];
        // CFL = 1/17.6667, dt = 1.8868e-4, n_FE = 5300
        assert_relative_eq!(step_count(IntegratorKind::Fe, &a), 5300.0, epsilon = 1e-9);
        assert_relative_eq!(step_count(IntegratorKind::Pfe, &a), 1600.0, epsilon = 1e-9);
        assert_relative_eq!(step_count(IntegratorKind::Appfe, &a), 600.0, epsilon = 1e-9);
    }

    #[test]
    fn fe_speedup_is_one() {
        for (_, sc) in reference_scenarios() {
            assert_relative_eq!(speedup(IntegratorKind::Fe, &sc).unwrap(), 1.0);
        }
    }

    #[test]
    fn pfe_is_theta_independent() {
        let (_, b) = reference_scenarios()[1];
        let (_, c) = reference_scenarios()[2];
        assert_relative_eq!(
            speedup(IntegratorKind::Pfe, &b).unwrap(),
            speedup(IntegratorKind::Pfe, &c).unwrap()
        );
    }

    #[test]
    fn degenerate_equal_eps_gives_unit_afe_speedup() {
        let sc = SpeedupScenario::new(6.0, 0.02, 1e-4, 1e-4, 0.7, 1).unwrap();
        assert_relative_eq!(
            speedup(IntegratorKind::Afe, &sc).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }
}
