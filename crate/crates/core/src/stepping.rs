//! Time integrators: forward Euler (FE), projective forward Euler (PFE), and
//! the spatially adaptive AFE / APFE / APPFE steppers with buffer-cell
//! interpolation at the stiff/non-stiff interface, plus the scalar
//! amplification factors of all five schemes.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::SplitOperator;

const REL_SLACK: f64 = 1e-9;

/// Tagged integrator choice with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegratorConfig {
    Fe {
        dt: f64,
    },
    Pfe {
        delta_t: f64,
        k: usize,
        dt: f64,
    },
    /// Adaptive FE/FE; requires dt = (K+1) delta_t with integer K >= 0.
    Afe {
        delta_t: f64,
        dt: f64,
    },
    Apfe {
        delta_t: f64,
        k: usize,
        dt: f64,
    },
    Appfe {
        delta_t_l: f64,
        k_l: usize,
        delta_t_r: f64,
        k_r: usize,
        dt: f64,
    },
}

impl IntegratorConfig {
    pub fn macro_dt(&self) -> f64 {
        match *self {
            IntegratorConfig::Fe { dt }
            | IntegratorConfig::Pfe { dt, .. }
            | IntegratorConfig::Afe { dt, .. }
            | IntegratorConfig::Apfe { dt, .. }
            | IntegratorConfig::Appfe { dt, .. } => dt,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IntegratorConfig::Fe { .. } => "fe",
            IntegratorConfig::Pfe { .. } => "pfe",
            IntegratorConfig::Afe { .. } => "afe",
            IntegratorConfig::Apfe { .. } => "apfe",
            IntegratorConfig::Appfe { .. } => "appfe",
        }
    }

    /// The derived inner step count of an AFE configuration, K = dt/delta_t - 1.
    pub fn afe_k(&self) -> Result<usize> {
        match *self {
            IntegratorConfig::Afe { delta_t, dt } => afe_substeps(delta_t, dt).map(|k1| k1 - 1),
            _ => Err(Error::IntegratorConfig("not an AFE configuration".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::NonPositive { name, value: v })
            }
        };
        match *self {
            IntegratorConfig::Fe { dt } => positive("dt", dt),
            IntegratorConfig::Pfe { delta_t, k, dt } => {
                positive("delta_t", delta_t)?;
                positive("dt", dt)?;
                check_inner_window(delta_t, k, dt)
            }
            IntegratorConfig::Afe { delta_t, dt } => {
                positive("delta_t", delta_t)?;
                positive("dt", dt)?;
                afe_substeps(delta_t, dt).map(|_| ())
            }
            IntegratorConfig::Apfe { delta_t, k, dt } => {
                positive("delta_t", delta_t)?;
                positive("dt", dt)?;
                check_inner_window(delta_t, k, dt)
            }
            IntegratorConfig::Appfe {
                delta_t_l,
                k_l,
                delta_t_r,
                k_r,
                dt,
            } => {
                positive("delta_t_l", delta_t_l)?;
                positive("delta_t_r", delta_t_r)?;
                positive("dt", dt)?;
                if delta_t_l > delta_t_r * (1.0 + REL_SLACK) {
                    return Err(Error::IntegratorConfig(format!(
                        "APPFE needs delta_t_l <= delta_t_r, got {delta_t_l} > {delta_t_r}"
                    )));
                }
                check_inner_window(delta_t_l, k_l, dt)?;
                check_inner_window(delta_t_r, k_r, dt)
            }
        }
    }

    /// Scale every step size by `factor` (used to shorten the final step of a
    /// time march while preserving the scheme's stability ratios).
    pub fn scaled(&self, factor: f64) -> IntegratorConfig {
        let mut cfg = *self;
        match &mut cfg {
            IntegratorConfig::Fe { dt } => *dt *= factor,
            IntegratorConfig::Pfe { delta_t, dt, .. }
            | IntegratorConfig::Afe { delta_t, dt }
            | IntegratorConfig::Apfe { delta_t, dt, .. } => {
                *delta_t *= factor;
                *dt *= factor;
            }
            IntegratorConfig::Appfe {
                delta_t_l,
                delta_t_r,
                dt,
                ..
            } => {
                *delta_t_l *= factor;
                *delta_t_r *= factor;
                *dt *= factor;
            }
        }
        cfg
    }
}

fn check_inner_window(delta_t: f64, k: usize, dt: f64) -> Result<()> {
    if (k + 1) as f64 * delta_t > dt * (1.0 + REL_SLACK) {
        return Err(Error::IntegratorConfig(format!(
            "(K+1) delta_t = {} exceeds dt = {}",
            (k + 1) as f64 * delta_t,
            dt
        )));
    }
    Ok(())
}

/// Number of inner steps K+1 of an AFE configuration; errors unless
/// dt is an integer multiple of delta_t.
fn afe_substeps(delta_t: f64, dt: f64) -> Result<usize> {
    let ratio = dt / delta_t;
    let k1 = ratio.round();
    if k1 < 1.0 || (ratio - k1).abs() > REL_SLACK * ratio.max(1.0) {
        return Err(Error::IntegratorConfig(format!(
            "AFE requires dt = (K+1) delta_t; dt/delta_t = {ratio} is not an integer"
        )));
    }
    Ok(k1 as usize)
}

fn check_state(w: &DVector<f64>) -> Result<()> {
    for (i, v) in w.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite value at state entry {i} after time step"
            )));
        }
    }
    Ok(())
}

/// One forward Euler step w + dt * rhs(w).
pub fn fe_step<F>(rhs: F, w: &DVector<f64>, dt: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    if !(dt > 0.0) {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    let mut next = w.clone();
    next.axpy(dt, &rhs(w)?, 1.0);
    check_state(&next)?;
    Ok(next)
}

/// One projective forward Euler step: K+1 inner Euler steps of size delta_t
/// followed by linear extrapolation over the remaining dt - (K+1) delta_t.
pub fn pfe_step<F>(rhs: F, w: &DVector<f64>, delta_t: f64, k: usize, dt: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    IntegratorConfig::Pfe { delta_t, k, dt }.validate()?;
    let mut prev = w.clone();
    let mut cur = w.clone();
    for _ in 0..=k {
        let d = rhs(&cur)?;
        prev = std::mem::replace(&mut cur, DVector::zeros(0));
        cur = &prev + d * delta_t;
    }
    let mut next = cur.clone();
    next.axpy((dt - (k + 1) as f64 * delta_t) / delta_t, &(cur - prev), 1.0);
    check_state(&next)?;
    Ok(next)
}

/// Right-hand sides of a system split into a stiff left and a non-stiff right
/// part. `coupled_*_entries` name the state entries the other side's RHS
/// actually reads, so buffer interpolation can stay confined to the interface.
pub trait SplitSystem {
    fn left_len(&self) -> usize;
    fn right_len(&self) -> usize;
    fn coupled_right_entries(&self) -> Vec<usize>;
    fn coupled_left_entries(&self) -> Vec<usize>;
    fn rhs_left(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>>;
    fn rhs_right(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>>;
}

impl SplitSystem for SplitOperator {
    fn left_len(&self) -> usize {
        SplitOperator::left_len(self)
    }

    fn right_len(&self) -> usize {
        SplitOperator::right_len(self)
    }

    fn coupled_right_entries(&self) -> Vec<usize> {
        let n = self.n_vars();
        self.coupled_right_cells()
            .into_iter()
            .flat_map(|c| c * n..(c + 1) * n)
            .collect()
    }

    fn coupled_left_entries(&self) -> Vec<usize> {
        let n = self.n_vars();
        self.coupled_left_cells()
            .into_iter()
            .flat_map(|c| c * n..(c + 1) * n)
            .collect()
    }

    fn rhs_left(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.apply_ll(w_l) + self.apply_lr(w_r))
    }

    fn rhs_right(&self, w_l: &DVector<f64>, w_r: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.apply_rl(w_l) + self.apply_rr(w_r))
    }
}

/// One AFE step: the right part advances by a single FE step of size dt, the
/// left part by K+1 = dt/delta_t FE substeps reading the right state linearly
/// interpolated between its old and new value at the coupled entries.
pub fn afe_step<S: SplitSystem + ?Sized>(
    sys: &S,
    w_l: &DVector<f64>,
    w_r: &DVector<f64>,
    delta_t: f64,
    dt: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    IntegratorConfig::Afe { delta_t, dt }.validate()?;
    let substeps = afe_substeps(delta_t, dt)?;

    let slope_r = sys.rhs_right(w_l, w_r)?; // (W_R^{n+1} - W_R^n)/dt
    let mut w_r_next = w_r.clone();
    w_r_next.axpy(dt, &slope_r, 1.0);

    let coupled = sys.coupled_right_entries();
    let mut buffer = w_r.clone();
    let mut cur = w_l.clone();
    for j in 0..substeps {
        if j > 0 {
            let weight = j as f64 * delta_t;
            for &i in &coupled {
                buffer[i] = w_r[i] + weight * slope_r[i];
            }
        }
        let d = sys.rhs_left(&cur, &buffer)?;
        cur.axpy(delta_t, &d, 1.0);
    }
    check_state(&cur)?;
    check_state(&w_r_next)?;
    Ok((cur, w_r_next))
}

/// One APFE step: FE with dt on the right, PFE (K+1 inner steps of size
/// delta_t plus extrapolation) with interpolated buffers on the left.
pub fn apfe_step<S: SplitSystem + ?Sized>(
    sys: &S,
    w_l: &DVector<f64>,
    w_r: &DVector<f64>,
    delta_t: f64,
    k: usize,
    dt: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    IntegratorConfig::Apfe { delta_t, k, dt }.validate()?;

    let slope_r = sys.rhs_right(w_l, w_r)?;
    let mut w_r_next = w_r.clone();
    w_r_next.axpy(dt, &slope_r, 1.0);

    let coupled = sys.coupled_right_entries();
    let mut buffer = w_r.clone();
    let mut prev = w_l.clone();
    let mut cur = w_l.clone();
    for j in 0..=k {
        if j > 0 {
            let weight = j as f64 * delta_t;
            for &i in &coupled {
                buffer[i] = w_r[i] + weight * slope_r[i];
            }
        }
        let d = sys.rhs_left(&cur, &buffer)?;
        prev = std::mem::replace(&mut cur, DVector::zeros(0));
        cur = &prev + d * delta_t;
    }
    let mut w_l_next = cur.clone();
    w_l_next.axpy((dt - (k + 1) as f64 * delta_t) / delta_t, &(cur - prev), 1.0);
    check_state(&w_l_next)?;
    check_state(&w_r_next)?;
    Ok((w_l_next, w_r_next))
}

/// One APPFE step: PFE on both sides with their own (delta_t, K). The left
/// substeps read the right state extrapolated with its FE slope at time n;
/// the right substeps read the left state extrapolated with the slope of the
/// left part's last two inner iterates (interpolation weight clamped at 0).
#[allow(clippy::too_many_arguments)]
pub fn appfe_step<S: SplitSystem + ?Sized>(
    sys: &S,
    w_l: &DVector<f64>,
    w_r: &DVector<f64>,
    delta_t_l: f64,
    k_l: usize,
    delta_t_r: f64,
    k_r: usize,
    dt: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    IntegratorConfig::Appfe {
        delta_t_l,
        k_l,
        delta_t_r,
        k_r,
        dt,
    }
    .validate()?;

    // Stiff (left) phase.
    let slope_r = sys.rhs_right(w_l, w_r)?;
    let coupled_r = sys.coupled_right_entries();
    let mut buf_r = w_r.clone();
    let mut prev_l = w_l.clone();
    let mut cur_l = w_l.clone();
    for j in 0..=k_l {
        let weight = (j + 1) as f64 * delta_t_l;
        for &i in &coupled_r {
            buf_r[i] = w_r[i] + weight * slope_r[i];
        }
        let d = sys.rhs_left(&cur_l, &buf_r)?;
        prev_l = std::mem::replace(&mut cur_l, DVector::zeros(0));
        cur_l = &prev_l + d * delta_t_l;
    }
    let slope_l = (&cur_l - &prev_l) / delta_t_l;
    let mut w_l_next = cur_l.clone();
    w_l_next.axpy(
        (dt - (k_l + 1) as f64 * delta_t_l) / delta_t_l,
        &(cur_l - prev_l),
        1.0,
    );

    // Semi-stiff (right) phase.
    let coupled_l = sys.coupled_left_entries();
    let mut buf_l = w_l.clone();
    let mut prev_r = w_r.clone();
    let mut cur_r = w_r.clone();
    for j in 0..=k_r {
        let weight = ((j + 1) as f64 * delta_t_r - k_l as f64 * delta_t_l).max(0.0);
        for &i in &coupled_l {
            buf_l[i] = w_l[i] + weight * slope_l[i];
        }
        let d = sys.rhs_right(&buf_l, &cur_r)?;
        prev_r = std::mem::replace(&mut cur_r, DVector::zeros(0));
        cur_r = &prev_r + d * delta_t_r;
    }
    let mut w_r_next = cur_r.clone();
    w_r_next.axpy(
        (dt - (k_r + 1) as f64 * delta_t_r) / delta_t_r,
        &(cur_r - prev_r),
        1.0,
    );
    check_state(&w_l_next)?;
    check_state(&w_r_next)?;
    Ok((w_l_next, w_r_next))
}

/// Advance a split state by one step of the configured integrator. FE and PFE
/// act on the concatenated state through the coupled right-hand side.
pub fn split_step<S: SplitSystem + ?Sized>(
    sys: &S,
    config: &IntegratorConfig,
    w_l: &DVector<f64>,
    w_r: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let joint_rhs = |w: &DVector<f64>| -> Result<DVector<f64>> {
        let (l, r) = split_vec(w, sys.left_len());
        let dl = sys.rhs_left(&l, &r)?;
        let dr = sys.rhs_right(&l, &r)?;
        Ok(concat_vec(&dl, &dr))
    };
    match *config {
        IntegratorConfig::Fe { dt } => {
            let next = fe_step(joint_rhs, &concat_vec(w_l, w_r), dt)?;
            Ok(split_owned(next, sys.left_len()))
        }
        IntegratorConfig::Pfe { delta_t, k, dt } => {
            let next = pfe_step(joint_rhs, &concat_vec(w_l, w_r), delta_t, k, dt)?;
            Ok(split_owned(next, sys.left_len()))
        }
        IntegratorConfig::Afe { delta_t, dt } => afe_step(sys, w_l, w_r, delta_t, dt),
        IntegratorConfig::Apfe { delta_t, k, dt } => apfe_step(sys, w_l, w_r, delta_t, k, dt),
        IntegratorConfig::Appfe {
            delta_t_l,
            k_l,
            delta_t_r,
            k_r,
            dt,
        } => appfe_step(sys, w_l, w_r, delta_t_l, k_l, delta_t_r, k_r, dt),
    }
}

pub(crate) fn split_vec(w: &DVector<f64>, n_left: usize) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_row_slice(&w.as_slice()[..n_left]),
        DVector::from_row_slice(&w.as_slice()[n_left..]),
    )
}

fn split_owned(w: DVector<f64>, n_left: usize) -> (DVector<f64>, DVector<f64>) {
    split_vec(&w, n_left)
}

pub(crate) fn concat_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

/// Mode families of the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFamily {
    Global,
    Left,
    Right,
}

/// Per-mode growth factor of one step; the scheme is mode-stable iff |sigma| <= 1.
#[derive(Debug, Clone, Copy)]
pub enum Amplification {
    Global(Complex64),
    Split { left: Complex64, right: Complex64 },
}

impl Amplification {
    pub fn for_family(&self, family: ModeFamily) -> Complex64 {
        match (self, family) {
            (Amplification::Global(s), _) => *s,
            (Amplification::Split { left, .. }, ModeFamily::Left) => *left,
            (Amplification::Split { right, .. }, ModeFamily::Right) => *right,
            (Amplification::Split { left, right }, ModeFamily::Global) => {
                if left.norm() >= right.norm() {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    pub fn max_norm(&self) -> f64 {
        match self {
            Amplification::Global(s) => s.norm(),
            Amplification::Split { left, right } => left.norm().max(right.norm()),
        }
    }
}

fn fe_factor(dt: f64, lam: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) + lam * dt
}

/// (1 + (dt/delta_t - K) delta_t lambda) (1 + delta_t lambda)^K
fn pfe_factor(delta_t: f64, k: usize, dt: f64, lam: Complex64) -> Complex64 {
    let inner = Complex64::new(1.0, 0.0) + lam * delta_t;
    let outer = Complex64::new(1.0, 0.0) + lam * (dt - k as f64 * delta_t);
    outer * inner.powu(k as u32)
}

/// Scalar amplification factor(s) of one step at mode lambda.
pub fn amplification_factor(config: &IntegratorConfig, lam: Complex64) -> Result<Amplification> {
    config.validate()?;
    Ok(match *config {
        IntegratorConfig::Fe { dt } => Amplification::Global(fe_factor(dt, lam)),
        IntegratorConfig::Pfe { delta_t, k, dt } => {
            Amplification::Global(pfe_factor(delta_t, k, dt, lam))
        }
        IntegratorConfig::Afe { delta_t, dt } => {
            let k1 = afe_substeps(delta_t, dt)? as u32;
            Amplification::Split {
                left: (Complex64::new(1.0, 0.0) + lam * delta_t).powu(k1),
                right: fe_factor(dt, lam),
            }
        }
        IntegratorConfig::Apfe { delta_t, k, dt } => Amplification::Split {
            left: pfe_factor(delta_t, k, dt, lam),
            right: fe_factor(dt, lam),
        },
        IntegratorConfig::Appfe {
            delta_t_l,
            k_l,
            delta_t_r,
            k_r,
            dt,
        } => Amplification::Split {
            left: pfe_factor(delta_t_l, k_l, dt, lam),
            right: pfe_factor(delta_t_r, k_r, dt, lam),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fe_step_identities() {
        let w = DVector::from_vec(vec![1.0, -2.0]);
        let zero = |_: &DVector<f64>| Ok(DVector::zeros(2));
        assert_eq!(fe_step(zero, &w, 0.5).unwrap(), w);

        // scalar lambda = -1, dt = 1, w = 1 -> 0
        let w1 = DVector::from_vec(vec![1.0]);
        let decay = |v: &DVector<f64>| Ok(-v.clone());
        assert_relative_eq!(fe_step(decay, &w1, 1.0).unwrap()[0], 0.0);
    }

    #[test]
    fn pfe_degenerate_extrapolation_is_chained_fe() {
        let lam = -0.37;
        let rhs = |v: &DVector<f64>| Ok(v * lam);
        let w = DVector::from_vec(vec![2.0]);
        let delta_t = 0.1;
        let k = 2;
        let dt = (k + 1) as f64 * delta_t;
        let via_pfe = pfe_step(rhs, &w, delta_t, k, dt).unwrap();
        let mut via_fe = w.clone();
        for _ in 0..=k {
            via_fe = fe_step(rhs, &via_fe, delta_t).unwrap();
        }
        assert_relative_eq!(via_pfe[0], via_fe[0], epsilon = 1e-14);
    }

    #[test]
    fn pfe_inner_step_annihilates_resonant_mode() {
        // lambda = -1/delta_t kills the mode in the first inner step.
        let delta_t = 0.01;
        let rhs = move |v: &DVector<f64>| Ok(v * (-1.0 / delta_t));
        let w = DVector::from_vec(vec![5.0]);
        let out = pfe_step(rhs, &w, delta_t, 1, 0.5).unwrap();
        assert_relative_eq!(out[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pfe_matches_amplification_factor() {
        let lam = -3.0;
        let (delta_t, k, dt) = (0.05, 1usize, 0.4);
        let rhs = move |v: &DVector<f64>| Ok(v * lam);
        let w = DVector::from_vec(vec![1.0]);
        let stepped = pfe_step(rhs, &w, delta_t, k, dt).unwrap()[0];
        let sigma = pfe_factor(delta_t, k, dt, Complex64::new(lam, 0.0));
        assert_relative_eq!(stepped, sigma.re, epsilon = 1e-14);
        // printed product form for K = 1
        let explicit = (1.0 + (dt / delta_t - 1.0) * delta_t * lam) * (1.0 + delta_t * lam);
        assert_relative_eq!(stepped, explicit, epsilon = 1e-14);
    }

    #[test]
    fn amplification_boundary_values() {
        let fe = IntegratorConfig::Fe { dt: 1.0 };
        let s0 = amplification_factor(&fe, Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(s0.max_norm(), 1.0);
        let s2 = amplification_factor(&fe, Complex64::new(-2.0, 0.0)).unwrap();
        assert_relative_eq!(s2.max_norm(), 1.0);

        let pfe = IntegratorConfig::Pfe {
            delta_t: 0.1,
            k: 1,
            dt: 1.0,
        };
        let s = amplification_factor(&pfe, Complex64::new(-10.0, 0.0)).unwrap();
        assert_relative_eq!(s.max_norm(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::Fe { dt: -0.1 }.validate().is_err());
        assert!(IntegratorConfig::Pfe {
            delta_t: 0.3,
            k: 3,
            dt: 1.0
        }
        .validate()
        .is_err());
        assert!(IntegratorConfig::Afe {
            delta_t: 0.3,
            dt: 1.0
        }
        .validate()
        .is_err());
        let afe = IntegratorConfig::Afe {
            delta_t: 0.25,
            dt: 1.0,
        };
        assert!(afe.validate().is_ok());
        assert_eq!(afe.afe_k().unwrap(), 3);
        assert!(IntegratorConfig::Appfe {
            delta_t_l: 0.2,
            k_l: 1,
            delta_t_r: 0.1,
            k_r: 1,
            dt: 1.0
        }
        .validate()
        .is_err());
    }
}
