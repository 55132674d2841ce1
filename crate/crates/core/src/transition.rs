//! Closed-form transition matrices of the linear steppers: FE, PFE, and the
//! adaptive AFE/APFE block forms, plus a column-probing constructor for
//! schemes without a closed form (APPFE).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{SemiDiscreteOperator, SplitOperator};
use crate::stepping::{self, IntegratorConfig, SplitSystem};

/// Dense one-step map of the full discrete state; `n_left` records the block
/// partition for split schemes.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    matrix: DMatrix<f64>,
    n_left: Option<usize>,
}

impl TransitionMatrix {
    pub fn new(matrix: DMatrix<f64>, n_left: Option<usize>) -> Self {
        Self { matrix, n_left }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Size of the left (stiff) block, if this map came from a split scheme.
    pub fn n_left(&self) -> Option<usize> {
        self.n_left
    }
}

/// FE transition I + dt * A~.
pub fn transition_fe(op: &SemiDiscreteOperator, dt: f64) -> Result<TransitionMatrix> {
    IntegratorConfig::Fe { dt }.validate()?;
    let n = op.len();
    let m = DMatrix::identity(n, n) + op.dense() * dt;
    Ok(TransitionMatrix::new(m, None))
}

/// PFE transition (I + (dt - K delta_t) A~)(I + delta_t A~)^K.
pub fn transition_pfe(
    op: &SemiDiscreteOperator,
    delta_t: f64,
    k: usize,
    dt: f64,
) -> Result<TransitionMatrix> {
    IntegratorConfig::Pfe { delta_t, k, dt }.validate()?;
    let n = op.len();
    let a = op.dense();
    let eye = DMatrix::<f64>::identity(n, n);
    let inner = &eye + &a * delta_t;
    let mut m = &eye + &a * (dt - k as f64 * delta_t);
    for _ in 0..k {
        m *= &inner;
    }
    Ok(TransitionMatrix::new(m, None))
}

fn assemble_blocks(
    ll: DMatrix<f64>,
    lr: DMatrix<f64>,
    rl: DMatrix<f64>,
    rr: DMatrix<f64>,
) -> TransitionMatrix {
    let nl = ll.nrows();
    let nr = rr.nrows();
    let mut m = DMatrix::zeros(nl + nr, nl + nr);
    m.view_mut((0, 0), (nl, nl)).copy_from(&ll);
    m.view_mut((0, nl), (nl, nr)).copy_from(&lr);
    m.view_mut((nl, 0), (nr, nl)).copy_from(&rl);
    m.view_mut((nl, nl), (nr, nr)).copy_from(&rr);
    TransitionMatrix::new(m, Some(nl))
}

/// AFE transition per the closed block formulas:
///   LL = (I + dt_s L)^{K+1} + dt_s^2 sum_{k=0}^{K} (K-k) (I + dt_s L)^k LR RL
///   LR = dt_s sum_{k=0}^{K} (I + dt_s L)^k LR (I + (K-k) dt_s R)
///   RL = dt RL,  RR = I + dt R
/// with dt_s = delta_t and dt = (K+1) delta_t.
pub fn transition_afe(split: &SplitOperator, delta_t: f64, dt: f64) -> Result<TransitionMatrix> {
    let cfg = IntegratorConfig::Afe { delta_t, dt };
    cfg.validate()?;
    let k = cfg.afe_k()?;

    let ll = split.ll_dense();
    let lr = split.lr_dense();
    let rl = split.rl_dense();
    let rr = split.rr_dense();
    let nl = ll.nrows();
    let nr = rr.nrows();
    let eye_l = DMatrix::<f64>::identity(nl, nl);
    let eye_r = DMatrix::<f64>::identity(nr, nr);
    let inner = &eye_l + &ll * delta_t;
    let lr_rl = &lr * &rl;

    let mut t_ll = DMatrix::<f64>::zeros(nl, nl);
    let mut t_lr = DMatrix::<f64>::zeros(nl, nr);
    let mut power = eye_l.clone(); // (I + delta_t L)^k
    for kk in 0..=k {
        let factor = (k - kk) as f64;
        t_ll += &power * &lr_rl * (delta_t * delta_t * factor);
        t_lr += &power * &lr * (&eye_r + &rr * (factor * delta_t)) * delta_t;
        power *= &inner;
    }
    t_ll += power; // power now holds (I + delta_t L)^{K+1}

    let t_rl = &rl * dt;
    let t_rr = &eye_r + &rr * dt;
    Ok(assemble_blocks(t_ll, t_lr, t_rl, t_rr))
}

/// APFE transition per the closed block formulas:
///   LL = (I + (dt - K dt_s) L)(dt_s^2 sum_{k=0}^{K-1} (K-1-k)(I + dt_s L)^k LR RL
///        + (I + dt_s L)^K) + (dt - K dt_s) LR (K dt_s) RL
///   LR = (I + (dt - K dt_s) L) dt_s sum_{k=0}^{K-1} (I + dt_s L)^k LR (I + (K-1-k) dt_s R)
///        + (dt - K dt_s) LR (I + K dt_s R)
///   RL = dt RL,  RR = I + dt R.
pub fn transition_apfe(
    split: &SplitOperator,
    delta_t: f64,
    k: usize,
    dt: f64,
) -> Result<TransitionMatrix> {
    IntegratorConfig::Apfe { delta_t, k, dt }.validate()?;

    let ll = split.ll_dense();
    let lr = split.lr_dense();
    let rl = split.rl_dense();
    let rr = split.rr_dense();
    let nl = ll.nrows();
    let nr = rr.nrows();
    let eye_l = DMatrix::<f64>::identity(nl, nl);
    let eye_r = DMatrix::<f64>::identity(nr, nr);
    let inner = &eye_l + &ll * delta_t;
    let lr_rl = &lr * &rl;
    let tail = dt - k as f64 * delta_t; // last inner step merged with extrapolation
    let lead = &eye_l + &ll * tail;

    let mut sum_ll = DMatrix::<f64>::zeros(nl, nl);
    let mut sum_lr = DMatrix::<f64>::zeros(nl, nr);
    let mut power = eye_l.clone();
    for kk in 0..k {
        let factor = (k - 1 - kk) as f64;
        sum_ll += &power * &lr_rl * (delta_t * delta_t * factor);
        sum_lr += &power * &lr * (&eye_r + &rr * (factor * delta_t)) * delta_t;
        power *= &inner;
    }
    sum_ll += power; // (I + delta_t L)^K

    let t_ll = &lead * sum_ll + &lr * &rl * (tail * k as f64 * delta_t);
    let t_lr = &lead * sum_lr + &lr * (&eye_r + &rr * (k as f64 * delta_t)) * tail;
    let t_rl = &rl * dt;
    let t_rr = &eye_r + &rr * dt;
    Ok(assemble_blocks(t_ll, t_lr, t_rl, t_rr))
}

/// Transition matrix of any split-system stepper, built by probing the step
/// with unit vectors. Exact for linear steppers; used for APPFE, whose closed
/// form is not assembled here.
pub fn transition_probed<S, F>(sys: &S, step: F) -> Result<TransitionMatrix>
where
    S: SplitSystem + ?Sized,
    F: Fn(&S, &DVector<f64>, &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)>,
{
    let nl = sys.left_len();
    let n = nl + sys.right_len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let (el, er) = stepping::split_vec(&e, nl);
        let (ol, or) = step(sys, &el, &er)?;
        for i in 0..nl {
            m[(i, j)] = ol[i];
        }
        for i in 0..or.len() {
            m[(nl + i, j)] = or[i];
        }
    }
    Ok(TransitionMatrix::new(m, Some(nl)))
}

/// Transition matrix of the configured integrator on a split operator.
pub fn transition_for(split: &SplitOperator, config: &IntegratorConfig) -> Result<TransitionMatrix> {
    match *config {
        IntegratorConfig::Fe { .. } | IntegratorConfig::Pfe { .. } => Err(Error::invalid(
            "FE/PFE transitions are built from the full operator, not a split",
        )),
        IntegratorConfig::Afe { delta_t, dt } => transition_afe(split, delta_t, dt),
        IntegratorConfig::Apfe { delta_t, k, dt } => transition_apfe(split, delta_t, k, dt),
        IntegratorConfig::Appfe { .. } => transition_probed(split, |s, wl, wr| {
            stepping::split_step(s, config, wl, wr)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, RelaxationProfile};
    use crate::model::hsm_model;
    use crate::operator::{assemble_semi_discrete, split_blocks};
    use crate::pvm::{PvmScheme, ViscosityScheme};
    use approx::assert_relative_eq;

    fn small_split() -> SplitOperator {
        let model = hsm_model(3).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 6).unwrap();
        let profile = RelaxationProfile::new(&grid, 1e-2, 1e-1, 0.0).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let op = assemble_semi_discrete(&model, &grid, &profile, &vs).unwrap();
        split_blocks(&op, 3).unwrap()
    }

    #[test]
    fn fe_transition_is_identity_plus_dt_a() {
        let model = crate::model::scalar_model(1.0);
        let grid = Grid1D::new(0.0, 3.0, 3).unwrap();
        let profile = RelaxationProfile::constant(&grid, f64::INFINITY).unwrap();
        let vs = ViscosityScheme::new(PvmScheme::Upwind, 1.0).unwrap();
        let op = assemble_semi_discrete(&model, &grid, &profile, &vs).unwrap();
        let t = transition_fe(&op, 0.5).unwrap();
        let expected = DMatrix::identity(3, 3) + op.dense() * 0.5;
        assert_relative_eq!((t.matrix() - expected).abs().max(), 0.0);
    }

    #[test]
    fn afe_k1_matches_printed_expansion() {
        // T = I + dt A~ + (dt^2/4) [[L^2 + LR RL, L LR + LR R], [0, 0]]
        let split = small_split();
        let delta_t = 1e-3;
        let dt = 2.0 * delta_t;
        let t = transition_afe(&split, delta_t, dt).unwrap();

        let ll = split.ll_dense();
        let lr = split.lr_dense();
        let rl = split.rl_dense();
        let rr = split.rr_dense();
        let n = split.left_len() + split.right_len();
        let mut expected = DMatrix::<f64>::identity(n, n) + split.dense() * dt;
        let quad = dt * dt / 4.0;
        let top_left = (&ll * &ll + &lr * &rl) * quad;
        let top_right = (&ll * &lr + &lr * &rr) * quad;
        let mut tl = expected.view_mut((0, 0), (split.left_len(), split.left_len()));
        tl += &top_left;
        let mut tr =
            expected.view_mut((0, split.left_len()), (split.left_len(), split.right_len()));
        tr += &top_right;

        let scale = expected.abs().max();
        assert_relative_eq!(
            (t.matrix() - expected).abs().max() / scale,
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn apfe_k1_matches_printed_expansion() {
        // T = I + dt A~ + [[dt_s (dt-dt_s)(L^2 + LR RL), -dt_s LR + dt_s (dt-dt_s) LR R], [0,0]]
        let split = small_split();
        let delta_t = 5e-4;
        let dt = 4e-3;
        let t = transition_apfe(&split, delta_t, 1, dt).unwrap();

        let ll = split.ll_dense();
        let lr = split.lr_dense();
        let rl = split.rl_dense();
        let rr = split.rr_dense();
        let n = split.left_len() + split.right_len();
        let mut expected = DMatrix::<f64>::identity(n, n) + split.dense() * dt;
        let top_left = (&ll * &ll + &lr * &rl) * (delta_t * (dt - delta_t));
        let top_right = &lr * (-delta_t) + &lr * &rr * (delta_t * (dt - delta_t));
        let mut tl = expected.view_mut((0, 0), (split.left_len(), split.left_len()));
        tl += &top_left;
        let mut tr =
            expected.view_mut((0, split.left_len()), (split.left_len(), split.right_len()));
        tr += &top_right;

        let scale = expected.abs().max();
        assert_relative_eq!(
            (t.matrix() - expected).abs().max() / scale,
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn afe_transition_agrees_with_stepping() {
        let split = small_split();
        let delta_t = 2e-3;
        let dt = 3.0 * delta_t; // K = 2
        let closed = transition_afe(&split, delta_t, dt).unwrap();
        let probed = transition_probed(&split, |s, wl, wr| {
            stepping::afe_step(s, wl, wr, delta_t, dt)
        })
        .unwrap();
        let scale = closed.matrix().abs().max();
        assert_relative_eq!(
            (closed.matrix() - probed.matrix()).abs().max() / scale,
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn apfe_transition_agrees_with_stepping() {
        let split = small_split();
        let delta_t = 1e-3;
        let dt = 8e-3;
        for k in [1usize, 2, 3] {
            let closed = transition_apfe(&split, delta_t, k, dt).unwrap();
            let probed = transition_probed(&split, |s, wl, wr| {
                stepping::apfe_step(s, wl, wr, delta_t, k, dt)
            })
            .unwrap();
            let scale = closed.matrix().abs().max();
            assert_relative_eq!(
                (closed.matrix() - probed.matrix()).abs().max() / scale,
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn apfe_with_degenerate_extrapolation_is_afe() {
        let split = small_split();
        let delta_t = 1e-3;
        let k = 2;
        let dt = (k + 1) as f64 * delta_t;
        let apfe = transition_apfe(&split, delta_t, k, dt).unwrap();
        let afe = transition_afe(&split, delta_t, dt).unwrap();
        let scale = afe.matrix().abs().max();
        assert_relative_eq!(
            (apfe.matrix() - afe.matrix()).abs().max() / scale,
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn decoupled_afe_left_block_is_pure_power() {
        // With b = c = 0 the LL block must be exactly (I + delta_t L)^{K+1}.
        let split = small_split();
        let n = split.n_vars();
        let zero = DMatrix::<f64>::zeros(n, n);
        let ll_only = SplitOperator::from_blocks(
            (0..split.n_left_cells())
                .map(|i| split.ll_dense().view((i * n, i * n), (n, n)).into_owned())
                .collect(),
            (0..split.n_right_cells())
                .map(|i| split.rr_dense().view((i * n, i * n), (n, n)).into_owned())
                .collect(),
            zero.clone(),
            zero,
        )
        .unwrap();
        let delta_t = 1e-3;
        let dt = 2.0 * delta_t;
        let t = transition_afe(&ll_only, delta_t, dt).unwrap();
        let nl = ll_only.left_len();
        let eye = DMatrix::<f64>::identity(nl, nl);
        let inner = &eye + ll_only.ll_dense() * delta_t;
        let expected = &inner * &inner;
        let got = t.matrix().view((0, 0), (nl, nl)).into_owned();
        assert_relative_eq!((got - expected).abs().max(), 0.0, epsilon = 1e-13);
    }
}
