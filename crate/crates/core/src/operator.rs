//! The linear semi-discrete operator: a block circulant-tridiagonal matrix
//! with per-cell diagonal blocks d_i = -Q/dx - S/eps_i and constant
//! off-diagonal blocks b = (Q - A)/(2 dx), c = (Q + A)/(2 dx), plus its
//! split into stiff/non-stiff sub-blocks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, RelaxationProfile};
use crate::model::{self, ModelSystem};
use crate::pvm::{self, ViscosityScheme};

/// Semi-discrete operator of the linear(ized) PVM scheme with periodic
/// boundary conditions.
#[derive(Debug, Clone)]
pub struct SemiDiscreteOperator {
    n_cells: usize,
    n_vars: usize,
    d: Vec<DMatrix<f64>>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl SemiDiscreteOperator {
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
    pub fn len(&self) -> usize {
        self.n_cells * self.n_vars
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn diag_block(&self, i: usize) -> &DMatrix<f64> {
        &self.d[i]
    }
    pub fn super_block(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn sub_block(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Apply the operator to a stacked field (periodic coupling).
    pub fn apply(&self, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n_vars;
        let nc = self.n_cells;
        let mut out = DVector::zeros(nc * n);
        for i in 0..nc {
            let wi = w.rows(i * n, n);
            let up = w.rows(((i + 1) % nc) * n, n);
            let down = w.rows(((i + nc - 1) % nc) * n, n);
            let mut block = &self.d[i] * wi;
            block += &self.b * up;
            block += &self.c * down;
            out.rows_mut(i * n, n).copy_from(&block);
        }
        out
    }

    /// Dense realization, used for analysis at desk scale.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.n_vars;
        let nc = self.n_cells;
        let mut m = DMatrix::zeros(nc * n, nc * n);
        for i in 0..nc {
            m.view_mut((i * n, i * n), (n, n)).copy_from(&self.d[i]);
            let up = (i + 1) % nc;
            let down = (i + nc - 1) % nc;
            // += rather than copy handles the degenerate 1- and 2-cell grids
            // where neighbor positions coincide.
            add_block(&mut m, i, up, &self.b, n);
            add_block(&mut m, i, down, &self.c, n);
        }
        m
    }
}

fn add_block(m: &mut DMatrix<f64>, row: usize, col: usize, blk: &DMatrix<f64>, n: usize) {
    let mut view = m.view_mut((row * n, col * n), (n, n));
    for r in 0..n {
        for c in 0..n {
            view[(r, c)] += blk[(r, c)];
        }
    }
}

/// Assemble the semi-discrete operator for a linear model.
pub fn assemble_semi_discrete(
    model: &ModelSystem,
    grid: &Grid1D,
    profile: &RelaxationProfile,
    scheme: &ViscosityScheme,
) -> Result<SemiDiscreteOperator> {
    let a = model
        .constant_matrix()
        .ok_or_else(|| Error::invalid("semi-discrete assembly requires a linear model"))?;
    let bound = model::spectral_bound(model, None)?;
    let dx = grid.dx();
    let q = pvm::viscosity_matrix(scheme, a, dx, bound.lambda_max)?;
    let s_diag = model.source_diag();
    let n = model.n_vars();

    let b = (&q - a) / (2.0 * dx);
    let c = (&q + a) / (2.0 * dx);
    let base = -&q / dx;
    let d = (0..grid.n_cells())
        .map(|i| {
            let mut di = base.clone();
            let inv_eps = 1.0 / profile.eps(i);
            for k in 0..n {
                di[(k, k)] -= inv_eps * s_diag[k];
            }
            di
        })
        .collect();

    Ok(SemiDiscreteOperator {
        n_cells: grid.n_cells(),
        n_vars: n,
        d,
        b,
        c,
    })
}

/// The four blocks of the operator split at a cell interface: LL and RR are
/// block tridiagonal, LR and RL carry one interface block and one periodic
/// wrap block each.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    n_vars: usize,
    d_left: Vec<DMatrix<f64>>,
    d_right: Vec<DMatrix<f64>>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl SplitOperator {
    /// Build a split operator directly from its blocks; used by analysis code
    /// and tests that work with synthetic systems.
    pub fn from_blocks(
        d_left: Vec<DMatrix<f64>>,
        d_right: Vec<DMatrix<f64>>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
    ) -> Result<Self> {
        if d_left.is_empty() || d_right.is_empty() {
            return Err(Error::invalid("both parts need at least one cell"));
        }
        let n = b.nrows();
        let square = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
        if !square(&c) || !d_left.iter().all(square) || !d_right.iter().all(square) {
            return Err(Error::invalid("all blocks must be square of equal size"));
        }
        Ok(Self {
            n_vars: n,
            d_left,
            d_right,
            b,
            c,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
    pub fn n_left_cells(&self) -> usize {
        self.d_left.len()
    }
    pub fn n_right_cells(&self) -> usize {
        self.d_right.len()
    }
    pub fn left_len(&self) -> usize {
        self.d_left.len() * self.n_vars
    }
    pub fn right_len(&self) -> usize {
        self.d_right.len() * self.n_vars
    }

    fn apply_tridiag(&self, d: &[DMatrix<f64>], w: &DVector<f64>) -> DVector<f64> {
        let n = self.n_vars;
        let nc = d.len();
        let mut out = DVector::zeros(nc * n);
        for i in 0..nc {
            let mut block = &d[i] * w.rows(i * n, n);
            if i + 1 < nc {
                block += &self.b * w.rows((i + 1) * n, n);
            }
            if i > 0 {
                block += &self.c * w.rows((i - 1) * n, n);
            }
            out.rows_mut(i * n, n).copy_from(&block);
        }
        out
    }

    pub fn apply_ll(&self, w_l: &DVector<f64>) -> DVector<f64> {
        self.apply_tridiag(&self.d_left, w_l)
    }

    pub fn apply_rr(&self, w_r: &DVector<f64>) -> DVector<f64> {
        self.apply_tridiag(&self.d_right, w_r)
    }

    /// Coupling into the left part: periodic wrap c from the right part's last
    /// cell into left cell 0, interface b from the right part's first cell
    /// into the last left cell.
    pub fn apply_lr(&self, w_r: &DVector<f64>) -> DVector<f64> {
        self.apply_coupling(self.n_left_cells(), self.n_right_cells(), w_r)
    }

    /// Coupling into the right part: interface c from the left part's last
    /// cell into right cell 0, periodic wrap b from the left part's first
    /// cell into the last right cell.
    pub fn apply_rl(&self, w_l: &DVector<f64>) -> DVector<f64> {
        self.apply_coupling(self.n_right_cells(), self.n_left_cells(), w_l)
    }

    fn apply_coupling(&self, n_out: usize, n_in: usize, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n_vars;
        let mut out = DVector::zeros(n_out * n);
        let first_in = w.rows(0, n);
        let last_in = w.rows((n_in - 1) * n, n);
        let add_into = |out: &mut DVector<f64>, cell: usize, v: DVector<f64>| {
            let mut view = out.rows_mut(cell * n, n);
            view += v;
        };
        add_into(&mut out, 0, &self.c * last_in);
        add_into(&mut out, n_out - 1, &self.b * first_in);
        out
    }

    /// Cell indices of this part's state that the other part's RHS reads
    /// (source cells of the coupling blocks): the first and last cell.
    fn boundary_cells(n_cells: usize) -> Vec<usize> {
        if n_cells == 1 {
            vec![0]
        } else {
            vec![0, n_cells - 1]
        }
    }

    pub fn coupled_right_cells(&self) -> Vec<usize> {
        Self::boundary_cells(self.n_right_cells())
    }

    pub fn coupled_left_cells(&self) -> Vec<usize> {
        Self::boundary_cells(self.n_left_cells())
    }

    fn dense_tridiag(&self, d: &[DMatrix<f64>]) -> DMatrix<f64> {
        let n = self.n_vars;
        let nc = d.len();
        let mut m = DMatrix::zeros(nc * n, nc * n);
        for i in 0..nc {
            m.view_mut((i * n, i * n), (n, n)).copy_from(&d[i]);
            if i + 1 < nc {
                m.view_mut((i * n, (i + 1) * n), (n, n)).copy_from(&self.b);
            }
            if i > 0 {
                m.view_mut((i * n, (i - 1) * n), (n, n)).copy_from(&self.c);
            }
        }
        m
    }

    pub fn ll_dense(&self) -> DMatrix<f64> {
        self.dense_tridiag(&self.d_left)
    }

    pub fn rr_dense(&self) -> DMatrix<f64> {
        self.dense_tridiag(&self.d_right)
    }

    fn dense_coupling(&self, n_out: usize, n_in: usize) -> DMatrix<f64> {
        let n = self.n_vars;
        let mut m = DMatrix::zeros(n_out * n, n_in * n);
        add_block(&mut m, 0, n_in - 1, &self.c, n);
        add_block(&mut m, n_out - 1, 0, &self.b, n);
        m
    }

    pub fn lr_dense(&self) -> DMatrix<f64> {
        self.dense_coupling(self.n_left_cells(), self.n_right_cells())
    }

    pub fn rl_dense(&self) -> DMatrix<f64> {
        self.dense_coupling(self.n_right_cells(), self.n_left_cells())
    }

    /// Reassemble the full operator from the four blocks.
    pub fn dense(&self) -> DMatrix<f64> {
        let nl = self.left_len();
        let nr = self.right_len();
        let mut m = DMatrix::zeros(nl + nr, nl + nr);
        m.view_mut((0, 0), (nl, nl)).copy_from(&self.ll_dense());
        m.view_mut((0, nl), (nl, nr)).copy_from(&self.lr_dense());
        m.view_mut((nl, 0), (nr, nl)).copy_from(&self.rl_dense());
        m.view_mut((nl, nl), (nr, nr)).copy_from(&self.rr_dense());
        m
    }
}

/// Split the operator into (LL, LR; RL, RR) at `split_index` (the first cell
/// of the right part).
pub fn split_blocks(op: &SemiDiscreteOperator, split_index: usize) -> Result<SplitOperator> {
    if split_index == 0 || split_index >= op.n_cells() {
        return Err(Error::invalid(format!(
            "split index {split_index} must lie strictly inside 1..{}",
            op.n_cells()
        )));
    }
    Ok(SplitOperator {
        n_vars: op.n_vars,
        d_left: op.d[..split_index].to_vec(),
        d_right: op.d[split_index..].to_vec(),
        b: op.b.clone(),
        c: op.c.clone(),
    })
}
