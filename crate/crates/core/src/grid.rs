//! Uniform 1D grid and the piecewise-constant relaxation-time profile.

use crate::error::{Error, Result};

/// Uniform cell-centered grid on [x_min, x_max].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        if !(dx > 0.0) {
            return Err(Error::NonPositive {
                name: "dx",
                value: dx,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center coordinate of cell i.
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

/// Piecewise-constant relaxation time: eps_left for x < split_x, eps_right
/// for x >= split_x, evaluated at cell centers. `f64::INFINITY` is a valid
/// relaxation time (source-free region).
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationProfile {
    eps_left: f64,
    eps_right: f64,
    split_x: f64,
    per_cell: Vec<f64>,
    split_index: usize,
}

impl RelaxationProfile {
    pub fn new(grid: &Grid1D, eps_left: f64, eps_right: f64, split_x: f64) -> Result<Self> {
        if !(eps_left > 0.0) {
            return Err(Error::NonPositive {
                name: "eps_left",
                value: eps_left,
            });
        }
        if !(eps_right > 0.0) {
            return Err(Error::NonPositive {
                name: "eps_right",
                value: eps_right,
            });
        }
        let per_cell: Vec<f64> = (0..grid.n_cells())
            .map(|i| {
                if grid.center(i) < split_x {
                    eps_left
                } else {
                    eps_right
                }
            })
            .collect();
        let split_index = (0..grid.n_cells())
            .find(|&i| grid.center(i) >= split_x)
            .unwrap_or(grid.n_cells());
        Ok(Self {
            eps_left,
            eps_right,
            split_x,
            per_cell,
            split_index,
        })
    }

    /// Spatially constant profile.
    pub fn constant(grid: &Grid1D, eps: f64) -> Result<Self> {
        Self::new(grid, eps, eps, grid.x_min())
    }

    pub fn eps_left(&self) -> f64 {
        self.eps_left
    }
    pub fn eps_right(&self) -> f64 {
        self.eps_right
    }
    pub fn split_x(&self) -> f64 {
        self.split_x
    }

    /// Relaxation time at cell i.
    pub fn eps(&self, i: usize) -> f64 {
        self.per_cell[i]
    }

    pub fn per_cell(&self) -> &[f64] {
        &self.per_cell
    }

    /// Index of the first cell with center >= split_x.
    pub fn split_index(&self) -> usize {
        self.split_index
    }

    /// The distinct relaxation times present on the grid, in cell order.
    pub fn distinct_eps(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &e in &self.per_cell {
            if !out.iter().any(|&x: &f64| x == e) {
                out.push(e);
            }
        }
        out
    }
}
