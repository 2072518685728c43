use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Scalar field on the (r, eta) grid, stored row-major with eta fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2d {
    grid: RadialGrid,
    values: Vec<f64>,
}

/// Transformed electrostatic potential phi(r, eta) on the fixed cylinder.
pub type PotentialField = Field2d;
/// Generic source/residual container (F of the Dirichlet problem, f_v, ...).
pub type ScalarField2D = Field2d;

impl Field2d {
    pub fn zeros(grid: RadialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n_r() * grid.n_eta()] }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_r() * grid.n_eta());
        for i in 0..grid.n_r() {
            for j in 0..grid.n_eta() {
                values.push(f(grid.r(i), grid.eta(j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_eta() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, val: f64) {
        self.values[i * self.grid.n_eta() + j] = val;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("field contains non-finite values".into()))
        }
    }

    /// Max-norm deviation from another field on the same grid.
    pub fn max_diff(&self, other: &Field2d) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// True when the field vanishes on the Dirichlet boundary
    /// (r = 1, eta = 0, eta = 1) within `tol`. The axis r = 0 is interior.
    pub fn is_zero_on_boundary(&self, tol: f64) -> bool {
        let (nr, ne) = (self.grid.n_r(), self.grid.n_eta());
        for j in 0..ne {
            if self.get(nr - 1, j).abs() > tol {
                return false;
            }
        }
        for i in 0..nr {
            if self.get(i, 0).abs() > tol || self.get(i, ne - 1).abs() > tol {
                return false;
            }
        }
        true
    }
}
