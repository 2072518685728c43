use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Radial plate deflection u(r) sampled on the r-nodes of a grid.
///
/// Admissible profiles keep the gap 1 + u bounded away from zero; clamped
/// profiles additionally satisfy u(1) = u'(1) = 0 to discretization order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl PlateProfile {
    pub fn zeros(grid: RadialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n_r()] }
    }

    pub fn constant(grid: RadialGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n_r()] }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.r_nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_r() {
            return Err(Error::InvalidParameter(format!(
                "profile length {} does not match grid n_r {}",
                values.len(),
                grid.n_r()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Rebuilds a full profile from the free nodes 0..n_r-2, appending the
    /// clamped boundary value u(1) = 0.
    pub fn from_free(grid: RadialGrid, free: &[f64]) -> Result<Self> {
        if free.len() != grid.n_r() - 1 {
            return Err(Error::InvalidParameter(format!(
                "free vector length {} does not match n_r - 1 = {}",
                free.len(),
                grid.n_r() - 1
            )));
        }
        let mut values = free.to_vec();
        values.push(0.0);
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Values at the free nodes 0..n_r-2 (everything but the clamped rim).
    pub fn free_values(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }

    /// min(1 + u) over the nodes; positive for admissible profiles.
    pub fn min_gap(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &u| m.min(1.0 + u))
    }

    /// Discrete membership in the admissible set: min(1 + u) >= kappa > 0.
    pub fn is_admissible(&self, kappa: f64) -> bool {
        kappa > 0.0 && self.min_gap() >= kappa
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        let min_gap = self.min_gap();
        if min_gap <= 0.0 {
            return Err(Error::DomainDegeneracy { min_gap });
        }
        Ok(())
    }

    /// Checks the clamped boundary conditions u(1) = 0 and u'(1) = 0
    /// (one-sided second-order stencil) within `tol`.
    pub fn is_clamped(&self, tol: f64) -> bool {
        let n = self.values.len();
        let slope = (3.0 * self.values[n - 1] - 4.0 * self.values[n - 2] + self.values[n - 3])
            / (2.0 * self.grid.h_r());
        self.values[n - 1].abs() <= tol && slope.abs() <= tol
    }

    /// First radial derivative: centered interior, u'(0) = 0 by axis
    /// symmetry, second-order one-sided at r = 1.
    pub fn deriv1(&self) -> Vec<f64> {
        let n = self.values.len();
        let h = self.grid.h_r();
        let u = &self.values;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        }
        out[0] = 0.0;
        out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        out
    }

    /// Second radial derivative: centered interior, ghost symmetry at the
    /// axis, second-order one-sided at r = 1.
    pub fn deriv2(&self) -> Vec<f64> {
        let n = self.values.len();
        let h = self.grid.h_r();
        let u = &self.values;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        }
        out[0] = 2.0 * (u[1] - u[0]) / (h * h);
        out[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / (h * h);
        out
    }

    /// Radial Laplacian u'' + u'/r with the axis limit 2 u''(0).
    ///
    /// At the axis a three-point formula is used whose truncation constant
    /// matches the interior stencil's r -> 0 limit, so that composing the
    /// Laplacian with itself stays second-order accurate near the axis.
    pub fn laplacian(&self) -> Vec<f64> {
        radial_laplacian(self.grid, &self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &u| m.min(u))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &u| m.max(u.abs()))
    }
}

/// Radial Laplacian of raw node values; see [`PlateProfile::laplacian`].
pub(crate) fn radial_laplacian(grid: RadialGrid, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let h = grid.h_r();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let r = grid.r(i);
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)
            + (u[i + 1] - u[i - 1]) / (2.0 * h * r);
    }
    // 2u''(0) with the interior-matched error constant (h^2/4) u''''(0)
    out[0] = ((10.0 / 3.0) * (u[1] - u[0]) + (1.0 / 6.0) * (u[2] - u[0])) / (h * h);
    let d2 = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / (h * h);
    let d1 = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    out[n - 1] = d2 + d1;
    out
}
