use crate::error::{Error, Result};

/// Uniform tensor grid on the cylinder (r, eta) in [0,1] x [0,1].
///
/// Node 0 in r is the axis, node `n_r - 1` is the clamped rim r = 1;
/// eta runs from the ground plate image (eta = 0) to the plate (eta = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialGrid {
    n_r: usize,
    n_eta: usize,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 9;

    pub fn new(n_r: usize, n_eta: usize) -> Result<Self> {
        if n_r < Self::MIN_NODES || n_eta < Self::MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid must have at least {} nodes per direction, got {}x{}",
                Self::MIN_NODES,
                n_r,
                n_eta
            )));
        }
        Ok(Self { n_r, n_eta })
    }

    /// Square grid, the common case.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    #[inline]
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    #[inline]
    pub fn n_eta(&self) -> usize {
        self.n_eta
    }

    #[inline]
    pub fn h_r(&self) -> f64 {
        1.0 / (self.n_r - 1) as f64
    }

    #[inline]
    pub fn h_eta(&self) -> f64 {
        1.0 / (self.n_eta - 1) as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h_r()
    }

    #[inline]
    pub fn eta(&self, j: usize) -> f64 {
        j as f64 * self.h_eta()
    }

    pub fn r_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_r).map(|i| self.r(i))
    }

    pub fn eta_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_eta).map(|j| self.eta(j))
    }
}
