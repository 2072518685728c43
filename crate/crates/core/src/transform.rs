//! Coefficient fields of the transformed operator on the fixed cylinder.
//!
//! The moving gap region under a deflection v is mapped onto the cylinder
//! (r, eta) in [0,1] x [0,1]; the rescaled Laplacian becomes a v-dependent
//! elliptic operator with variable coefficients. This module assembles those
//! coefficients in radially symmetric form, exposes the ellipticity
//! diagnostics of the principal-part matrix, and pulls solutions back to the
//! physical gap region.

use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::grid::RadialGrid;
use crate::params::ModelParams;
use crate::profile::PlateProfile;

/// Divergence-form coefficients of the transformed operator, specialized to
/// radial symmetry and direction-resolved along a ray (d/dx v -> v'(r),
/// d/dy v -> 0, laplacian v -> v'' + v'/r).
///
/// The per-node values are generated from compact per-r-node data; the
/// y-direction entries a23 = a32 and b2 vanish identically on a ray.
#[derive(Debug, Clone)]
pub struct TransformedCoeffs {
    grid: RadialGrid,
    eps_sq: f64,
    /// 1 + v at each r-node.
    gap: Vec<f64>,
    /// v'(r) at each r-node (axis value forced to 0).
    dv: Vec<f64>,
    /// radial Laplacian v'' + v'/r (axis limit 2v'') at each r-node.
    lap: Vec<f64>,
}

impl TransformedCoeffs {
    #[inline]
    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    #[inline]
    pub fn eps_sq(&self) -> f64 {
        self.eps_sq
    }

    #[inline]
    pub fn gap(&self, i: usize) -> f64 {
        self.gap[i]
    }

    #[inline]
    pub fn dv(&self, i: usize) -> f64 {
        self.dv[i]
    }

    #[inline]
    pub fn lap_v(&self, i: usize) -> f64 {
        self.lap[i]
    }

    #[inline]
    pub fn a11(&self, _i: usize, _j: usize) -> f64 {
        self.eps_sq
    }

    #[inline]
    pub fn a22(&self, _i: usize, _j: usize) -> f64 {
        self.eps_sq
    }

    #[inline]
    pub fn a13(&self, i: usize, j: usize) -> f64 {
        -self.eps_sq * self.grid.eta(j) * self.dv[i] / self.gap[i]
    }

    #[inline]
    pub fn a23(&self, _i: usize, _j: usize) -> f64 {
        0.0
    }

    #[inline]
    pub fn a33(&self, i: usize, j: usize) -> f64 {
        let eta = self.grid.eta(j);
        (1.0 + self.eps_sq * eta * eta * self.dv[i] * self.dv[i]) / (self.gap[i] * self.gap[i])
    }

    #[inline]
    pub fn b1(&self, i: usize, _j: usize) -> f64 {
        self.eps_sq * self.dv[i] / self.gap[i]
    }

    #[inline]
    pub fn b2(&self, _i: usize, _j: usize) -> f64 {
        0.0
    }

    #[inline]
    pub fn b3(&self, i: usize, j: usize) -> f64 {
        let q = self.dv[i] / self.gap[i];
        -self.eps_sq * self.grid.eta(j) * q * q
    }

    /// d_eta coefficient of the operator in non-divergence form; also equals
    /// f_v / eta.
    #[inline]
    pub fn advect_eta(&self, i: usize, j: usize) -> f64 {
        let q = self.dv[i] / self.gap[i];
        self.eps_sq * self.grid.eta(j) * (2.0 * q * q - self.lap[i] / self.gap[i])
    }

    /// Mixed d_r d_eta coefficient in non-divergence form.
    #[inline]
    pub fn cross_r_eta(&self, i: usize, j: usize) -> f64 {
        -2.0 * self.eps_sq * self.grid.eta(j) * self.dv[i] / self.gap[i]
    }
}

/// Builds the coefficient fields of the transformed operator for an
/// admissible deflection.
pub fn assemble_coefficients(v: &PlateProfile, params: &ModelParams) -> Result<TransformedCoeffs> {
    v.ensure_admissible()?;
    let grid = v.grid();
    let mut dv = v.deriv1();
    dv[0] = 0.0; // axis regularity
    let lap = v.laplacian();
    let gap: Vec<f64> = v.values().iter().map(|&u| 1.0 + u).collect();
    Ok(TransformedCoeffs { grid, eps_sq: params.epsilon * params.epsilon, gap, dv, lap })
}

/// Eigenvalues of the principal-part matrix at one node: eps^2 and
/// mu_minus <= mu_plus with t = eps^2 + a33 and d = eps^2 / (1+v)^2.
///
/// Returns (eps^2, mu_minus, mu_plus). The identities mu_plus * mu_minus = d
/// and mu_minus >= d / t are asserted.
pub fn ellipticity_spectrum(
    coeffs: &TransformedCoeffs,
    node: (usize, usize),
) -> Result<(f64, f64, f64)> {
    let (i, j) = node;
    if i >= coeffs.grid.n_r() || j >= coeffs.grid.n_eta() {
        return Err(Error::InvalidParameter(format!("node ({i},{j}) outside grid")));
    }
    let eps_sq = coeffs.eps_sq;
    let a33 = coeffs.a33(i, j);
    let t = eps_sq + a33;
    let d = eps_sq / (coeffs.gap[i] * coeffs.gap[i]);
    let disc = t * t - 4.0 * d;
    if disc < -1e-12 * t * t {
        return Err(Error::InternalConsistency(format!(
            "negative discriminant t^2 - 4d = {disc:.3e} at node ({i},{j})"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let mu_plus = 0.5 * (t + root);
    let mu_minus = 0.5 * (t - root);
    let prod_err = (mu_plus * mu_minus - d).abs();
    if prod_err > 1e-10 * (1.0 + d) {
        return Err(Error::InternalConsistency(format!(
            "eigenvalue product off by {prod_err:.3e} at node ({i},{j})"
        )));
    }
    if t > 0.0 && mu_minus < d / t - 1e-12 * (1.0 + d / t) {
        return Err(Error::InternalConsistency(format!(
            "mu_minus {mu_minus:.3e} below its lower bound {:.3e}",
            d / t
        )));
    }
    Ok((eps_sq, mu_minus, mu_plus))
}

/// Evaluates the potential at a physical point (r, z) in the gap region by
/// pulling back through the transform: psi(r, z) = phi(r, (1+z)/(1+v(r))),
/// with bilinear interpolation on the cylinder grid.
pub fn map_to_physical(
    phi: &PotentialField,
    v: &PlateProfile,
    sample: (f64, f64),
) -> Result<f64> {
    let (r, z) = sample;
    let grid = phi.grid();
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfDomain { r, z, v_at_r: f64::NAN });
    }
    // linear interpolation of the deflection at r
    let h_r = grid.h_r();
    let pos = r / h_r;
    let i0 = (pos.floor() as usize).min(grid.n_r() - 2);
    let fr = pos - i0 as f64;
    let vals = v.values();
    let v_at_r = vals[i0] * (1.0 - fr) + vals[i0 + 1] * fr;
    let tol = 1e-12;
    if z < -1.0 - tol || z > v_at_r + tol {
        return Err(Error::OutOfDomain { r, z, v_at_r });
    }
    let eta = ((1.0 + z) / (1.0 + v_at_r)).clamp(0.0, 1.0);
    let h_e = grid.h_eta();
    let pe = eta / h_e;
    let j0 = (pe.floor() as usize).min(grid.n_eta() - 2);
    let fe = pe - j0 as f64;
    Ok(phi.get(i0, j0) * (1.0 - fr) * (1.0 - fe)
        + phi.get(i0 + 1, j0) * fr * (1.0 - fe)
        + phi.get(i0, j0 + 1) * (1.0 - fr) * fe
        + phi.get(i0 + 1, j0 + 1) * fr * fe)
}
