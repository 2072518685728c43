//! Trapezoid quadrature on the disc and the cylinder, with the radial
//! Jacobian r baked in, plus the discrete norms built on it.

use crate::field::Field2d;
use crate::grid::RadialGrid;
use crate::profile::PlateProfile;

/// 2 pi * trapezoid(f(r) r dr) over [0, 1].
pub fn disc_integral(grid: RadialGrid, f: &[f64]) -> f64 {
    assert_eq!(f.len(), grid.n_r());
    let h = grid.h_r();
    let mut acc = 0.0;
    for i in 0..grid.n_r() {
        let w = if i == 0 || i == grid.n_r() - 1 { 0.5 } else { 1.0 };
        acc += w * f[i] * grid.r(i);
    }
    2.0 * std::f64::consts::PI * acc * h
}

/// 2 pi * trapezoid(f(r, eta) r dr deta) over the unit cylinder.
pub fn cylinder_integral(field: &Field2d) -> f64 {
    let grid = field.grid();
    let (nr, ne) = (grid.n_r(), grid.n_eta());
    let mut radial = vec![0.0; nr];
    for (i, slot) in radial.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..ne {
            let w = if j == 0 || j == ne - 1 { 0.5 } else { 1.0 };
            acc += w * field.get(i, j);
        }
        *slot = acc * grid.h_eta();
    }
    disc_integral(grid, &radial)
}

/// Squared L2 norm of a radial profile on the disc.
pub fn l2_norm_sq(v: &PlateProfile) -> f64 {
    let sq: Vec<f64> = v.values().iter().map(|&u| u * u).collect();
    disc_integral(v.grid(), &sq)
}

/// Squared L2 norm of the radial gradient, 2 pi * int v'(r)^2 r dr.
pub fn grad_norm_sq(v: &PlateProfile) -> f64 {
    let dv = v.deriv1();
    let sq: Vec<f64> = dv.iter().map(|&d| d * d).collect();
    disc_integral(v.grid(), &sq)
}

/// Squared L2 norm of a cylinder field.
pub fn l2_norm_sq_cylinder(f: &Field2d) -> f64 {
    let grid = f.grid();
    let mut sq = Field2d::zeros(grid);
    for i in 0..grid.n_r() {
        for j in 0..grid.n_eta() {
            let x = f.get(i, j);
            sq.set(i, j, x * x);
        }
    }
    cylinder_integral(&sq)
}
