//! Finite-difference solver for the transformed potential problem on the
//! fixed cylinder.
//!
//! The potential phi solves L_v phi = 0 with phi = eta on the boundary;
//! writing phi = Phi + eta turns this into -L_v Phi = f_v with homogeneous
//! Dirichlet data on eta = 0, eta = 1 and r = 1, and axis regularity at
//! r = 0. The operator is discretized in non-divergence form with centered
//! second-order stencils; the mixed derivative uses the four-corner formula.

use crate::error::{Error, Result};
use crate::field::{PotentialField, ScalarField2D};
use crate::linalg::BandedMatrix;
use crate::params::ModelParams;
use crate::profile::PlateProfile;
use crate::transform::{assemble_coefficients, TransformedCoeffs};

/// Forcing f_v = L_v eta produced by the change of variables,
/// f_v = eps^2 eta [2 v'^2 / (1+v)^2 - (v'' + v'/r) / (1+v)].
pub fn compute_f_v(v: &PlateProfile, params: &ModelParams) -> Result<ScalarField2D> {
    let coeffs = assemble_coefficients(v, params)?;
    Ok(f_v_from_coeffs(&coeffs))
}

fn f_v_from_coeffs(coeffs: &TransformedCoeffs) -> ScalarField2D {
    let grid = coeffs.grid();
    let mut f = ScalarField2D::zeros(grid);
    for i in 0..grid.n_r() {
        for j in 0..grid.n_eta() {
            f.set(i, j, coeffs.advect_eta(i, j));
        }
    }
    f
}

/// Unknowns are the nodes with i = 0..n_r-2, j = 1..n_eta-2 (the axis is
/// interior; the other three sides carry Dirichlet data).
#[inline]
fn unknown_index(n_eta: usize, i: usize, j: usize) -> usize {
    i * (n_eta - 2) + (j - 1)
}

fn assemble_system(coeffs: &TransformedCoeffs) -> BandedMatrix {
    let grid = coeffs.grid();
    let (nr, ne) = (grid.n_r(), grid.n_eta());
    let (hr, he) = (grid.h_r(), grid.h_eta());
    let n_unknowns = (nr - 1) * (ne - 2);
    let band = ne - 1;
    let mut a = BandedMatrix::new(n_unknowns, band, band);
    let idx = |i: usize, j: usize| unknown_index(ne, i, j);

    for i in 0..nr - 1 {
        for j in 1..ne - 1 {
            let row = idx(i, j);
            let a33 = coeffs.a33(i, j);
            let ceta = coeffs.advect_eta(i, j);
            // matrix holds -L_v, so every stencil weight enters negated
            if i == 0 {
                // axis: w_r = 0 and w_{r eta} = 0 by symmetry; the radial
                // part is eps^2 * 4 (w_1j - w_0j) / h^2
                let w = 4.0 * coeffs.eps_sq() / (hr * hr);
                a.add(row, row, w);
                a.add(row, idx(1, j), -w);
            } else {
                let r = grid.r(i);
                let e2 = coeffs.eps_sq();
                let c_rr = e2 / (hr * hr);
                let c_r = e2 / (2.0 * hr * r);
                a.add(row, row, 2.0 * c_rr);
                a.add(row, idx(i - 1, j), -(c_rr - c_r));
                if i + 1 < nr - 1 {
                    a.add(row, idx(i + 1, j), -(c_rr + c_r));
                } // else Phi(1, j) = 0
                // mixed derivative, four-corner centered stencil
                let cm = coeffs.cross_r_eta(i, j) / (4.0 * hr * he);
                if cm != 0.0 {
                    let mut put = |ii: usize, jj: usize, w: f64| {
                        if ii < nr - 1 && jj >= 1 && jj <= ne - 2 {
                            a.add(row, idx(ii, jj), w);
                        }
                    };
                    put(i + 1, j + 1, -cm);
                    put(i - 1, j - 1, -cm);
                    put(i + 1, j - 1, cm);
                    put(i - 1, j + 1, cm);
                }
            }
            // eta second derivative
            let c_ee = a33 / (he * he);
            a.add(row, row, 2.0 * c_ee);
            if j > 1 {
                a.add(row, idx(i, j - 1), -c_ee);
            }
            if j < ne - 2 {
                a.add(row, idx(i, j + 1), -c_ee);
            }
            // eta advection, centered
            let c_e = ceta / (2.0 * he);
            if j > 1 {
                a.add(row, idx(i, j - 1), c_e);
            }
            if j < ne - 2 {
                a.add(row, idx(i, j + 1), -c_e);
            }
        }
    }
    a
}

/// Solves -L_v Phi = f with Phi = 0 on eta = 0, eta = 1, r = 1.
///
/// The returned field carries the zero boundary values. A residual check of
/// the factored solve guards against breakdown on near-degenerate gaps.
pub fn solve_dirichlet(coeffs: &TransformedCoeffs, f: &ScalarField2D) -> Result<PotentialField> {
    let grid = coeffs.grid();
    assert_eq!(grid, f.grid());
    let (nr, ne) = (grid.n_r(), grid.n_eta());
    let a = assemble_system(coeffs);
    let norm_a = a.norm_inf();
    let mut rhs = vec![0.0; (nr - 1) * (ne - 2)];
    for i in 0..nr - 1 {
        for j in 1..ne - 1 {
            rhs[unknown_index(ne, i, j)] = f.get(i, j);
        }
    }
    let min_gap = (0..nr).fold(f64::INFINITY, |m, i| m.min(coeffs.gap(i)));
    let breakdown = || Error::SolverBreakdown { n_r: nr, n_eta: ne, min_gap };
    let lu = a.clone().factorize().map_err(|_| breakdown())?;
    let x = lu.solve(&rhs);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(breakdown());
    }
    // relative residual of the linear solve
    let ax = a.matvec(&x);
    let norm_b = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let norm_x = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let res = ax
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    if res > 1e-10 * (norm_a * norm_x + norm_b).max(1.0) {
        return Err(breakdown());
    }
    let mut phi = PotentialField::zeros(grid);
    for i in 0..nr - 1 {
        for j in 1..ne - 1 {
            phi.set(i, j, x[unknown_index(ne, i, j)]);
        }
    }
    Ok(phi)
}

/// Transformed potential phi_v = Phi + eta for an admissible deflection.
pub fn solve_potential(v: &PlateProfile, params: &ModelParams) -> Result<PotentialField> {
    let coeffs = assemble_coefficients(v, params)?;
    let f = f_v_from_coeffs(&coeffs);
    let phi0 = solve_dirichlet(&coeffs, &f)?;
    let grid = v.grid();
    let mut phi = phi0;
    for i in 0..grid.n_r() {
        for j in 0..grid.n_eta() {
            let val = phi.get(i, j) + grid.eta(j);
            phi.set(i, j, val);
        }
    }
    Ok(phi)
}

/// One-sided second-order d_eta phi(r, 1) along the top boundary.
pub fn trace_eta_derivative(phi: &PotentialField) -> Vec<f64> {
    let grid = phi.grid();
    let ne = grid.n_eta();
    let he = grid.h_eta();
    (0..grid.n_r())
        .map(|i| {
            (3.0 * phi.get(i, ne - 1) - 4.0 * phi.get(i, ne - 2) + phi.get(i, ne - 3))
                / (2.0 * he)
        })
        .collect()
}

/// Electrostatic pressure profile on the plate,
/// g_eps(v)(r) = (1 + eps^2 v'(r)^2) / (1 + v)^2 * |d_eta phi_v(r, 1)|^2.
pub fn g_eps(v: &PlateProfile, params: &ModelParams) -> Result<Vec<f64>> {
    let phi = solve_potential(v, params)?;
    let trace = trace_eta_derivative(&phi);
    let mut dv = v.deriv1();
    dv[0] = 0.0;
    let e2 = params.epsilon * params.epsilon;
    Ok(v
        .values()
        .iter()
        .zip(dv.iter().zip(&trace))
        .map(|(&u, (&d, &t))| {
            let gap = 1.0 + u;
            (1.0 + e2 * d * d) / (gap * gap) * t * t
        })
        .collect())
}

/// Small-gap limit of the pressure profile, 1 / (1 + v)^2.
pub fn g_small_gap(v: &PlateProfile) -> Vec<f64> {
    v.values().iter().map(|&u| 1.0 / ((1.0 + u) * (1.0 + u))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn params(eps: f64) -> ModelParams {
        ModelParams::new(eps, 0.0, 1.0, 0.0, 0.0).unwrap()
    }

    fn quartic(grid: RadialGrid, delta: f64) -> PlateProfile {
        PlateProfile::from_fn(grid, |r| delta * (1.0 - r * r) * (1.0 - r * r))
    }

    #[test]
    fn zero_deflection_gives_linear_potential() {
        let g = RadialGrid::square(33).unwrap();
        let v = PlateProfile::zeros(g);
        let phi = solve_potential(&v, &params(0.7)).unwrap();
        let exact = PotentialField::from_fn(g, |_, e| e);
        assert!(phi.max_diff(&exact) < 1e-12);
        let ge = g_eps(&v, &params(0.7)).unwrap();
        for gi in ge {
            assert!((gi - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn constant_deflection_gives_linear_potential() {
        // v = c: the transform absorbs the gap entirely, phi = eta exactly
        // and g_eps = 1 / (1 + c)^2
        let g = RadialGrid::square(33).unwrap();
        for c in [-0.5, -0.2, 0.4] {
            for eps in [0.1, 1.0] {
                let v = PlateProfile::constant(g, c);
                let phi = solve_potential(&v, &params(eps)).unwrap();
                let exact = PotentialField::from_fn(g, |_, e| e);
                assert!(phi.max_diff(&exact) < 1e-11, "c={c} eps={eps}");
                let ge = g_eps(&v, &params(eps)).unwrap();
                let expect = 1.0 / ((1.0 + c) * (1.0 + c));
                for gi in ge {
                    assert!((gi - expect).abs() < 1e-10, "c={c} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn polynomial_rhs_solved_exactly() {
        // v = 0: -L_0 Phi = 4 eps^2 eta (1 - eta) + 2 (1 - r^2) has the exact
        // solution Phi = (1 - r^2) eta (1 - eta); quadratic in each variable,
        // so centered differences reproduce it to rounding.
        let g = RadialGrid::square(33).unwrap();
        let eps = 0.6;
        let v = PlateProfile::zeros(g);
        let coeffs = assemble_coefficients(&v, &params(eps)).unwrap();
        let f = ScalarField2D::from_fn(g, |r, e| {
            4.0 * eps * eps * e * (1.0 - e) + 2.0 * (1.0 - r * r)
        });
        let phi = solve_dirichlet(&coeffs, &f).unwrap();
        let exact = PotentialField::from_fn(g, |r, e| (1.0 - r * r) * e * (1.0 - e));
        assert!(phi.max_diff(&exact) < 1e-11);
        assert!(phi.is_zero_on_boundary(1e-14));
    }

    #[test]
    fn potential_converges_at_second_order() {
        // grid self-convergence against a fine reference at shared nodes
        let delta = -0.3;
        let eps = 0.5;
        let p = params(eps);
        let fine = RadialGrid::square(129).unwrap();
        let phi_ref = solve_potential(&quartic(fine, delta), &p).unwrap();
        let mut errs = Vec::new();
        for n in [17usize, 33, 65] {
            let g = RadialGrid::square(n).unwrap();
            let phi = solve_potential(&quartic(g, delta), &p).unwrap();
            let stride = (fine.n_r() - 1) / (n - 1);
            let mut err = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    err = err.max((phi.get(i, j) - phi_ref.get(i * stride, j * stride)).abs());
                }
            }
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 > 1.6 && order1 < 2.6, "order {order1}");
        assert!(order2 > 1.6 && order2 < 2.8, "order {order2}");
    }

    #[test]
    fn small_gap_limit_scales_as_eps_squared() {
        // log-log slope of max |g_eps - g_0| vs eps is 2 within 0.3
        let g = RadialGrid::square(65).unwrap();
        let v = quartic(g, -0.3);
        let g0 = g_small_gap(&v);
        let eps_list = [0.4, 0.2, 0.1, 0.05];
        let mut logs = Vec::new();
        for &eps in &eps_list {
            let ge = g_eps(&v, &params(eps)).unwrap();
            let dev = ge
                .iter()
                .zip(&g0)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            logs.push((eps.ln(), dev.ln()));
        }
        let n = logs.len() as f64;
        let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (sxx, sxy): (f64, f64) = logs
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 2.0).abs() < 0.3, "eps^2 slope {slope}");
    }

    #[test]
    fn f_v_vanishes_for_trivial_cases() {
        let g = RadialGrid::square(17).unwrap();
        let zero = PlateProfile::zeros(g);
        let cst = PlateProfile::constant(g, -0.4);
        let bump = quartic(g, -0.3);
        assert_eq!(compute_f_v(&zero, &params(0.5)).unwrap().max_abs(), 0.0);
        // constants cancel only up to rounding in the one-sided stencils
        assert!(compute_f_v(&cst, &params(0.5)).unwrap().max_abs() < 1e-12);
        assert_eq!(compute_f_v(&bump, &params(0.0)).unwrap().max_abs(), 0.0);
        assert!(compute_f_v(&bump, &params(0.5)).unwrap().max_abs() > 0.0);
    }

    #[test]
    fn eps_zero_reproduces_small_gap_load() {
        // eps = 0 kills f_v, so phi = eta exactly and g = 1/(1+v)^2
        let g = RadialGrid::square(33).unwrap();
        let v = quartic(g, -0.45);
        let phi = solve_potential(&v, &params(0.0)).unwrap();
        let exact = PotentialField::from_fn(g, |_, e| e);
        assert!(phi.max_diff(&exact) < 1e-12);
        let ge = g_eps(&v, &params(0.0)).unwrap();
        let g0 = g_small_gap(&v);
        for (a, b) in ge.iter().zip(&g0) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn potential_obeys_maximum_principle() {
        for delta in [-0.45, -0.2, 0.3] {
            let g = RadialGrid::square(33).unwrap();
            let v = quartic(g, delta);
            let phi = solve_potential(&v, &params(0.8)).unwrap();
            for &val in phi.values() {
                assert!((-1e-12..=1.0 + 1e-12).contains(&val), "phi out of [0,1]: {val}");
            }
        }
    }

    #[test]
    fn touching_profile_is_rejected() {
        let g = RadialGrid::square(17).unwrap();
        let v = PlateProfile::from_fn(g, |r| -(1.0 - r * r));
        assert!(solve_potential(&v, &params(0.3)).is_err());
    }
}
