//! Stationary states via Newton's method on the fixed-point residual
//! F(lambda, v) = v + lambda A^{-1} g_eps(v) - a ||grad v||^2 A^{-1} Lap v,
//! natural-parameter continuation in lambda with step halving, a
//! pseudo-arclength rounding of the fold, and linearized stability spectra.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::elliptic::g_eps;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::plate::{rhs_h, ClampedOperator};
use crate::profile::PlateProfile;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAXIT: usize = 50;

/// One continuation sample of the stationary branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub profile: PlateProfile,
    /// largest real part of the linearization spectrum
    pub leading_eig: f64,
    pub stable: bool,
    pub arclength: f64,
}

/// Output of [`continue_branch`]: the sampled branch and the fold estimate
/// lambda* (None when the branch stayed open within the step budget).
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub points: Vec<BranchPoint>,
    pub lambda_star: Option<f64>,
}

/// Fixed-point residual on the free nodes.
pub fn residual_f(
    lambda: f64,
    v: &PlateProfile,
    params: &ModelParams,
    op: &ClampedOperator,
) -> Result<Vec<f64>> {
    let m = v.grid().n_r() - 1;
    let mut f: Vec<f64> = v.free_values().to_vec();
    if lambda != 0.0 {
        let g = g_eps(v, params)?;
        let ag = op.solve(&g[..m])?;
        for (fi, &w) in f.iter_mut().zip(ag.free_values()) {
            *fi += lambda * w;
        }
    }
    if params.a != 0.0 {
        let gsq = crate::quad::grad_norm_sq(v);
        let lap = v.laplacian();
        let al = op.solve(&lap[..m])?;
        for (fi, &w) in f.iter_mut().zip(al.free_values()) {
            *fi -= params.a * gsq * w;
        }
    }
    Ok(f)
}

/// dF/dlambda = A^{-1} g_eps(v) on the free nodes.
fn residual_f_lambda(
    v: &PlateProfile,
    params: &ModelParams,
    op: &ClampedOperator,
) -> Result<Vec<f64>> {
    let m = v.grid().n_r() - 1;
    let g = g_eps(v, params)?;
    Ok(op.solve(&g[..m])?.free_values().to_vec())
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// One-sided finite-difference Jacobian of the residual, column-parallel.
fn fd_jacobian(
    lambda: f64,
    v: &PlateProfile,
    params: &ModelParams,
    op: &ClampedOperator,
    f0: &[f64],
) -> Result<DMatrix<f64>> {
    let m = f0.len();
    let hj = 1e-6 * (1.0 + v.max_abs());
    let cols: Result<Vec<Vec<f64>>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut vp = v.clone();
            vp.values_mut()[k] += hj;
            let fk = residual_f(lambda, &vp, params, op)?;
            Ok(fk.iter().zip(f0).map(|(a, b)| (a - b) / hj).collect())
        })
        .collect();
    let cols = cols?;
    Ok(DMatrix::from_fn(m, m, |i, j| cols[j][i]))
}

fn newton_with_op(
    lambda: f64,
    guess: &PlateProfile,
    params: &ModelParams,
    op: &ClampedOperator,
) -> Result<PlateProfile> {
    let mut v = guess.clone();
    v.ensure_admissible()?;
    let mut f = residual_f(lambda, &v, params, op)?;
    let mut fnorm = inf_norm(&f);
    let f0norm = fnorm;
    let mut polish_left = 1usize;
    for it in 0..=NEWTON_MAXIT {
        if fnorm <= NEWTON_TOL {
            // one extra correction sharpens the nodewise residual identity
            if polish_left == 0 {
                return Ok(v);
            }
            polish_left = 0;
        }
        if it == NEWTON_MAXIT {
            return Err(Error::Nonconvergence { iterations: it, residual: fnorm });
        }
        let jac = fd_jacobian(lambda, &v, params, op, &f)?;
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|&x| -x));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::Nonconvergence { iterations: it, residual: fnorm })?;
        for (vk, sk) in v.values_mut().iter_mut().zip(step.iter()) {
            *vk += sk;
        }
        if v.min_gap() <= 0.0 {
            return Err(Error::DomainDegeneracy { min_gap: v.min_gap() });
        }
        f = residual_f(lambda, &v, params, op)?;
        fnorm = inf_norm(&f);
        if !fnorm.is_finite() || fnorm > 1e4 * (f0norm + 1.0) {
            return Err(Error::Nonconvergence { iterations: it + 1, residual: fnorm });
        }
        if polish_left == 0 && fnorm <= 10.0 * NEWTON_TOL {
            return Ok(v);
        }
    }
    unreachable!()
}

/// Newton iteration for F(lambda, v) = 0 from an admissible guess.
pub fn newton_solve(
    lambda: f64,
    guess: &PlateProfile,
    params: &ModelParams,
) -> Result<PlateProfile> {
    let op = ClampedOperator::new(params, guess.grid())?;
    newton_with_op(lambda, guess, params, &op)
}

/// Real parts of the k leading eigenvalues (largest real part first) of the
/// linearization L = -A + Dh(U_lambda); updates the point's leading_eig and
/// stability flag.
pub fn linearized_spectrum(
    point: &mut BranchPoint,
    params: &ModelParams,
    k: usize,
) -> Result<Vec<f64>> {
    let p = params.with_lambda(point.lambda);
    let u = &point.profile;
    u.ensure_admissible()?;
    let grid = u.grid();
    let m = grid.n_r() - 1;
    let op = ClampedOperator::new(&p, grid)?;
    let delta = 1e-6 * (1.0 + u.max_abs());
    let cols: Result<Vec<Vec<f64>>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut up = u.clone();
            up.values_mut()[j] += delta;
            let hp = rhs_h(&up, &p)?;
            let mut um = u.clone();
            um.values_mut()[j] -= delta;
            let hm = rhs_h(&um, &p)?;
            Ok((0..m).map(|i| (hp[i] - hm[i]) / (2.0 * delta)).collect())
        })
        .collect();
    let cols = cols?;
    let l = DMatrix::from_fn(m, m, |i, j| cols[j][i] - op.matrix().get(i, j));
    let eigs = l.complex_eigenvalues();
    let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    if re.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenStagnation { residual: f64::NAN });
    }
    re.sort_by(|a, b| b.partial_cmp(a).unwrap());
    point.leading_eig = re[0];
    point.stable = re[0] < 0.0;
    Ok(re.into_iter().take(k.max(1)).collect())
}

fn state_distance(a: (&PlateProfile, f64), b: (&PlateProfile, f64)) -> f64 {
    let dv: f64 = a
        .0
        .free_values()
        .iter()
        .zip(b.0.free_values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let dl = a.1 - b.1;
    (dv + dl * dl).sqrt()
}

/// Pseudo-arclength corrector: solves F(lambda, v) = 0 together with the
/// secant-tangent constraint, starting from the predictor.
fn palc_step(
    params: &ModelParams,
    op: &ClampedOperator,
    prev: (&PlateProfile, f64),
    cur: (&PlateProfile, f64),
    ds: f64,
) -> Result<(PlateProfile, f64)> {
    let m = cur.0.grid().n_r() - 1;
    let norm = state_distance(cur, prev).max(1e-14);
    let tv: Vec<f64> = cur
        .0
        .free_values()
        .iter()
        .zip(prev.0.free_values())
        .map(|(a, b)| (a - b) / norm)
        .collect();
    let tl = (cur.1 - prev.1) / norm;
    let mut v = cur.0.clone();
    for (vk, t) in v.values_mut().iter_mut().zip(&tv) {
        *vk += ds * t;
    }
    let mut lambda = cur.1 + ds * tl;
    let pred_v: Vec<f64> = v.free_values().to_vec();
    let pred_l = lambda;
    for it in 0..20 {
        if v.min_gap() <= 0.0 || lambda < 0.0 {
            return Err(Error::DomainDegeneracy { min_gap: v.min_gap() });
        }
        let f = residual_f(lambda, &v, params, op)?;
        let c: f64 = v
            .free_values()
            .iter()
            .zip(&pred_v)
            .zip(&tv)
            .map(|((a, b), t)| (a - b) * t)
            .sum::<f64>()
            + (lambda - pred_l) * tl;
        if inf_norm(&f) <= NEWTON_TOL && c.abs() <= NEWTON_TOL {
            return Ok((v, lambda));
        }
        let jv = fd_jacobian(lambda, &v, params, op, &f)?;
        let fl = residual_f_lambda(&v, params, op)?;
        let mut aug = DMatrix::zeros(m + 1, m + 1);
        aug.view_mut((0, 0), (m, m)).copy_from(&jv);
        for i in 0..m {
            aug[(i, m)] = fl[i];
            aug[(m, i)] = tv[i];
        }
        aug[(m, m)] = tl;
        let mut rhs = DVector::zeros(m + 1);
        for i in 0..m {
            rhs[i] = -f[i];
        }
        rhs[m] = -c;
        let step = aug
            .lu()
            .solve(&rhs)
            .ok_or(Error::Nonconvergence { iterations: it, residual: inf_norm(&f) })?;
        for (vk, sk) in v.values_mut().iter_mut().zip(step.iter().take(m)) {
            *vk += sk;
        }
        lambda += step[m];
    }
    Err(Error::Nonconvergence { iterations: 20, residual: f64::NAN })
}

/// Traces the stationary branch from (0, 0): natural continuation with step
/// halving, Newton-failure bisection of the fold to relative width 1e-4, and
/// a few pseudo-arclength steps rounding the fold onto the (experimental)
/// upper branch. lambda* is the sup of lambda over stable computed points.
pub fn continue_branch(
    params: &ModelParams,
    lambda_step_init: f64,
    max_points: usize,
) -> Result<BranchResult> {
    params.validate()?;
    if !(lambda_step_init > 0.0) || max_points < 2 {
        return Err(Error::InvalidParameter(
            "continuation needs a positive initial step and max_points >= 2".into(),
        ));
    }
    let grid = crate::grid::RadialGrid::new(129, 129)?;
    continue_branch_on(params, grid, lambda_step_init, max_points)
}

/// [`continue_branch`] on an explicit grid.
pub fn continue_branch_on(
    params: &ModelParams,
    grid: crate::grid::RadialGrid,
    lambda_step_init: f64,
    max_points: usize,
) -> Result<BranchResult> {
    params.validate()?;
    if !(lambda_step_init > 0.0) || max_points < 2 {
        return Err(Error::InvalidParameter(
            "continuation needs a positive initial step and max_points >= 2".into(),
        ));
    }
    let op = ClampedOperator::new(params, grid)?;
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut arclength = 0.0;

    let push = |points: &mut Vec<BranchPoint>,
                    arclength: &mut f64,
                    lambda: f64,
                    profile: PlateProfile|
     -> Result<()> {
        if let Some(last) = points.last() {
            *arclength += state_distance((&profile, lambda), (&last.profile, last.lambda));
        }
        let mut pt = BranchPoint {
            lambda,
            profile,
            leading_eig: f64::NAN,
            stable: false,
            arclength: *arclength,
        };
        linearized_spectrum(&mut pt, params, 1)?;
        points.push(pt);
        Ok(())
    };

    push(&mut points, &mut arclength, 0.0, PlateProfile::zeros(grid))?;

    // natural-parameter phase
    let step_floor = 1e-3 * lambda_step_init;
    let mut step = lambda_step_init;
    let mut first_failure: Option<f64> = None;
    while points.len() < max_points {
        let last = points.last().unwrap();
        let lambda_try = last.lambda + step;
        // secant predictor from the last two points
        let mut guess = last.profile.clone();
        if points.len() >= 2 {
            let prev = &points[points.len() - 2];
            let dl = last.lambda - prev.lambda;
            if dl > 0.0 {
                let scale = step / dl;
                for (gk, (&a, &b)) in guess
                    .values_mut()
                    .iter_mut()
                    .zip(last.profile.values().iter().zip(prev.profile.values()))
                {
                    *gk = a + scale * (a - b);
                }
            }
        }
        match newton_with_op(lambda_try, &guess, params, &op) {
            Ok(root) => {
                push(&mut points, &mut arclength, lambda_try, root)?;
                step = (step * 1.3).min(lambda_step_init);
            }
            Err(_) => {
                first_failure = Some(first_failure.map_or(lambda_try, |f: f64| f.min(lambda_try)));
                step *= 0.5;
                if step < step_floor {
                    break;
                }
            }
        }
    }

    let Some(mut hi) = first_failure else {
        // open branch within the budget: no fold found
        return Ok(BranchResult { points, lambda_star: None });
    };

    // bisection on Newton success refines the fold location
    let mut lo = points.last().unwrap().lambda;
    let mut best = points.last().unwrap().profile.clone();
    while hi - lo > 1e-4 * hi && points.len() < max_points + 16 {
        let mid = 0.5 * (lo + hi);
        match newton_with_op(mid, &best, params, &op) {
            Ok(root) => {
                best = root.clone();
                push(&mut points, &mut arclength, mid, root)?;
                lo = mid;
            }
            Err(_) => hi = mid,
        }
    }

    // pseudo-arclength rounding of the fold (experimental upper branch);
    // the sign change of dlambda/ds confirms the fold
    if points.len() >= 2 {
        let ds0 = {
            let a = &points[points.len() - 1];
            let b = &points[points.len() - 2];
            state_distance((&a.profile, a.lambda), (&b.profile, b.lambda))
        };
        let mut ds = ds0.max(0.02 * (1.0 + points.last().unwrap().profile.max_abs()));
        let mut extra = 0;
        while extra < 8 && points.len() < max_points + 24 {
            let cur = points.last().unwrap().clone();
            let prev = points[points.len() - 2].clone();
            match palc_step(
                params,
                &op,
                (&prev.profile, prev.lambda),
                (&cur.profile, cur.lambda),
                ds,
            ) {
                Ok((v, l)) => {
                    push(&mut points, &mut arclength, l, v)?;
                    extra += 1;
                    ds *= 1.2;
                }
                Err(_) => {
                    ds *= 0.5;
                    if ds < 1e-4 {
                        break;
                    }
                }
            }
        }
    }

    let lambda_star = points
        .iter()
        .filter(|p| p.stable)
        .map(|p| p.lambda)
        .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))));
    Ok(BranchResult { points, lambda_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::quad;

    fn params(eps: f64) -> ModelParams {
        ModelParams::new(eps, 0.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn residual_vanishes_at_origin() {
        let g = RadialGrid::square(17).unwrap();
        let p = params(0.3);
        let op = ClampedOperator::new(&p, g).unwrap();
        let f = residual_f(0.0, &PlateProfile::zeros(g), &p, &op).unwrap();
        assert_eq!(inf_norm(&f), 0.0);
    }

    #[test]
    fn residual_at_zero_profile_is_lambda_a_inv_one() {
        let g = RadialGrid::square(33).unwrap();
        let p = params(0.3);
        let op = ClampedOperator::new(&p, g).unwrap();
        let lambda = 0.7;
        let f = residual_f(lambda, &PlateProfile::zeros(g), &p, &op).unwrap();
        let ainv1 = op.solve(&vec![1.0; g.n_r() - 1]).unwrap();
        for (a, &b) in f.iter().zip(ainv1.free_values()) {
            assert!((a - lambda * b).abs() < 1e-12);
            assert!(b > 0.0); // interior positivity of A^{-1} 1
        }
    }

    #[test]
    fn newton_at_zero_returns_zero() {
        let g = RadialGrid::square(17).unwrap();
        let root = newton_solve(0.0, &PlateProfile::zeros(g), &params(0.3)).unwrap();
        assert!(root.max_abs() < 1e-12);
    }

    #[test]
    fn implicit_function_remainder_is_quadratic() {
        // U_lambda = -lambda A^{-1} g(0) + O(lambda^2); halving study on the
        // remainder norm, ratio ~4 when lambda halves (here: factor 10 -> 100)
        let g = RadialGrid::square(33).unwrap();
        let p = params(0.3);
        let op = ClampedOperator::new(&p, g).unwrap();
        let ainv1 = op.solve(&vec![1.0; g.n_r() - 1]).unwrap();
        let mut rems = Vec::new();
        for lambda in [1e-2, 1e-3] {
            let root = newton_solve(lambda, &PlateProfile::zeros(g), &p).unwrap();
            let rem = root
                .values()
                .iter()
                .zip(ainv1.values())
                .fold(0.0f64, |m, (u, w)| m.max((u + lambda * w).abs()));
            rems.push(rem);
        }
        let ratio = rems[0] / rems[1];
        assert!(ratio > 70.0 && ratio < 130.0, "quadratic remainder ratio {ratio}");
    }

    #[test]
    fn residual_identity_at_root() {
        // A U = -lambda g_eps(U) at a converged root (a = 0)
        let g = RadialGrid::square(33).unwrap();
        let p = params(0.3);
        let lambda = 2.0;
        let op = ClampedOperator::new(&p, g).unwrap();
        let root = newton_solve(lambda, &PlateProfile::zeros(g), &p).unwrap();
        let au = op.apply(&root);
        let gv = g_eps(&root, &p).unwrap();
        for (i, (&l, &r)) in au.iter().zip(&gv).enumerate() {
            assert!((l + lambda * r).abs() < 1e-8, "node {i}: {l} vs {}", -lambda * r);
        }
    }

    #[test]
    fn spectrum_at_origin_matches_plate_eigenvalue() {
        let g = RadialGrid::square(65).unwrap();
        let p = params(0.3);
        let mut pt = BranchPoint {
            lambda: 0.0,
            profile: PlateProfile::zeros(g),
            leading_eig: f64::NAN,
            stable: false,
            arclength: 0.0,
        };
        let eigs = linearized_spectrum(&mut pt, &p, 3).unwrap();
        let mu1 = 104.3631055588; // k1^4, first clamped-plate frequency root
        assert!((pt.leading_eig + mu1).abs() < 0.01 * mu1, "leading {}", pt.leading_eig);
        assert!(pt.stable);
        assert_eq!(eigs.len(), 3);
        assert!(eigs[0] >= eigs[1] && eigs[1] >= eigs[2]);
    }

    #[test]
    fn small_branch_finds_fold_and_orders_points() {
        let g = RadialGrid::square(17).unwrap();
        let p = params(0.3);
        let res = continue_branch_on(&p, g, 2.0, 30).unwrap();
        let ls = res.lambda_star.expect("fold expected");
        assert!(ls > 5.0 && ls < 25.0, "lambda* {ls}");
        // arclength monotone, stable points have negative interior profile
        for w in res.points.windows(2) {
            assert!(w[1].arclength > w[0].arclength);
        }
        let mut last_min = 1.0;
        for pt in res.points.iter().filter(|p| p.stable && p.lambda > 0.0) {
            assert!(pt.profile.values()[0] < 0.0);
            let m = pt.profile.min_value();
            assert!(m > -1.0);
            assert!(m < last_min);
            last_min = m;
            assert!((quad::l2_norm_sq(&pt.profile)).is_finite());
        }
        // Newton from the flat guess must fail well above the fold
        assert!(newton_solve(1.5 * ls, &PlateProfile::zeros(g), &p).is_err());
    }
}
