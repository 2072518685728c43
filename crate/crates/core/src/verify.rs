//! Verification instruments: the clamped-plate eigenpair, the auxiliary
//! potential with its pointwise derivative bounds, and numerical checks of
//! the trace inequality and the mixed-derivative integral identity.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field2d;
use crate::grid::RadialGrid;
use crate::params::ModelParams;
use crate::plate::ClampedOperator;
use crate::profile::{radial_laplacian, PlateProfile};
use crate::quad::{cylinder_integral, disc_integral, l2_norm_sq};

/// Principal eigenpair of the clamped operator: smallest eigenvalue mu and
/// eigenfunction zeta normalized to ||zeta||_2 = 1 with zeta(0) > 0.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub mu: f64,
    pub zeta: PlateProfile,
}

/// Smallest eigenpair of A = beta Lap^2 - tau Lap by inverse power iteration
/// on the factorized operator.
pub fn clamped_eigenpair(params: &ModelParams, grid: RadialGrid) -> Result<EigenPair> {
    let op = ClampedOperator::new(params, grid)?;
    let m = grid.n_r() - 1;
    // positive smooth start vector overlapping the ground mode
    let mut x: Vec<f64> = (0..m)
        .map(|i| {
            let r = grid.r(i);
            (1.0 - r * r) * (1.0 - r * r)
        })
        .collect();
    let mut mu = f64::NAN;
    for _ in 0..500 {
        let y = op.solve(&x)?;
        let yf = y.free_values();
        let xy: f64 = x.iter().zip(yf).map(|(a, b)| a * b).sum();
        let yy: f64 = yf.iter().map(|b| b * b).sum();
        let mu_new = xy / yy;
        let scale = yy.sqrt();
        for (xi, &yi) in x.iter_mut().zip(yf) {
            *xi = yi / scale;
        }
        if (mu_new - mu).abs() <= 1e-13 * mu_new.abs() {
            mu = mu_new;
            break;
        }
        mu = mu_new;
    }
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::EigenStagnation { residual: mu });
    }
    // sign and L2(D) normalization
    let mut zeta = PlateProfile::from_free(grid, &x)?;
    if zeta.values()[0] < 0.0 {
        for v in zeta.values_mut() {
            *v = -*v;
        }
    }
    let norm = l2_norm_sq(&zeta).sqrt();
    for v in zeta.values_mut() {
        *v /= norm;
    }
    // residual certificate; the attainable floor grows with ||A|| ~ 1/h^4,
    // so the 1e-8 target is relaxed on very fine grids
    let az = op.apply(&zeta);
    let res_sq: Vec<f64> = (0..grid.n_r())
        .map(|i| {
            if i < m {
                let r = az[i] - mu * zeta.values()[i];
                r * r
            } else {
                0.0
            }
        })
        .collect();
    let residual = disc_integral(grid, &res_sq).sqrt();
    let floor = 100.0 * f64::EPSILON * op.matrix().norm_inf();
    if residual > 1e-8_f64.max(floor) {
        return Err(Error::EigenStagnation { residual });
    }
    Ok(EigenPair { mu, zeta })
}

/// Auxiliary radial potential solving -Lap U = u with U(1) = 0, together
/// with its first and second radial derivatives.
#[derive(Debug, Clone)]
pub struct AuxiliaryU {
    pub potential: PlateProfile,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Explicit radial integration: r U'(r) = -int_0^r s u(s) ds, then
/// U(r) = -int_r^1 U'(s) ds, and U'' = -u - U'/r (axis limit -u(0)/2).
pub fn auxiliary_u(u: &PlateProfile) -> AuxiliaryU {
    let grid = u.grid();
    let n = grid.n_r();
    let h = grid.h_r();
    let vals = u.values();
    // cumulative trapezoid of s*u(s)
    let mut moment = vec![0.0; n];
    for i in 1..n {
        let a = grid.r(i - 1) * vals[i - 1];
        let b = grid.r(i) * vals[i];
        moment[i] = moment[i - 1] + 0.5 * h * (a + b);
    }
    let mut d1 = vec![0.0; n];
    for i in 1..n {
        d1[i] = -moment[i] / grid.r(i);
    }
    // U(1) = 0, integrate U' inward
    let mut pot = vec![0.0; n];
    for i in (0..n - 1).rev() {
        pot[i] = pot[i + 1] - 0.5 * h * (d1[i] + d1[i + 1]);
    }
    let mut d2 = vec![0.0; n];
    d2[0] = -vals[0] / 2.0;
    for i in 1..n {
        d2[i] = -vals[i] - d1[i] / grid.r(i);
    }
    AuxiliaryU {
        potential: PlateProfile::from_values(grid, pot).expect("length matches grid"),
        d1,
        d2,
    }
}

/// One trace-inequality sample: both sides of the estimate and their ratio.
#[derive(Debug, Clone, Copy)]
pub struct TraceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn d_r(field: &Field2d) -> Field2d {
    let grid = field.grid();
    let (nr, h) = (grid.n_r(), grid.h_r());
    let mut out = Field2d::zeros(grid);
    for j in 0..grid.n_eta() {
        for i in 0..nr {
            let v = if i == 0 {
                (-3.0 * field.get(0, j) + 4.0 * field.get(1, j) - field.get(2, j)) / (2.0 * h)
            } else if i == nr - 1 {
                (3.0 * field.get(i, j) - 4.0 * field.get(i - 1, j) + field.get(i - 2, j))
                    / (2.0 * h)
            } else {
                (field.get(i + 1, j) - field.get(i - 1, j)) / (2.0 * h)
            };
            out.set(i, j, v);
        }
    }
    out
}

fn d_eta(field: &Field2d) -> Field2d {
    let grid = field.grid();
    let (ne, h) = (grid.n_eta(), grid.h_eta());
    let mut out = Field2d::zeros(grid);
    for i in 0..grid.n_r() {
        for j in 0..ne {
            let v = if j == 0 {
                (-3.0 * field.get(i, 0) + 4.0 * field.get(i, 1) - field.get(i, 2)) / (2.0 * h)
            } else if j == ne - 1 {
                (3.0 * field.get(i, j) - 4.0 * field.get(i, j - 1) + field.get(i, j - 2))
                    / (2.0 * h)
            } else {
                (field.get(i, j + 1) - field.get(i, j - 1)) / (2.0 * h)
            };
            out.set(i, j, v);
        }
    }
    out
}

/// Checks the trace estimate for a cylinder test function:
/// LHS = ||w(.,1)||^p_{L_p(D)}, RHS = ||w||^{(3p-4)/2}_{W12} ||w||^{(4-p)/2}_{L2}
/// (without the unknown constant); returns both and the ratio.
pub fn trace_inequality_check(w: &Field2d, p: f64) -> Result<TraceReport> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [2,4], got {p}")));
    }
    w.ensure_finite()?;
    let grid = w.grid();
    let ne = grid.n_eta();
    let trace_p: Vec<f64> = (0..grid.n_r())
        .map(|i| w.get(i, ne - 1).abs().powf(p))
        .collect();
    let lhs = disc_integral(grid, &trace_p);
    let l2_sq = cylinder_integral(&square(w));
    let wr = d_r(w);
    let we = d_eta(w);
    let grad_sq = cylinder_integral(&square(&wr)) + cylinder_integral(&square(&we));
    let w12 = (l2_sq + grad_sq).sqrt();
    let l2 = l2_sq.sqrt();
    let rhs = w12.powf((3.0 * p - 4.0) / 2.0) * l2.powf((4.0 - p) / 2.0);
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(TraceReport { lhs, rhs, ratio })
}

fn square(f: &Field2d) -> Field2d {
    let grid = f.grid();
    let mut out = Field2d::zeros(grid);
    for i in 0..grid.n_r() {
        for j in 0..grid.n_eta() {
            let x = f.get(i, j);
            out.set(i, j, x * x);
        }
    }
    out
}

/// Evaluates both sides of the summed axisymmetric mixed-derivative identity
/// int (Phi_rr + Phi_r/r) Phi_etaeta r dr deta = int Phi_reta^2 r dr deta
/// for a field vanishing on the whole Dirichlet boundary.
pub fn mixed_derivative_identity_check(phi: &Field2d) -> Result<(f64, f64, f64)> {
    if !phi.is_zero_on_boundary(1e-12) {
        return Err(Error::BoundaryViolation(
            "mixed-derivative identity needs zero boundary values".into(),
        ));
    }
    let grid = phi.grid();
    let (nr, ne) = (grid.n_r(), grid.n_eta());
    // radial Laplacian column by column (fields vanishing on the boundary
    // and smooth on the disc are even in r at the axis)
    let mut lap_r = Field2d::zeros(grid);
    for j in 0..ne {
        let col: Vec<f64> = (0..nr).map(|i| phi.get(i, j)).collect();
        let lap = radial_laplacian(grid, &col);
        for i in 0..nr {
            lap_r.set(i, j, lap[i]);
        }
    }
    let he = grid.h_eta();
    let mut d2e = Field2d::zeros(grid);
    for i in 0..nr {
        for j in 0..ne {
            let v = if j == 0 {
                (2.0 * phi.get(i, 0) - 5.0 * phi.get(i, 1) + 4.0 * phi.get(i, 2)
                    - phi.get(i, 3))
                    / (he * he)
            } else if j == ne - 1 {
                (2.0 * phi.get(i, j) - 5.0 * phi.get(i, j - 1) + 4.0 * phi.get(i, j - 2)
                    - phi.get(i, j - 3))
                    / (he * he)
            } else {
                (phi.get(i, j + 1) - 2.0 * phi.get(i, j) + phi.get(i, j - 1)) / (he * he)
            };
            d2e.set(i, j, v);
        }
    }
    let mut prod = Field2d::zeros(grid);
    for i in 0..nr {
        for j in 0..ne {
            prod.set(i, j, lap_r.get(i, j) * d2e.get(i, j));
        }
    }
    let lhs = cylinder_integral(&prod);
    let cross = d_eta(&d_r(phi));
    let rhs = cylinder_integral(&square(&cross));
    let denom = lhs.abs().max(rhs.abs());
    let relerr = if denom == 0.0 { 0.0 } else { (lhs - rhs).abs() / denom };
    Ok((lhs, rhs, relerr))
}

/// Seeded smooth test function: radial polynomial factors times a short
/// trigonometric eta series; smooth on the disc (even powers of r only).
pub fn random_test_function(grid: RadialGrid, rng: &mut impl Rng) -> Field2d {
    let n_terms = rng.gen_range(1..=3usize);
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let c: f64 = rng.gen_range(-2.0..2.0);
        let pow: i32 = rng.gen_range(0..=3);
        let decay: i32 = rng.gen_range(0..=2);
        let mode: usize = rng.gen_range(0..=3);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push((c, pow, decay, mode, phase));
    }
    Field2d::from_fn(grid, move |r, e| {
        terms
            .iter()
            .map(|&(c, pow, decay, mode, phase)| {
                let radial = c * (r * r).powi(pow) * (1.0 - r * r).powi(decay);
                let angular = (mode as f64 * std::f64::consts::PI * e + phase).cos();
                radial * angular
            })
            .sum()
    })
}

/// Aggregate trace-inequality statistics over a seeded corpus.
#[derive(Debug, Clone, Copy)]
pub struct CorpusReport {
    pub count: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Runs the trace check over `count` seeded random test functions for each
/// exponent p supplied; skips near-zero samples (ratio defined as 0 there).
pub fn trace_corpus_report(
    grid: RadialGrid,
    count: usize,
    seed: u64,
    p: f64,
) -> Result<CorpusReport> {
    let fields: Vec<Field2d> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_test_function(grid, &mut rng)).collect()
    };
    let ratios: Result<Vec<f64>> = fields
        .par_iter()
        .map(|w| trace_inequality_check(w, p).map(|rep| rep.ratio))
        .collect();
    let ratios = ratios?;
    let max_ratio = ratios.iter().fold(0.0f64, |m, &x| m.max(x));
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    Ok(CorpusReport { count, max_ratio, mean_ratio })
}
