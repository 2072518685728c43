//! Clamped plate operator A = beta Lap^2 - tau Lap, the semilinear right-hand
//! side h(v) = -lambda g_eps(v) + a ||grad v||^2 Lap v, and the IMEX time
//! integrator for the plate Cauchy problem.

use crate::elliptic::g_eps;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::{BandedLu, BandedMatrix};
use crate::params::ModelParams;
use crate::profile::PlateProfile;
use crate::quad::{disc_integral, grad_norm_sq, l2_norm_sq};

/// Radial Laplacian as a banded matrix over all nodes, with the clamped
/// boundary baked in: u(1) enters as an ordinary unknown, while u'(1) = 0 is
/// realized by the mirror ghost u(1+h) = u(1-h) in the boundary row.
fn laplacian_full(grid: RadialGrid) -> BandedMatrix {
    let n = grid.n_r();
    let h = grid.h_r();
    let h2 = h * h;
    let mut l = BandedMatrix::new(n, 1, 2);
    // axis row: three-point formula whose truncation constant matches the
    // interior stencil's r -> 0 limit, keeping the composed biharmonic O(h^2)
    l.set(0, 0, -3.5 / h2);
    l.set(0, 1, (10.0 / 3.0) / h2);
    l.set(0, 2, (1.0 / 6.0) / h2);
    for i in 1..n - 1 {
        let r = grid.r(i);
        l.set(i, i - 1, 1.0 / h2 - 1.0 / (2.0 * h * r));
        l.set(i, i, -2.0 / h2);
        l.set(i, i + 1, 1.0 / h2 + 1.0 / (2.0 * h * r));
    }
    // rim row with the mirror ghost: Lap u(1) = 2 (u_{n-2} - u_{n-1}) / h^2
    l.set(n - 1, n - 2, 2.0 / h2);
    l.set(n - 1, n - 1, -2.0 / h2);
    l
}

fn restrict(m: &BandedMatrix, keep: usize) -> BandedMatrix {
    let kl = keep.saturating_sub(1).min(4);
    let ku = kl;
    let mut out = BandedMatrix::new(keep, kl, ku);
    for i in 0..keep {
        for j in i.saturating_sub(kl)..=(i + ku).min(keep - 1) {
            let v = m.get(i, j);
            if v != 0.0 {
                out.set(i, j, v);
            }
        }
    }
    out
}

/// Discrete A = beta Lap^2 - tau Lap on the free nodes 0..n_r-2, with
/// u(1) = u'(1) = 0 enforced through the rim column drop and the ghost row.
#[derive(Debug, Clone)]
pub struct ClampedOperator {
    grid: RadialGrid,
    matrix: BandedMatrix,
    lu: BandedLu,
}

impl ClampedOperator {
    pub fn new(params: &ModelParams, grid: RadialGrid) -> Result<Self> {
        params.validate()?;
        let l = laplacian_full(grid);
        let l2 = l.matmul(&l);
        let a_full = l2.lin_comb(params.beta, &l, -params.tau);
        let matrix = restrict(&a_full, grid.n_r() - 1);
        let lu = matrix.clone().factorize().map_err(|_| {
            Error::InternalConsistency("clamped operator factorization failed".into())
        })?;
        Ok(Self { grid, matrix, lu })
    }

    #[inline]
    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.matrix
    }

    /// A applied to the free values of a clamped profile.
    pub fn apply(&self, v: &PlateProfile) -> Vec<f64> {
        assert_eq!(v.grid(), self.grid);
        self.matrix.matvec(v.free_values())
    }

    /// A^{-1} rhs on the free nodes, returned as a clamped profile.
    pub fn solve(&self, rhs: &[f64]) -> Result<PlateProfile> {
        let x = self.lu.solve(rhs);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::InternalConsistency("non-finite operator solve".into()));
        }
        PlateProfile::from_free(self.grid, &x)
    }
}

/// Convenience constructor mirroring the operator's mathematical name.
pub fn assemble_a(params: &ModelParams, grid: RadialGrid) -> Result<ClampedOperator> {
    ClampedOperator::new(params, grid)
}

/// Semilinear right-hand side h(v) = -lambda g_eps(v) + a ||grad v||_2^2 Lap v
/// at every node.
pub fn rhs_h(v: &PlateProfile, params: &ModelParams) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.grid().n_r()];
    if params.lambda != 0.0 {
        let g = g_eps(v, params)?;
        for (o, gi) in out.iter_mut().zip(&g) {
            *o -= params.lambda * gi;
        }
    }
    if params.a != 0.0 {
        let gsq = grad_norm_sq(v);
        let lap = v.laplacian();
        for (o, li) in out.iter_mut().zip(&lap) {
            *o += params.a * gsq * li;
        }
    }
    Ok(out)
}

/// One IMEX Euler step: (I + dt A) u_new = u + dt h(u) on the free nodes,
/// with the clamped rim value reattached.
pub fn step(
    u: &PlateProfile,
    dt: f64,
    params: &ModelParams,
    op: &ClampedOperator,
) -> Result<PlateProfile> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let lu = imex_matrix(op, dt).factorize().map_err(|_| {
        Error::InternalConsistency("IMEX matrix factorization failed".into())
    })?;
    let h = rhs_h(u, params)?;
    let rhs: Vec<f64> = u
        .free_values()
        .iter()
        .zip(&h)
        .map(|(&ui, &hi)| ui + dt * hi)
        .collect();
    PlateProfile::from_free(op.grid(), &lu.solve(&rhs))
}

fn imex_matrix(op: &ClampedOperator, dt: f64) -> BandedMatrix {
    let n = op.matrix().n();
    let mut eye = BandedMatrix::new(n, 0, 0);
    for i in 0..n {
        eye.set(i, i, 1.0);
    }
    eye.lin_comb(1.0, op.matrix(), dt)
}

/// Termination thresholds of the time integrator.
#[derive(Debug, Clone, Copy)]
pub struct SimTolerances {
    /// touchdown declared when min(1 + u) drops to this gap
    pub touchdown: f64,
    /// blow-up declared when the discrete W2-norm proxy exceeds this cap
    pub norm_cap: f64,
    /// steady state declared when ||u_new - u||_inf / dt falls below this
    pub steady: f64,
}

impl Default for SimTolerances {
    fn default() -> Self {
        Self { touchdown: 1e-2, norm_cap: 1e6, steady: 1e-7 }
    }
}

impl SimTolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.touchdown > 0.0 && self.norm_cap > 0.0 && self.steady > 0.0) {
            return Err(Error::InvalidParameter(
                "simulation tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    /// reached t_end
    Completed,
    Touchdown,
    NormBlowup,
    ConvergedToSteady,
}

impl SimStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimStatus::Completed => "completed",
            SimStatus::Touchdown => "touchdown",
            SimStatus::NormBlowup => "norm_blowup",
            SimStatus::ConvergedToSteady => "converged_to_steady",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimRecord {
    pub t: f64,
    pub min_u: f64,
    pub l2_norm: f64,
    pub grad_sq: f64,
    pub energy_proxy: f64,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
    pub status: SimStatus,
    pub final_profile: PlateProfile,
}

impl SimTrace {
    pub fn terminal_time(&self) -> f64 {
        self.records.last().map(|r| r.t).unwrap_or(0.0)
    }
}

fn w2_proxy_sq(u: &PlateProfile) -> f64 {
    let lap = u.laplacian();
    let lap_sq: Vec<f64> = lap.iter().map(|&x| x * x).collect();
    l2_norm_sq(u) + grad_norm_sq(u) + disc_integral(u.grid(), &lap_sq)
}

fn make_record(t: f64, u: &PlateProfile, params: &ModelParams) -> SimRecord {
    let gsq = grad_norm_sq(u);
    let lap = u.laplacian();
    let lap_sq: Vec<f64> = lap.iter().map(|&x| x * x).collect();
    let bend = disc_integral(u.grid(), &lap_sq);
    // elastic energy plus the small-gap electrostatic part; a rough but
    // monotone diagnostic, not the exact Lyapunov functional
    let electro: Vec<f64> = u.values().iter().map(|&x| 1.0 / (1.0 + x)).collect();
    let energy = 0.5 * params.beta * bend + 0.5 * params.tau * gsq
        + 0.25 * params.a * gsq * gsq
        - params.lambda * disc_integral(u.grid(), &electro);
    SimRecord { t, min_u: u.min_value(), l2_norm: l2_norm_sq(u).sqrt(), grad_sq: gsq, energy_proxy: energy }
}

/// Integrates the plate equation with IMEX Euler until t_end or one of the
/// termination criteria fires.
pub fn simulate(
    u0: &PlateProfile,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    tols: SimTolerances,
) -> Result<SimTrace> {
    params.validate()?;
    tols.validate()?;
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidParameter("dt and t_end must be positive".into()));
    }
    u0.ensure_admissible()?;
    let op = ClampedOperator::new(params, u0.grid())?;
    let lu = imex_matrix(&op, dt).factorize().map_err(|_| {
        Error::InternalConsistency("IMEX matrix factorization failed".into())
    })?;

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut records = vec![make_record(t, &u, params)];
    let mut status = SimStatus::Completed;
    if 1.0 + u.min_value() <= tols.touchdown {
        status = SimStatus::Touchdown;
    } else {
        while t < t_end - 0.5 * dt {
            let h = rhs_h(&u, params)?;
            let mut rhs: Vec<f64> = u
                .free_values()
                .iter()
                .zip(&h)
                .map(|(&ui, &hi)| ui + dt * hi)
                .collect();
            lu.solve_in_place(&mut rhs);
            let u_new = PlateProfile::from_free(u0.grid(), &rhs)?;
            t += dt;
            records.push(make_record(t, &u_new, params));
            let increment = u_new
                .values()
                .iter()
                .zip(u.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            u = u_new;
            if 1.0 + u.min_value() <= tols.touchdown {
                status = SimStatus::Touchdown;
                break;
            }
            if !u.values().iter().all(|v| v.is_finite())
                || w2_proxy_sq(&u).sqrt() > tols.norm_cap
            {
                status = SimStatus::NormBlowup;
                break;
            }
            if increment / dt <= tols.steady {
                status = SimStatus::ConvergedToSteady;
                break;
            }
        }
    }
    Ok(SimTrace { records, status, final_profile: u })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::square(n).unwrap()
    }

    fn params(lambda: f64) -> ModelParams {
        ModelParams::new(0.3, lambda, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn biharmonic_of_quartic_is_64() {
        // A w for w = (1-r^2)^2, beta = 1, tau = 0; exact Lap^2 w = 64.
        // The rim-adjacent node carries the ghost row's O(1) local truncation
        // (the scheme is still globally second order) and is excluded.
        let g = grid(129);
        let p = ModelParams::new(0.3, 0.0, 1.0, 0.0, 0.0).unwrap();
        let op = ClampedOperator::new(&p, g).unwrap();
        let w = PlateProfile::from_fn(g, |r| (1.0 - r * r) * (1.0 - r * r));
        let aw = op.apply(&w);
        for (i, &v) in aw.iter().enumerate().take(g.n_r() - 2) {
            assert!((v - 64.0).abs() < 1e-4, "node {i}: {v}");
        }
    }

    #[test]
    fn tension_term_added_nodewise() {
        // beta = 1, tau = 5: A w = 64 - 5 (16 r^2 - 8)
        let g = grid(129);
        let p = ModelParams::new(0.3, 0.0, 1.0, 5.0, 0.0).unwrap();
        let op = ClampedOperator::new(&p, g).unwrap();
        let w = PlateProfile::from_fn(g, |r| (1.0 - r * r) * (1.0 - r * r));
        let aw = op.apply(&w);
        for (i, &v) in aw.iter().enumerate().take(g.n_r() - 2) {
            let r = g.r(i);
            let exact = 64.0 - 5.0 * (16.0 * r * r - 8.0);
            assert!((v - exact).abs() < 0.05, "node {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn beta_zero_rejected() {
        assert!(ModelParams::new(0.3, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn inverse_of_one_is_positive() {
        // Boggio-type positivity of the clamped resolvent on the disc
        let g = grid(65);
        let op = ClampedOperator::new(&params(0.0), g).unwrap();
        let w = op.solve(&vec![1.0; g.n_r() - 1]).unwrap();
        for (i, &v) in w.free_values().iter().enumerate() {
            assert!(v > 0.0, "node {i}: {v}");
        }
    }

    #[test]
    fn rhs_h_trivial_cases() {
        let g = grid(33);
        let v0 = PlateProfile::zeros(g);
        let h0 = rhs_h(&v0, &params(0.0)).unwrap();
        assert!(h0.iter().all(|&x| x == 0.0));
        let h1 = rhs_h(&v0, &params(2.5)).unwrap();
        for &x in &h1 {
            assert!((x + 2.5).abs() < 1e-10);
        }
        // eps = 0: h = -lambda / (1 + v)^2
        let p = ModelParams::new(0.0, 1.2, 1.0, 0.0, 0.0).unwrap();
        let v = PlateProfile::from_fn(g, |r| -0.3 * (1.0 - r * r) * (1.0 - r * r));
        let h = rhs_h(&v, &p).unwrap();
        for (x, &u) in h.iter().zip(v.values()) {
            assert!((x + 1.2 / ((1.0 + u) * (1.0 + u))).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_state_is_equilibrium_without_load() {
        let g = grid(33);
        let op = ClampedOperator::new(&params(0.0), g).unwrap();
        let mut u = PlateProfile::zeros(g);
        for _ in 0..5 {
            u = step(&u, 1e-3, &params(0.0), &op).unwrap();
        }
        assert!(u.max_abs() < 1e-14);
    }

    #[test]
    fn step_consistent_with_forward_euler_for_small_dt() {
        // one step equals u + dt (-A u + h(u)) up to O(dt^2); dt must sit
        // well below 1/||A|| for the expansion of the implicit solve to hold
        let g = grid(17);
        let p = params(0.8);
        let op = ClampedOperator::new(&p, g).unwrap();
        let u = PlateProfile::from_fn(g, |r| -0.1 * (1.0 - r * r) * (1.0 - r * r));
        let h = rhs_h(&u, &p).unwrap();
        let au = op.apply(&u);
        let mut errs = Vec::new();
        for dt in [2e-8, 1e-8] {
            let stepped = step(&u, dt, &p, &op).unwrap();
            let err = stepped
                .free_values()
                .iter()
                .enumerate()
                .fold(0.0f64, |m, (i, &s)| {
                    m.max((s - (u.free_values()[i] + dt * (-au[i] + h[i]))).abs())
                });
            errs.push(err);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.5, "O(dt^2) ratio {ratio}");
    }

    #[test]
    fn unloaded_decay_rate_matches_leading_eigenvalue() {
        // beta mu1 = k1^4 with k1 the first clamped-plate frequency root
        let mu1 = 104.3631055588;
        let g = grid(65);
        let p = params(0.0);
        let u0 = PlateProfile::from_fn(g, |r| -0.05 * (1.0 - r * r) * (1.0 - r * r));
        let dt = 1e-4;
        let trace = simulate(&u0, &p, 0.05, dt, SimTolerances::default()).unwrap();
        // fit the rate over a late window where the leading mode dominates
        let recs = &trace.records;
        let k0 = recs.len() / 2;
        let k1 = recs.len() - 2;
        let rate = -(recs[k1].l2_norm / recs[k0].l2_norm).ln()
            / (recs[k1].t - recs[k0].t);
        assert!((rate - mu1).abs() < 0.2 * mu1, "decay rate {rate} vs {mu1}");
    }

    #[test]
    fn temporal_self_convergence_first_order() {
        let g = grid(33);
        let p = params(3.0);
        let u0 = PlateProfile::zeros(g);
        let t_end = 0.02;
        let mut finals = Vec::new();
        for k in 0..4 {
            let dt = 2e-4 / (1 << k) as f64;
            let tols = SimTolerances { steady: 1e-14, ..Default::default() };
            let trace = simulate(&u0, &p, t_end, dt, tols).unwrap();
            finals.push(trace.final_profile);
        }
        let mut diffs = Vec::new();
        for w in finals.windows(2) {
            let d = w[0]
                .values()
                .iter()
                .zip(w[1].values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            diffs.push(d);
        }
        for w in diffs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.6 && ratio < 2.4, "first-order ratio {ratio}");
        }
    }

    #[test]
    fn small_gap_trajectory_matches_explicit_reference() {
        // eps = 0: g is explicit, so a hand-rolled integrator with the same
        // IMEX splitting must reproduce the trajectory to rounding
        let g = grid(33);
        let p = ModelParams::new(0.0, 2.0, 1.0, 0.0, 0.0).unwrap();
        let op = ClampedOperator::new(&p, g).unwrap();
        let dt = 1e-4;
        let lu = imex_matrix(&op, dt).factorize().unwrap();
        let mut u_ref = PlateProfile::zeros(g);
        let n_steps = 50;
        for _ in 0..n_steps {
            let rhs: Vec<f64> = u_ref
                .free_values()
                .iter()
                .zip(u_ref.values())
                .map(|(&ui, &full)| ui + dt * (-p.lambda / ((1.0 + full) * (1.0 + full))))
                .collect();
            u_ref = PlateProfile::from_free(g, &lu.solve(&rhs)).unwrap();
        }
        let tols = SimTolerances { steady: 1e-14, ..Default::default() };
        let trace = simulate(&PlateProfile::zeros(g), &p, n_steps as f64 * dt, dt, tols).unwrap();
        let dev = trace
            .final_profile
            .values()
            .iter()
            .zip(u_ref.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-8, "small-gap deviation {dev}");
    }

    #[test]
    fn overload_touches_down() {
        let g = grid(33);
        let p = params(60.0); // far above the fold
        let trace = simulate(&PlateProfile::zeros(g), &p, 10.0, 2e-4, SimTolerances::default())
            .unwrap();
        assert_eq!(trace.status, SimStatus::Touchdown);
        assert!(trace.terminal_time() < 10.0);
    }

    #[test]
    fn time_column_strictly_increasing() {
        let g = grid(17);
        let trace = simulate(
            &PlateProfile::zeros(g),
            &params(1.0),
            0.01,
            1e-3,
            SimTolerances::default(),
        )
        .unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[0].min_u > -1.0);
        }
    }
}
