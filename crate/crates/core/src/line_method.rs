//! Marching the Crocco-plane equation
//!
//! ```text
//! ν ω² ω_ηη − η A ω_ξ + (η² − 1) B ω_η − η C ω = 0,
//! ω(ξ, 1) = 0,   ν ω ω_η − v1 ω + B = 0 at η = 0
//! ```
//!
//! in `ξ` by backward differences. Each slice is a two-point boundary-value
//! problem solved by damped Newton on the `ε`-regularized operator
//! `(ν ω² + ε) ω_ηη − …`, with `ε` driven to zero by continuation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::crocco_profile::CroccoProfile;
use crate::grid::{sigma_t, EtaGrid};
use crate::scenario::{Scenario, Tolerances};
use crate::similarity::Variant;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineError {
    #[error("geometry error: r1({xi}) = {r1} is not positive")]
    Geometry { xi: f64, r1: f64 },
    #[error("continuation failed at eps = {eps:e}: Newton stagnated with residual {residual:e}")]
    Stagnation { eps: f64, residual: f64 },
    #[error("step rejected at eps = {eps:e}: no damped step keeps the slice positive")]
    StepRejected { eps: f64 },
    #[error("singular Jacobian at row {row}")]
    Singular { row: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Coefficients of the Crocco-plane equation at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub v1: f64,
}

/// Multiplier of `V` in `C`.
pub fn c_factor(variant: Variant, m: f64, planar_style: bool) -> f64 {
    if planar_style {
        Variant::Planar.crocco_c(m)
    } else {
        variant.crocco_c(m)
    }
}

pub fn coefficients(s: &Scenario, xi: f64) -> Result<Coefficients, LineError> {
    if !(xi >= 0.0) {
        return Err(LineError::Domain(format!("xi must be >= 0, got {xi}")));
    }
    let m = s.flow.m;
    let v = s.v_outer(xi);
    let vx = s.v_outer_x(xi);
    let cf = c_factor(s.variant(), m, s.tolerances.axisymmetric_planar_c);
    let mut c = cf * v + xi * vx;
    if s.variant() == Variant::Axisymmetric {
        let r1 = s.r1(xi);
        if !(r1 > 0.0) {
            return Err(LineError::Geometry { xi, r1 });
        }
        c -= xi * s.r1_x(xi) / r1 * v;
    }
    Ok(Coefficients {
        a: xi * v,
        b: m * v + xi * vx,
        c,
        v1: s.v1(xi),
    })
}

/// One slice problem: unknowns `ω_0 … ω_{N−1}`, with `ω_N = 0`.
#[derive(Debug, Clone, Copy)]
pub struct SliceProblem<'a> {
    pub grid: &'a EtaGrid,
    pub prev: &'a [f64],
    pub coef: Coefficients,
    pub nu: f64,
    pub h: f64,
    pub mu_k: f64,
    /// Right-hand side added to interior rows (manufactured solutions).
    pub source: Option<&'a [f64]>,
    /// Right-hand side added to the wall row.
    pub wall_source: f64,
}

/// Interior rows, wall row, and `ω_N` for the last entry.
pub fn assemble_slice_residual(p: &SliceProblem, omega: &[f64], eps: f64) -> Vec<f64> {
    rows(p, omega, eps).0
}

/// Residual rows together with the sum of magnitudes of the terms in each
/// row, which sets the scale of roundoff in that row.
fn rows(p: &SliceProblem, omega: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
    let g = p.grid;
    let n = g.intervals();
    let Coefficients { a, b, c, v1 } = p.coef;
    let drift = (a + p.mu_k * p.h) / p.h;
    let mut r = vec![0.0; n + 1];
    let mut scale = vec![0.0; n + 1];
    // Stencil magnitudes stand in for the differences in the scale, since
    // the differences themselves can cancel far below their roundoff.
    let spread = |w: [f64; 3], j: usize| w[0].abs() * omega[j - 1] + w[1].abs() * omega[j] + w[2].abs() * omega[j + 1];
    let dw = g.d1_wall();
    let wall = [p.nu * omega[0] * g.diff1(omega, 0), -v1 * omega[0], b, -p.wall_source];
    r[0] = wall.iter().sum();
    scale[0] = p.nu * omega[0] * spread(dw, 1) + wall[1..].iter().map(|t| t.abs()).sum::<f64>();
    for j in 1..n {
        let eta = g.eta[j];
        let w = omega[j];
        let diff = p.nu * w * w + eps;
        let adv = (eta * eta - 1.0) * b;
        let terms = [
            diff * g.diff2(omega, j),
            -eta * drift * (w - p.prev[j]),
            adv * g.diff1(omega, j),
            -eta * c * w,
            -p.source.map_or(0.0, |s| s[j]),
        ];
        r[j] = terms.iter().sum();
        scale[j] = diff * spread(g.d2(j), j)
            + eta * drift * (w.abs() + p.prev[j].abs())
            + adv.abs() * spread(g.d1(j), j)
            + terms[3..].iter().map(|t| t.abs()).sum::<f64>();
    }
    r[n] = omega[n];
    scale[n] = 1.0;
    (r, scale)
}

/// `max_j |r_j| / s_j` over rows below `η = 1`, with `s_j` the sum of the
/// magnitudes of the terms of row `j`.
pub fn weighted_norm(r: &[f64], scale: &[f64]) -> f64 {
    let n = r.len() - 1;
    (0..n)
        .map(|j| r[j].abs() / scale[j].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Root-sum-square of the weighted rows; the line-search merit.
fn merit(r: &[f64], scale: &[f64]) -> f64 {
    let n = r.len() - 1;
    (0..n)
        .map(|j| (r[j] / scale[j].max(f64::MIN_POSITIVE)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Weighted residual of a candidate slice.
pub fn slice_residual_norm(p: &SliceProblem, omega: &[f64], eps: f64) -> f64 {
    let (r, s) = rows(p, omega, eps);
    weighted_norm(&r, &s)
}

/// Thomas solve of `l x_{j−1} + d x_j + u x_{j+1} = rhs`.
fn thomas(l: &[f64], d: &[f64], u: &[f64], rhs: &[f64]) -> Result<Vec<f64>, LineError> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut piv = d[0];
    if piv == 0.0 || !piv.is_finite() {
        return Err(LineError::Singular { row: 0 });
    }
    cp[0] = u[0] / piv;
    dp[0] = rhs[0] / piv;
    for i in 1..n {
        piv = d[i] - l[i] * cp[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(LineError::Singular { row: i });
        }
        cp[i] = if i + 1 < n { u[i] / piv } else { 0.0 };
        dp[i] = (rhs[i] - l[i] * dp[i - 1]) / piv;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Newton step `δ` solving `J δ = −r` for the unknowns `0..N`.
fn newton_step(p: &SliceProblem, omega: &[f64], r: &[f64], eps: f64) -> Result<Vec<f64>, LineError> {
    let g = p.grid;
    let n = g.intervals();
    let Coefficients { a, b, c, v1 } = p.coef;
    let drift = (a + p.mu_k * p.h) / p.h;
    let mut l = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut rhs: Vec<f64> = r[..n].iter().map(|v| -v).collect();

    let w = g.d1_wall();
    let slope0 = g.diff1(omega, 0);
    d[0] = p.nu * slope0 + p.nu * omega[0] * w[0] - v1;
    u[0] = p.nu * omega[0] * w[1];
    let x2 = p.nu * omega[0] * w[2];

    for j in 1..n {
        let eta = g.eta[j];
        let wj = omega[j];
        let d1 = g.d1(j);
        let d2 = g.d2(j);
        let diff = p.nu * wj * wj + eps;
        let adv = (eta * eta - 1.0) * b;
        l[j] = diff * d2[0] + adv * d1[0];
        d[j] = 2.0 * p.nu * wj * g.diff2(omega, j) + diff * d2[1] - eta * drift + adv * d1[1] - eta * c;
        u[j] = diff * d2[2] + adv * d1[2];
    }
    u[n - 1] = 0.0;

    // Fold the third wall entry into the tridiagonal band using row 1.
    if x2 != 0.0 {
        if u[1] == 0.0 {
            return Err(LineError::Singular { row: 1 });
        }
        let f = x2 / u[1];
        d[0] -= f * l[1];
        u[0] -= f * d[1];
        rhs[0] -= f * rhs[1];
    }
    let mut delta = thomas(&l, &d, &u, &rhs)?;
    delta.push(0.0);
    Ok(delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    pub newton_tol: f64,
    pub eps0_scale: f64,
    pub eps_factor: f64,
    pub eps_min: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// Finish every slice with an unregularized (`ε = 0`) Newton stage.
    pub polish: bool,
    pub mu_star: Option<f64>,
    pub mu_env: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

impl LineOptions {
    pub fn from_tolerances(t: &Tolerances) -> Self {
        Self {
            newton_tol: t.newton_tol,
            eps0_scale: t.eps0_scale,
            eps_factor: t.eps_factor,
            eps_min: t.eps_min,
            max_newton: 60,
            max_halvings: 8,
            polish: true,
            mu_star: t.mu_star,
            mu_env: t.mu,
        }
    }

    /// The `ε` values visited for a slice whose warm start peaks at `peak`.
    pub fn eps_schedule(&self, peak: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut eps = self.eps0_scale * peak * peak;
        while eps >= self.eps_min {
            out.push(eps);
            eps /= self.eps_factor;
        }
        if self.polish || out.is_empty() {
            out.push(0.0);
        }
        out
    }
}

/// Per-slice record.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDiag {
    pub k: usize,
    pub xi: f64,
    pub iterations: usize,
    pub residual: f64,
    pub robin_residual: f64,
    pub min_omega: f64,
    pub eps: f64,
    pub eps_path: Vec<f64>,
    /// Sup-norm change of the slice from one `ε` stage to the next.
    pub stage_diffs: Vec<f64>,
    /// Fitted `min ω/(1−η)` and `max ω/((1−η)σ)`.
    pub k1: f64,
    pub k2: f64,
}

/// Damped Newton at fixed `ε`. Regularized stages only steer the
/// continuation and also stop once the Newton correction is negligible,
/// since `ε ω_ηη` near `η = 1` puts the roundoff floor of the weighted
/// residual above `newton_tol`. The `ε = 0` stage must meet `newton_tol`.
fn newton(
    p: &SliceProblem,
    omega: &mut [f64],
    eps: f64,
    opts: &LineOptions,
) -> Result<(usize, f64), LineError> {
    let n = p.grid.intervals();
    let (mut r, s0) = rows(p, omega, eps);
    let mut norm = weighted_norm(&r, &s0);
    let mut fit = merit(&r, &s0);
    let mut iterations = 0;
    while iterations < opts.max_newton {
        if norm <= opts.newton_tol {
            return Ok((iterations, norm));
        }
        iterations += 1;
        let delta = newton_step(p, omega, &r, eps)?;
        let rel = (0..n).map(|j| delta[j].abs() / omega[j]).fold(0.0, f64::max);
        if eps > 0.0 && rel <= 1e-10 {
            for (w, d) in omega.iter_mut().zip(&delta) {
                *w += d;
            }
            return Ok((iterations, slice_residual_norm(p, omega, eps)));
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut any_positive = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = omega.iter().zip(&delta).map(|(w, d)| w + alpha * d).collect();
            if trial[..n].iter().all(|v| *v > 0.0) {
                any_positive = true;
                let (rt, st) = rows(p, &trial, eps);
                let nt = weighted_norm(&rt, &st);
                let ft = merit(&rt, &st);
                if nt < norm || ft < fit {
                    accepted = Some((trial, rt, nt, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, rt, nt, ft)) => {
                omega.copy_from_slice(&trial);
                r = rt;
                norm = nt;
                fit = ft;
            }
            None if !any_positive => return Err(LineError::StepRejected { eps }),
            None if eps > 0.0 && rel <= 1e-6 => return Ok((iterations, norm)),
            None => break,
        }
    }
    if norm <= opts.newton_tol {
        Ok((iterations, norm))
    } else {
        Err(LineError::Stagnation { eps, residual: norm })
    }
}

/// `(K1, K2)` of `K1 (1−η) ≤ ω ≤ K2 (1−η) σ` over nodes below 1.
pub fn fit_k1_k2(grid: &EtaGrid, omega: &[f64], mu: f64) -> (f64, f64) {
    let n = grid.intervals();
    let mut k1 = f64::INFINITY;
    let mut k2: f64 = 0.0;
    for j in 0..n {
        let t = grid.one_minus[j];
        k1 = k1.min(omega[j] / t);
        k2 = k2.max(omega[j] / (t * sigma_t(t, mu)));
    }
    (k1, k2)
}

/// Solve one slice by `ε`-continuation from `warm`.
pub fn solve_slice(p: &SliceProblem, warm: &[f64], opts: &LineOptions) -> Result<(Vec<f64>, SliceDiag), LineError> {
    let n = p.grid.intervals();
    if warm.len() != n + 1 || p.prev.len() != n + 1 {
        return Err(LineError::Domain("slice length does not match the grid".into()));
    }
    let mut omega = warm.to_vec();
    omega[n] = 0.0;
    let peak = warm.iter().cloned().fold(0.0, f64::max);
    let schedule = opts.eps_schedule(peak);
    let mut iterations = 0;
    let mut residual = f64::NAN;
    let mut stage_diffs = Vec::with_capacity(schedule.len());
    for &eps in &schedule {
        let before = omega.clone();
        let (it, res) = newton(p, &mut omega, eps, opts)?;
        iterations += it;
        residual = res;
        stage_diffs.push(
            omega
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    let (r, scale) = rows(p, &omega, 0.0);
    let final_eps = *schedule.last().unwrap();
    if final_eps == 0.0 {
        residual = weighted_norm(&r, &scale);
    }
    let (k1, k2) = fit_k1_k2(p.grid, &omega, opts.mu_env);
    if !(k1 > 0.0 && k2.is_finite()) {
        return Err(LineError::Domain(format!("slice bounds degenerate: K1 = {k1}, K2 = {k2}")));
    }
    let diag = SliceDiag {
        k: 0,
        xi: 0.0,
        iterations,
        residual,
        robin_residual: r[0].abs(),
        min_omega: omega[..n].iter().cloned().fold(f64::INFINITY, f64::min),
        eps: final_eps,
        eps_path: schedule,
        stage_diffs,
        k1,
        k2,
    };
    Ok((omega, diag))
}

/// The marched field `ω(ξ_k, η_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CroccoField {
    pub grid: EtaGrid,
    pub h: f64,
    pub xi: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    /// One entry per slice; slice 0 is the tip profile and carries no solve.
    pub diag: Vec<SliceDiag>,
    pub mu_schedule: Vec<f64>,
    pub requested_extent: f64,
}

impl CroccoField {
    pub fn slices(&self) -> usize {
        self.omega.len()
    }

    pub fn attained_extent(&self) -> f64 {
        *self.xi.last().unwrap()
    }

    /// `ω(ξ, η_j)` for every node, linear in `ξ` between slices.
    pub fn slice_at(&self, xi: f64) -> Result<Vec<f64>, LineError> {
        let top = self.attained_extent();
        if !(xi >= 0.0 && xi <= top * (1.0 + 1e-12)) {
            return Err(LineError::Domain(format!("xi = {xi} outside [0, {top}]")));
        }
        let k = ((xi / self.h).floor() as usize).min(self.slices() - 1);
        if k + 1 >= self.slices() {
            return Ok(self.omega[k].clone());
        }
        let t = (xi - self.xi[k]) / (self.xi[k + 1] - self.xi[k]);
        Ok(self.omega[k]
            .iter()
            .zip(&self.omega[k + 1])
            .map(|(a, b)| a * (1.0 - t) + b * t)
            .collect())
    }

    /// Sup over slices and nodes of `|ω^k − Y|`.
    pub fn sup_deviation(&self, y: &[f64]) -> f64 {
        self.omega
            .iter()
            .flat_map(|s| s.iter().zip(y).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Sup over shared `ξ` stations of the difference to `other`, which may
    /// use a different step.
    pub fn sup_difference(&self, other: &CroccoField) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &xi) in self.xi.iter().enumerate() {
            let Ok(o) = other.slice_at(xi) else { continue };
            for (a, b) in self.omega[k].iter().zip(&o) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Result of a march: the field up to the attained extent and the error
/// that stopped it early, if any.
#[derive(Debug, Clone)]
pub struct MarchOutcome {
    pub field: CroccoField,
    pub failure: Option<(usize, LineError)>,
}

impl MarchOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Stabilization constant `μ*`: zero for `m < 1`, else the configured value
/// or `2 sup B` over the slice stations.
pub fn mu_star(s: &Scenario, opts: &LineOptions, steps: usize) -> Result<f64, LineError> {
    if s.flow.m < 1.0 {
        return Ok(0.0);
    }
    if let Some(v) = opts.mu_star {
        return Ok(v);
    }
    let mut sup_b: f64 = 0.0;
    for k in 0..=steps {
        sup_b = sup_b.max(coefficients(s, k as f64 * s.grid.h)?.b);
    }
    Ok(2.0 * sup_b)
}

pub fn march(s: &Scenario, profile: &CroccoProfile, opts: &LineOptions) -> Result<MarchOutcome, LineError> {
    let grid = &profile.grid;
    let h = s.grid.h;
    let steps = (s.grid.x_extent / h).round() as usize;
    let mu = mu_star(s, opts, steps)?;
    let mut field = CroccoField {
        grid: grid.clone(),
        h,
        xi: vec![0.0],
        omega: vec![profile.y.clone()],
        diag: vec![SliceDiag {
            k: 0,
            xi: 0.0,
            iterations: 0,
            residual: 0.0,
            robin_residual: profile.robin_residual(),
            min_omega: profile.y[..grid.intervals()].iter().cloned().fold(f64::INFINITY, f64::min),
            eps: 0.0,
            eps_path: vec![],
            stage_diffs: vec![],
            k1: f64::NAN,
            k2: f64::NAN,
        }],
        mu_schedule: vec![0.0],
        requested_extent: s.grid.x_extent,
    };
    let (k1, k2) = fit_k1_k2(grid, &profile.y, opts.mu_env);
    field.diag[0].k1 = k1;
    field.diag[0].k2 = k2;

    for k in 1..=steps {
        let xi = k as f64 * h;
        let coef = coefficients(s, xi)?;
        let prev = field.omega[k - 1].clone();
        let p = SliceProblem {
            grid,
            prev: &prev,
            coef,
            nu: s.flow.nu,
            h,
            mu_k: mu,
            source: None,
            wall_source: 0.0,
        };
        match solve_slice(&p, &prev, opts) {
            Ok((omega, mut diag)) => {
                diag.k = k;
                diag.xi = xi;
                field.xi.push(xi);
                field.omega.push(omega);
                field.diag.push(diag);
                field.mu_schedule.push(mu);
            }
            Err(e) => {
                return Ok(MarchOutcome {
                    field,
                    failure: Some((k, e)),
                })
            }
        }
    }
    Ok(MarchOutcome { field, failure: None })
}

/// Re-solve every slice from a warm start with a smooth random `±10%`
/// multiplicative perturbation and return the largest sup-norm disagreement with the stored field.
pub fn uniqueness_probe(s: &Scenario, field: &CroccoField, opts: &LineOptions, seed: u64) -> Result<f64, LineError> {
    let grid = &field.grid;
    let n = grid.intervals();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 1..field.slices() {
        let prev = &field.omega[k - 1];
        // Smooth factor 1 + g(η) with |g| ≤ 0.1 from four random cosine modes.
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm: f64 = c.iter().map(|v: &f64| v.abs()).sum::<f64>().max(1e-12);
        let mut warm = prev.clone();
        for (j, w) in warm[..n].iter_mut().enumerate() {
            let eta = grid.eta[j];
            let g: f64 = c
                .iter()
                .enumerate()
                .map(|(i, ci)| ci * (i as f64 * std::f64::consts::PI * eta).cos())
                .sum();
            *w *= 1.0 + 0.1 * g / norm;
        }
        let p = SliceProblem {
            grid,
            prev,
            coef: coefficients(s, field.xi[k])?,
            nu: s.flow.nu,
            h: field.h,
            mu_k: field.mu_schedule[k],
            source: None,
            wall_source: 0.0,
        };
        let (omega, _) = solve_slice(&p, &warm, opts)?;
        for (a, b) in omega.iter().zip(&field.omega[k]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Solve a single slice whose exact solution is `w(η)` (given with its first
/// two derivatives) by injecting the matching source terms; returns the
/// sup-norm error.
pub fn manufactured_error(
    grid: &EtaGrid,
    coef: Coefficients,
    nu: f64,
    h: f64,
    exact: impl Fn(f64) -> (f64, f64, f64),
    opts: &LineOptions,
) -> Result<f64, LineError> {
    let n = grid.intervals();
    let w: Vec<f64> = grid.eta.iter().map(|&e| exact(e).0).collect();
    let source: Vec<f64> = grid
        .eta
        .iter()
        .map(|&e| {
            let (v, d1, d2) = exact(e);
            nu * v * v * d2 + (e * e - 1.0) * coef.b * d1 - e * coef.c * v
        })
        .collect();
    let (w0, d0, _) = exact(0.0);
    let p = SliceProblem {
        grid,
        prev: &w,
        coef,
        nu,
        h,
        mu_k: 0.0,
        source: Some(&source),
        wall_source: nu * w0 * d0 - coef.v1 * w0 + coef.b,
    };
    let (omega, _) = solve_slice(&p, &w, opts)?;
    Ok((0..=n).map(|j| (omega[j] - w[j]).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositive,
    NonNegativeSlope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationFlag {
    pub k: usize,
    pub node: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// Smallest constants with `Y(1 − M11 ξ) ≤ ω ≤ Y(1 + M12 ξ)`.
    pub m11: f64,
    pub m12: f64,
    /// `max |ω^k − ω^{k−1}| / (h Y)`.
    pub m13: f64,
    /// `Y_η(1 + M14 ξ) ≤ ω_η ≤ Y_η(1 − M15 ξ)`, used when `m` is at or
    /// above the regime threshold.
    pub m14_m15: Option<(f64, f64)>,
    /// `−M16 σ ≤ ω_η ≤ −M17 σ`, used below the threshold.
    pub m16_m17: Option<(f64, f64)>,
    /// `−M18 ≤ ω ω_ηη ≤ −M19`.
    pub m18: f64,
    pub m19: f64,
    pub flags: Vec<ViolationFlag>,
}

impl SandwichReport {
    pub fn constants_finite(&self) -> bool {
        let band = self
            .m14_m15
            .or(self.m16_m17)
            .map(|(a, b)| a.is_finite() && b.is_finite())
            .unwrap_or(false);
        self.m11.is_finite() && self.m12.is_finite() && self.m13.is_finite() && band && self.m18.is_finite()
    }
}

pub fn sandwich_check(field: &CroccoField, y: &[f64], variant: Variant, m: f64, mu: f64) -> SandwichReport {
    let g = &field.grid;
    let n = g.intervals();
    let sig = g.sigma_nodes(mu);
    let yd: Vec<f64> = (0..n).map(|j| g.diff1(y, j)).collect();
    let upper_regime = m >= variant.regime_threshold();
    let mut rep = SandwichReport {
        m11: 0.0,
        m12: 0.0,
        m13: 0.0,
        m14_m15: None,
        m16_m17: None,
        m18: f64::NEG_INFINITY,
        m19: f64::INFINITY,
        flags: Vec::new(),
    };
    let (mut m14, mut m15) = (0.0f64, 0.0f64);
    let (mut m16, mut m17) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..field.slices() {
        let w = &field.omega[k];
        let xi = field.xi[k];
        for j in 0..n {
            if !(w[j] > 0.0) {
                rep.flags.push(ViolationFlag {
                    k,
                    node: j,
                    kind: ViolationKind::NonPositive,
                });
                continue;
            }
            let wd = g.diff1(w, j);
            if !(wd < 0.0) {
                rep.flags.push(ViolationFlag {
                    k,
                    node: j,
                    kind: ViolationKind::NonNegativeSlope,
                });
            }
            if j > 0 {
                let curv = -w[j] * g.diff2(w, j);
                rep.m18 = rep.m18.max(curv);
                rep.m19 = rep.m19.min(curv);
            }
            if upper_regime {
                if k > 0 {
                    let tau = wd / yd[j];
                    m14 = m14.max((tau - 1.0) / xi);
                    m15 = m15.max((1.0 - tau) / xi);
                }
            } else {
                let q = -wd / sig[j];
                m16 = m16.max(q);
                m17 = m17.min(q);
            }
            if k > 0 {
                let ratio = w[j] / y[j];
                rep.m11 = rep.m11.max((1.0 - ratio) / xi);
                rep.m12 = rep.m12.max((ratio - 1.0) / xi);
                let step = (w[j] - field.omega[k - 1][j]).abs() / (field.h * y[j]);
                rep.m13 = rep.m13.max(step);
            }
        }
    }
    if upper_regime {
        rep.m14_m15 = Some((m14, m15));
    } else {
        rep.m16_m17 = Some((m16, m17));
    }
    rep
}
