//! Self-similar wedge and cone profiles.
//!
//! The similarity ODE `ν f''' + k a f f'' + m a (1 − f'²) = 0` (with
//! `k = (m+1)/2` for the wedge and `k = (m+3)/2` for the cone) is reduced to
//! the normalized Falkner-Skan form `g''' + g g'' + β(1 − g'²) = 0` through
//! `f(z) = L g(z / L)`, `L = sqrt(ν / (k a))`, `β = m / k`, and solved by
//! shooting on the wall shear `g''(0)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::interp::{bracket, hermite, hermite_slope, limit_monotone};
use crate::ode::{Dopri5, OdeError};

/// Nodes with `1 − f'` below this are dropped from a stored profile: the
/// shooting residual dominates them.
pub const TAIL_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shooting did not bracket the wall shear; last bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("shooting did not converge: |f'(end) - 1| = {miss:e} in bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64, miss: f64 },
    #[error("qualitative failure: {0}")]
    Qualitative(String),
    #[error("fit window error: {0}")]
    FitWindow(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Body geometry: a wedge (planar flow) or a cone (axisymmetric flow).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Planar,
    Axisymmetric,
}

impl Variant {
    /// Coefficient of `a f f''` in the similarity ODE.
    pub fn stretch(self, m: f64) -> f64 {
        match self {
            Variant::Planar => 0.5 * (m + 1.0),
            Variant::Axisymmetric => 0.5 * (m + 3.0),
        }
    }

    /// Coefficient `c` of `−η c a Y` in the Crocco-plane profile equation.
    pub fn crocco_c(self, m: f64) -> f64 {
        match self {
            Variant::Planar => 0.5 * (3.0 * m - 1.0),
            Variant::Axisymmetric => 1.5 * (m - 1.0),
        }
    }

    /// Exponent separating the two derivative-band regimes of the marched
    /// solution.
    pub fn regime_threshold(self) -> f64 {
        match self {
            Variant::Planar => 1.0 / 3.0,
            Variant::Axisymmetric => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Planar => "planar",
            Variant::Axisymmetric => "axisymmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityProblem {
    pub variant: Variant,
    pub m: f64,
    pub a: f64,
    pub nu: f64,
    /// Wall stream-function value in the un-normalized variable.
    pub f0: f64,
    /// Wall slip `f'(0)`.
    pub f1: f64,
}

impl SimilarityProblem {
    pub fn new(variant: Variant, m: f64, a: f64, nu: f64) -> Result<Self, SimilarityError> {
        Self::with_wall(variant, m, a, nu, 0.0, 0.0)
    }

    pub fn with_wall(
        variant: Variant,
        m: f64,
        a: f64,
        nu: f64,
        f0: f64,
        f1: f64,
    ) -> Result<Self, SimilarityError> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(SimilarityError::Domain(format!("m must be > 0, got {m}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(SimilarityError::Domain(format!("a must be > 0, got {a}")));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(SimilarityError::Domain(format!("nu must be > 0, got {nu}")));
        }
        if !(0.0..1.0).contains(&f1) {
            return Err(SimilarityError::Domain(format!(
                "wall slip must satisfy 0 <= f1 < 1, got {f1}"
            )));
        }
        if !f0.is_finite() {
            return Err(SimilarityError::Domain("f0 must be finite".into()));
        }
        Ok(Self {
            variant,
            m,
            a,
            nu,
            f0,
            f1,
        })
    }
}

/// Result of reducing a similarity problem to Falkner-Skan form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub beta: f64,
    pub scale_length: f64,
}

/// Wedge angle `π·2m/(m+1)` for outer flow `U ~ x^m`.
pub fn wedge_angle(m: f64) -> Result<f64, SimilarityError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(SimilarityError::Domain(format!("m must be > 0, got {m}")));
    }
    Ok(PI * 2.0 * m / (m + 1.0))
}

pub fn normalize(problem: &SimilarityProblem) -> Normalization {
    let k = problem.variant.stretch(problem.m);
    Normalization {
        beta: problem.m / k,
        scale_length: (problem.nu / (k * problem.a)).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub z_max: f64,
    pub shoot_tol: f64,
    pub ode_tol: f64,
    pub far_field_tol: f64,
    /// Spacing of the stored output grid.
    pub dz: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            z_max: 12.0,
            shoot_tol: 1e-10,
            ode_tol: 1e-13,
            far_field_tol: 1e-8,
            dz: 0.01,
        }
    }
}

/// A converged self-similar profile in normalized Falkner-Skan variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSolution {
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
    pub beta: f64,
    /// Length linking the un-normalized similarity variable to `z`.
    pub scale_length: f64,
    pub wall_shear: f64,
}

fn fs_rhs(beta: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] {
    move |y: &[f64; 3]| [y[1], y[2], -y[0] * y[2] - beta * (1.0 - y[1] * y[1])]
}

#[derive(Debug, Clone, Copy)]
enum Shot {
    /// `f'` reached 1 while `f''` was still positive.
    Over { miss: f64 },
    /// `f''` vanished (or `z_max` was reached) with `f' < 1`.
    Under { miss: f64 },
}

impl Shot {
    fn miss(self) -> f64 {
        match self {
            Shot::Over { miss } | Shot::Under { miss } => miss,
        }
    }
    fn is_over(self) -> bool {
        matches!(self, Shot::Over { .. })
    }
}

const EVENT_STRIDE: f64 = 0.02;

fn shoot(beta: f64, g0: f64, f1: f64, shear: f64, opts: &ShootingOptions) -> Result<Shot, SimilarityError> {
    let rhs = fs_rhs(beta);
    let mut stepper = Dopri5::new(opts.ode_tol, 0.05);
    let mut y = [g0, f1, shear];
    let mut z = 0.0;
    while z < opts.z_max {
        let z_next = (z + EVENT_STRIDE).min(opts.z_max);
        stepper.advance(&rhs, z, &mut y, z_next)?;
        z = z_next;
        if y[1] >= 1.0 {
            return Ok(Shot::Over { miss: y[1] - 1.0 });
        }
        if y[2] <= 0.0 {
            return Ok(Shot::Under { miss: y[1] - 1.0 });
        }
    }
    Ok(Shot::Under { miss: y[1] - 1.0 })
}

/// Shooting solve of `g''' + g g'' + β(1 − g'²) = 0`, `g(0) = f0`,
/// `g'(0) = f1`, `g' → 1`.
///
/// The wall shear is bracketed between an overshooting trajectory (`g'`
/// crosses 1) and an undershooting one (`g''` vanishes first), then refined by
/// Illinois regula falsi with a bisection safeguard until the bracket
/// collapses. The stored profile follows the undershooting side, which keeps
/// `g'' > 0` and `g' < 1` on every node.
pub fn solve_falkner_skan(
    beta: f64,
    f0: f64,
    f1: f64,
    opts: &ShootingOptions,
) -> Result<ProfileSolution, SimilarityError> {
    if !(beta > 0.0) && beta != 0.0 {
        return Err(SimilarityError::Domain(format!("beta must be >= 0, got {beta}")));
    }
    if !(0.0..1.0).contains(&f1) {
        return Err(SimilarityError::Domain(format!(
            "wall slip must satisfy 0 <= f1 < 1, got {f1}"
        )));
    }
    if !(opts.z_max > 1.0) || !(opts.dz > 0.0) {
        return Err(SimilarityError::Domain("z_max and dz must be positive".into()));
    }

    let mut lo = 0.05;
    let mut hi = 3.0;
    let mut s_lo = shoot(beta, f0, f1, lo, opts)?;
    let mut s_hi = shoot(beta, f0, f1, hi, opts)?;
    let mut expansions = 0;
    while s_lo.is_over() && expansions < 5 {
        lo *= 0.5;
        s_lo = shoot(beta, f0, f1, lo, opts)?;
        expansions += 1;
    }
    expansions = 0;
    while !s_hi.is_over() && expansions < 5 {
        hi *= 2.0;
        s_hi = shoot(beta, f0, f1, hi, opts)?;
        expansions += 1;
    }
    if s_lo.is_over() || !s_hi.is_over() {
        return Err(SimilarityError::NoBracket { lo, hi });
    }

    let (mut m_lo, mut m_hi) = (s_lo.miss(), s_hi.miss());
    let mut side = 0i8;
    for _ in 0..400 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut trial = (lo * m_hi - hi * m_lo) / (m_hi - m_lo);
        let width = hi - lo;
        if !trial.is_finite() || trial <= lo + 0.01 * width || trial >= hi - 0.01 * width {
            trial = 0.5 * (lo + hi);
        }
        if trial <= lo || trial >= hi {
            break;
        }
        let shot = shoot(beta, f0, f1, trial, opts)?;
        if shot.is_over() {
            hi = trial;
            m_hi = shot.miss();
            if side == 1 {
                m_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = trial;
            m_lo = shot.miss();
            if side == -1 {
                m_hi *= 0.5;
            }
            side = -1;
        }
    }

    let sol = integrate_profile(beta, f0, f1, lo, opts)?;
    let last = *sol.fp.last().unwrap();
    let miss = (last - 1.0).abs();
    if miss > opts.shoot_tol.max(opts.far_field_tol) {
        return Err(SimilarityError::NoConvergence { lo, hi, miss });
    }
    check_profile(&sol, opts)?;
    Ok(sol)
}

fn integrate_profile(
    beta: f64,
    f0: f64,
    f1: f64,
    shear: f64,
    opts: &ShootingOptions,
) -> Result<ProfileSolution, SimilarityError> {
    let rhs = fs_rhs(beta);
    let mut stepper = Dopri5::new(opts.ode_tol, opts.dz);
    let n_max = (opts.z_max / opts.dz).round() as usize;
    let mut y = [f0, f1, shear];
    let mut sol = ProfileSolution {
        z: vec![0.0],
        f: vec![f0],
        fp: vec![f1],
        fpp: vec![shear],
        beta,
        scale_length: 1.0,
        wall_shear: shear,
    };
    for i in 1..=n_max {
        let z0 = (i - 1) as f64 * opts.dz;
        let z1 = i as f64 * opts.dz;
        stepper.advance(&rhs, z0, &mut y, z1)?;
        // Integration noise eventually dominates the approach to 1; stop
        // before it can break monotonicity.
        if y[1] >= 1.0 || y[2] <= 0.0 || y[1] <= *sol.fp.last().unwrap() {
            break;
        }
        sol.z.push(z1);
        sol.f.push(y[0]);
        sol.fp.push(y[1]);
        sol.fpp.push(y[2]);
        if 1.0 - y[1] <= TAIL_FLOOR {
            break;
        }
    }
    Ok(sol)
}

fn check_profile(sol: &ProfileSolution, opts: &ShootingOptions) -> Result<(), SimilarityError> {
    let n = sol.z.len();
    if n < 3 {
        return Err(SimilarityError::Qualitative("profile has fewer than 3 nodes".into()));
    }
    if 1.0 - sol.fp[n - 1] > opts.far_field_tol {
        return Err(SimilarityError::Qualitative(format!(
            "far field not reached: 1 - f' = {:e} at z = {}",
            1.0 - sol.fp[n - 1],
            sol.z[n - 1]
        )));
    }
    for i in 0..n {
        if !(sol.fpp[i] > 0.0) {
            return Err(SimilarityError::Qualitative(format!("f'' <= 0 at z = {}", sol.z[i])));
        }
        if sol.fp[i] >= 1.0 {
            return Err(SimilarityError::Qualitative(format!("f' >= 1 at z = {}", sol.z[i])));
        }
        if i > 0 {
            if sol.fp[i] <= sol.fp[i - 1] {
                return Err(SimilarityError::Qualitative(format!(
                    "f' not increasing at z = {}",
                    sol.z[i]
                )));
            }
            if sol.f[i] < sol.f[i - 1] {
                return Err(SimilarityError::Qualitative(format!(
                    "f decreasing at z = {}",
                    sol.z[i]
                )));
            }
        }
    }
    Ok(())
}

/// Solve a similarity problem: normalize, shoot, and attach the length scale.
pub fn solve(problem: &SimilarityProblem, opts: &ShootingOptions) -> Result<ProfileSolution, SimilarityError> {
    let norm = normalize(problem);
    let g0 = problem.f0 / norm.scale_length;
    let mut sol = solve_falkner_skan(norm.beta, g0, problem.f1, opts)?;
    sol.scale_length = norm.scale_length;
    Ok(sol)
}

impl ProfileSolution {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().unwrap()
    }

    /// `g'''` from the ODE at node `i`.
    pub fn fppp(&self, i: usize) -> f64 {
        -self.f[i] * self.fpp[i] - self.beta * (1.0 - self.fp[i] * self.fp[i])
    }

    /// `(f, f', f'')` at `z`, Hermite-interpolated with the ODE derivatives.
    pub fn eval(&self, z: f64) -> Result<(f64, f64, f64), SimilarityError> {
        if !(z >= 0.0) {
            return Err(SimilarityError::Domain(format!("z must be >= 0, got {z}")));
        }
        let n = self.len();
        let z_end = self.z[n - 1];
        if z >= z_end {
            return Ok(if z == z_end {
                (self.f[n - 1], self.fp[n - 1], self.fpp[n - 1])
            } else {
                (self.f[n - 1] + (z - z_end), 1.0, 0.0)
            });
        }
        let i = bracket(&self.z, z);
        if z == self.z[i] {
            return Ok((self.f[i], self.fp[i], self.fpp[i]));
        }
        let (z0, z1) = (self.z[i], self.z[i + 1]);
        let f = hermite(z0, z1, self.f[i], self.f[i + 1], self.fp[i], self.fp[i + 1], z);
        let (d0, d1) = limit_monotone(z0, z1, self.fp[i], self.fp[i + 1], self.fpp[i], self.fpp[i + 1]);
        let fp = hermite(z0, z1, self.fp[i], self.fp[i + 1], d0, d1, z);
        let fpp = hermite(z0, z1, self.fpp[i], self.fpp[i + 1], self.fppp(i), self.fppp(i + 1), z);
        Ok((f, fp, fpp))
    }

    /// The `z` at which `f'(z) = eta`, by safeguarded Newton on the interpolant.
    pub fn invert_fp(&self, eta: f64) -> Result<f64, SimilarityError> {
        let n = self.len();
        if eta < self.fp[0] || eta > self.fp[n - 1] {
            return Err(SimilarityError::Domain(format!(
                "eta = {eta} outside attained range [{}, {}]",
                self.fp[0],
                self.fp[n - 1]
            )));
        }
        let i = bracket(&self.fp, eta);
        if eta == self.fp[i] {
            return Ok(self.z[i]);
        }
        if eta == self.fp[i + 1] {
            return Ok(self.z[i + 1]);
        }
        let (z0, z1) = (self.z[i], self.z[i + 1]);
        let (d0, d1) = limit_monotone(z0, z1, self.fp[i], self.fp[i + 1], self.fpp[i], self.fpp[i + 1]);
        let g = |z: f64| hermite(z0, z1, self.fp[i], self.fp[i + 1], d0, d1, z) - eta;
        let dg = |z: f64| hermite_slope(z0, z1, self.fp[i], self.fp[i + 1], d0, d1, z);
        let (mut a, mut b) = (z0, z1);
        let mut z = z0 + (z1 - z0) * (eta - self.fp[i]) / (self.fp[i + 1] - self.fp[i]);
        for _ in 0..100 {
            let v = g(z);
            if v == 0.0 {
                return Ok(z);
            }
            if v < 0.0 {
                a = z;
            } else {
                b = z;
            }
            let d = dg(z);
            let mut next = if d > 0.0 { z - v / d } else { f64::NAN };
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - z).abs() <= 1e-15 * z.abs().max(1.0) || b - a <= 1e-15 {
                return Ok(next);
            }
            z = next;
        }
        Ok(z)
    }

    /// Sup-norm residual of the un-normalized similarity ODE after rescaling
    /// by `scale_length`, with `F'''` taken by fourth-order central
    /// differences of `F''`.
    pub fn rescaled_residual(&self, problem: &SimilarityProblem) -> f64 {
        let l = self.scale_length;
        let k = problem.variant.stretch(problem.m);
        let (m, a, nu) = (problem.m, problem.a, problem.nu);
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 2..n.saturating_sub(2) {
            let hz = (self.z[i + 1] - self.z[i - 1]) * 0.5 * l;
            let big_f = l * self.f[i];
            let big_fp = self.fp[i];
            let big_fpp = |j: usize| self.fpp[j] / l;
            let big_fppp = (big_fpp(i - 2) - 8.0 * big_fpp(i - 1) + 8.0 * big_fpp(i + 1) - big_fpp(i + 2))
                / (12.0 * hz);
            let r = nu * big_fppp + k * a * big_f * big_fpp(i) + m * a * (1.0 - big_fp * big_fp);
            worst = worst.max(r.abs());
        }
        worst
    }
}

/// Least-squares tail fit of `1 − f' ≈ c1 z^{−1−2β} exp(−z²/2 − c2 z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFit {
    pub c1: f64,
    pub c2: f64,
    pub fit_window: (f64, f64),
    pub rms_residual: f64,
    pub nodes: usize,
}

pub fn asymptotic_fit(sol: &ProfileSolution) -> Result<AsymptoticFit, SimilarityError> {
    asymptotic_fit_window(sol, 1e-12, 0.1)
}

/// Fit restricted to nodes with `lo < 1 − f' < hi`.
pub fn asymptotic_fit_window(sol: &ProfileSolution, lo: f64, hi: f64) -> Result<AsymptoticFit, SimilarityError> {
    let beta = sol.beta;
    let pts: Vec<(f64, f64)> = sol
        .z
        .iter()
        .zip(&sol.fp)
        .filter(|(z, fp)| **z > 0.0 && 1.0 - **fp > lo && 1.0 - **fp < hi)
        .map(|(&z, &fp)| {
            // Move the known terms to the left: what remains is ln c1 − c2 z.
            let lhs = (1.0 - fp).ln() + (1.0 + 2.0 * beta) * z.ln() + 0.5 * z * z;
            (z, lhs)
        })
        .collect();
    if pts.len() < 20 {
        return Err(SimilarityError::FitWindow(format!(
            "{} tail nodes in ({lo:e}, {hi:e}), need at least 20",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(AsymptoticFit {
        c1: intercept.exp(),
        c2: -slope,
        fit_window: (pts[0].0, pts[pts.len() - 1].0),
        rms_residual: rms,
        nodes: pts.len(),
    })
}
