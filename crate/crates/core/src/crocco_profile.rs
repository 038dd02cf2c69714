//! The tip slice `Y(η) = ω(0, η)` of the Crocco-plane problem.
//!
//! Two independent constructions are provided: mapping a self-similar
//! profile through `η = f'`, `Y = f''`, and damped fixed-point iteration on
//! the integral form
//!
//! ```text
//! ν Y(η) = ∫_η^1 (1−s)(m + m s + k s) a / Y ds + (1−η) k a ∫_0^η s / Y ds
//! ```
//!
//! whose derivative gives `Y_η` in closed form. Near `η = 1` the profile
//! behaves like `(1−η)σ(η)`, so `1/Y` is written as `φ / ((1−s)σ)` with a
//! slowly varying amplitude `φ` and integrated with product weights.

use thiserror::Error;

use crate::grid::{sigma_t, EtaGrid, GridError};
use crate::similarity::{ProfileSolution, SimilarityError, SimilarityProblem, Variant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CroccoError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("eta = {eta} lies beyond the attained f' range (max {fp_max})")]
    Extrapolation { eta: f64, fp_max: f64 },
    #[error("fixed-point iteration did not converge in {iterations} iterations (last update {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("iterate lost positivity at node {node} (eta = {eta}) for {streak} consecutive iterations")]
    Positivity { node: usize, eta: f64, streak: usize },
    #[error("envelope constant {constant} is not positive and finite (value {value:e}, node {node}, eta = {eta})")]
    EnvelopeViolation {
        constant: &'static str,
        value: f64,
        node: usize,
        eta: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSource {
    Similarity,
    IntegralEquation,
}

/// Physical parameters attached to a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub variant: Variant,
    pub m: f64,
    pub a: f64,
    pub nu: f64,
    /// Wall transpiration coefficient at the tip (`v1(0)`).
    pub b: f64,
}

impl ProfileParams {
    pub fn stretch(&self) -> f64 {
        self.variant.stretch(self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CroccoProfile {
    pub grid: EtaGrid,
    pub y: Vec<f64>,
    /// `Y_η`; the last entry is `−∞`, the limit at `η = 1`.
    pub yp: Vec<f64>,
    pub source: ProfileSource,
    pub params: ProfileParams,
}

/// Quadrature used for the integral operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Linear amplitude against the exact `σ`-weights on every cell.
    Product,
    /// Plain trapezoid, with the envelope form of `1/Y` on the last cell only.
    TrapezoidEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOptions {
    pub quadrature: Quadrature,
    pub fp_tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Envelope parameter used by the endpoint quadrature.
    pub mu: f64,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self {
            quadrature: Quadrature::Product,
            fp_tol: 1e-10,
            max_iter: 20_000,
            damping: 0.5,
            mu: crate::grid::default_mu(),
        }
    }
}

/// Map a similarity profile onto the η-grid. `Y = F''` and
/// `Y_η = F''' / F''` in the dimensional similarity variable.
pub fn from_similarity(
    sol: &ProfileSolution,
    problem: &SimilarityProblem,
    grid: &EtaGrid,
) -> Result<CroccoProfile, CroccoError> {
    let n = grid.intervals();
    let l = sol.scale_length;
    let fp_max = *sol.fp.last().unwrap();
    let mut y = vec![0.0; n + 1];
    let mut yp = vec![f64::NEG_INFINITY; n + 1];
    for j in 0..n {
        let eta = grid.eta[j];
        if eta > fp_max || eta < sol.fp[0] {
            return Err(CroccoError::Extrapolation { eta, fp_max });
        }
        let z = sol.invert_fp(eta)?;
        let (f, fp, fpp) = sol.eval(z)?;
        let fppp = -f * fpp - sol.beta * (1.0 - fp * fp);
        y[j] = fpp / l;
        yp[j] = fppp / (fpp * l);
    }
    let k = problem.variant.stretch(problem.m);
    Ok(CroccoProfile {
        grid: grid.clone(),
        y,
        yp,
        source: ProfileSource::Similarity,
        params: ProfileParams {
            variant: problem.variant,
            m: problem.m,
            a: problem.a,
            nu: problem.nu,
            b: -k * problem.a * problem.f0,
        },
    })
}

/// Precomputed product weights and node data for the integral operator.
struct Operator<'g> {
    grid: &'g EtaGrid,
    quadrature: Quadrature,
    sig: Vec<f64>,
    w0: Vec<[f64; 2]>,
    w1: Vec<[f64; 2]>,
    m: f64,
    a: f64,
    k: f64,
    nu: f64,
}

impl<'g> Operator<'g> {
    fn new(grid: &'g EtaGrid, params: &ProfileParams, mu: f64, quadrature: Quadrature) -> Self {
        Self {
            grid,
            quadrature,
            sig: grid.sigma_nodes(mu),
            w0: grid.weights_inv_sigma(mu),
            w1: grid.weights_inv_t_sigma(mu),
            m: params.m,
            a: params.a,
            k: params.stretch(),
            nu: params.nu,
        }
    }

    /// Amplitude `(1−η)σ/Y` at every node, continued flat to `η = 1`.
    fn amplitude(&self, y: &[f64]) -> Vec<f64> {
        let n = self.grid.intervals();
        let mut phi: Vec<f64> = (0..n)
            .map(|j| self.grid.one_minus[j] * self.sig[j] / y[j])
            .collect();
        phi.push(phi[n - 1]);
        phi
    }

    /// `∫_0^{η_j} s / Y ds` for `j = 0..N−1`.
    fn inner(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.grid.intervals();
        let eta = &self.grid.eta;
        let mut out = vec![0.0; n];
        let t = &self.grid.one_minus;
        for i in 0..n - 1 {
            let cell = match self.quadrature {
                Quadrature::Product => self.w1[i][0] * eta[i] * phi[i] + self.w1[i][1] * eta[i + 1] * phi[i + 1],
                Quadrature::TrapezoidEnvelope => {
                    let f = |j: usize| eta[j] * phi[j] / (t[j] * self.sig[j]);
                    0.5 * (t[i] - t[i + 1]) * (f(i) + f(i + 1))
                }
            };
            out[i + 1] = out[i] + cell;
        }
        out
    }

    /// Right-hand side of the integral equation divided by `ν`.
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        let n = self.grid.intervals();
        let eta = &self.grid.eta;
        let phi = self.amplitude(y);
        let g = |s: f64| (self.m + self.m * s + self.k * s) * self.a;
        let mut tail = vec![0.0; n + 1];
        let t = &self.grid.one_minus;
        for i in (0..n).rev() {
            let cell = match self.quadrature {
                Quadrature::TrapezoidEnvelope if i + 1 < n => {
                    let f = |j: usize| g(eta[j]) * phi[j] / self.sig[j];
                    0.5 * (t[i] - t[i + 1]) * (f(i) + f(i + 1))
                }
                Quadrature::TrapezoidEnvelope => 0.5 * (g(eta[i]) + g(1.0)) * phi[i] * (self.w0[i][0] + self.w0[i][1]),
                Quadrature::Product => {
                    self.w0[i][0] * g(eta[i]) * phi[i] + self.w0[i][1] * g(eta[i + 1]) * phi[i + 1]
                }
            };
            tail[i] = tail[i + 1] + cell;
        }
        let inner = self.inner(&phi);
        let mut out = vec![0.0; n + 1];
        for j in 0..n {
            out[j] = (tail[j] + self.grid.one_minus[j] * self.k * self.a * inner[j]) / self.nu;
        }
        out
    }

    fn derivative(&self, y: &[f64]) -> Vec<f64> {
        let n = self.grid.intervals();
        let phi = self.amplitude(y);
        let inner = self.inner(&phi);
        let mut yp = vec![f64::NEG_INFINITY; n + 1];
        for j in 0..n {
            let t = self.grid.one_minus[j];
            yp[j] = (-self.m * self.a * t * (2.0 - t) / y[j] - self.k * self.a * inner[j]) / self.nu;
        }
        yp
    }
}

fn validate_params(m: f64, a: f64, nu: f64) -> Result<(), CroccoError> {
    if !(m > 0.0) || !(a > 0.0) || !(nu > 0.0) {
        return Err(CroccoError::Domain(format!(
            "m, a, nu must be > 0 (got m={m}, a={a}, nu={nu})"
        )));
    }
    Ok(())
}

/// Damped fixed-point solve of the integral equation (impermeable wall).
pub fn solve_integral_equation(
    variant: Variant,
    m: f64,
    a: f64,
    nu: f64,
    grid: &EtaGrid,
    opts: &IntegralOptions,
) -> Result<CroccoProfile, CroccoError> {
    validate_params(m, a, nu)?;
    if !(opts.mu > 0.0 && opts.mu < 1.0) {
        return Err(GridError::Domain(format!("mu must lie in (0, 1), got {}", opts.mu)).into());
    }
    let params = ProfileParams {
        variant,
        m,
        a,
        nu,
        b: 0.0,
    };
    let op = Operator::new(grid, &params, opts.mu, opts.quadrature);
    let n = grid.intervals();
    let amp = (2.0 * m * a * nu).sqrt();
    let mut y: Vec<f64> = grid
        .one_minus
        .iter()
        .map(|&t| if t > 0.0 { amp * t * (-(0.5 * t).ln()).sqrt() } else { 0.0 })
        .collect();

    let theta = opts.damping;
    let mut streak = 0usize;
    let mut update = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let ty = op.apply(&y);
        update = 0.0;
        let mut bad = None;
        for j in 0..n {
            let mut next = (1.0 - theta) * y[j] + theta * ty[j];
            if !(next > 0.0) {
                bad.get_or_insert(j);
                next = 0.5 * y[j];
            }
            update = update.max((next - y[j]).abs());
            y[j] = next;
        }
        match bad {
            Some(node) => {
                streak += 1;
                if streak >= 3 {
                    return Err(CroccoError::Positivity {
                        node,
                        eta: grid.eta[node],
                        streak,
                    });
                }
            }
            None => streak = 0,
        }
        if bad.is_none() && update <= opts.fp_tol {
            let yp = op.derivative(&y);
            return Ok(CroccoProfile {
                grid: grid.clone(),
                y,
                yp,
                source: ProfileSource::IntegralEquation,
                params,
            });
        }
    }
    Err(CroccoError::NoConvergence {
        iterations: opts.max_iter,
        update,
    })
}

impl CroccoProfile {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `Y_η` from the closed form of the differentiated integral equation.
    pub fn derivative_from_integral(&self, mu: f64) -> Vec<f64> {
        Operator::new(&self.grid, &self.params, mu, Quadrature::Product).derivative(&self.y)
    }

    /// Sup-norm gap between `Y` and the integral operator applied to `Y`.
    pub fn integral_residual(&self, mu: f64) -> f64 {
        let ty = Operator::new(&self.grid, &self.params, mu, Quadrature::Product).apply(&self.y);
        self.y
            .iter()
            .zip(&ty)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `|ν Y Y_η − b Y + m a|` at `η = 0`.
    pub fn robin_residual(&self) -> f64 {
        let p = &self.params;
        (p.nu * self.y[0] * self.yp[0] - p.b * self.y[0] + p.m * p.a).abs()
    }

    /// Sup over nodes below `η = 1` of `|Y_other − Y|`.
    pub fn sup_gap(&self, other: &CroccoProfile) -> f64 {
        self.y
            .iter()
            .zip(&other.y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Weighted residual `|r| / (Y + 1e-12)` of the profile equation
    /// `ν Y² Y_ηη + (η²−1) m a Y_η − η c a Y` by three-point differences,
    /// skipping the last 5% of nodes.
    pub fn begin_residual(&self) -> f64 {
        self.begin_residual_with(self.params.variant.crocco_c(self.params.m))
    }

    pub fn begin_residual_with(&self, c: f64) -> f64 {
        let p = &self.params;
        let n = self.grid.intervals();
        let stop = (0.95 * n as f64).floor() as usize;
        let mut worst: f64 = 0.0;
        for j in 1..stop.min(n) {
            let eta = self.grid.eta[j];
            let d1 = self.grid.diff1(&self.y, j);
            let d2 = self.grid.diff2(&self.y, j);
            let yj = self.y[j];
            let r = p.nu * yj * yj * d2 + (eta * eta - 1.0) * p.m * p.a * d1 - eta * c * p.a * yj;
            worst = worst.max(r.abs() / (yj + 1e-12));
        }
        worst
    }

    /// Relative spread `(max − min)/mean` of `Y / ((1−η)σ)` over the nodes in
    /// the last decade of `1 − η`.
    pub fn tail_ratio_oscillation(&self, mu: f64) -> f64 {
        let n = self.grid.intervals();
        let t_min = self.grid.one_minus[n - 1];
        let ratios: Vec<f64> = (0..n)
            .filter(|&j| self.grid.one_minus[j] <= 10.0 * t_min)
            .map(|j| {
                let t = self.grid.one_minus[j];
                self.y[j] / (t * sigma_t(t, mu))
            })
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        (hi - lo) / mean
    }

    /// Check the slice invariants: positivity below 1, exact zero at 1,
    /// negative slope at interior nodes.
    pub fn check_invariants(&self) -> Result<(), CroccoError> {
        let n = self.grid.intervals();
        if self.y[n] != 0.0 {
            return Err(CroccoError::Domain(format!("Y(1) = {} is not 0", self.y[n])));
        }
        for j in 0..n {
            if !(self.y[j] > 0.0) {
                return Err(CroccoError::Positivity {
                    node: j,
                    eta: self.grid.eta[j],
                    streak: 0,
                });
            }
            if j > 0 && !(self.yp[j] < 0.0) {
                return Err(CroccoError::Domain(format!(
                    "Y_eta = {} is not negative at node {j}",
                    self.yp[j]
                )));
            }
        }
        Ok(())
    }
}

/// Fitted constants of the two-sided `σ`-envelopes of the tip slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaEnvelope {
    pub mu: f64,
    /// Lower and upper amplitude of `Y / ((1−η)σ)`.
    pub m5: f64,
    pub m6: f64,
    /// Upper and lower amplitude of `−Y_η / σ`.
    pub m7: f64,
    pub m8: f64,
    /// Upper and lower bound of `−Y Y_ηη`.
    pub m9: f64,
    pub m10: f64,
    /// Lower bound of `σ` for `η > eta0`; informational.
    pub k: f64,
    pub eta0: f64,
}

impl SigmaEnvelope {
    pub fn lower(&self, eta: f64) -> f64 {
        self.m5 * envelope_shape(eta, self.mu)
    }

    pub fn upper(&self, eta: f64) -> f64 {
        self.m6 * envelope_shape(eta, self.mu)
    }
}

/// `(1−η)σ(η)`, continued by 0 at `η = 1`.
pub fn envelope_shape(eta: f64, mu: f64) -> f64 {
    let t = 1.0 - eta;
    if t <= 0.0 {
        0.0
    } else {
        t * sigma_t(t, mu)
    }
}

fn extrema(values: impl Iterator<Item = (usize, f64)>) -> ((usize, f64), (usize, f64)) {
    let mut lo = (0, f64::INFINITY);
    let mut hi = (0, f64::NEG_INFINITY);
    for (j, v) in values {
        if v.is_nan() {
            return ((j, v), (j, v));
        }
        if v < lo.1 {
            lo = (j, v);
        }
        if v > hi.1 {
            hi = (j, v);
        }
    }
    (lo, hi)
}

pub fn envelope_fit(profile: &CroccoProfile, mu: f64) -> Result<SigmaEnvelope, CroccoError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(GridError::Domain(format!("mu must lie in (0, 1), got {mu}")).into());
    }
    let g = &profile.grid;
    let n = g.intervals();
    let sig = g.sigma_nodes(mu);
    let (r_lo, r_hi) = extrema((0..n).map(|j| (j, profile.y[j] / (g.one_minus[j] * sig[j]))));
    let (d_lo, d_hi) = extrema((0..n).map(|j| (j, -profile.yp[j] / sig[j])));
    let (c_lo, c_hi) = extrema((1..n).map(|j| (j, -profile.y[j] * g.diff2(&profile.y, j))));
    let eta0 = 0.5;
    let env = SigmaEnvelope {
        mu,
        m5: r_lo.1,
        m6: r_hi.1,
        m7: d_hi.1,
        m8: d_lo.1,
        m9: c_hi.1,
        m10: c_lo.1,
        k: sigma_t(1.0 - eta0, mu),
        eta0,
    };
    for (name, value, node) in [
        ("M5", env.m5, r_lo.0),
        ("M6", env.m6, r_hi.0),
        ("M7", env.m7, d_hi.0),
        ("M8", env.m8, d_lo.0),
        ("M9", env.m9, c_hi.0),
        ("M10", env.m10, c_lo.0),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CroccoError::EnvelopeViolation {
                constant: name,
                value,
                node,
                eta: g.eta[node],
            });
        }
    }
    Ok(env)
}
