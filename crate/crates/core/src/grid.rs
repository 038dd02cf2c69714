//! Graded η-grids on `[0, 1]`, finite-difference stencils on them, and
//! product quadrature weights for the `σ`-type endpoint singularities.

use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("sigma diverges at eta = 1")]
    Divergence,
    #[error("domain error: {0}")]
    Domain(String),
}

/// Envelope parameter used when none is given.
pub fn default_mu() -> f64 {
    0.9 * (-0.5f64).exp()
}

/// `σ(η) = sqrt(−ln(μ(1 − η)))`.
pub fn sigma(eta: f64, mu: f64) -> Result<f64, GridError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(GridError::Domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    if eta == 1.0 {
        return Err(GridError::Divergence);
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(GridError::Domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    Ok(sigma_t(1.0 - eta, mu))
}

/// `σ` as a function of `t = 1 − η`; the caller guarantees `0 < t ≤ 1`.
#[inline]
pub fn sigma_t(t: f64, mu: f64) -> f64 {
    (-(mu * t).ln()).sqrt()
}

/// `∫_0^t dτ / σ(τ)`.
fn int_inv_sigma(t: f64, mu: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    std::f64::consts::PI.sqrt() / mu * erfc(sigma_t(t, mu))
}

/// `∫_0^t τ dτ / σ(τ)`.
fn int_t_inv_sigma(t: f64, mu: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    (0.5 * std::f64::consts::PI).sqrt() / (mu * mu) * erfc(2f64.sqrt() * sigma_t(t, mu))
}

/// Nodes `η_j = 1 − (1 − j/N)^p`, `j = 0..=N`, with `1 − η_j` stored exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaGrid {
    pub eta: Vec<f64>,
    pub one_minus: Vec<f64>,
    pub grading: f64,
}

impl EtaGrid {
    pub fn graded(intervals: usize, grading: f64) -> Result<Self, GridError> {
        if intervals < 4 {
            return Err(GridError::Domain(format!("need at least 4 intervals, got {intervals}")));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(GridError::Domain(format!("grading must be >= 1, got {grading}")));
        }
        let n = intervals as f64;
        let one_minus: Vec<f64> = (0..=intervals)
            .map(|j| (1.0 - j as f64 / n).powf(grading))
            .collect();
        let mut eta: Vec<f64> = one_minus.iter().map(|t| 1.0 - t).collect();
        eta[0] = 0.0;
        eta[intervals] = 1.0;
        Ok(Self {
            eta,
            one_minus,
            grading,
        })
    }

    /// Build from arbitrary strictly increasing nodes with `η_0 = 0`, `η_N = 1`.
    pub fn from_nodes(eta: Vec<f64>) -> Result<Self, GridError> {
        if eta.len() < 5 || eta[0] != 0.0 || *eta.last().unwrap() != 1.0 {
            return Err(GridError::Domain("nodes must run from 0 to 1 with at least 5 entries".into()));
        }
        if eta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GridError::Domain("nodes must be strictly increasing".into()));
        }
        let one_minus = eta.iter().map(|e| 1.0 - e).collect();
        Ok(Self {
            eta,
            one_minus,
            grading: f64::NAN,
        })
    }

    /// Number of intervals `N`; the grid has `N + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.eta.len() - 1
    }

    /// `σ` at every node below 1.
    pub fn sigma_nodes(&self, mu: f64) -> Vec<f64> {
        self.one_minus[..self.intervals()]
            .iter()
            .map(|&t| sigma_t(t, mu))
            .collect()
    }

    /// Cell widths on either side of node `j`, taken from `1 − η` so that
    /// they keep full precision next to `η = 1`.
    pub fn spacing(&self, j: usize) -> (f64, f64) {
        (
            self.one_minus[j - 1] - self.one_minus[j],
            self.one_minus[j] - self.one_minus[j + 1],
        )
    }

    /// Weights `(w_prev, w_self, w_next)` of the three-point first derivative
    /// at interior node `j`.
    pub fn d1(&self, j: usize) -> [f64; 3] {
        let (hm, hp) = self.spacing(j);
        [
            -hp / (hm * (hm + hp)),
            (hp - hm) / (hm * hp),
            hm / (hp * (hm + hp)),
        ]
    }

    /// Weights of the three-point second derivative at interior node `j`.
    pub fn d2(&self, j: usize) -> [f64; 3] {
        let (hm, hp) = self.spacing(j);
        [
            2.0 / (hm * (hm + hp)),
            -2.0 / (hm * hp),
            2.0 / (hp * (hm + hp)),
        ]
    }

    /// One-sided second-order first-derivative weights at `η = 0`.
    pub fn d1_wall(&self) -> [f64; 3] {
        let (h1, h2) = self.spacing(1);
        [
            -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
            (h1 + h2) / (h1 * h2),
            -h1 / (h2 * (h1 + h2)),
        ]
    }

    pub fn diff1(&self, v: &[f64], j: usize) -> f64 {
        if j == 0 {
            let w = self.d1_wall();
            return w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
        }
        let w = self.d1(j);
        w[0] * v[j - 1] + w[1] * v[j] + w[2] * v[j + 1]
    }

    pub fn diff2(&self, v: &[f64], j: usize) -> f64 {
        let w = self.d2(j);
        w[0] * v[j - 1] + w[1] * v[j] + w[2] * v[j + 1]
    }

    /// Product-trapezoid weights for `∫ ψ(s) / σ(s) ds` on every cell, with
    /// `ψ` linear across the cell. Entry `j` holds the weights of `ψ_j` and
    /// `ψ_{j+1}` for cell `[η_j, η_{j+1}]`.
    pub fn weights_inv_sigma(&self, mu: f64) -> Vec<[f64; 2]> {
        let n = self.intervals();
        let g: Vec<f64> = self.one_minus.iter().map(|&t| int_inv_sigma(t, mu)).collect();
        let hm: Vec<f64> = self.one_minus.iter().map(|&t| int_t_inv_sigma(t, mu)).collect();
        (0..n)
            .map(|j| {
                let (ta, tb) = (self.one_minus[j], self.one_minus[j + 1]);
                let w = g[j] - g[j + 1];
                // ∫ (t − t_b) w dt is the share of the left node.
                let wa = ((hm[j] - hm[j + 1]) - tb * w) / (ta - tb);
                [wa, w - wa]
            })
            .collect()
    }

    /// Product-trapezoid weights for `∫ ψ(s) / ((1 − s) σ(s)) ds` on every
    /// cell except the last, where the weight is not integrable.
    pub fn weights_inv_t_sigma(&self, mu: f64) -> Vec<[f64; 2]> {
        let n = self.intervals();
        let g: Vec<f64> = self.one_minus.iter().map(|&t| int_inv_sigma(t, mu)).collect();
        (0..n - 1)
            .map(|j| {
                let (ta, tb) = (self.one_minus[j], self.one_minus[j + 1]);
                let w = 2.0 * (sigma_t(tb, mu) - sigma_t(ta, mu));
                let wa = ((g[j] - g[j + 1]) - tb * w) / (ta - tb);
                [wa, w - wa]
            })
            .collect()
    }
}
