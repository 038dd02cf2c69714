//! Inverting the Crocco transformation: the physical velocities `u(x, y)`
//! and `v(x, y)` of a marched field, and the checks run on them.
//!
//! At a station `x` with `s = x^{(m−1)/2}`:
//!
//! ```text
//! y(η)  = (1/s) ∫_0^η ds / ω
//! u     = U η,  u_y = s U ω,  u_yy = s ω_η u_y
//! u_x   = η U_x + ω U ∫_0^η (ω_ξ / ω² + (m − 1) / (2 x ω)) ds
//! v     = (−u u_x + ν u_yy + U U_x) / u_y
//! ```

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::EtaGrid;
use crate::interp::{bracket, hermite, lagrange4, limit_monotone};
use crate::line_method::CroccoField;
use crate::scenario::Scenario;
use crate::similarity::{ProfileSolution, Variant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("omega is not positive at slice {k}, node {node}")]
    NonPositive { k: usize, node: usize },
    #[error("field has {slices} slices, at least 2 are needed")]
    TooFewSlices { slices: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalOptions {
    /// Tensor points across the layer: `Δ = y(0.99) / layer_points`.
    pub layer_points: usize,
    /// Cells above this `η` are left out of residual reports.
    pub mask_eta: f64,
    pub u_y_floor: f64,
    /// Envelope parameter of the quadrature weights.
    pub mu: f64,
}

impl Default for PhysicalOptions {
    fn default() -> Self {
        Self {
            layer_points: 64,
            mask_eta: 0.999,
            u_y_floor: 1e-12,
            mu: crate::grid::default_mu(),
        }
    }
}

/// Reconstruction at the η-nodes of one slice, `j = 0..N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    pub y: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
    pub u_yy: Vec<f64>,
    pub v: Vec<f64>,
}

/// One `x` station on its own uniform `y` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub k: usize,
    pub x: f64,
    pub u_outer: f64,
    pub u_outer_x: f64,
    pub delta: f64,
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
    pub u_yy: Vec<f64>,
    /// `η ≤ mask_eta` and `u_y` above the floor.
    pub resolved: Vec<bool>,
    /// Inside the last η-node; points above it carry the Gaussian tail.
    pub interpolated: Vec<bool>,
    /// Top η-node in `y`, and the node data.
    pub y_top_node: f64,
    pub nodes: NodeProfile,
}

/// Velocities on the grid `(x_i, j Δ_i)`; `Δ_i` scales with the local
/// layer thickness.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub variant: Variant,
    pub m: f64,
    pub nu: f64,
    pub stations: Vec<Station>,
}

impl PhysicalField {
    pub fn x_nodes(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.x).collect()
    }

    pub fn station_near(&self, x: f64) -> Option<&Station> {
        self.stations
            .iter()
            .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
    }
}

fn layer_scale(m: f64, x: f64) -> f64 {
    x.powf(0.5 * (m - 1.0))
}

/// `y(η_j)` for `j = 0..N−1` from a slice `ω`. The cumulative sum treats
/// `(1 − η) σ / ω` as linear across each cell and integrates the remaining
/// `1 / ((1 − η) σ)` exactly.
pub fn y_nodes(grid: &EtaGrid, omega: &[f64], m: f64, x: f64, mu: f64) -> Result<Vec<f64>, PhysicalError> {
    if !(x > 0.0) {
        return Err(PhysicalError::Domain(format!("x must be > 0, got {x}")));
    }
    let phi = amplitude(grid, omega, mu).map_err(|node| PhysicalError::NonPositive { k: 0, node })?;
    let w = grid.weights_inv_t_sigma(mu);
    Ok(cumulative(&w, &phi, 1.0 / layer_scale(m, x)))
}

fn amplitude(grid: &EtaGrid, omega: &[f64], mu: f64) -> Result<Vec<f64>, usize> {
    let sig = grid.sigma_nodes(mu);
    (0..grid.intervals())
        .map(|j| {
            if omega[j] > 0.0 {
                Ok(grid.one_minus[j] * sig[j] / omega[j])
            } else {
                Err(j)
            }
        })
        .collect()
}

fn cumulative(w: &[[f64; 2]], psi: &[f64], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; psi.len()];
    for i in 0..psi.len() - 1 {
        out[i + 1] = out[i] + scale * (w[i][0] * psi[i] + w[i][1] * psi[i + 1]);
    }
    out
}

/// `y(η)` at a slice station `x`, evaluated at every η-node below 1.
pub fn y_of_eta(field: &CroccoField, m: f64, x: f64, mu: f64) -> Result<Vec<f64>, PhysicalError> {
    let top = field.attained_extent();
    if !(x > 0.0 && x <= top * (1.0 + 1e-12)) {
        return Err(PhysicalError::Domain(format!("x = {x} outside (0, {top}]")));
    }
    let omega = field
        .slice_at(x)
        .map_err(|e| PhysicalError::Domain(e.to_string()))?;
    y_nodes(&field.grid, &omega, m, x, mu)
}

fn omega_xi(field: &CroccoField, k: usize) -> Vec<f64> {
    let w = &field.omega;
    let n = w[k].len();
    if k + 1 < field.slices() {
        let d = field.xi[k + 1] - field.xi[k - 1];
        (0..n).map(|j| (w[k + 1][j] - w[k - 1][j]) / d).collect()
    } else if k >= 2 {
        let h = field.xi[k] - field.xi[k - 1];
        (0..n)
            .map(|j| (3.0 * w[k][j] - 4.0 * w[k - 1][j] + w[k - 2][j]) / (2.0 * h))
            .collect()
    } else {
        let h = field.xi[k] - field.xi[k - 1];
        (0..n).map(|j| (w[k][j] - w[k - 1][j]) / h).collect()
    }
}

fn node_profile(s: &Scenario, field: &CroccoField, k: usize, mu: f64) -> Result<NodeProfile, PhysicalError> {
    let grid = &field.grid;
    let n = grid.intervals();
    let m = s.flow.m;
    let nu = s.flow.nu;
    let x = field.xi[k];
    let sc = layer_scale(m, x);
    let uo = s.u_outer(x);
    let uox = s.u_outer_x(x);
    let om = &field.omega[k];
    let phi = amplitude(grid, om, mu).map_err(|node| PhysicalError::NonPositive { k, node })?;
    let w1 = grid.weights_inv_t_sigma(mu);
    let y = cumulative(&w1, &phi, 1.0 / sc);
    let dxi = omega_xi(field, k);
    let psi: Vec<f64> = (0..n)
        .map(|j| phi[j] * (dxi[j] / om[j] + 0.5 * (m - 1.0) / x))
        .collect();
    let integral = cumulative(&w1, &psi, 1.0);
    let mut out = NodeProfile {
        y,
        u_x: vec![0.0; n],
        u_y: vec![0.0; n],
        u_yy: vec![0.0; n],
        v: vec![0.0; n],
    };
    for j in 0..n {
        let eta = grid.eta[j];
        let om_eta = grid.diff1(om, j);
        let u_x = eta * uox + om[j] * uo * integral[j];
        let u_y = sc * uo * om[j];
        let u_yy = sc * om_eta * u_y;
        out.u_x[j] = u_x;
        out.u_y[j] = u_y;
        out.u_yy[j] = u_yy;
        out.v[j] = (-eta * uo * u_x + nu * u_yy + uo * uox) / u_y;
    }
    Ok(out)
}

fn station(s: &Scenario, field: &CroccoField, k: usize, opts: &PhysicalOptions) -> Result<Station, PhysicalError> {
    let grid = &field.grid;
    let n = grid.intervals();
    let m = s.flow.m;
    let x = field.xi[k];
    let sc = layer_scale(m, x);
    let uo = s.u_outer(x);
    let uox = s.u_outer_x(x);
    let om = &field.omega[k];
    let nodes = node_profile(s, field, k, opts.mu)?;
    let yn = &nodes.y;

    // q = ln(1 − η) is close to quadratic in y across the whole layer.
    let q: Vec<f64> = grid.one_minus[..n].iter().map(|t| t.ln()).collect();
    let dq: Vec<f64> = (0..n).map(|j| -sc * om[j] / grid.one_minus[j]).collect();
    let q_at = |y: f64| -> f64 {
        let top = yn[n - 1];
        if y >= top {
            return q[n - 1] + dq[n - 1] * (y * y - top * top) / (2.0 * top);
        }
        let i = bracket(yn, y);
        let (d0, d1) = limit_monotone(yn[i], yn[i + 1], q[i], q[i + 1], dq[i], dq[i + 1]);
        hermite(yn[i], yn[i + 1], q[i], q[i + 1], d0, d1, y)
    };

    let target = 0.01f64.ln();
    let i99 = q.partition_point(|&v| v > target).clamp(1, n - 1) - 1;
    let mut lo = yn[i99];
    let mut hi = yn[i99 + 1];
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if q_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi) / opts.layer_points as f64;
    let count = (yn[n - 1] / delta).ceil() as usize + 2;

    let top_slope = |vals: &[f64], y: f64| -> f64 {
        let (y0, y1) = (yn[n - 2], yn[n - 1]);
        vals[n - 1] + (vals[n - 1] - vals[n - 2]) / (y1 - y0) * (y - y1)
    };
    let mut st = Station {
        k,
        x,
        u_outer: uo,
        u_outer_x: uox,
        delta,
        y: Vec::with_capacity(count),
        eta: Vec::with_capacity(count),
        u: Vec::with_capacity(count),
        v: Vec::with_capacity(count),
        u_x: Vec::with_capacity(count),
        u_y: Vec::with_capacity(count),
        u_yy: Vec::with_capacity(count),
        resolved: Vec::with_capacity(count),
        interpolated: Vec::with_capacity(count),
        y_top_node: yn[n - 1],
        nodes: nodes.clone(),
    };
    for j in 0..count {
        let y = j as f64 * delta;
        let inside = y <= yn[n - 1];
        let one_minus = q_at(y).exp();
        let eta = 1.0 - one_minus;
        let pick = |vals: &[f64]| if inside { lagrange4(yn, vals, y) } else { top_slope(vals, y) };
        let u_y = if inside {
            pick(&nodes.u_y)
        } else {
            -uo * dq[n - 1] * y / yn[n - 1] * one_minus
        };
        st.y.push(y);
        st.eta.push(eta);
        st.u.push(uo * eta);
        st.v.push(pick(&nodes.v));
        st.u_x.push(pick(&nodes.u_x));
        st.u_y.push(u_y);
        st.u_yy.push(pick(&nodes.u_yy));
        st.resolved.push(inside && eta <= opts.mask_eta && u_y > opts.u_y_floor);
        st.interpolated.push(inside);
    }
    st.u[0] = 0.0;
    Ok(st)
}

/// Reconstruct every slice `k ≥ 1`; stations are independent and run in
/// parallel.
pub fn reconstruct(s: &Scenario, field: &CroccoField, opts: &PhysicalOptions) -> Result<PhysicalField, PhysicalError> {
    if field.slices() < 2 {
        return Err(PhysicalError::TooFewSlices {
            slices: field.slices(),
        });
    }
    let stations = (1..field.slices())
        .into_par_iter()
        .map(|k| station(s, field, k, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhysicalField {
        variant: s.variant(),
        m: s.flow.m,
        nu: s.flow.nu,
        stations,
    })
}

/// Continuity and momentum residuals, normalized by `U/x` and `U²/x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub continuity_max: f64,
    pub momentum_max: f64,
    /// Per station, per tensor point; `NaN` where masked.
    pub continuity: Vec<Vec<f64>>,
    pub momentum: Vec<Vec<f64>>,
}

/// `u_x` comes from the Crocco-frame formula; `y`-derivatives are centered
/// differences on the tensor grid. Cone flows use `(r u)_x + (r v)_y`.
pub fn residuals(phys: &PhysicalField, s: &Scenario) -> ResidualReport {
    let per: Vec<(Vec<f64>, Vec<f64>)> = phys
        .stations
        .par_iter()
        .map(|st| station_residuals(phys, st, s))
        .collect();
    let max_of = |rows: &[Vec<f64>]| {
        rows.iter()
            .flat_map(|r| r.iter())
            .filter(|v| v.is_finite())
            .fold(0.0f64, |a, v| a.max(v.abs()))
    };
    let (continuity, momentum): (Vec<_>, Vec<_>) = per.into_iter().unzip();
    ResidualReport {
        continuity_max: max_of(&continuity),
        momentum_max: max_of(&momentum),
        continuity,
        momentum,
    }
}

fn station_residuals(phys: &PhysicalField, st: &Station, s: &Scenario) -> (Vec<f64>, Vec<f64>) {
    let len = st.y.len();
    let mut cont = vec![f64::NAN; len];
    let mut mom = vec![f64::NAN; len];
    let uo = st.u_outer;
    if uo == 0.0 {
        return (vec![0.0; len], vec![0.0; len]);
    }
    let x = st.x;
    let geom = match phys.variant {
        Variant::Planar => 0.0,
        Variant::Axisymmetric => (s.r1(x) + x * s.r1_x(x)) / s.radius(x),
    };
    let d = st.delta;
    for j in 1..len - 1 {
        if !(st.resolved[j - 1] && st.resolved[j] && st.resolved[j + 1]) {
            continue;
        }
        let v_y = (st.v[j + 1] - st.v[j - 1]) / (2.0 * d);
        let u_y = (st.u[j + 1] - st.u[j - 1]) / (2.0 * d);
        let u_yy = (st.u[j + 1] - 2.0 * st.u[j] + st.u[j - 1]) / (d * d);
        cont[j] = (st.u_x[j] + v_y + geom * st.u[j]) * x / uo;
        mom[j] = (st.u[j] * st.u_x[j] + st.v[j] * u_y - uo * st.u_outer_x - phys.nu * u_yy) * x / (uo * uo);
    }
    (cont, mom)
}

/// Largest relative mismatch of `v(x, 0)` against `x^{(m−1)/2} v1(x)`.
/// Where the prescribed value is zero the natural scale
/// `x^{(m−1)/2} sqrt(ν V)` is the reference.
pub fn wall_transpiration_error(phys: &PhysicalField, s: &Scenario) -> f64 {
    phys.stations
        .iter()
        .map(|st| {
            let v0 = s.v0(st.x);
            let scale = if v0 != 0.0 {
                v0.abs()
            } else {
                layer_scale(phys.m, st.x) * (phys.nu * s.v_outer(st.x)).sqrt()
            };
            (st.v[0] - v0).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Largest `|u(x, 0)|`.
pub fn wall_slip(phys: &PhysicalField) -> f64 {
    phys.stations.iter().map(|st| st.u[0].abs()).fold(0.0, f64::max)
}

/// Relative gap between `u_yy = s ω_η u_y` and second differences of `u`
/// in `y`, over points with `η ≤ 0.99`. Points where `|u_yy|` is below
/// `1e-3` of its station maximum are skipped.
pub fn chain_rule_gap(phys: &PhysicalField) -> f64 {
    let mut worst: f64 = 0.0;
    for st in &phys.stations {
        let peak = st.u_yy.iter().zip(&st.interpolated).filter(|(_, i)| **i).fold(0.0f64, |a, (v, _)| a.max(v.abs()));
        let d = st.delta;
        for j in 1..st.y.len() - 1 {
            if st.eta[j + 1] > 0.99 || !st.interpolated[j + 1] {
                break;
            }
            if st.u_yy[j].abs() < 1e-3 * peak {
                continue;
            }
            let fd = (st.u[j + 1] - 2.0 * st.u[j] + st.u[j - 1]) / (d * d);
            worst = worst.max((fd - st.u_yy[j]).abs() / st.u_yy[j].abs());
        }
    }
    worst
}

/// Sup over the interpolated part of a station of `|u/U − F'(y s)|`, where
/// `F` is the dimensional similarity profile of `sol`.
pub fn similarity_gap(st: &Station, m: f64, sol: &ProfileSolution) -> Result<f64, PhysicalError> {
    let sc = layer_scale(m, st.x);
    let mut worst: f64 = 0.0;
    for j in 0..st.y.len() {
        if !st.interpolated[j] {
            break;
        }
        let z = st.y[j] * sc / sol.scale_length;
        let (_, fp, _) = sol.eval(z).map_err(|e| PhysicalError::Domain(e.to_string()))?;
        worst = worst.max((st.u[j] / st.u_outer - fp).abs());
    }
    Ok(worst)
}

/// Per-station fit of `ln(1 − u/U) ≈ intercept + slope · x^{m−1} y²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub x: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub fits: Vec<DecayFit>,
    /// Stations whose tail window held fewer than the required samples.
    pub empty_windows: Vec<f64>,
    /// Largest and smallest `|slope|`.
    pub m2: f64,
    pub m4: f64,
}

impl DecayReport {
    pub fn all_negative(&self) -> bool {
        !self.fits.is_empty() && self.fits.iter().all(|f| f.slope < 0.0)
    }

    pub fn min_r_squared(&self) -> f64 {
        self.fits.iter().map(|f| f.r_squared).fold(f64::INFINITY, f64::min)
    }

    /// `(max − min) / mean` of the slopes.
    pub fn slope_spread(&self) -> f64 {
        let s: Vec<f64> = self.fits.iter().map(|f| f.slope).collect();
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        ((max - min) / mean).abs()
    }
}

/// Least squares line through `(t, l)`; returns `(slope, intercept, R²)`.
pub fn linear_fit(t: &[f64], l: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let ml = l.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    let stl: f64 = t.iter().zip(l).map(|(a, b)| (a - mt) * (b - ml)).sum();
    let sll: f64 = l.iter().map(|v| (v - ml) * (v - ml)).sum();
    let slope = stl / stt;
    let intercept = ml - slope * mt;
    let r2 = if sll > 0.0 { stl * stl / (stt * sll) } else { 1.0 };
    (slope, intercept, r2)
}

/// Tail window `lo < 1 − u/U < hi`, interpolated points only.
pub fn decay_check(phys: &PhysicalField, lo: f64, hi: f64, min_samples: usize) -> DecayReport {
    let mut fits = Vec::new();
    let mut empty = Vec::new();
    for st in &phys.stations {
        let xm = st.x.powf(phys.m - 1.0);
        let (t, l): (Vec<f64>, Vec<f64>) = (0..st.y.len())
            .filter(|&j| st.interpolated[j])
            .map(|j| (j, 1.0 - st.u[j] / st.u_outer))
            .filter(|&(_, g)| g > lo && g < hi)
            .map(|(j, g)| (xm * st.y[j] * st.y[j], g.ln()))
            .unzip();
        if t.len() < min_samples {
            empty.push(st.x);
            continue;
        }
        let (slope, intercept, r_squared) = linear_fit(&t, &l);
        fits.push(DecayFit {
            x: st.x,
            slope,
            intercept,
            r_squared,
            samples: t.len(),
        });
    }
    let mags = fits.iter().map(|f| f.slope.abs());
    let m2 = mags.clone().fold(0.0, f64::max);
    let m4 = mags.fold(f64::INFINITY, f64::min);
    DecayReport {
        fits,
        empty_windows: empty,
        m2,
        m4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_exact_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let l: Vec<f64> = t.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, i, r2) = linear_fit(&t, &l);
        assert!((s + 0.5).abs() < 1e-14 && (i - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn y_of_linear_profile() {
        // ω = 1 − η gives y = −ln(1 − η) at x = 1.
        let grid = EtaGrid::graded(256, 2.0).unwrap();
        let om: Vec<f64> = grid.one_minus.clone();
        let y = y_nodes(&grid, &om, 1.0, 1.0, crate::grid::default_mu()).unwrap();
        for (j, tol) in [(0, 1e-12), (10, 1e-4), (100, 1e-4), (200, 1e-3), (255, 2e-3)] {
            let exact = -grid.one_minus[j].ln();
            assert!((y[j] - exact).abs() <= tol * exact.max(1.0), "j={j} {} {exact}", y[j]);
        }
    }
}
