//! Scenario definition: outer flow, wall transpiration, body radius,
//! discretization and tolerances, read from a TOML document.
//!
//! ```toml
//! seed = 7
//!
//! [flow]
//! variant = "planar"   # or "axisymmetric"
//! m = 1.0
//! a = 1.0
//! nu = 1.0
//!
//! [perturbation]
//! a1 = [0.1]           # a1(x) = x (p0 + p1 x + ...)
//! v1 = [0.05]          # v1(x) = b + x (q0 + q1 x + ...)
//! b = 0.0
//! c = 1.0              # r1(x) = c + x (s0 + s1 x + ...), cone only
//! r1 = []
//!
//! [grid]
//! X = 0.5
//! h = 0.01
//! N = 512
//! grading = 2.0
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::Variant;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Validation(msg.into()))
}

/// Polynomial `Σ c_i x^i`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }

    /// `Σ |c_i| X^i`, a bound for `|p(x)|` on `[0, X]`.
    pub fn abs_bound(&self, x_max: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * x_max.powi(i as i32))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flow {
    pub variant: Variant,
    pub m: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub nu: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    #[serde(default)]
    pub a1: Poly,
    #[serde(default)]
    pub v1: Poly,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub r1: Poly,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            a1: Poly::default(),
            v1: Poly::default(),
            b: 0.0,
            c: 1.0,
            r1: Poly::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "X")]
    pub x_extent: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_h() -> f64 {
    0.01
}
fn default_n() -> usize {
    512
}
fn default_grading() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub shoot_tol: f64,
    pub ode_tol: f64,
    pub far_field_tol: f64,
    pub z_max: f64,
    pub fp_tol: f64,
    pub bc_tol: f64,
    pub newton_tol: f64,
    pub eps0_scale: f64,
    pub eps_factor: f64,
    pub eps_min: f64,
    /// Envelope parameter `μ` of `σ`.
    pub mu: f64,
    /// Stabilization constant for `m ≥ 1`; `2 sup B` when absent.
    pub mu_star: Option<f64>,
    /// Use `(3m−1)/2` instead of `3(m−1)/2` in the cone coefficient `C`.
    pub axisymmetric_planar_c: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            shoot_tol: 1e-10,
            ode_tol: 1e-13,
            far_field_tol: 1e-8,
            z_max: 12.0,
            fp_tol: 1e-10,
            bc_tol: 1e-6,
            newton_tol: 1e-10,
            eps0_scale: 1e-2,
            eps_factor: 4.0,
            eps_min: 1e-10,
            mu: crate::grid::default_mu(),
            mu_star: None,
            axisymmetric_planar_c: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub flow: Flow,
    #[serde(default)]
    pub perturbation: Perturbation,
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Unperturbed scenario with default discretization.
    pub fn self_similar(variant: Variant, m: f64, x_extent: f64) -> Self {
        Self {
            seed: 0,
            flow: Flow {
                variant,
                m,
                a: 1.0,
                nu: 1.0,
            },
            perturbation: Perturbation::default(),
            grid: GridSpec {
                x_extent,
                h: default_h(),
                n: default_n(),
                grading: default_grading(),
            },
            tolerances: Tolerances::default(),
        }
    }

    pub fn variant(&self) -> Variant {
        self.flow.variant
    }

    /// `V(x) = a + x p(x)`.
    pub fn v_outer(&self, x: f64) -> f64 {
        self.flow.a + x * self.perturbation.a1.eval(x)
    }

    pub fn v_outer_x(&self, x: f64) -> f64 {
        let p = &self.perturbation.a1;
        p.eval(x) + x * p.deriv(x)
    }

    /// Outer velocity `U = x^m V`.
    pub fn u_outer(&self, x: f64) -> f64 {
        x.powf(self.flow.m) * self.v_outer(x)
    }

    pub fn u_outer_x(&self, x: f64) -> f64 {
        let m = self.flow.m;
        m * x.powf(m - 1.0) * self.v_outer(x) + x.powf(m) * self.v_outer_x(x)
    }

    /// `v1(x) = b + x q(x)`.
    pub fn v1(&self, x: f64) -> f64 {
        self.perturbation.b + x * self.perturbation.v1.eval(x)
    }

    /// Wall velocity `v0 = x^{(m−1)/2} v1`.
    pub fn v0(&self, x: f64) -> f64 {
        x.powf(0.5 * (self.flow.m - 1.0)) * self.v1(x)
    }

    /// `r1(x) = c + x s(x)`.
    pub fn r1(&self, x: f64) -> f64 {
        self.perturbation.c + x * self.perturbation.r1.eval(x)
    }

    pub fn r1_x(&self, x: f64) -> f64 {
        let p = &self.perturbation.r1;
        p.eval(x) + x * p.deriv(x)
    }

    /// Body radius `r = x r1` (cone only).
    pub fn radius(&self, x: f64) -> f64 {
        x * self.r1(x)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let f = &self.flow;
        let p = &self.perturbation;
        let g = &self.grid;
        let finite = [f.m, f.a, f.nu, p.b, p.c, g.x_extent, g.h, g.grading]
            .iter()
            .chain(&p.a1.0)
            .chain(&p.v1.0)
            .chain(&p.r1.0)
            .all(|v| v.is_finite());
        if !finite {
            return invalid("all numeric values must be finite");
        }
        if self.seed > i64::MAX as u64 {
            return invalid("seed must fit a signed 64-bit TOML integer");
        }
        if !(f.m > 0.0) {
            return invalid("m must be > 0");
        }
        if !(f.a > 0.0) {
            return invalid("a must be > 0");
        }
        if !(f.nu > 0.0) {
            return invalid("nu must be > 0");
        }
        if p.b > 0.0 {
            return invalid("b must be <= 0");
        }
        if p.b < 0.0 && f.m < 1.0 {
            return invalid("b<0 requires m >= 1");
        }
        if !(g.x_extent > 0.0) {
            return invalid("X must be > 0");
        }
        if !(g.h > 0.0) || g.h > g.x_extent {
            return invalid("h must satisfy 0 < h <= X");
        }
        if g.n < 8 {
            return invalid("N must be >= 8");
        }
        if !(g.grading >= 1.0) {
            return invalid("grading must be >= 1");
        }
        if f.a - g.x_extent * p.a1.abs_bound(g.x_extent) <= 0.0 {
            return invalid("V = a + a1 must stay positive on [0, X]");
        }
        match f.variant {
            Variant::Planar => {
                if p.c != 1.0 || !p.r1.is_zero() {
                    return invalid("c and r1 apply to the axisymmetric variant only");
                }
            }
            Variant::Axisymmetric => {
                if !(p.c > 0.0 && p.c <= 1.0) {
                    return invalid("c must satisfy 0 < c <= 1");
                }
                if p.c - g.x_extent * p.r1.abs_bound(g.x_extent) <= 0.0 {
                    return invalid("r1 must stay positive on [0, X]");
                }
            }
        }
        let t = &self.tolerances;
        let positive = [
            t.shoot_tol,
            t.ode_tol,
            t.far_field_tol,
            t.z_max,
            t.fp_tol,
            t.bc_tol,
            t.newton_tol,
            t.eps0_scale,
            t.eps_min,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if !positive || !(t.eps_factor > 1.0) {
            return invalid("tolerances must be positive and eps_factor > 1");
        }
        if !(t.mu > 0.0 && t.mu < 1.0) {
            return invalid("mu must satisfy 0 < mu < 1");
        }
        if let Some(ms) = t.mu_star {
            if !(ms >= 0.0) {
                return invalid("mu_star must be >= 0");
            }
        }
        Ok(())
    }

    /// Lipschitz constants `(N1, N2, N3)` of `a1`, `v1 − b`, `r1 − c` on `[0, X]`.
    pub fn assumption_bounds(&self) -> (f64, f64, f64) {
        let x = self.grid.x_extent;
        let p = &self.perturbation;
        (p.a1.abs_bound(x), p.v1.abs_bound(x), p.r1.abs_bound(x))
    }
}
