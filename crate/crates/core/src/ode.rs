//! Adaptive Dormand-Prince 5(4) integration for small autonomous systems.
//!
//! The stepper keeps its step-size estimate between calls so that a
//! trajectory can be advanced node by node onto a fixed output grid
//! without restarting the error controller each time.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
}

// Dormand-Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    h: f64,
    max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64, h_max: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max,
            h: h_max.min(1e-3),
            max_steps: 1_000_000,
        }
    }

    /// Advance `y` from `t` to `t_end` in place.
    pub fn advance<const N: usize, F>(
        &mut self,
        rhs: &F,
        t: f64,
        y: &mut [f64; N],
        t_end: f64,
    ) -> Result<(), OdeError>
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let mut t = t;
        let mut steps = 0usize;
        let mut k1 = rhs(y);
        while t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(OdeError::TooManySteps(self.max_steps));
            }
            let remaining = t_end - t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * t.abs().max(1.0) && !last {
                return Err(OdeError::StepUnderflow { t, h });
            }

            let stage = |coef: &[(f64, &[f64; N])]| {
                let mut out = *y;
                for (c, k) in coef {
                    for i in 0..N {
                        out[i] += h * c * k[i];
                    }
                }
                out
            };
            let k2 = rhs(&stage(&[(A21, &k1)]));
            let k3 = rhs(&stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(&stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(&stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(&stage(&[
                (A61, &k1),
                (A62, &k2),
                (A63, &k3),
                (A64, &k4),
                (A65, &k5),
            ]));
            let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = rhs(&y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h < 1e-12 {
                    return Err(OdeError::NonFinite { t });
                }
                self.h = h * 0.1;
                continue;
            }

            // C1 = 0.2 is the order-5 exponent; 0.9 safety, growth capped at 5x.
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                *y = y_new;
                k1 = k7;
                if !last || factor < 1.0 {
                    self.h = (h * factor).min(self.h_max);
                }
            } else {
                self.h = (h * factor.min(1.0)).max(1e-16);
            }
        }
        Ok(())
    }
}
