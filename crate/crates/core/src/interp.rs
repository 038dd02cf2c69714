//! Small interpolation kernels shared by the profile and reconstruction code.

/// Cubic Hermite value on `[x0, x1]`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Derivative of [`hermite`] with respect to `x`.
pub fn hermite_slope(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
}

/// Fritsch-Carlson limiting of end slopes so that the Hermite cubic through
/// monotone data stays monotone.
pub fn limit_monotone(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let secant = (y1 - y0) / (x1 - x0);
    if secant == 0.0 {
        return (0.0, 0.0);
    }
    let mut a = d0 / secant;
    let mut b = d1 / secant;
    if a < 0.0 {
        a = 0.0;
    }
    if b < 0.0 {
        b = 0.0;
    }
    let r2 = a * a + b * b;
    if r2 > 9.0 {
        let tau = 3.0 / r2.sqrt();
        a *= tau;
        b *= tau;
    }
    (a * secant, b * secant)
}

/// Index `i` such that `xs[i] <= x <= xs[i + 1]`, clamped to the table.
pub fn bracket(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    }
}

/// Four-point Lagrange interpolation on a non-uniform table.
pub fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        let i = bracket(xs, x);
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] * (1.0 - t) + ys[i + 1] * t;
    }
    let i = bracket(xs, x);
    let start = i.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for a in start..start + 4 {
        let mut w = 1.0;
        for b in start..start + 4 {
            if a != b {
                w *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc += w * ys[a];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let (a, b) = (0.3, 1.1);
        for &x in &[0.3, 0.5, 0.77, 1.1] {
            let v = hermite(a, b, f(a), f(b), df(a), df(b), x);
            assert!((v - f(x)).abs() < 1e-14);
            let s = hermite_slope(a, b, f(a), f(b), df(a), df(b), x);
            assert!((s - df(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn bracket_clamps() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bracket(&xs, -1.0), 0);
        assert_eq!(bracket(&xs, 0.0), 0);
        assert_eq!(bracket(&xs, 1.5), 1);
        assert_eq!(bracket(&xs, 3.0), 2);
        assert_eq!(bracket(&xs, 9.0), 2);
    }

    #[test]
    fn lagrange_reproduces_cubic_on_uneven_nodes() {
        let xs = [0.0, 0.1, 0.35, 0.6, 1.2, 1.3];
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for &x in &[0.05, 0.5, 1.25] {
            assert!((lagrange4(&xs, &ys, x) - f(x)).abs() < 1e-13);
        }
    }
}
