//! Finite-difference gradient checks.

use crate::spectral::Objective;

/// Central differences `(f(x + heₖ) − f(x − heₖ)) / 2h` for every `k`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let fp = f(&y);
            y[k] = x[k] - h;
            let fm = f(&y);
            y[k] = x[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Differences that stay inside `[lo, hi]`: central in the interior,
/// second-order one-sided at the bounds.
pub fn box_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    let at = |y: &mut Vec<f64>, k: usize, t: f64, f: &mut F| {
        y[k] = t;
        let v = f(y);
        y[k] = x[k];
        v
    };
    (0..x.len())
        .map(|k| {
            let xk = x[k];
            if xk - h >= lo && xk + h <= hi {
                (at(&mut y, k, xk + h, &mut f) - at(&mut y, k, xk - h, &mut f)) / (2.0 * h)
            } else if xk - h < lo {
                let f0 = f(x);
                (-3.0 * f0 + 4.0 * at(&mut y, k, xk + h, &mut f) - at(&mut y, k, xk + 2.0 * h, &mut f)) / (2.0 * h)
            } else {
                let f0 = f(x);
                (3.0 * f0 - 4.0 * at(&mut y, k, xk - h, &mut f) + at(&mut y, k, xk - 2.0 * h, &mut f)) / (2.0 * h)
            }
        })
        .collect()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / a.abs().max(b.abs()).max(floor)
}

/// Largest coordinatewise relative error between two vectors.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| relative_error(x, y, floor)).fold(0.0, f64::max)
}

/// Self-check of an objective: largest relative error between its gradient
/// and central differences at `u`.
pub fn objective_gradient_error<O: Objective + ?Sized>(obj: &O, u: &[f64], h: f64) -> f64 {
    let fd = central_difference(|y| obj.value(y), u, h);
    max_relative_error(&obj.gradient_vec(u), &fd, 1e-8)
}
