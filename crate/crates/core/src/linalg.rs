//! Small dense-vector helpers shared by the objectives and checks.

use ndarray::Array1;

#[inline]
pub fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

#[inline]
pub fn distance(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `theta * b + (1 - theta) * a`.
#[inline]
pub fn lerp(a: &Array1<f64>, b: &Array1<f64>, theta: f64) -> Array1<f64> {
    a * (1.0 - theta) + b * theta
}

/// `x^p` with the convention `0^0 = 1`.
#[inline]
pub fn pow0(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

/// Ceiling that tolerates representation error in values that are
/// mathematically integral (e.g. `2304 / 0.1`).
pub fn robust_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub fn all_finite(v: &Array1<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
