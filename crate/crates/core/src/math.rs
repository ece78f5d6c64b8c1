//! Small numeric helpers shared across modules.

/// Signum with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
pub fn clamp_abs(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}
