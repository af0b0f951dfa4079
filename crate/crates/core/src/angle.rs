//! Angle wrapping helpers.

use core::f64::consts::{PI, TAU};

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap(angle: f64) -> f64 {
    // IEEE remainder rounds the quotient to nearest, so `r` lies in [-pi, pi].
    let r = libm::remainder(angle, TAU);
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Absolute heading difference, `|((a - b + pi) mod 2pi) - pi|`.
///
/// Always in `[0, pi]` and invariant under adding multiples of `2pi` to
/// either argument.
#[inline]
pub fn heading_error(a: f64, b: f64) -> f64 {
    let shifted = libm::fmod(a - b + PI, TAU);
    let shifted = if shifted < 0.0 { shifted + TAU } else { shifted };
    libm::fabs(shifted - PI)
}
