//! Floating point comparison used throughout the crate.
//!
//! Quantities range from fractions of a second to millions of bits per
//! second, so comparisons are relative with a small absolute floor.

pub const REL_TOL: f64 = 1e-9;
pub const ABS_FLOOR: f64 = 1e-12;

#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return a == b;
    }
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    (a - b).abs() <= ABS_FLOOR + REL_TOL * scale
}

/// `a <= b`, forgiving a rounding-level excess.
#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b || approx_eq(a, b)
}

#[inline]
pub fn relative_error(actual: f64, expected: f64) -> f64 {
    let denom = if expected.abs() > ABS_FLOOR {
        expected.abs()
    } else {
        1.0
    };
    (actual - expected).abs() / denom
}
