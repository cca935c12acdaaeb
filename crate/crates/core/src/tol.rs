//! Floating-point comparison helpers.

use crate::math::abs;

/// Default relative tolerance for identities that are exact in exact arithmetic.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor used together with [`REL_TOL`].
pub const ABS_FLOOR: f64 = 1e-12;

/// `|a - b| <= max(abs_floor, rel * max(|a|, |b|))`.
pub fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let scale = abs(a).max(abs(b));
    abs(a - b) <= abs_floor.max(rel * scale)
}

/// [`close`] with the crate-wide defaults.
pub fn approx_eq(a: f64, b: f64) -> bool {
    close(a, b, REL_TOL, ABS_FLOOR)
}

/// Mixed relative discrepancy `|a - b| / max(1, |a|, |b|)`.
///
/// Behaves like a relative error for large values and like an absolute error
/// near zero, which keeps centred quantities from blowing up the ratio.
pub fn mixed_discrepancy(a: f64, b: f64) -> f64 {
    abs(a - b) / 1.0f64.max(abs(a)).max(abs(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_applies_near_zero() {
        assert!(approx_eq(0.0, 1e-13));
        assert!(!approx_eq(0.0, 1e-11));
        assert!(approx_eq(1e6, 1e6 + 1e-4));
    }

    #[test]
    fn mixed_discrepancy_switches_regime() {
        assert_eq!(mixed_discrepancy(0.0, 0.5), 0.5);
        assert!((mixed_discrepancy(100.0, 101.0) - 1.0 / 101.0).abs() < 1e-15);
    }
}
