//! Small numeric helpers shared across modules.

/// dBm to watts.
pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm.
pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Linear interpolation over sorted `(x, y)` knots, holding the end values
/// outside the knot range.
pub fn interp_clamped(knots: &[(f64, f64)], x: f64) -> f64 {
    debug_assert!(!knots.is_empty());
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Returns `Some(n)` when `x` is within `1e-9` relative of the integer `n`.
pub fn as_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= 1e-9 * r.max(1.0) {
        Some(r as u64)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_w(30.0) - 1.0).abs() < 1e-15);
        assert!((w_to_dbm(dbm_to_w(-7.3)) + 7.3).abs() < 1e-12);
    }

    #[test]
    fn interp_holds_ends() {
        let k = [(0.0, 1.0), (1.0, 3.0)];
        assert_eq!(interp_clamped(&k, -1.0), 1.0);
        assert_eq!(interp_clamped(&k, 2.0), 3.0);
        assert!((interp_clamped(&k, 0.25) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn integer_detection() {
        assert_eq!(as_integer(16.0), Some(16));
        assert_eq!(as_integer(16.0000000001), Some(16));
        assert_eq!(as_integer(16.5), None);
    }
}
