use crate::chirpmod::{DEFAULT_DETECTION_FRACTION, MAX_SF, MIN_SF};
use crate::error::{Error, Result};

/// Gaussian tail probability `P(Z > x)`.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Closed-form bit error probability of a linear chirp at chip SNR `snr`:
/// `Q(sqrt(snr * 2^(sf+1)) - sqrt(1.386 sf + 1.154)) / 2`.
pub fn ber_theory(snr_linear: f64, sf: u32) -> Result<f64> {
    if !(snr_linear >= 0.0) {
        return Err(Error::Domain(format!("SNR must be >= 0, got {snr_linear}")));
    }
    if !(MIN_SF..=MAX_SF).contains(&sf) {
        return Err(Error::Domain(format!("sf {sf} outside [{MIN_SF}, {MAX_SF}]")));
    }
    let gain = (snr_linear * (1u64 << (sf + 1)) as f64).sqrt();
    let penalty = (1.386 * sf as f64 + 1.154).sqrt();
    Ok(qfunc(gain - penalty) / 2.0)
}

/// Chip SNR that makes [`ber_theory`] return `pb`, for `pb` in `(0, 0.25]`.
pub fn snr_for_ber(pb: f64, sf: u32) -> Result<f64> {
    if !(pb > 0.0 && pb <= 0.25) {
        return Err(Error::Domain(format!("target BER {pb} outside (0, 0.25]")));
    }
    ber_theory(0.0, sf)?;
    // Invert Q by bisection; Q is strictly decreasing.
    let target = 2.0 * pb;
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if qfunc(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let arg = 0.5 * (lo + hi);
    let penalty = (1.386 * sf as f64 + 1.154).sqrt();
    let root = arg + penalty;
    Ok(root * root / (1u64 << (sf + 1)) as f64)
}

/// Effective SNR at the detector: `fraction * ps / (bw * n0)`.
pub fn effective_snr(ps_w: f64, bw_hz: f64, n0_w_per_hz: f64, detection_fraction: f64) -> Result<f64> {
    if !(bw_hz > 0.0) || !(n0_w_per_hz > 0.0) {
        return Err(Error::Domain(format!(
            "bandwidth and noise density must be positive (bw = {bw_hz}, n0 = {n0_w_per_hz})"
        )));
    }
    if !(ps_w >= 0.0) {
        return Err(Error::Domain(format!("signal power must be >= 0, got {ps_w}")));
    }
    if !(detection_fraction > 0.0 && detection_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "detection fraction must be in (0, 1], got {detection_fraction}"
        )));
    }
    Ok(detection_fraction * ps_w / (bw_hz * n0_w_per_hz))
}

/// [`effective_snr`] with the default detection fraction.
pub fn effective_snr_default(ps_w: f64, bw_hz: f64, n0_w_per_hz: f64) -> Result<f64> {
    effective_snr(ps_w, bw_hz, n0_w_per_hz, DEFAULT_DETECTION_FRACTION)
}
