use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::TOGGLE_CYCLES;
use super::waveform::{Waveform, WaveformKind};
use crate::error::{Error, Result};

/// Indices `i` where `samples[i] != samples[i - 1]`.
pub fn transition_indices(w: &Waveform) -> Vec<usize> {
    w.samples()
        .windows(2)
        .enumerate()
        .filter(|(_, p)| p[0] != p[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Toggle grid `4 / fosc` expressed in samples of `w`.
fn grid_samples(w: &Waveform, fosc_hz: f64) -> Result<usize> {
    if !(fosc_hz.is_finite() && fosc_hz > 0.0) {
        return Err(Error::Config(format!("clock must be positive, got {fosc_hz}")));
    }
    let g = w.fs_hz() * TOGGLE_CYCLES / fosc_hz;
    match crate::util::as_integer(g) {
        Some(g) if g >= 1 => Ok(g as usize),
        _ => Err(Error::Config(format!(
            "toggle grid 4/fosc is {g} samples at fs = {} Hz; it must be a whole number",
            w.fs_hz()
        ))),
    }
}

fn check_binary(w: &Waveform) -> Result<()> {
    if w.kind() == WaveformKind::BinaryEnvelope {
        Ok(())
    } else {
        Err(Error::Domain("toggle quantization needs a binary envelope".into()))
    }
}

fn check_feasible(transitions: &[usize], grid: usize) -> Result<()> {
    if let Some(gap) = transitions.windows(2).map(|t| t[1] - t[0]).min() {
        if gap < grid {
            return Err(Error::BandwidthInfeasible(format!(
                "shortest half-period is {gap} samples but the MCU needs {grid} samples per toggle"
            )));
        }
    }
    Ok(())
}

fn render(first: f64, len: usize, toggles: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut level = first;
    let mut next = toggles.iter().peekable();
    for i in 0..len {
        while next.peek().is_some_and(|&&t| t == i) {
            level = 1.0 - level;
            next.next();
        }
        out.push(level);
    }
    out
}

/// Moves every toggle of a binary envelope onto the MCU instruction grid
/// `k * 4 / fosc`, rounding later: the MCU can only act on or after the
/// cycle it was scheduled for.
///
/// The grid is anchored at sample 0. Fails with
/// [`Error::BandwidthInfeasible`] when two ideal toggles are closer than one
/// grid step, which is exactly the case `bw > fosc / 8`.
pub fn quantize_toggles(w: &Waveform, fosc_hz: f64) -> Result<Waveform> {
    check_binary(w)?;
    let grid = grid_samples(w, fosc_hz)?;
    let ideal = transition_indices(w);
    check_feasible(&ideal, grid)?;

    let mut moved = Vec::with_capacity(ideal.len());
    let mut prev: Option<usize> = None;
    for &t in &ideal {
        let mut q = t.div_ceil(grid) * grid;
        if let Some(p) = prev {
            q = q.max(p + grid);
        }
        moved.push(q);
        prev = Some(q);
    }
    let first = w.samples().first().copied().unwrap_or(0.0);
    Ok(Waveform::from_parts_unchecked(
        render(first, w.len(), &moved),
        w.fs_hz(),
        WaveformKind::BinaryEnvelope,
    ))
}

/// [`quantize_toggles`] plus a uniform jitter of -1, 0 or +1 instruction
/// cycle on every toggle, for modeling loop-timing noise. Toggles stay at
/// least one instruction cycle apart. The error bound of the unjittered
/// version does not apply.
pub fn quantize_toggles_jittered(w: &Waveform, fosc_hz: f64, seed: u64) -> Result<Waveform> {
    check_binary(w)?;
    let grid = grid_samples(w, fosc_hz)?;
    let ideal = transition_indices(w);
    check_feasible(&ideal, grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moved = Vec::with_capacity(ideal.len());
    let mut prev: Option<usize> = None;
    for &t in &ideal {
        let base = t.div_ceil(grid) as i64 + rng.random_range(-1i64..=1);
        let mut q = (base.max(1) as usize) * grid;
        if let Some(p) = prev {
            q = q.max(p + grid);
        }
        moved.push(q);
        prev = Some(q);
    }
    let first = w.samples().first().copied().unwrap_or(0.0);
    Ok(Waveform::from_parts_unchecked(
        render(first, w.len(), &moved),
        w.fs_hz(),
        WaveformKind::BinaryEnvelope,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirpmod::{modulate_ideal, ChirpParams, Symbol};
    use proptest::prelude::*;

    #[test]
    fn grid_aligned_input_is_a_fixed_point() {
        // fs = 8 * fosc / 4 => grid of 8 samples; toggles at 8 and 24.
        let mut s = vec![0.0; 40];
        s[8..24].iter_mut().for_each(|v| *v = 1.0);
        let w = Waveform::binary(s, 8.0).unwrap();
        let q = quantize_toggles(&w, 4.0).unwrap();
        assert_eq!(q, w);
    }

    #[test]
    fn rounds_up_to_next_grid_point() {
        let mut s = vec![0.0; 40];
        s[9..20].iter_mut().for_each(|v| *v = 1.0);
        let w = Waveform::binary(s, 8.0).unwrap();
        let q = quantize_toggles(&w, 4.0).unwrap();
        assert_eq!(transition_indices(&q), vec![16, 24]);
    }

    #[test]
    fn cap_equality_is_feasible() {
        // fosc = 32768, bw = 4096: the fastest half-period is exactly 4 / fosc.
        let p = ChirpParams::for_clock(7, 32_768.0).unwrap();
        let syms: Vec<Symbol> = (0..128).map(|v| Symbol::new(v, 7).unwrap()).collect();
        let w = modulate_ideal(&syms, &p).unwrap();
        assert!(quantize_toggles(&w, p.fosc_hz()).is_ok());
    }

    #[test]
    fn bandwidth_above_cap_is_infeasible() {
        // Chirp generated at bw = fosc/8 for a 32768 Hz clock, then toggled
        // by a clock half as fast, i.e. bw = fosc/4.
        let p = ChirpParams::for_clock(7, 32_768.0).unwrap();
        let w = modulate_ideal(&[Symbol::new(0, 7).unwrap()], &p).unwrap();
        let err = quantize_toggles(&w, 16_384.0).unwrap_err();
        assert!(matches!(err, Error::BandwidthInfeasible(_)), "{err}");
    }

    #[test]
    fn rejects_analog_and_off_grid_rates() {
        let w = Waveform::analog(vec![0.0, 0.5], 8.0).unwrap();
        assert!(quantize_toggles(&w, 4.0).is_err());
        let w = Waveform::binary(vec![0.0, 1.0], 10.0).unwrap();
        assert!(matches!(quantize_toggles(&w, 3.0), Err(Error::Config(_))));
    }

    #[test]
    fn jitter_keeps_spacing_and_levels() {
        let p = ChirpParams::for_clock(7, 32_768.0).unwrap();
        let syms: Vec<Symbol> = (0..16).map(|v| Symbol::new(v * 8, 7).unwrap()).collect();
        let w = modulate_ideal(&syms, &p).unwrap();
        let q = quantize_toggles_jittered(&w, p.fosc_hz(), 3).unwrap();
        let grid = 8;
        let t = transition_indices(&q);
        assert!(t.windows(2).all(|p| p[1] - p[0] >= grid));
        assert!(t.iter().all(|i| i % grid == 0));
        assert_eq!(q, quantize_toggles_jittered(&w, p.fosc_hz(), 3).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn quantization_error_bound(
            sf in 5u32..=8,
            seed_syms in proptest::collection::vec(0u32..4096, 1..6),
            shift in 0usize..3,
        ) {
            let fosc = 32_768.0 * (1 << shift) as f64;
            let p = ChirpParams::for_clock(sf, fosc).unwrap();
            let syms: Vec<Symbol> = seed_syms.iter().map(|v| Symbol::new(v % (1 << sf), sf).unwrap()).collect();
            let w = modulate_ideal(&syms, &p).unwrap();
            let q = quantize_toggles(&w, fosc).unwrap();
            let grid = (p.fs_hz() * 4.0 / fosc).round() as usize;

            prop_assert!(q.samples().iter().all(|&v| v == 0.0 || v == 1.0));
            let a = transition_indices(&w);
            let b = transition_indices(&q);
            // Toggles pushed past the end are dropped; everything else maps 1:1.
            prop_assert!(b.len() <= a.len() && a.len() - b.len() <= 1);
            for (ideal, moved) in a.iter().zip(&b) {
                prop_assert!(moved >= ideal && moved - ideal < grid);
                prop_assert_eq!(moved % grid, 0);
            }
            prop_assert!(b.windows(2).all(|t| t[1] - t[0] >= grid));
        }
    }
}
