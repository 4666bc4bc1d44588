use serde::{Deserialize, Serialize};

use crate::chirpmod::Symbol;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Error counts of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    pub sf: u32,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    pub n_symbols: u64,
    pub n_symbol_errors: u64,
    pub ber: f64,
    pub ser: f64,
    pub wilson_95_halfwidth: f64,
}

/// One `sf,bw_hz,snr_db,n_symbols,ser,ber,wilson95` record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub sf: u32,
    pub bw_hz: f64,
    pub snr_db: f64,
    pub n_symbols: u64,
    pub ser: f64,
    pub ber: f64,
    pub wilson95: f64,
}

impl BerResult {
    pub fn from_counts(sf: u32, n_symbols: u64, n_symbol_errors: u64, n_bit_errors: u64) -> Self {
        let n_bits = sf as u64 * n_symbols;
        let ratio = |k: u64, n: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            sf,
            n_bits,
            n_bit_errors,
            n_symbols,
            n_symbol_errors,
            ber: ratio(n_bit_errors, n_bits),
            ser: ratio(n_symbol_errors, n_symbols),
            wilson_95_halfwidth: wilson_interval(n_bit_errors, n_bits).1,
        }
    }

    /// Pools two runs with the same spreading factor.
    pub fn merge(&self, other: &BerResult) -> BerResult {
        debug_assert_eq!(self.sf, other.sf);
        BerResult::from_counts(
            self.sf,
            self.n_symbols + other.n_symbols,
            self.n_symbol_errors + other.n_symbol_errors,
            self.n_bit_errors + other.n_bit_errors,
        )
    }

    /// Wilson 95% interval `(low, high)` on the BER.
    pub fn ber_interval(&self) -> (f64, f64) {
        let (centre, half) = wilson_interval(self.n_bit_errors, self.n_bits);
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }

    pub fn row(&self, bw_hz: f64, snr_db: f64) -> BerRow {
        BerRow {
            sf: self.sf,
            bw_hz,
            snr_db,
            n_symbols: self.n_symbols,
            ser: self.ser,
            ber: self.ber,
            wilson95: self.wilson_95_halfwidth,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials at 95%:
/// returns `(centre, half_width)`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.5, 0.5);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (centre, half)
}

/// Counts symbol errors and bit errors over the `sf`-bit binary expansions.
pub fn score(tx: &[Symbol], rx: &[Symbol], sf: u32) -> Result<BerResult> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    let mut sym_err = 0u64;
    let mut bit_err = 0u64;
    for (a, b) in tx.iter().zip(rx) {
        let diff = a.value() ^ b.value();
        if diff != 0 {
            sym_err += 1;
            bit_err += diff.count_ones() as u64;
        }
    }
    Ok(BerResult::from_counts(sf, tx.len() as u64, sym_err, bit_err))
}

/// Writes BER rows as CSV with a header.
pub fn write_ber_csv<W: std::io::Write>(rows: &[BerRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(v: &[u32]) -> Vec<Symbol> {
        v.iter().map(|&x| Symbol::new(x, 7).unwrap()).collect()
    }

    #[test]
    fn identical_streams() {
        let s = syms(&[1, 2, 3]);
        let r = score(&s, &s, 7).unwrap();
        assert_eq!(r.ber, 0.0);
        assert_eq!(r.ser, 0.0);
        assert_eq!(r.n_bits, 21);
        assert!(r.wilson_95_halfwidth > 0.0);
    }

    #[test]
    fn complement_flips_every_bit() {
        let r = score(&syms(&[0b0101010]), &syms(&[0b1010101]), 7).unwrap();
        assert_eq!(r.ber, 1.0);
        assert_eq!(r.n_bit_errors, 7);
    }

    #[test]
    fn off_by_one() {
        let tx = syms(&[10, 20, 30, 40]);
        let rx = syms(&[10, 21, 30, 40]);
        let r = score(&tx, &rx, 7).unwrap();
        assert_eq!(r.ser, 0.25);
        assert_eq!(r.n_bit_errors, 1);
        assert!(score(&tx, &rx[..3], 7).is_err());
    }

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: interval [0.0552, 0.1744].
        let (c, h) = wilson_interval(10, 100);
        assert!((c - h - 0.0552).abs() < 1e-4 && (c + h - 0.1744).abs() < 1e-4);
        let r = BerResult::from_counts(7, 100, 0, 0);
        let (lo, hi) = r.ber_interval();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn csv_header() {
        let r = BerResult::from_counts(7, 1000, 10, 20);
        let mut out = Vec::new();
        write_ber_csv(&[r.row(4096.0, -12.5)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("sf,bw_hz,snr_db,n_symbols,ser,ber,wilson95\n"));
        assert!(text.contains("7,4096.0,-12.5,1000,0.01,"));
    }

    #[test]
    fn merge_pools_counts() {
        let a = BerResult::from_counts(7, 10, 1, 2);
        let b = BerResult::from_counts(7, 30, 3, 4);
        let m = a.merge(&b);
        assert_eq!((m.n_symbols, m.n_symbol_errors, m.n_bit_errors), (40, 4, 6));
    }
}
