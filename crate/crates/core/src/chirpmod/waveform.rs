use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a waveform is a two-level GPIO envelope or an arbitrary real signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformKind {
    /// Only the values 0 (antenna shorted) and 1 (antenna open).
    BinaryEnvelope,
    Analog,
}

impl WaveformKind {
    fn code(self) -> u8 {
        match self {
            WaveformKind::BinaryEnvelope => 0,
            WaveformKind::Analog => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(WaveformKind::BinaryEnvelope),
            1 => Ok(WaveformKind::Analog),
            other => Err(Error::Format(format!("unknown waveform kind code {other}"))),
        }
    }
}

/// A uniformly sampled real baseband signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    samples: Vec<f64>,
    fs_hz: f64,
    kind: WaveformKind,
}

pub const BINARY_MAGIC: &[u8; 4] = b"SQCH";
pub const BINARY_VERSION: u16 = 1;
pub const BINARY_HEADER_LEN: usize = 16;

impl Waveform {
    /// Builds an analog waveform.
    pub fn analog(samples: Vec<f64>, fs_hz: f64) -> Result<Self> {
        check_fs(fs_hz)?;
        Ok(Self {
            samples,
            fs_hz,
            kind: WaveformKind::Analog,
        })
    }

    /// Builds a binary envelope, rejecting any sample other than 0 or 1.
    pub fn binary(samples: Vec<f64>, fs_hz: f64) -> Result<Self> {
        check_fs(fs_hz)?;
        if let Some((i, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, &v)| v != 0.0 && v != 1.0)
        {
            return Err(Error::Format(format!(
                "binary envelope sample {i} has value {v}"
            )));
        }
        Ok(Self {
            samples,
            fs_hz,
            kind: WaveformKind::BinaryEnvelope,
        })
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, fs_hz: f64, kind: WaveformKind) -> Self {
        Self {
            samples,
            fs_hz,
            kind,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Mean square value.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    /// Root-mean-square of the signal after removing its mean.
    pub fn ac_rms(&self) -> f64 {
        let m = self.mean();
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.samples.len() as f64)
            .sqrt()
    }

    /// DC blocker: subtracts the block mean. The result is analog.
    pub fn remove_mean(&self) -> Waveform {
        let m = self.mean();
        Waveform {
            samples: self.samples.iter().map(|x| x - m).collect(),
            fs_hz: self.fs_hz,
            kind: WaveformKind::Analog,
        }
    }

    /// Writes `sample_index,value` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["sample_index", "value"])?;
        for (i, v) in self.samples.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`Waveform::write_csv`]. CSV carries no
    /// sample rate or kind, so both are supplied; the kind is inferred as
    /// binary when every value is 0 or 1.
    pub fn read_csv<R: Read>(reader: R, fs_hz: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut samples = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let idx: usize = field(&rec, 0, row)?;
            if idx != row {
                return Err(Error::Format(format!(
                    "row {row} has sample_index {idx}; indices must be consecutive from 0"
                )));
            }
            samples.push(field::<f64>(&rec, 1, row)?);
        }
        if samples.iter().all(|&v| v == 0.0 || v == 1.0) {
            Waveform::binary(samples, fs_hz)
        } else {
            Waveform::analog(samples, fs_hz)
        }
    }

    /// Writes the compact binary layout: a 16-byte header (`SQCH`, version
    /// u16, kind u8, one pad byte, `fs_hz` as f64) then f32 samples, all
    /// little-endian.
    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut header = [0u8; BINARY_HEADER_LEN];
        header[0..4].copy_from_slice(BINARY_MAGIC);
        header[4..6].copy_from_slice(&BINARY_VERSION.to_le_bytes());
        header[6] = self.kind.code();
        header[8..16].copy_from_slice(&self.fs_hz.to_le_bytes());
        writer.write_all(&header)?;
        let mut body = Vec::with_capacity(self.samples.len() * 4);
        for &s in &self.samples {
            body.extend_from_slice(&(s as f32).to_le_bytes());
        }
        writer.write_all(&body)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut reader: R) -> Result<Self> {
        let mut header = [0u8; BINARY_HEADER_LEN];
        reader
            .read_exact(&mut header)
            .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &header[0..4] != BINARY_MAGIC {
            return Err(Error::Format("bad magic, expected SQCH".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let kind = WaveformKind::from_code(header[6])?;
        let fs_hz = f64::from_le_bytes(header[8..16].try_into().expect("8-byte slice"));
        check_fs(fs_hz)?;
        let mut body = Vec::new();
        reader.read_to_end(&mut body)?;
        if body.len() % 4 != 0 {
            return Err(Error::Format(format!(
                "sample payload of {} bytes is not a multiple of 4",
                body.len()
            )));
        }
        let samples: Vec<f64> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        match kind {
            WaveformKind::BinaryEnvelope => Waveform::binary(samples, fs_hz),
            WaveformKind::Analog => Waveform::analog(samples, fs_hz),
        }
    }
}

fn check_fs(fs_hz: f64) -> Result<()> {
    if fs_hz.is_finite() && fs_hz > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("sample rate must be positive, got {fs_hz}")))
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, row: usize) -> Result<T> {
    rec.get(col)
        .ok_or_else(|| Error::Format(format!("row {row}: missing column {col}")))?
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("row {row}: unparsable column {col}")))
}
