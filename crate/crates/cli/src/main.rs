use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rfsn_core::chirpmod::{modulate_analog, modulate_square, spectrum, BINARY_MAGIC};
use rfsn_core::harness::{
    calibrate_composite_gain, random_symbols, rate_table, run_active_trace, run_ber_sweep, run_charge_sweep,
    run_theory_report, write_record, write_table, ChirpShape, ExperimentConfig, OutputFormat, TABLE_CLOCKS_HZ,
};
use rfsn_core::rxdsp::{Dechirper, NO_SIGNAL_PEAK_TO_MEAN};
use rfsn_core::{Error, LeakageVariant, Symbol, Waveform};

#[derive(Parser)]
#[command(name = "rfsn", version, about = "Square-chirp backscatter and energy-harvesting experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Analog,
    Square,
    Quantized,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    WithStartupCircuit,
    WithoutStartupCircuit,
}

#[derive(Subcommand)]
enum Command {
    /// Derived chirp parameters of the configured chirp.
    Params,
    /// Writes a chirp waveform (`sample_index,value` CSV, or binary with --binary).
    Modulate {
        /// Comma-separated symbol values.
        #[arg(long, value_delimiter = ',', conflicts_with = "random")]
        symbols: Vec<u32>,
        /// Number of random symbols drawn from the seed.
        #[arg(long)]
        random: Option<usize>,
        /// Waveform shape; the config's shape when absent.
        #[arg(long, value_enum)]
        shape: Option<Shape>,
        #[arg(long)]
        binary: bool,
    },
    /// Detects symbols in a waveform file: `index,symbol,peak_to_mean,no_signal`.
    Demodulate {
        /// Waveform written by `modulate` (CSV or binary).
        #[arg(long)]
        input: PathBuf,
        /// Symbols to detect; as many whole symbols as the file holds when absent.
        #[arg(long)]
        symbols: Option<usize>,
    },
    /// One-sided power spectrum `freq_hz,psd` of a waveform file or of random symbols.
    Spectrum {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Random symbols to modulate when no input is given.
        #[arg(long, default_value_t = 16)]
        random: usize,
        /// Remove the mean before the transform.
        #[arg(long)]
        ac: bool,
    },
    /// Monte-Carlo BER over the configured sweep axis.
    BerSweep,
    /// Time to reach the target voltage for every node variant, or an
    /// active-node event trace with --trace-pr.
    ChargeSweep {
        /// Incident power of a state-machine trace, dBm.
        #[arg(long)]
        trace_pr: Option<f64>,
        #[arg(long, value_enum, default_value_t = Variant::WithStartupCircuit)]
        variant: Variant,
    },
    /// Closed-form curves, or the bandwidth/duration/rate table with --table.
    Theory {
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        snr_lo: f64,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        snr_hi: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Fits the composite gain to the configured anchor.
    Calibrate {
        /// Writes the config with the fitted gain to this TOML file.
        #[arg(long)]
        write_config: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ParamsRow {
    sf: u32,
    chips: usize,
    bw_hz: f64,
    fosc_hz: f64,
    fs_hz: f64,
    ds_s: f64,
    rd_bps: f64,
    toggle_period_s: f64,
    samples_per_symbol: Option<usize>,
}

#[derive(Serialize)]
struct DetectionRow {
    index: usize,
    symbol: u32,
    peak_to_mean: f64,
    no_signal: bool,
}

#[derive(Serialize)]
struct SpectrumRow {
    freq_hz: f64,
    psd: f64,
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn output(c: &Common) -> Result<Box<dyn Write>> {
    Ok(match &c.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_waveform(path: &Path, fs_hz: f64) -> Result<Waveform> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .with_context(|| format!("reading {}", path.display()))?;
    let w = if bytes.starts_with(BINARY_MAGIC) {
        Waveform::read_binary(bytes.as_slice())?
    } else {
        Waveform::read_csv(bytes.as_slice(), fs_hz)?
    };
    Ok(w)
}

fn shape_of(s: Shape) -> ChirpShape {
    match s {
        Shape::Analog => ChirpShape::Analog,
        Shape::Square => ChirpShape::Square,
        Shape::Quantized => ChirpShape::QuantizedSquare,
    }
}

fn modulate(cfg: &ExperimentConfig, symbols: &[Symbol], shape: ChirpShape) -> Result<Waveform> {
    let p = cfg.chirp.params()?;
    Ok(match shape {
        ChirpShape::Analog => modulate_analog(symbols, &p)?,
        ChirpShape::Square => modulate_square(symbols, &p, false)?,
        ChirpShape::QuantizedSquare => modulate_square(symbols, &p, true)?,
    })
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let cfg = load_config(common)?;
    let fmt: OutputFormat = common.format.into();
    match cli.command {
        Command::Params => {
            let p = cfg.chirp.params()?;
            let row = ParamsRow {
                sf: p.sf(),
                chips: p.chips(),
                bw_hz: p.bw_hz(),
                fosc_hz: p.fosc_hz(),
                fs_hz: p.fs_hz(),
                ds_s: p.ds_s(),
                rd_bps: p.rd_bps(),
                toggle_period_s: p.toggle_period_s(),
                samples_per_symbol: p.samples_per_symbol(),
            };
            write_record(&row, fmt, output(common)?)?;
        }
        Command::Modulate {
            symbols,
            random,
            shape,
            binary,
        } => {
            let sf = cfg.chirp.sf;
            let syms = match random {
                Some(n) => random_symbols(sf, n, cfg.base_seed),
                None if symbols.is_empty() => {
                    return Err(Error::Config("give --symbols or --random".into()).into());
                }
                None => symbols
                    .iter()
                    .map(|&v| Symbol::new(v, sf))
                    .collect::<rfsn_core::Result<Vec<_>>>()?,
            };
            let w = modulate(&cfg, &syms, shape.map(shape_of).unwrap_or(cfg.chirp.shape))?;
            let out = output(common)?;
            if binary {
                w.write_binary(out)?;
            } else {
                w.write_csv(out)?;
            }
        }
        Command::Demodulate { input, symbols } => {
            let p = cfg.chirp.params()?;
            let w = read_waveform(&input, p.fs_hz())?;
            if (w.fs_hz() - p.fs_hz()).abs() > 1e-9 * p.fs_hz() {
                return Err(Error::Config(format!(
                    "waveform sampled at {} Hz but the config expects {} Hz",
                    w.fs_hz(),
                    p.fs_hz()
                ))
                .into());
            }
            let mut d = Dechirper::new(&p)?;
            let n = d.samples_per_symbol();
            let count = symbols.unwrap_or(w.len() / n);
            if count * n > w.len() {
                return Err(Error::LengthMismatch {
                    expected: count * n,
                    actual: w.len(),
                }
                .into());
            }
            let rows = w.samples()[..count * n]
                .chunks_exact(n)
                .enumerate()
                .map(|(index, win)| {
                    let o = d.dechirp_window(win)?;
                    Ok(DetectionRow {
                        index,
                        symbol: o.detected.value(),
                        peak_to_mean: o.peak_to_mean,
                        no_signal: o.peak_to_mean <= NO_SIGNAL_PEAK_TO_MEAN,
                    })
                })
                .collect::<rfsn_core::Result<Vec<_>>>()?;
            write_table(&rows, fmt, output(common)?)?;
        }
        Command::Spectrum { input, random, ac } => {
            let w = match input {
                Some(path) => read_waveform(&path, cfg.chirp.params()?.fs_hz())?,
                None => modulate(&cfg, &random_symbols(cfg.chirp.sf, random, cfg.base_seed), cfg.chirp.shape)?,
            };
            let w = if ac { w.remove_mean() } else { w };
            let s = spectrum(&w)?;
            let rows: Vec<SpectrumRow> = s
                .freqs_hz
                .iter()
                .zip(&s.psd)
                .map(|(&freq_hz, &psd)| SpectrumRow { freq_hz, psd })
                .collect();
            write_table(&rows, fmt, output(common)?)?;
        }
        Command::BerSweep => {
            let start = Instant::now();
            let rows = run_ber_sweep(&cfg)?;
            write_table(&rows, fmt, output(common)?)?;
            for r in &rows {
                eprintln!("{} = {}: {:.3} s", cfg.sweep.axis.name(), r.axis_value, r.runtime_s);
            }
            eprintln!("sweep finished in {:.2} s", start.elapsed().as_secs_f64());
        }
        Command::ChargeSweep { trace_pr, variant } => match trace_pr {
            Some(pr) => {
                let v = match variant {
                    Variant::WithStartupCircuit => LeakageVariant::WithStartupCircuit,
                    Variant::WithoutStartupCircuit => LeakageVariant::WithoutStartupCircuit,
                };
                let trace = run_active_trace(&cfg, v, pr)?;
                match fmt {
                    OutputFormat::Csv => trace.write_csv(output(common)?, cfg.power.active.msdu_bytes)?,
                    OutputFormat::Json => write_record(&trace, fmt, output(common)?)?,
                }
                eprintln!(
                    "{} packets, {} bytes, energy imbalance {:.2e}",
                    trace.packets_sent,
                    trace.bytes_sent,
                    trace.energy.relative_imbalance()
                );
            }
            None => write_table(&run_charge_sweep(&cfg)?, fmt, output(common)?)?,
        },
        Command::Theory {
            table,
            snr_lo,
            snr_hi,
            step,
        } => {
            if table {
                write_table(&rate_table(cfg.chirp.sf, &TABLE_CLOCKS_HZ)?, fmt, output(common)?)?;
            } else {
                write_table(&run_theory_report(&cfg, snr_lo, snr_hi, step)?, fmt, output(common)?)?;
            }
        }
        Command::Calibrate { write_config } => {
            let cal = calibrate_composite_gain(&cfg)?;
            write_record(&cal, fmt, output(common)?)?;
            if let Some(path) = write_config {
                std::fs::write(&path, cal.apply(&cfg).to_toml_string()?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<Error>().is_some_and(Error::is_config);
            ExitCode::from(if config { 2 } else { 3 })
        }
    }
}
