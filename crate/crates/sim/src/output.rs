//! CSV and JSON writers. Floats are written as `{:.16e}` in CSV, which
//! round-trips every `f64` exactly; JSON uses serde_json's shortest exact form.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::{Result, SimError};
use crate::sweep::{PdrTable, PdtTable, SweepOutput, SweepRecord};

pub const RECORD_HEADER: [&str; 14] = [
    "protocol",
    "d",
    "q",
    "xi",
    "direction",
    "weather",
    "zenith_deg",
    "L_m",
    "mean_eta",
    "avg_rate",
    "qber",
    "tolerance",
    "n_samples",
    "seed",
];

pub const PDT_HEADER: [&str; 11] = [
    "direction",
    "weather",
    "zenith_deg",
    "L_m",
    "n_samples",
    "seed",
    "chi_ext",
    "bin",
    "bin_center",
    "bin_mean",
    "probability",
];

pub const PDR_HEADER: [&str; 13] = [
    "protocol",
    "d",
    "q",
    "xi",
    "direction",
    "weather",
    "zenith_deg",
    "L_m",
    "n_samples",
    "seed",
    "rounding_decimals",
    "rate",
    "probability",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn record_row(r: &SweepRecord) -> [String; 14] {
    [
        r.protocol.clone(),
        r.d.to_string(),
        opt_f64(r.q),
        fmt_f64(r.xi),
        r.direction.clone().unwrap_or_default(),
        r.weather.clone().unwrap_or_default(),
        opt_f64(r.zenith_deg),
        opt_f64(r.l_m),
        opt_f64(r.mean_eta),
        opt_f64(r.avg_rate),
        opt_f64(r.qber),
        opt_f64(r.tolerance),
        opt(r.n_samples),
        opt(r.seed),
    ]
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_csv<W: Write>(w: W, output: &SweepOutput) -> csv::Result<()> {
    let mut out = csv_writer(w);
    match output {
        SweepOutput::Records(records) => {
            out.write_record(RECORD_HEADER)?;
            for r in records {
                out.write_record(record_row(r))?;
            }
        }
        SweepOutput::Pdt(tables) => {
            out.write_record(PDT_HEADER)?;
            for t in tables {
                write_pdt_rows(&mut out, t)?;
            }
        }
        SweepOutput::Pdr(tables) => {
            out.write_record(PDR_HEADER)?;
            for t in tables {
                write_pdr_rows(&mut out, t)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn write_pdt_rows<W: Write>(out: &mut csv::Writer<W>, t: &PdtTable) -> csv::Result<()> {
    for (i, ((c, m), p)) in t
        .bin_centers
        .iter()
        .zip(&t.bin_means)
        .zip(&t.probabilities)
        .enumerate()
    {
        out.write_record([
            t.point.direction.clone(),
            t.point.weather.clone(),
            fmt_f64(t.point.zenith_deg),
            fmt_f64(t.point.l_m),
            t.n_samples.to_string(),
            t.seed.to_string(),
            fmt_f64(t.chi_ext),
            i.to_string(),
            fmt_f64(*c),
            fmt_f64(*m),
            fmt_f64(*p),
        ])?;
    }
    Ok(())
}

fn write_pdr_rows<W: Write>(out: &mut csv::Writer<W>, t: &PdrTable) -> csv::Result<()> {
    for (rate, p) in t.rate_values.iter().zip(&t.probabilities) {
        out.write_record([
            t.protocol.clone(),
            t.d.to_string(),
            fmt_f64(t.q),
            fmt_f64(t.xi),
            t.point.direction.clone(),
            t.point.weather.clone(),
            fmt_f64(t.point.zenith_deg),
            fmt_f64(t.point.l_m),
            t.n_samples.to_string(),
            t.seed.to_string(),
            t.rounding_decimals.to_string(),
            fmt_f64(*rate),
            fmt_f64(*p),
        ])?;
    }
    Ok(())
}

fn write_json<W: Write>(mut w: W, output: &SweepOutput) -> io::Result<()> {
    match output {
        SweepOutput::Records(r) => serde_json::to_writer_pretty(&mut w, r),
        SweepOutput::Pdt(t) => serde_json::to_writer_pretty(&mut w, t),
        SweepOutput::Pdr(t) => serde_json::to_writer_pretty(&mut w, t),
    }?;
    w.write_all(b"\n")?;
    w.flush()
}

/// Serializes `output` into a byte buffer.
pub fn render(output: &SweepOutput, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, output).expect("writing to memory cannot fail"),
        Format::Json => write_json(&mut buf, output).expect("writing to memory cannot fail"),
    }
    buf
}

/// Writes `output` to `path`, or to stdout when `path` is `None`.
pub fn emit(output: &SweepOutput, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(output, format);
    let io_err = |path: PathBuf| move |source| SimError::Io { path, source };
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(io_err(p.into()))?);
            f.write_all(&bytes)
                .and_then(|_| f.flush())
                .map_err(io_err(p.into()))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(io_err("<stdout>".into()))
        }
    }
}

/// Records only, for callers that never produce distribution tables.
pub fn emit_records(records: &[SweepRecord], format: Format, path: Option<&Path>) -> Result<()> {
    emit(&SweepOutput::Records(records.to_vec()), format, path)
}
