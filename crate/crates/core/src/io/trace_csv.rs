//! CSV traces: a `t` column, then one column per channel, 17 significant
//! digits so binary64 values survive a round trip.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::IoError;
use crate::scalar::Scalar;
use crate::simulation::{Channel, Trace};

fn csv_err(e: impl std::fmt::Display) -> IoError {
    IoError::Csv(e.to_string())
}

pub fn write_trace_csv<T: Scalar, W: Write>(trace: &Trace<T>, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let header =
        std::iter::once("t".to_string()).chain(trace.channels().iter().map(Channel::label));
    w.write_record(header).map_err(csv_err)?;
    let m = trace.samples();
    let mut row = Vec::with_capacity(m.ncols() + 1);
    for k in 0..trace.sample_count() {
        row.clear();
        row.push(format!("{:.16e}", trace.time(k).as_f64()));
        row.extend((0..m.ncols()).map(|j| format!("{:.16e}", m[(k, j)].as_f64())));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn trace_to_csv<T: Scalar>(trace: &Trace<T>) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

/// Reads a trace written by [`write_trace_csv`]. The time column must be
/// uniform; `dt` is recovered from it.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Trace<f64>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("t") {
        return Err(IoError::Csv("first column must be `t`".into()));
    }
    let channels = headers
        .iter()
        .skip(1)
        .map(|h| h.parse::<Channel>().map_err(IoError::Csv))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != channels.len() + 1 {
            return Err(IoError::Csv(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                rec.len(),
                channels.len() + 1
            )));
        }
        let mut parsed = rec.iter().map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| IoError::Csv(format!("row {}: `{f}` is not a number", line + 2)))
        });
        times.push(parsed.next().expect("row has a time field")?);
        for v in parsed {
            values.push(v?);
        }
    }
    let n = times.len();
    if n < 2 {
        return Err(IoError::Csv(format!("{n} rows, need at least 2")));
    }
    let dt = recover_step(&times)?;
    let samples = DMatrix::from_row_slice(n, channels.len(), &values);
    Trace::new(times[0], dt, channels, samples).map_err(csv_err)
}

/// Step that regenerates every stamp as `t0 + k·dt`, preferring an exact
/// match among a few ulps around the mean spacing.
fn recover_step(times: &[f64]) -> Result<f64, IoError> {
    let n = times.len();
    let (t0, last) = (times[0], times[n - 1]);
    let mean = (last - t0) / (n - 1) as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(IoError::Csv("time column must increase".into()));
    }
    let exact = |dt: f64| {
        times
            .iter()
            .enumerate()
            .all(|(k, &t)| t0 + k as f64 * dt == t)
    };
    let mut below = mean;
    let mut above = mean;
    for _ in 0..8 {
        if exact(below) {
            return Ok(below);
        }
        if exact(above) {
            return Ok(above);
        }
        below = below.next_down();
        above = above.next_up();
    }
    let slack = 1e-6 * mean + 4.0 * f64::EPSILON * t0.abs().max(last.abs());
    for (k, &t) in times.iter().enumerate() {
        if (t0 + k as f64 * mean - t).abs() > slack {
            return Err(IoError::Csv(format!(
                "row {}: time column is not uniform",
                k + 2
            )));
        }
    }
    Ok(mean)
}
