//! CSV output for runs, sweeps and event logs.
//!
//! Floating-point cells use six significant digits in the style of C's `%g`;
//! durations are written as integers in the unit named by the column.

use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{EventLog, SimResult};
use crate::metrics::MetricsBundle;
use crate::scheduler::SchedulerKind;
use crate::{Error, Micros, Result};

pub const RUNS_CSV: &str = "runs.csv";
pub const DELAY_CSV: &str = "delay.csv";
pub const THROUGHPUT_CSV: &str = "throughput.csv";
pub const TXOP_CSV: &str = "txop.csv";
pub const PER_SI_TXOP_CSV: &str = "per_si_txop.csv";
pub const EVENTS_CSV: &str = "events.csv";

/// Formats `x` like C's `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    fmt_g(x, 6)
}

fn fmt_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= precision as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (precision as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One simulation's worth of summary output.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub scheduler: SchedulerKind,
    pub stations: usize,
    pub seed: u64,
    pub si: Micros,
    pub admitted: usize,
    pub rejected: usize,
    pub metrics: MetricsBundle,
}

impl RunRow {
    pub fn new(result: &SimResult, metrics: MetricsBundle) -> Self {
        RunRow {
            scheduler: result.config.scheduler,
            stations: result.config.stations.len(),
            seed: result.config.seed,
            si: result.si,
            admitted: result.admitted.len(),
            rejected: result.rejected.len(),
            metrics,
        }
    }
}

fn writer(dir: &Path, name: &str) -> Result<(csv::Writer<fs::File>, PathBuf)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok((csv::Writer::from_writer(file), path))
}

fn write_table<F>(dir: &Path, name: &str, header: &[&str], rows: &[RunRow], cells: F) -> Result<PathBuf>
where
    F: Fn(&RunRow) -> Vec<String>,
{
    let (mut w, path) = writer(dir, name)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(cells(row))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `runs.csv`, `delay.csv`, `throughput.csv` and `txop.csv`. On
/// failure any file already written is removed.
pub fn write_summary_tables(dir: &Path, rows: &[RunRow]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = (|| {
        written.push(write_table(
            dir,
            RUNS_CSV,
            &["scheduler", "stations", "seed", "si_us", "admitted", "rejected"],
            rows,
            |r| {
                vec![
                    r.scheduler.to_string(),
                    r.stations.to_string(),
                    r.seed.to_string(),
                    r.si.to_string(),
                    r.admitted.to_string(),
                    r.rejected.to_string(),
                ]
            },
        )?);
        written.push(write_table(
            dir,
            DELAY_CSV,
            &["scheduler", "stations", "mean_e2e_delay_s", "samples"],
            rows,
            |r| {
                vec![
                    r.scheduler.to_string(),
                    r.stations.to_string(),
                    fmt_g6(r.metrics.mean_e2e_delay.unwrap_or(f64::NAN)),
                    r.metrics.delay_samples.to_string(),
                ]
            },
        )?);
        written.push(write_table(
            dir,
            THROUGHPUT_CSV,
            &["scheduler", "stations", "aggregate_throughput_bps"],
            rows,
            |r| {
                vec![
                    r.scheduler.to_string(),
                    r.stations.to_string(),
                    fmt_g6(r.metrics.aggregate_throughput),
                ]
            },
        )?);
        written.push(write_table(
            dir,
            TXOP_CSV,
            &["scheduler", "stations", "aggregate_txop_s"],
            rows,
            |r| {
                vec![
                    r.scheduler.to_string(),
                    r.stations.to_string(),
                    fmt_g6(r.metrics.aggregate_txop),
                ]
            },
        )?);
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            remove_all(&written);
            Err(e)
        }
    }
}

pub fn write_per_si_txop(dir: &Path, rows: &[RunRow]) -> Result<PathBuf> {
    let (mut w, path) = writer(dir, PER_SI_TXOP_CSV)?;
    w.write_record(["scheduler", "station_id", "si_index", "granted_us"])?;
    for row in rows {
        for &(si_index, station, granted) in &row.metrics.per_si_txop {
            w.write_record([
                row.scheduler.to_string(),
                station.to_string(),
                si_index.to_string(),
                granted.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn write_events(path: &Path, log: &EventLog) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    for rec in log.iter() {
        w.serialize(rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}
