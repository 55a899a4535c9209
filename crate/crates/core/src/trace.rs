//! MPEG-4 frame-size traces.
//!
//! A trace file holds one frame per line with four whitespace-separated
//! columns, `seq type time_ms size_bytes`. Rows may appear in decode order;
//! parsing re-sorts them by display time, which is the order frames are
//! handed to the MAC.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::{Error, Micros, Result};

/// GoP pattern stamped onto synthetic traces. Informational only.
const SYNTHETIC_GOP: &[u8; 12] = b"IBBPBBPBBPBB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameType {
    I,
    P,
    B,
}

impl FrameType {
    pub fn letter(self) -> char {
        match self {
            FrameType::I => 'I',
            FrameType::P => 'P',
            FrameType::B => 'B',
        }
    }
}

impl FromStr for FrameType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(FrameType::I),
            "P" => Ok(FrameType::P),
            "B" => Ok(FrameType::B),
            other => Err(format!("unknown frame type '{other}'")),
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VideoFrame {
    pub seq: u64,
    pub frame_type: FrameType,
    /// Microseconds since stream start.
    pub arrival_time: Micros,
    /// MSDU payload in bytes; always at least 1.
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoTrace {
    pub name: String,
    frames: Vec<VideoFrame>,
    frame_interval: Micros,
}

impl VideoTrace {
    /// Builds a trace, sorting frames by arrival time (stable, so ties keep
    /// their input order).
    pub fn new(name: impl Into<String>, mut frames: Vec<VideoFrame>, frame_interval: Micros) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if frame_interval == 0 {
            return Err(Error::config("frame interval must be positive"));
        }
        if let Some(f) = frames.iter().find(|f| f.size == 0) {
            return Err(Error::config(format!("frame {} has zero size", f.seq)));
        }
        frames.sort_by_key(|f| f.arrival_time);
        Ok(VideoTrace {
            name: name.into(),
            frames,
            frame_interval,
        })
    }

    pub fn frames(&self) -> &[VideoFrame] {
        &self.frames
    }

    pub fn frame_interval(&self) -> Micros {
        self.frame_interval
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn max_size(&self) -> u32 {
        self.frames.iter().map(|f| f.size).max().unwrap_or(0)
    }

    /// Duration of one pass over the trace when it is replayed cyclically:
    /// first to last arrival plus one frame interval.
    pub fn span(&self) -> Micros {
        let first = self.frames[0].arrival_time;
        let last = self.frames[self.frames.len() - 1].arrival_time;
        last - first + self.frame_interval
    }
}

/// Parses the four-column trace format. `frame_interval` is the nominal
/// capture period in microseconds.
pub fn parse_trace(text: &str, frame_interval: Micros) -> Result<VideoTrace> {
    let mut frames = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let seq: u64 = cols[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid sequence number '{}'", cols[0])))?;
        let frame_type: FrameType = cols[1].parse().map_err(|e: String| Error::parse(line_no, e))?;
        let time_ms: u64 = cols[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid time '{}'", cols[2])))?;
        let size: i64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid frame size '{}'", cols[3])))?;
        if size <= 0 || size > i64::from(u32::MAX) {
            return Err(Error::parse(line_no, format!("frame size {size} out of range")));
        }
        let arrival_time = time_ms
            .checked_mul(1000)
            .ok_or_else(|| Error::parse(line_no, "time overflows microsecond range"))?;
        frames.push(VideoFrame {
            seq,
            frame_type,
            arrival_time,
            size: size as u32,
        });
    }
    VideoTrace::new("", frames, frame_interval)
}

/// Writes a trace back out in file format, one line per frame in arrival
/// order. Arrival times must be whole milliseconds.
pub fn emit_trace(trace: &VideoTrace) -> Result<String> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut out = String::with_capacity(trace.len() * 24);
    for f in trace.frames() {
        if f.arrival_time % 1000 != 0 {
            return Err(Error::config(format!(
                "frame {} arrival {} us is not a whole millisecond",
                f.seq, f.arrival_time
            )));
        }
        writeln!(out, "{} {} {} {}", f.seq, f.frame_type, f.arrival_time / 1000, f.size)
            .expect("writing to a String cannot fail");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStats {
    pub frame_count: usize,
    pub mean_size: f64,
    pub max_size: u32,
    /// Population standard deviation.
    pub std_size: f64,
    pub cov: f64,
    pub mean_bit_rate: f64,
    pub peak_bit_rate: f64,
    pub peak_mean_ratio: f64,
}

pub fn compute_stats(trace: &VideoTrace) -> TraceStats {
    let n = trace.len() as f64;
    let sum: u64 = trace.frames().iter().map(|f| u64::from(f.size)).sum();
    let mean_size = sum as f64 / n;
    let var = trace
        .frames()
        .iter()
        .map(|f| {
            let d = f64::from(f.size) - mean_size;
            d * d
        })
        .sum::<f64>()
        / n;
    let std_size = var.sqrt();
    let max_size = trace.max_size();
    let interval_s = trace.frame_interval() as f64 / 1e6;
    let mean_bit_rate = 8.0 * mean_size / interval_s;
    let peak_bit_rate = 8.0 * f64::from(max_size) / interval_s;
    TraceStats {
        frame_count: trace.len(),
        mean_size,
        max_size,
        std_size,
        cov: std_size / mean_size,
        mean_bit_rate,
        peak_bit_rate,
        peak_mean_ratio: peak_bit_rate / mean_bit_rate,
    }
}

/// Draws i.i.d. lognormal frame sizes whose distribution has the requested
/// mean and coefficient of variation. Sizes are rounded to whole bytes and
/// clamped to at least one byte; frame `i` arrives at `i * frame_interval`.
pub fn generate_synthetic(
    mean_size: f64,
    cov: f64,
    frame_count: usize,
    frame_interval: Micros,
    seed: u64,
) -> Result<VideoTrace> {
    if !(1.0..f64::INFINITY).contains(&mean_size) || !(0.0..f64::INFINITY).contains(&cov) {
        return Err(Error::config(format!(
            "synthetic trace needs mean >= 1 and cov >= 0 (got mean {mean_size}, cov {cov})"
        )));
    }
    if frame_count == 0 {
        return Err(Error::EmptyTrace);
    }
    let sigma2 = (1.0 + cov * cov).ln();
    let mu = mean_size.ln() - sigma2 / 2.0;
    let dist = LogNormal::new(mu, sigma2.sqrt()).map_err(|e| Error::config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let frames = (0..frame_count)
        .map(|i| {
            let size = if cov == 0.0 {
                mean_size.round()
            } else {
                dist.sample(&mut rng).round()
            };
            let frame_type = match SYNTHETIC_GOP[i % SYNTHETIC_GOP.len()] {
                b'I' => FrameType::I,
                b'P' => FrameType::P,
                _ => FrameType::B,
            };
            VideoFrame {
                seq: i as u64,
                frame_type,
                arrival_time: i as u64 * frame_interval,
                size: size.clamp(1.0, f64::from(u32::MAX)) as u32,
            }
        })
        .collect();
    VideoTrace::new(format!("synthetic-{seed}"), frames, frame_interval)
}
