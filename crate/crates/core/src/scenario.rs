//! Scenario files: flat `key = value` text with `#` comments.
//!
//! Every timing constant has the 802.11b default listed in [`KEYS`]. Traffic
//! comes either from trace files (`trace = a.txt, b.txt`, assigned to
//! stations round-robin) or, when no trace is given, from synthetic lognormal
//! traces (`synthetic_mean_bytes`, `synthetic_cov`, `synthetic_frames`), one
//! per station.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::engine::{SimConfig, StationConfig};
use crate::mac::PhyMacParams;
use crate::scheduler::SchedulerKind;
use crate::trace::{generate_synthetic, parse_trace, VideoTrace};
use crate::tspec::derive_tspec;
use crate::{Error, Micros, Result};

/// Recognised keys and their defaults.
pub const KEYS: &[(&str, &str)] = &[
    ("beacon_interval_us", "160000"),
    ("t_cp_us", "0"),
    ("sim_duration_us", "500000000"),
    ("warmup_us", "20000000"),
    ("scheduler", "hcca"),
    ("loss_probability", "0"),
    ("qs_quantized", "false"),
    ("admission_control", "true"),
    ("seed", "1"),
    ("stations", "1"),
    ("sweep_min", "1"),
    ("sweep_max", "12"),
    ("output_dir", "out"),
    ("trace", ""),
    ("frame_interval_us", "40000"),
    ("synthetic_mean_bytes", "3800"),
    ("synthetic_cov", "0.59"),
    ("synthetic_frames", "12500"),
    ("msi_us", "40000"),
    ("delay_bound_us", "80000"),
    ("phy_rate_bps", "11000000"),
    ("sifs_us", "10"),
    ("pifs_us", "30"),
    ("slot_us", "20"),
    ("preamble_bytes", "18"),
    ("plcp_header_bytes", "6"),
    ("plcp_rate_bps", "1000000"),
    ("mac_header_bytes", "36"),
    ("data_rate_bps", "11000000"),
    ("basic_rate_bps", "1000000"),
    ("ack_bytes", "14"),
    ("poll_bytes", "36"),
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub beacon_interval: Micros,
    pub t_cp: Micros,
    pub sim_duration: Micros,
    pub warmup: Micros,
    pub scheduler: SchedulerKind,
    pub loss_probability: f64,
    pub qs_quantized: bool,
    pub admission_control: bool,
    pub seed: u64,
    pub stations: usize,
    pub sweep_min: usize,
    pub sweep_max: usize,
    pub output_dir: PathBuf,
    pub trace_paths: Vec<PathBuf>,
    pub msi: Micros,
    pub delay_bound: Micros,
    pub phy_rate: u64,
    pub mac: PhyMacParams,
    /// One trace per station slot, up to the largest station count needed.
    traces: Vec<Arc<VideoTrace>>,
}

struct Fields {
    values: HashMap<String, (usize, String)>,
}

impl Fields {
    fn raw(&self, key: &str) -> (usize, &str) {
        match self.values.get(key) {
            Some((line, v)) => (*line, v.as_str()),
            None => (
                0,
                KEYS.iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, d)| *d)
                    .expect("key listed in KEYS"),
            ),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key);
        v.parse().map_err(|_| Error::parse(line, format!("invalid value '{v}' for {key}")))
    }

    fn get_bool(&self, key: &str) -> Result<bool> {
        let (line, v) = self.raw(key);
        match v {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(Error::parse(line, format!("invalid boolean '{v}' for {key}"))),
        }
    }
}

impl Scenario {
    /// Reads a scenario file. Relative trace paths resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Scenario::parse(&text, base).map_err(|e| match e {
            Error::Parse { .. } | Error::Config(_) | Error::InvalidTspec(_) => e.in_file(path),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Scenario> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected 'key = value'"))?;
            let key = key.trim();
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(Error::parse(line_no, format!("unknown key '{key}'")));
            }
            if values
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(line_no, format!("duplicate key '{key}'")));
            }
        }
        let f = Fields { values };

        let mac = PhyMacParams {
            sifs: f.get("sifs_us")?,
            pifs: f.get("pifs_us")?,
            slot: f.get("slot_us")?,
            preamble_len: f.get("preamble_bytes")?,
            plcp_hdr_len: f.get("plcp_header_bytes")?,
            plcp_rate: f.get("plcp_rate_bps")?,
            mac_hdr_len: f.get("mac_header_bytes")?,
            data_rate: f.get("data_rate_bps")?,
            basic_rate: f.get("basic_rate_bps")?,
            ack_len: f.get("ack_bytes")?,
            poll_len: f.get("poll_bytes")?,
        };
        mac.validate()?;

        let scheduler: SchedulerKind = {
            let (line, v) = f.raw("scheduler");
            v.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?
        };
        let trace_paths: Vec<PathBuf> = f
            .raw("trace")
            .1
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|p| base.join(p))
            .collect();

        let stations: usize = f.get("stations")?;
        let sweep_min: usize = f.get("sweep_min")?;
        let sweep_max: usize = f.get("sweep_max")?;
        if stations == 0 {
            return Err(Error::config("stations must be at least 1"));
        }
        if sweep_min == 0 || sweep_min > sweep_max {
            return Err(Error::config(format!("empty sweep range {sweep_min}..={sweep_max}")));
        }
        let frame_interval: Micros = f.get("frame_interval_us")?;
        if frame_interval == 0 {
            return Err(Error::config("frame_interval_us must be positive"));
        }
        let seed: u64 = f.get("seed")?;
        let slots = stations.max(sweep_max);

        let traces = if trace_paths.is_empty() {
            let mean: f64 = f.get("synthetic_mean_bytes")?;
            let cov: f64 = f.get("synthetic_cov")?;
            let frames: usize = f.get("synthetic_frames")?;
            (0..slots)
                .map(|i| {
                    generate_synthetic(mean, cov, frames, frame_interval, synthetic_seed(seed, i))
                        .map(Arc::new)
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            let loaded = trace_paths
                .iter()
                .map(|p| load_trace(p, frame_interval).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            (0..slots).map(|i| Arc::clone(&loaded[i % loaded.len()])).collect()
        };

        Ok(Scenario {
            beacon_interval: f.get("beacon_interval_us")?,
            t_cp: f.get("t_cp_us")?,
            sim_duration: f.get("sim_duration_us")?,
            warmup: f.get("warmup_us")?,
            scheduler,
            loss_probability: f.get("loss_probability")?,
            qs_quantized: f.get_bool("qs_quantized")?,
            admission_control: f.get_bool("admission_control")?,
            seed,
            stations,
            sweep_min,
            sweep_max,
            output_dir: PathBuf::from(f.raw("output_dir").1),
            trace_paths,
            msi: f.get("msi_us")?,
            delay_bound: f.get("delay_bound_us")?,
            phy_rate: f.get("phy_rate_bps")?,
            mac,
            traces,
        })
    }

    /// Engine configuration for the first `n` station slots.
    pub fn config(&self, n: usize, scheduler: SchedulerKind) -> Result<SimConfig> {
        if n == 0 || n > self.traces.len() {
            return Err(Error::config(format!(
                "station count {n} outside 1..={}",
                self.traces.len()
            )));
        }
        let stations = self.traces[..n]
            .iter()
            .map(|trace| {
                Ok(StationConfig {
                    tspec: derive_tspec(trace, self.msi, self.delay_bound, self.phy_rate)?,
                    trace: Arc::clone(trace),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = SimConfig {
            beacon_interval: self.beacon_interval,
            t_cp: self.t_cp,
            mac: self.mac,
            scheduler,
            stations,
            sim_duration: self.sim_duration,
            warmup: self.warmup,
            loss_probability: self.loss_probability,
            qs_quantized: self.qs_quantized,
            admission_control: self.admission_control,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn traces(&self) -> &[Arc<VideoTrace>] {
        &self.traces
    }
}

/// Seed for the synthetic trace of station slot `slot`.
pub fn synthetic_seed(seed: u64, slot: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(slot as u64 + 1)
}

pub fn load_trace(path: &Path, frame_interval: Micros) -> Result<VideoTrace> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut trace = parse_trace(&text, frame_interval).map_err(|e| e.in_file(path))?;
    trace.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(trace)
}
