//! Evaluation metrics computed from an event log.

use std::collections::BTreeMap;

use crate::engine::{EventKind, EventLog, SimResult};
use crate::{Error, Micros, Result, StationId};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsBundle {
    /// Seconds; `None` when nothing was delivered.
    pub mean_e2e_delay: Option<f64>,
    pub delay_samples: u64,
    /// Bits per second over the post-warmup window.
    pub aggregate_throughput: f64,
    /// Seconds of TXOP granted to all stations.
    pub aggregate_txop: f64,
    /// `(si_index, station_id, granted_us)` in log order.
    pub per_si_txop: Vec<(u64, StationId, Micros)>,
    pub per_station_delay: Vec<(StationId, f64)>,
}

/// Mean delay in seconds from frame generation to reception at the AP,
/// pooled over every delivered frame of every station.
pub fn mean_e2e_delay(log: &EventLog) -> Result<f64> {
    let (sum, n) = log
        .of_kind(EventKind::DataRx)
        .fold((0u128, 0u64), |(sum, n), r| {
            (sum + u128::from(r.time - r.frame_gen_time), n + 1)
        });
    if n == 0 {
        return Err(Error::NoSamples);
    }
    Ok(sum as f64 / n as f64 / 1e6)
}

pub fn per_station_delay(log: &EventLog) -> Vec<(StationId, f64)> {
    let mut acc: BTreeMap<StationId, (u128, u64)> = BTreeMap::new();
    for r in log.of_kind(EventKind::DataRx) {
        let e = acc.entry(r.station_id.expect("data frames carry a station")).or_default();
        e.0 += u128::from(r.time - r.frame_gen_time);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(id, (sum, n))| (id, sum as f64 / n as f64 / 1e6))
        .collect()
}

/// Delivered payload in bits per second over `window_s` seconds.
pub fn aggregate_throughput(log: &EventLog, window_s: f64) -> f64 {
    assert!(window_s > 0.0, "throughput window must be positive");
    let bytes: u64 = log.of_kind(EventKind::DataRx).map(|r| u64::from(r.payload)).sum();
    8.0 * bytes as f64 / window_s
}

/// Total granted TXOP in seconds.
pub fn aggregate_txop(log: &EventLog) -> f64 {
    let total: u64 = log.of_kind(EventKind::Poll).map(|r| r.granted_txop).sum();
    total as f64 / 1e6
}

/// Granted TXOP per polling round for one station.
pub fn per_si_txop(log: &EventLog, station: StationId) -> Result<Vec<(u64, Micros)>> {
    let series: Vec<_> = log
        .of_kind(EventKind::Poll)
        .filter(|r| r.station_id == Some(station))
        .map(|r| (r.si_index, r.granted_txop))
        .collect();
    if series.is_empty() {
        return Err(Error::UnknownStation(station));
    }
    Ok(series)
}

/// Computes every metric for a finished run. Delay samples are limited to
/// frames generated after warmup.
pub fn summarize(result: &SimResult) -> MetricsBundle {
    let warmup = result.config.warmup;
    let measured = EventLog::from_records(
        result
            .log
            .iter()
            .filter(|r| r.kind != EventKind::DataRx || r.frame_gen_time >= warmup)
            .copied()
            .collect(),
    );
    let delay_samples = measured.of_kind(EventKind::DataRx).count() as u64;
    MetricsBundle {
        mean_e2e_delay: mean_e2e_delay(&measured).ok(),
        delay_samples,
        aggregate_throughput: aggregate_throughput(&measured, result.config.window() as f64 / 1e6),
        aggregate_txop: aggregate_txop(&measured),
        per_si_txop: measured
            .of_kind(EventKind::Poll)
            .map(|r| (r.si_index, r.station_id.expect("polls carry a station"), r.granted_txop))
            .collect(),
        per_station_delay: per_station_delay(&measured),
    }
}
