//! Discrete-event simulation of HCCA polling.
//!
//! The hybrid coordinator wakes at every service-interval boundary, waits
//! PIFS and polls each admitted station in admission order. A polled station
//! sends queued frames while the remaining grant covers a full data/ACK
//! exchange, piggybacking the size of its next frame on each data frame.
//!
//! Under the reference scheduler the next poll waits for the whole granted
//! TXOP to elapse even if the station finished early. Under the dynamic
//! scheduler polls run back to back, PIFS after the previous exchange ends.
//! A round still running at the next SI boundary delays the following round;
//! boundaries missed this way collapse into a single round.

mod queue;
mod station;

use std::sync::Arc;

use rand::Rng as _;
use serde::Serialize;

use crate::mac::{ack_time, data_frame_time, poll_time, PhyMacParams};
use crate::scheduler::{AdmissionResult, PollPlan, Scheduler, SchedulerKind};
use crate::trace::VideoTrace;
use crate::tspec::Tspec;
use crate::{Error, Micros, Result, StationId};

use queue::EventQueue;
use station::StationState;

/// Largest frame size a quantized QS field can express (255 units of 256 bytes).
pub const QS_MAX_BYTES: u32 = 255 * QS_UNIT;
const QS_UNIT: u32 = 256;

#[derive(Debug, Clone)]
pub struct StationConfig {
    pub trace: Arc<VideoTrace>,
    pub tspec: Tspec,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub beacon_interval: Micros,
    /// Contention period reserved per beacon interval.
    pub t_cp: Micros,
    pub mac: PhyMacParams,
    pub scheduler: SchedulerKind,
    pub stations: Vec<StationConfig>,
    pub sim_duration: Micros,
    /// Stations start generating traffic here.
    pub warmup: Micros,
    pub loss_probability: f64,
    pub qs_quantized: bool,
    pub admission_control: bool,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.mac.validate()?;
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(Error::config(format!(
                "loss probability {} outside [0, 1]",
                self.loss_probability
            )));
        }
        if self.warmup >= self.sim_duration {
            return Err(Error::config("warmup must end before the simulation does"));
        }
        if self.beacon_interval == 0 || self.t_cp >= self.beacon_interval {
            return Err(Error::config("need 0 <= t_cp < beacon_interval"));
        }
        if self.stations.is_empty() {
            return Err(Error::config("no stations configured"));
        }
        for (id, st) in self.stations.iter().enumerate() {
            st.tspec.validate()?;
            let largest = st.trace.max_size();
            if largest > st.tspec.max_msdu {
                return Err(Error::config(format!(
                    "station {id}: trace frame of {largest} bytes exceeds maximum MSDU {}",
                    st.tspec.max_msdu
                )));
            }
            if st.tspec.phy_rate > self.mac.data_rate {
                return Err(Error::config(format!(
                    "station {id}: TSPEC rate {} above PHY data rate {}",
                    st.tspec.phy_rate, self.mac.data_rate
                )));
            }
            if self.qs_quantized && largest > QS_MAX_BYTES {
                return Err(Error::config(format!(
                    "station {id}: frame of {largest} bytes cannot be reported in a quantized QS field"
                )));
            }
        }
        Ok(())
    }

    /// Post-warmup measurement window.
    pub fn window(&self) -> Micros {
        self.sim_duration - self.warmup
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    Beacon,
    SiStart,
    Poll,
    DataRx,
    Ack,
    Drop,
    TxopEnd,
}

/// One entry of the event log. Fields that do not apply to a kind are zero
/// (or `None` for the station).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LogRecord {
    #[serde(rename = "time_us")]
    pub time: Micros,
    pub kind: EventKind,
    pub station_id: Option<StationId>,
    pub si_index: u64,
    #[serde(rename = "granted_us")]
    pub granted_txop: Micros,
    /// Time since the start of the enclosing TXOP.
    #[serde(rename = "used_us")]
    pub used_time: Micros,
    #[serde(rename = "payload_bytes")]
    pub payload: u32,
    #[serde(rename = "frame_gen_us")]
    pub frame_gen_time: Micros,
}

impl LogRecord {
    fn marker(time: Micros, kind: EventKind, si_index: u64) -> Self {
        LogRecord {
            time,
            kind,
            station_id: None,
            si_index,
            granted_txop: 0,
            used_time: 0,
            payload: 0,
            frame_gen_time: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    records: Vec<LogRecord>,
}

impl EventLog {
    pub fn from_records(records: Vec<LogRecord>) -> Self {
        EventLog { records }
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LogRecord> {
        self.records.iter()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &LogRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn for_station(&self, id: StationId) -> impl Iterator<Item = &LogRecord> {
        self.records.iter().filter(move |r| r.station_id == Some(id))
    }
}

/// Per-station frame accounting at the end of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationSummary {
    pub station_id: StationId,
    pub generated: u64,
    pub delivered: u64,
    pub drops: u64,
    pub queued_at_end: u64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub log: EventLog,
    pub admitted: Vec<StationId>,
    pub rejected: Vec<StationId>,
    pub si: Micros,
    /// Reference TXOP fixed at admission, per admitted station.
    pub admitted_txops: Vec<(StationId, Micros)>,
    pub stations: Vec<StationSummary>,
    pub config: SimConfig,
}

#[derive(Debug)]
enum Event {
    Beacon,
    SiBoundary(u64),
    Poll(usize),
    RoundEnd,
    Record(LogRecord),
}

struct Round {
    si_index: u64,
    plan: PollPlan,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    scheduler: Scheduler,
    stations: Vec<StationState>,
    events: EventQueue<Event>,
    log: Vec<LogRecord>,
    si: Micros,
    start: Micros,
    next_si_index: u64,
    round: Option<Round>,
    pending: Option<u64>,
}

/// Runs one simulation. Single-threaded and fully determined by `config`.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let streams: Vec<(StationId, Tspec)> = config
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| (i as StationId, s.tspec))
        .collect();
    let AdmissionResult {
        scheduler,
        admitted,
        rejected,
    } = Scheduler::admit_streams(
        config.scheduler,
        &streams,
        config.beacon_interval,
        config.t_cp,
        config.mac,
        config.admission_control,
    )?;

    let si = scheduler.si();
    let start = first_boundary_at_or_after(config.warmup, config.beacon_interval, si);
    let stations = admitted
        .iter()
        .map(|&id| {
            let trace = Arc::clone(&config.stations[id as usize].trace);
            StationState::new(id, trace, config.warmup, config.seed)
        })
        .collect();
    let admitted_txops = scheduler
        .entries()
        .iter()
        .map(|e| (e.station_id, e.admitted_txop))
        .collect();

    let mut engine = Engine {
        cfg: config,
        scheduler,
        stations,
        events: EventQueue::new(),
        log: Vec::new(),
        si,
        start,
        next_si_index: 0,
        round: None,
        pending: None,
    };
    engine.seed_events();
    engine.run_to_completion();

    let end = config.sim_duration;
    let summaries = engine
        .stations
        .iter_mut()
        .map(|st| {
            st.enqueue_arrivals(end, end);
            StationSummary {
                station_id: st.id,
                generated: st.generated,
                delivered: st.delivered,
                drops: st.dropped,
                queued_at_end: st.queue.len() as u64,
            }
        })
        .collect();

    Ok(SimResult {
        log: EventLog::from_records(engine.log),
        admitted,
        rejected,
        si,
        admitted_txops,
        stations: summaries,
        config: config.clone(),
    })
}

fn sis_per_beacon(beacon_interval: Micros, si: Micros) -> u64 {
    (beacon_interval / si).max(1)
}

fn first_boundary_at_or_after(t: Micros, beacon_interval: Micros, si: Micros) -> Micros {
    let beacon = t / beacon_interval * beacon_interval;
    (0..sis_per_beacon(beacon_interval, si))
        .map(|j| beacon + j * si)
        .find(|&b| b >= t)
        .unwrap_or(beacon + beacon_interval)
}

impl Engine<'_> {
    fn seed_events(&mut self) {
        let bi = self.cfg.beacon_interval;
        let beacon = self.start / bi * bi;
        if beacon == self.start {
            self.events.push(beacon, Event::Beacon);
        } else {
            self.schedule_boundaries(beacon);
            let next = beacon + bi;
            if next < self.cfg.sim_duration {
                self.events.push(next, Event::Beacon);
            }
        }
    }

    fn schedule_boundaries(&mut self, beacon: Micros) {
        for j in 0..sis_per_beacon(self.cfg.beacon_interval, self.si) {
            let at = beacon + j * self.si;
            if at >= self.start && at < self.cfg.sim_duration {
                let idx = self.next_si_index;
                self.next_si_index += 1;
                self.events.push(at, Event::SiBoundary(idx));
            }
        }
    }

    fn run_to_completion(&mut self) {
        while let Some((now, event)) = self.events.pop() {
            match event {
                Event::Beacon => self.on_beacon(now),
                Event::SiBoundary(idx) => self.on_si_boundary(now, idx),
                Event::Poll(pos) => self.on_poll(now, pos),
                Event::RoundEnd => self.on_round_end(now),
                Event::Record(rec) => self.log.push(rec),
            }
        }
    }

    fn on_beacon(&mut self, now: Micros) {
        self.log.push(LogRecord::marker(now, EventKind::Beacon, self.next_si_index));
        self.schedule_boundaries(now);
        let next = now + self.cfg.beacon_interval;
        if next < self.cfg.sim_duration {
            self.events.push(next, Event::Beacon);
        }
    }

    fn on_si_boundary(&mut self, now: Micros, si_index: u64) {
        self.log.push(LogRecord::marker(now, EventKind::SiStart, si_index));
        if self.round.is_some() {
            self.pending = Some(si_index);
        } else {
            self.start_round(now, si_index);
        }
    }

    fn start_round(&mut self, now: Micros, si_index: u64) {
        let plan = self.scheduler.plan();
        self.round = Some(Round { si_index, plan });
        self.events.push(now + self.cfg.mac.pifs, Event::Poll(0));
    }

    fn on_round_end(&mut self, now: Micros) {
        self.round = None;
        if let Some(idx) = self.pending.take() {
            if now < self.cfg.sim_duration {
                self.start_round(now, idx);
            }
        }
    }

    fn on_poll(&mut self, t0: Micros, slot: usize) {
        let (si_index, grant, round_len) = {
            let round = self.round.as_ref().expect("poll outside a round");
            (round.si_index, round.plan.grants[slot].1, round.plan.grants.len())
        };
        let used = self.serve(t0, slot, si_index, grant);

        let release = match self.cfg.scheduler {
            SchedulerKind::ReferenceHcca => t0 + grant,
            SchedulerKind::DynamicTxop => t0 + used,
        };
        if slot + 1 < round_len {
            self.events.push(release + self.cfg.mac.pifs, Event::Poll(slot + 1));
        } else {
            self.events.push(release, Event::RoundEnd);
        }
    }

    /// Runs one TXOP for the station in `slot`, starting with the poll at
    /// `t0`. Returns the channel time actually used.
    fn serve(&mut self, t0: Micros, slot: usize, si_index: u64, grant: Micros) -> Micros {
        let mac = self.cfg.mac;
        let horizon = self.cfg.sim_duration;
        let loss = self.cfg.loss_probability;
        let quantized = self.cfg.qs_quantized;

        let station = &mut self.stations[slot];
        station.enqueue_arrivals(t0, horizon);
        let id = station.id;
        let at = |kind, elapsed: Micros, payload: u32, gen: Micros| LogRecord {
            time: t0 + elapsed,
            kind,
            station_id: Some(id),
            si_index,
            granted_txop: grant,
            used_time: elapsed,
            payload,
            frame_gen_time: gen,
        };
        self.log.push(at(EventKind::Poll, 0, 0, 0));

        let ack = ack_time(&mac);
        let mut cursor = poll_time(&mac) + mac.sifs;
        let mut attempts = 0u32;
        let mut deferred = Vec::new();
        while let Some(&head) = station.queue.front() {
            let begin = if attempts == 0 { cursor } else { cursor + mac.sifs };
            let data_end = begin + data_frame_time(head.size, &mac);
            if data_end + mac.sifs + ack > grant {
                break;
            }
            attempts += 1;
            // the ACK slot elapses either way; on loss it is the ACK timeout
            cursor = data_end + mac.sifs + ack;
            if station.rng.random_bool(loss) {
                station.dropped += 1;
                deferred.push(at(EventKind::Drop, data_end, head.size, head.gen_time));
                self.scheduler.clear_feedback(slot);
                break;
            }
            station.queue.pop_front();
            station.delivered += 1;
            deferred.push(at(EventKind::DataRx, data_end, head.size, head.gen_time));
            deferred.push(at(EventKind::Ack, cursor, head.size, head.gen_time));
            let next = station.next_frame_size();
            self.scheduler.record_feedback(slot, if quantized { quantize_qs(next) } else { next });
        }
        if attempts == 0 {
            // QoS-Null response; carries no data and no fresh report
            cursor += data_frame_time(0, &mac) + mac.sifs + ack;
        }
        deferred.push(at(EventKind::TxopEnd, cursor, 0, 0));
        for rec in deferred {
            self.events.push(rec.time, Event::Record(rec));
        }
        cursor
    }
}

/// QS-field encoding of a frame size: whole 256-byte units, rounded up and
/// capped at 255 units.
pub fn quantize_qs(size: u32) -> u32 {
    size.div_ceil(QS_UNIT).min(255) * QS_UNIT
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::generate_synthetic;
    use crate::tspec::derive_tspec;

    fn cbr_config(kind: SchedulerKind, frames: usize, duration: Micros) -> SimConfig {
        let trace = Arc::new(generate_synthetic(1000.0, 0.0, frames, 40_000, 1).unwrap());
        let tspec = derive_tspec(&trace, 40_000, 80_000, 11_000_000).unwrap();
        SimConfig {
            beacon_interval: 160_000,
            t_cp: 0,
            mac: PhyMacParams::default(),
            scheduler: kind,
            stations: vec![StationConfig { trace, tspec }],
            sim_duration: duration,
            warmup: 0,
            loss_probability: 0.0,
            qs_quantized: false,
            admission_control: true,
            seed: 9,
        }
    }

    #[test]
    fn quantization() {
        assert_eq!(quantize_qs(1), 256);
        assert_eq!(quantize_qs(256), 256);
        assert_eq!(quantize_qs(257), 512);
        assert_eq!(quantize_qs(70_000), QS_MAX_BYTES);
    }

    #[test]
    fn first_boundary() {
        assert_eq!(first_boundary_at_or_after(0, 160_000, 40_000), 0);
        assert_eq!(first_boundary_at_or_after(20_000_000, 160_000, 40_000), 20_000_000);
        assert_eq!(first_boundary_at_or_after(50_000, 160_000, 40_000), 80_000);
        assert_eq!(first_boundary_at_or_after(130_000, 160_000, 40_000), 160_000);
    }

    #[test]
    fn one_poll_and_one_delivery_per_si() {
        let res = run(&cbr_config(SchedulerKind::ReferenceHcca, 25, 1_000_000)).unwrap();
        let polls = res.log.of_kind(EventKind::Poll).count();
        let rx = res.log.of_kind(EventKind::DataRx).count();
        assert_eq!(polls, 25);
        assert_eq!(rx, 25);
        let delays: Vec<_> = res
            .log
            .of_kind(EventKind::DataRx)
            .map(|r| r.time - r.frame_gen_time)
            .collect();
        assert!(delays.iter().all(|&d| d == delays[0]));
    }

    #[test]
    fn total_loss_delivers_nothing() {
        let mut cfg = cbr_config(SchedulerKind::DynamicTxop, 25, 1_000_000);
        cfg.loss_probability = 1.0;
        let res = run(&cfg).unwrap();
        assert_eq!(res.log.of_kind(EventKind::DataRx).count(), 0);
        assert_eq!(res.log.of_kind(EventKind::Drop).count(), 25);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = cbr_config(SchedulerKind::DynamicTxop, 25, 1_000_000);
        cfg.loss_probability = 1.5;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let mut cfg = cbr_config(SchedulerKind::DynamicTxop, 25, 1_000_000);
        cfg.warmup = cfg.sim_duration;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let mut cfg = cbr_config(SchedulerKind::DynamicTxop, 25, 1_000_000);
        cfg.t_cp = cfg.beacon_interval;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
        let mut cfg = cbr_config(SchedulerKind::DynamicTxop, 25, 1_000_000);
        cfg.stations[0].tspec.max_msdu = 999;
        cfg.stations[0].tspec.nominal_msdu = 999;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn empty_polling_list_is_an_error() {
        let mut cfg = cbr_config(SchedulerKind::ReferenceHcca, 25, 1_000_000);
        // grant far beyond a 40 ms SI
        cfg.stations[0].tspec.phy_rate = 100_000;
        assert!(matches!(run(&cfg), Err(Error::EmptyPollingList)));
    }

    #[test]
    fn reference_waits_out_the_full_grant() {
        let trace = Arc::new(generate_synthetic(3800.0, 0.59, 500, 40_000, 4).unwrap());
        let tspec = derive_tspec(&trace, 40_000, 80_000, 11_000_000).unwrap();
        let mut cfg = cbr_config(SchedulerKind::ReferenceHcca, 1, 2_000_000);
        cfg.stations = vec![StationConfig { trace, tspec }; 2];
        let res = run(&cfg).unwrap();
        let grant = res.admitted_txops[0].1;
        let polls: Vec<_> = res.log.of_kind(EventKind::Poll).collect();
        for pair in polls.chunks(2) {
            assert_eq!(pair[1].time - pair[0].time, grant + cfg.mac.pifs);
        }
        cfg.scheduler = SchedulerKind::DynamicTxop;
        let res = run(&cfg).unwrap();
        let ends: Vec<_> = res.log.of_kind(EventKind::TxopEnd).collect();
        let polls: Vec<_> = res.log.of_kind(EventKind::Poll).collect();
        for (i, pair) in polls.chunks(2).enumerate() {
            assert_eq!(pair[1].time, ends[2 * i].time + cfg.mac.pifs);
        }
    }
}
