//! HCCA scheduling arithmetic and the two TXOP policies.
//!
//! The reference scheduler grants every admitted stream the same TXOP each
//! service interval, sized from its TSPEC. The dynamic scheduler sizes each
//! grant from the next-frame size the station piggybacks in the QS field of
//! its last data frame, falling back to the reference grant when it has no
//! report (first CAP, or the last frame was lost).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::mac::{airtime, overhead, PhyMacParams};
use crate::tspec::Tspec;
use crate::{Error, Micros, Result, StationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerKind {
    ReferenceHcca,
    DynamicTxop,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 2] = [SchedulerKind::ReferenceHcca, SchedulerKind::DynamicTxop];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::ReferenceHcca => "hcca",
            SchedulerKind::DynamicTxop => "dyn",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hcca" => Ok(SchedulerKind::ReferenceHcca),
            "dyn" => Ok(SchedulerKind::DynamicTxop),
            other => Err(Error::config(format!("unknown scheduler '{other}' (expected hcca or dyn)"))),
        }
    }
}

/// Service interval: the largest submultiple `beacon_interval / x` that does
/// not exceed the smallest MSI, floored to whole microseconds. When the beacon
/// interval is already below every MSI, x = 1.
pub fn compute_si(beacon_interval: Micros, msis: &[Micros]) -> Micros {
    assert!(beacon_interval > 0, "beacon interval must be positive");
    let msi_min = *msis.iter().min().expect("at least one MSI");
    assert!(msi_min > 0, "MSI must be positive");
    let x = beacon_interval.div_ceil(msi_min).max(1);
    beacon_interval / x
}

/// Number of nominal MSDUs arriving at the mean rate during one SI.
pub fn compute_n(si: Micros, tspec: &Tspec) -> u32 {
    let bits = u128::from(si) * u128::from(tspec.mean_rate);
    let per_msdu = 8 * u128::from(tspec.nominal_msdu) * 1_000_000;
    bits.div_ceil(per_msdu).max(1) as u32
}

/// Reference TXOP: room for N nominal MSDUs or one maximum MSDU, whichever
/// is longer.
pub fn compute_txop_ref(tspec: &Tspec, si: Micros, mac: &PhyMacParams) -> Micros {
    let n = compute_n(si, tspec);
    let nominal = airtime(u64::from(n) * u64::from(tspec.nominal_msdu), tspec.phy_rate) + overhead(n, mac);
    let maximum = airtime(u64::from(tspec.max_msdu), tspec.phy_rate) + overhead(1, mac);
    nominal.max(maximum)
}

/// Dynamic TXOP for a single MSDU of `size` bytes.
pub fn compute_txop_dyn(size: u32, phy_rate: u64, mac: &PhyMacParams) -> Micros {
    airtime(u64::from(size), phy_rate) + overhead(1, mac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Accept,
    Reject,
}

/// Admission test: the channel fraction claimed by the candidate plus every
/// admitted stream must not exceed the share of the beacon interval left
/// after the contention period. Evaluated exactly.
pub fn admit(
    existing: &[(Micros, Micros)],
    candidate_txop: Micros,
    si: Micros,
    beacon_interval: Micros,
    t_cp: Micros,
) -> Admission {
    assert!(si > 0 && t_cp < beacon_interval);
    let ratio = |num: Micros, den: Micros| BigRational::new(BigInt::from(num), BigInt::from(den));
    let load = existing
        .iter()
        .fold(ratio(candidate_txop, si), |acc, &(txop, s)| acc + ratio(txop, s));
    if load <= ratio(beacon_interval - t_cp, beacon_interval) {
        Admission::Accept
    } else {
        Admission::Reject
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamEntry {
    pub station_id: StationId,
    pub tspec: Tspec,
    /// Next-frame size last reported through the QS field.
    pub feedback_size: Option<u32>,
    /// Reference TXOP fixed at admission.
    pub admitted_txop: Micros,
}

pub fn next_grant(entry: &StreamEntry, kind: SchedulerKind, si: Micros, mac: &PhyMacParams) -> Micros {
    match kind {
        SchedulerKind::ReferenceHcca => entry.admitted_txop,
        SchedulerKind::DynamicTxop => match entry.feedback_size {
            Some(size) => compute_txop_dyn(size, entry.tspec.phy_rate, mac),
            None => compute_txop_ref(&entry.tspec, si, mac),
        },
    }
}

/// Grants for one polling round, in polling order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PollPlan {
    pub si: Micros,
    pub grants: Vec<(StationId, Micros)>,
}

impl PollPlan {
    pub fn total_txop(&self) -> Micros {
        self.grants.iter().map(|&(_, txop)| txop).sum()
    }
}

/// Polling list held by the hybrid coordinator.
#[derive(Debug, Clone)]
pub struct Scheduler {
    kind: SchedulerKind,
    si: Micros,
    mac: PhyMacParams,
    entries: Vec<StreamEntry>,
}

/// Outcome of running admission control over the configured streams.
#[derive(Debug, Clone)]
pub struct AdmissionResult {
    pub scheduler: Scheduler,
    pub admitted: Vec<StationId>,
    pub rejected: Vec<StationId>,
}

impl Scheduler {
    /// Admits `streams` in order. Each candidate recomputes the SI over the
    /// admitted MSIs plus its own, re-evaluates every admitted TXOP at that SI
    /// and is accepted only if the whole set passes [`admit`]. With
    /// `enforce == false` every stream is admitted.
    pub fn admit_streams(
        kind: SchedulerKind,
        streams: &[(StationId, Tspec)],
        beacon_interval: Micros,
        t_cp: Micros,
        mac: PhyMacParams,
        enforce: bool,
    ) -> Result<AdmissionResult> {
        let mut accepted: Vec<(StationId, Tspec)> = Vec::new();
        let mut rejected = Vec::new();
        for &(id, tspec) in streams {
            tspec.validate()?;
            if !enforce {
                accepted.push((id, tspec));
                continue;
            }
            let msis: Vec<Micros> = accepted
                .iter()
                .map(|(_, t)| t.max_service_interval)
                .chain(std::iter::once(tspec.max_service_interval))
                .collect();
            let si = compute_si(beacon_interval, &msis);
            let existing: Vec<(Micros, Micros)> = accepted
                .iter()
                .map(|(_, t)| (compute_txop_ref(t, si, &mac), si))
                .collect();
            let candidate = compute_txop_ref(&tspec, si, &mac);
            match admit(&existing, candidate, si, beacon_interval, t_cp) {
                Admission::Accept => accepted.push((id, tspec)),
                Admission::Reject => rejected.push(id),
            }
        }
        if accepted.is_empty() {
            return Err(Error::EmptyPollingList);
        }
        let msis: Vec<Micros> = accepted.iter().map(|(_, t)| t.max_service_interval).collect();
        let si = compute_si(beacon_interval, &msis);
        let entries: Vec<StreamEntry> = accepted
            .iter()
            .map(|&(station_id, tspec)| StreamEntry {
                station_id,
                tspec,
                feedback_size: None,
                admitted_txop: compute_txop_ref(&tspec, si, &mac),
            })
            .collect();
        Ok(AdmissionResult {
            admitted: entries.iter().map(|e| e.station_id).collect(),
            rejected,
            scheduler: Scheduler { kind, si, mac, entries },
        })
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    pub fn si(&self) -> Micros {
        self.si
    }

    pub fn entries(&self) -> &[StreamEntry] {
        &self.entries
    }

    /// Grants for the next round, from the feedback held right now.
    pub fn plan(&self) -> PollPlan {
        PollPlan {
            si: self.si,
            grants: self
                .entries
                .iter()
                .map(|e| (e.station_id, next_grant(e, self.kind, self.si, &self.mac)))
                .collect(),
        }
    }

    /// Records the QS report carried by a received data frame.
    pub fn record_feedback(&mut self, slot: usize, size: u32) {
        debug_assert!(size >= 1);
        self.entries[slot].feedback_size = Some(size);
    }

    /// Forgets feedback after a data frame from this station was lost.
    pub fn clear_feedback(&mut self, slot: usize) {
        self.entries[slot].feedback_size = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn high_quality_stream() -> Tspec {
        Tspec {
            nominal_msdu: 3800,
            max_msdu: 16_745,
            mean_rate: 770_000,
            delay_bound: 80_000,
            phy_rate: 11_000_000,
            max_service_interval: 40_000,
        }
    }

    #[test]
    fn si_examples() {
        assert_eq!(compute_si(160_000, &[40_000, 40_000, 40_000]), 40_000);
        assert_eq!(compute_si(100_000, &[60_000, 50_000]), 50_000);
        assert_eq!(compute_si(100_000, &[100_000]), 100_000);
        // beacon already below the MSI
        assert_eq!(compute_si(100_000, &[150_000]), 100_000);
        // floored remainder: 100000 / 3
        assert_eq!(compute_si(100_000, &[40_000]), 33_333);
    }

    #[test]
    fn n_examples() {
        assert_eq!(compute_n(40_000, &high_quality_stream()), 2);
        let low = Tspec { nominal_msdu: 770, mean_rate: 150_000, ..high_quality_stream() };
        assert_eq!(compute_n(40_000, &low), 1);
        let cbr = Tspec { nominal_msdu: 1000, max_msdu: 1000, mean_rate: 200_000, ..high_quality_stream() };
        assert_eq!(compute_n(40_000, &cbr), 1);
    }

    #[test]
    fn reference_txop_takes_larger_branch() {
        let mac = PhyMacParams::default();
        // nominal: ceil(60800 / 11) + O(2) = 5528 + 1566; maximum: ceil(133960 / 11) + O(1) = 12179 + 1023
        assert_eq!(compute_txop_ref(&high_quality_stream(), 40_000, &mac), 13_202);
    }

    #[test]
    fn reference_txop_symmetric_when_l_equals_m() {
        let mac = PhyMacParams::default();
        let ts = Tspec { nominal_msdu: 1000, max_msdu: 1000, mean_rate: 200_000, ..high_quality_stream() };
        assert_eq!(compute_txop_ref(&ts, 40_000, &mac), compute_txop_dyn(1000, ts.phy_rate, &mac));
    }

    #[test]
    fn dynamic_txop_examples() {
        let mac = PhyMacParams::default();
        assert_eq!(compute_txop_dyn(7581, 11_000_000, &mac), 5514 + 1023);
        assert_eq!(compute_txop_dyn(1, 11_000_000, &mac), 1 + 1023);
    }

    #[test]
    fn doubling_rate_halves_payload_term() {
        let mac = PhyMacParams::default();
        let ts = Tspec { nominal_msdu: 1000, max_msdu: 1000, mean_rate: 200_000, phy_rate: 1_000_000, ..high_quality_stream() };
        let slow = compute_txop_ref(&ts, 40_000, &mac) - overhead(1, &mac);
        let fast = compute_txop_ref(&Tspec { phy_rate: 2_000_000, ..ts }, 40_000, &mac) - overhead(1, &mac);
        assert_eq!(slow, 8000);
        assert_eq!(fast, 4000);
    }

    #[test]
    fn admission_examples() {
        assert_eq!(admit(&[], 12_000, 40_000, 160_000, 0), Admission::Accept);
        assert_eq!(admit(&[(20_000, 40_000)], 20_000, 40_000, 160_000, 0), Admission::Accept);
        let five = [(8_000, 40_000); 5];
        assert_eq!(admit(&five, 8_000, 40_000, 160_000, 0), Admission::Reject);
        assert_eq!(admit(&five[..4], 8_000, 40_000, 160_000, 0), Admission::Accept);
    }

    #[test]
    fn admission_respects_contention_period() {
        // (T - Tcp) / T = 0.75
        assert_eq!(admit(&[], 30_000, 40_000, 160_000, 40_000), Admission::Accept);
        assert_eq!(admit(&[], 30_001, 40_000, 160_000, 40_000), Admission::Reject);
    }

    #[test]
    fn grants_follow_policy() {
        let mac = PhyMacParams::default();
        let ts = high_quality_stream();
        let mut entry = StreamEntry {
            station_id: 0,
            tspec: ts,
            feedback_size: None,
            admitted_txop: compute_txop_ref(&ts, 40_000, &mac),
        };
        assert_eq!(next_grant(&entry, SchedulerKind::DynamicTxop, 40_000, &mac), 13_202);
        entry.feedback_size = Some(7581);
        assert_eq!(next_grant(&entry, SchedulerKind::DynamicTxop, 40_000, &mac), 6537);
        assert_eq!(next_grant(&entry, SchedulerKind::ReferenceHcca, 40_000, &mac), 13_202);
    }

    #[test]
    fn admission_rejects_once_full() {
        let ts = high_quality_stream();
        let streams: Vec<_> = (0..5).map(|i| (i, ts)).collect();
        let res = Scheduler::admit_streams(
            SchedulerKind::ReferenceHcca,
            &streams,
            160_000,
            0,
            PhyMacParams::default(),
            true,
        )
        .unwrap();
        // 3 * 13202 = 39606 <= 40000 < 4 * 13202
        assert_eq!(res.admitted, vec![0, 1, 2]);
        assert_eq!(res.rejected, vec![3, 4]);
        assert_eq!(res.scheduler.si(), 40_000);
    }

    #[test]
    fn unenforced_admission_takes_everyone() {
        let ts = high_quality_stream();
        let streams: Vec<_> = (0..8).map(|i| (i, ts)).collect();
        let res = Scheduler::admit_streams(
            SchedulerKind::DynamicTxop,
            &streams,
            160_000,
            0,
            PhyMacParams::default(),
            false,
        )
        .unwrap();
        assert_eq!(res.admitted.len(), 8);
        assert!(res.rejected.is_empty());
    }

    #[test]
    fn oversized_first_stream_leaves_empty_list() {
        let ts = Tspec { max_msdu: 60_000, ..high_quality_stream() };
        let err = Scheduler::admit_streams(
            SchedulerKind::ReferenceHcca,
            &[(0, ts)],
            160_000,
            0,
            PhyMacParams::default(),
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyPollingList));
    }

    #[test]
    fn scheduler_kind_names_round_trip() {
        for kind in SchedulerKind::ALL {
            assert_eq!(kind.name().parse::<SchedulerKind>().unwrap(), kind);
        }
        assert!("edca".parse::<SchedulerKind>().is_err());
    }
}
