//! 802.11b PHY/MAC timing.
//!
//! Every duration is returned in whole microseconds, rounded up, so the
//! engine timeline only ever holds integer ticks. Control frames (poll, ACK)
//! go out at the basic rate behind a long PLCP preamble; data frames use the
//! data rate for the MAC header and payload.

use crate::{Error, Micros, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhyMacParams {
    pub sifs: Micros,
    pub pifs: Micros,
    pub slot: Micros,
    /// PHY preamble, bytes.
    pub preamble_len: u32,
    /// PLCP header, bytes.
    pub plcp_hdr_len: u32,
    /// Rate for preamble and PLCP header, bits/s.
    pub plcp_rate: u64,
    pub mac_hdr_len: u32,
    pub data_rate: u64,
    pub basic_rate: u64,
    pub ack_len: u32,
    /// QoS CF-Poll frame length.
    pub poll_len: u32,
}

impl Default for PhyMacParams {
    fn default() -> Self {
        PhyMacParams {
            sifs: 10,
            pifs: 30,
            slot: 20,
            preamble_len: 18,
            plcp_hdr_len: 6,
            plcp_rate: 1_000_000,
            mac_hdr_len: 36,
            data_rate: 11_000_000,
            basic_rate: 1_000_000,
            ack_len: 14,
            poll_len: 36,
        }
    }
}

impl PhyMacParams {
    pub fn validate(&self) -> Result<()> {
        if self.plcp_rate == 0 || self.data_rate == 0 || self.basic_rate == 0 {
            return Err(Error::config("PHY rates must be positive"));
        }
        if self.sifs == 0 || self.slot == 0 {
            return Err(Error::config("SIFS and slot time must be positive"));
        }
        if self.pifs <= self.sifs {
            return Err(Error::config("PIFS must exceed SIFS"));
        }
        Ok(())
    }
}

/// Time to send `bytes` at `rate` bits/s, rounded up to whole microseconds.
pub fn airtime(bytes: u64, rate: u64) -> Micros {
    let num = u128::from(bytes) * 8 * 1_000_000;
    let den = u128::from(rate);
    num.div_ceil(den) as Micros
}

pub fn phy_header_time(p: &PhyMacParams) -> Micros {
    airtime(u64::from(p.preamble_len) + u64::from(p.plcp_hdr_len), p.plcp_rate)
}

pub fn data_frame_time(payload: u32, p: &PhyMacParams) -> Micros {
    phy_header_time(p) + airtime(u64::from(p.mac_hdr_len) + u64::from(payload), p.data_rate)
}

pub fn ack_time(p: &PhyMacParams) -> Micros {
    phy_header_time(p) + airtime(u64::from(p.ack_len), p.basic_rate)
}

pub fn poll_time(p: &PhyMacParams) -> Micros {
    phy_header_time(p) + airtime(u64::from(p.poll_len), p.basic_rate)
}

/// Channel time of one data exchange minus its payload: PHY header, MAC
/// header, the SIFS before the ACK, the ACK and the SIFS that follows it.
fn per_msdu_overhead(p: &PhyMacParams) -> Micros {
    phy_header_time(p) + airtime(u64::from(p.mac_hdr_len), p.data_rate) + p.sifs + ack_time(p) + p.sifs
}

/// Overhead O of a TXOP carrying `n_msdus` data exchanges: the poll and its
/// SIFS, then one header/ACK block per MSDU, without the trailing SIFS after
/// the last ACK. The PIFS before the poll is not included.
pub fn overhead(n_msdus: u32, p: &PhyMacParams) -> Micros {
    assert!(n_msdus >= 1, "a TXOP carries at least one MSDU");
    poll_time(p) + p.sifs + u64::from(n_msdus) * per_msdu_overhead(p) - p.sifs
}
