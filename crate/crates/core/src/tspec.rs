//! Traffic specification negotiated for each uplink stream.

use crate::trace::{compute_stats, VideoTrace};
use crate::{Error, Micros, Result};

/// Mandatory TSPEC fields used by the schedulers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tspec {
    /// Nominal MSDU length L (bytes).
    pub nominal_msdu: u32,
    /// Maximum MSDU size M (bytes).
    pub max_msdu: u32,
    /// Mean data rate rho (bits/s).
    pub mean_rate: u64,
    /// Delay bound D.
    pub delay_bound: Micros,
    /// Physical rate R (bits/s).
    pub phy_rate: u64,
    /// Maximum service interval.
    pub max_service_interval: Micros,
}

impl Tspec {
    pub fn validate(&self) -> Result<()> {
        if self.nominal_msdu == 0 {
            return Err(Error::InvalidTspec("nominal MSDU length must be positive".into()));
        }
        if self.nominal_msdu > self.max_msdu {
            return Err(Error::InvalidTspec(format!(
                "nominal MSDU length {} exceeds maximum MSDU size {}",
                self.nominal_msdu, self.max_msdu
            )));
        }
        if self.mean_rate == 0 || self.phy_rate == 0 {
            return Err(Error::InvalidTspec("rates must be positive".into()));
        }
        if self.delay_bound == 0 || self.max_service_interval == 0 {
            return Err(Error::InvalidTspec(
                "delay bound and service interval must be positive".into(),
            ));
        }
        if self.max_service_interval > self.delay_bound {
            return Err(Error::InvalidTspec(format!(
                "maximum service interval {} us exceeds delay bound {} us",
                self.max_service_interval, self.delay_bound
            )));
        }
        Ok(())
    }
}

/// Derives a TSPEC from a trace: L is the mean frame size rounded up, M the
/// largest frame and rho the mean bit rate rounded up to whole bits/s.
pub fn derive_tspec(
    trace: &VideoTrace,
    max_service_interval: Micros,
    delay_bound: Micros,
    phy_rate: u64,
) -> Result<Tspec> {
    let stats = compute_stats(trace);
    let tspec = Tspec {
        nominal_msdu: ceil_nudged(stats.mean_size) as u32,
        max_msdu: stats.max_size,
        mean_rate: ceil_nudged(stats.mean_bit_rate) as u64,
        delay_bound,
        phy_rate,
        max_service_interval,
    };
    tspec.validate()?;
    Ok(tspec)
}

// Means of integer sizes can land a few ulps above an integer; treat those as
// exact so a CBR trace gets L = frame size and rho = 8 L / interval.
fn ceil_nudged(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}
