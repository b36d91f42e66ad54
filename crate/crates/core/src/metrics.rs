//! Slot accounting, airtime and channel efficiency.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Airtime of each slot class, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingModel {
    pub t_empty: u64,
    pub t_success: u64,
    pub t_collision: u64,
    pub t_drop: u64,
}

impl TimingModel {
    /// 802.11b at 11 Mb/s, long preamble, 1500-byte payload plus 34 bytes of
    /// MAC overhead.
    ///
    /// success = PLCP + data + SIFS + ACK + DIFS, collision = PLCP + data + DIFS;
    /// a drop occupies the channel as long as a success.
    pub fn dot11b() -> Self {
        const PLCP: u64 = 192;
        const SIFS: u64 = 10;
        const ACK: u64 = 203;
        const DIFS: u64 = 50;
        let data = (8 * 1534u64).div_ceil(11);
        let t_success = PLCP + data + SIFS + ACK + DIFS;
        Self { t_empty: 20, t_success, t_collision: PLCP + data + DIFS, t_drop: t_success }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t_empty, self.t_success, self.t_collision, self.t_drop];
        if all.contains(&0) {
            return invalid("slot durations must be positive");
        }
        if self.t_empty >= self.t_success.min(self.t_collision) {
            return invalid("empty slots must be shorter than busy slots");
        }
        Ok(())
    }

    pub fn duration(&self, kind: SlotKind) -> u64 {
        match kind {
            SlotKind::Empty => self.t_empty,
            SlotKind::Success => self.t_success,
            SlotKind::Collision => self.t_collision,
            SlotKind::Drop => self.t_drop,
        }
    }
}

impl Default for TimingModel {
    fn default() -> Self {
        Self::dot11b()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Empty,
    Success,
    Collision,
    Drop,
}

impl SlotKind {
    pub const ALL: [SlotKind; 4] = [SlotKind::Empty, SlotKind::Success, SlotKind::Collision, SlotKind::Drop];

    pub fn is_busy(self) -> bool {
        self != SlotKind::Empty
    }

    pub fn name(self) -> &'static str {
        match self {
            SlotKind::Empty => "empty",
            SlotKind::Success => "success",
            SlotKind::Collision => "collision",
            SlotKind::Drop => "drop",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotCounts {
    pub empty: u64,
    pub success: u64,
    pub collision: u64,
    pub drop: u64,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        self.empty + self.success + self.collision + self.drop
    }

    pub fn busy(&self) -> u64 {
        self.success + self.collision + self.drop
    }

    pub fn get(&self, kind: SlotKind) -> u64 {
        match kind {
            SlotKind::Empty => self.empty,
            SlotKind::Success => self.success,
            SlotKind::Collision => self.collision,
            SlotKind::Drop => self.drop,
        }
    }

    pub fn record(&mut self, kind: SlotKind, n: u64) {
        match kind {
            SlotKind::Empty => self.empty += n,
            SlotKind::Success => self.success += n,
            SlotKind::Collision => self.collision += n,
            SlotKind::Drop => self.drop += n,
        }
    }

    pub fn fraction(&self, kind: SlotKind) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.get(kind) as f64 / t as f64,
        }
    }

    pub fn airtime(&self, timing: &TimingModel) -> u64 {
        SlotKind::ALL.iter().map(|&k| self.get(k) * timing.duration(k)).sum()
    }
}

impl AddAssign for SlotCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.empty += rhs.empty;
        self.success += rhs.success;
        self.collision += rhs.collision;
        self.drop += rhs.drop;
    }
}

impl Add for SlotCounts {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

/// Share of airtime spent on successful transmissions.
pub fn efficiency(counts: &SlotCounts, timing: &TimingModel) -> Result<f64> {
    if counts.total() == 0 {
        return invalid("efficiency of an empty slot record");
    }
    let useful = counts.success * timing.t_success;
    Ok(useful as f64 / counts.airtime(timing) as f64)
}

/// Share of slots carrying any transmission (β).
pub fn busy_fraction(counts: &SlotCounts) -> Result<f64> {
    match counts.total() {
        0 => invalid("busy fraction of an empty slot record"),
        t => Ok(counts.busy() as f64 / t as f64),
    }
}

/// Statistics for one closed beacon interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    /// 1-based beacon interval index.
    pub index: u32,
    pub counts: SlotCounts,
    pub beta: f64,
    pub efficiency: f64,
    /// Window in force during the interval.
    pub cw: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: SlotCounts,
    pub intervals: Vec<IntervalRecord>,
    /// Slots elapsed when collision-free operation was first reached.
    pub absorption_slot: Option<u64>,
    pub total_time_us: u64,
}

impl MetricsReport {
    pub fn fraction(&self, kind: SlotKind) -> f64 {
        self.counts.fraction(kind)
    }

    pub fn efficiency(&self, timing: &TimingModel) -> Result<f64> {
        efficiency(&self.counts, timing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(empty: u64, success: u64, collision: u64, drop: u64) -> SlotCounts {
        SlotCounts { empty, success, collision, drop }
    }

    #[test]
    fn default_timing_table() {
        let t = TimingModel::dot11b();
        assert_eq!(t.t_collision, 1358);
        assert_eq!(t.t_success, 192 + 1116 + 10 + 203 + 50);
        assert_eq!(t.t_drop, t.t_success);
        assert!(t.validate().is_ok());
        assert!(TimingModel { t_empty: 2000, ..t }.validate().is_err());
        assert!(TimingModel { t_drop: 0, ..t }.validate().is_err());
    }

    #[test]
    fn efficiency_examples() {
        let t = TimingModel::dot11b();
        assert_eq!(efficiency(&counts(0, 10, 0, 0), &t), Ok(1.0));
        assert_eq!(efficiency(&counts(10, 0, 0, 0), &t), Ok(0.0));
        let t = TimingModel { t_empty: 20, t_success: 1518, t_collision: 1358, t_drop: 1518 };
        let e = efficiency(&counts(8, 8, 0, 0), &t).unwrap();
        assert!((e - 1518.0 / 1538.0).abs() < 1e-15);
        assert!((e - 0.987).abs() < 5e-4);
        assert!(efficiency(&SlotCounts::default(), &t).is_err());
    }

    #[test]
    fn drops_cost_airtime_only() {
        let t = TimingModel::dot11b();
        let with_drop = efficiency(&counts(0, 9, 0, 1), &t).unwrap();
        assert!((with_drop - 0.9).abs() < 1e-15);
    }

    #[test]
    fn busy_fraction_examples() {
        assert_eq!(busy_fraction(&counts(8, 8, 0, 0)), Ok(0.5));
        assert_eq!(busy_fraction(&counts(5, 0, 0, 0)), Ok(0.0));
        assert_eq!(busy_fraction(&counts(0, 16, 0, 0)), Ok(1.0));
        assert!(busy_fraction(&SlotCounts::default()).is_err());
    }

    proptest! {
        #[test]
        fn efficiency_is_monotone_and_bounded(e in 0u64..500, s in 0u64..500, c in 0u64..500, d in 0u64..500) {
            prop_assume!(e + s + c + d > 0);
            let t = TimingModel::dot11b();
            let base = counts(e, s, c, d);
            let eff = efficiency(&base, &t).unwrap();
            prop_assert!((0.0..=1.0).contains(&eff));
            prop_assert!(efficiency(&(base + counts(1, 0, 0, 0)), &t).unwrap() <= eff);
            prop_assert!(efficiency(&(base + counts(0, 1, 0, 0)), &t).unwrap() >= eff);
            let sum: f64 = SlotKind::ALL.iter().map(|&k| base.fraction(k)).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }
}
