//! Beacon-driven `CW_min` control.
//!
//! The access point counts busy and empty slots between beacons and
//! broadcasts a new window that keeps the busy fraction inside `[1/8, 1/2]`.
//! [`update_cw_integer`] is the rule the simulator applies; the
//! floating-point recursion in [`update_cw_eq3`] is kept for comparison. The
//! two differ at β = 1 (recursion quadruples), at β = 1/8 exactly (recursion
//! halves) and below β = 1/16 (recursion halves more than once).

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metrics::{SlotCounts, SlotKind};

pub const BETA_TARGET: f64 = 0.25;
pub const DEFAULT_CW_CAP: u32 = 1 << 15;

/// `max(cw_default, cw_prev * 2^trunc(log2(beta / 1/4)))`.
pub fn update_cw_eq3<T: Float>(cw_prev: u32, beta: T, cw_default: u32) -> Result<u32> {
    if beta.is_nan() || beta <= T::zero() {
        return invalid("busy fraction must be positive");
    }
    let target = T::from(BETA_TARGET).expect("representable target");
    let exponent = (beta / target).log2().trunc().to_i32().expect("finite exponent");
    let scaled = if exponent >= 0 {
        u64::from(cw_prev).checked_shl(exponent as u32).unwrap_or(u64::MAX)
    } else {
        u64::from(cw_prev).checked_shr(exponent.unsigned_abs()).unwrap_or(0)
    };
    Ok(scaled.min(u64::from(u32::MAX)).max(u64::from(cw_default)) as u32)
}

/// Integer-only rule: halve when `8·busy < total` (never below the default),
/// double when `busy > empty` (never above the cap), otherwise hold.
pub fn update_cw_integer(cw: u32, busy: u64, empty: u64, cw_default: u32, cw_cap: u32) -> Result<u32> {
    let total = busy + empty;
    if total == 0 {
        return invalid("beacon interval without slots");
    }
    let next = if 8 * busy < total {
        if cw > cw_default {
            cw / 2
        } else {
            cw
        }
    } else if busy > empty {
        cw.saturating_mul(2).min(cw_cap)
    } else {
        cw
    };
    Ok(next)
}

/// Per-beacon decision, logged by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconDecision {
    pub interval: u32,
    pub busy: u64,
    pub empty: u64,
    pub beta: f64,
    pub old_cw: u32,
    pub new_cw: u32,
}

/// Access-point side controller state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconController {
    pub cw_current: u32,
    pub cw_default: u32,
    pub cw_cap: u32,
    pub beta_target: f64,
    pub busy_count: u64,
    pub empty_count: u64,
    /// Beacon intervals closed so far.
    pub intervals: u32,
}

impl BeaconController {
    pub fn new(cw_default: u32, cw_cap: u32) -> Result<Self> {
        if !cw_default.is_power_of_two() || !cw_cap.is_power_of_two() || cw_default > cw_cap {
            return invalid(format!("bad controller bounds default={cw_default} cap={cw_cap}"));
        }
        Ok(Self {
            cw_current: cw_default,
            cw_default,
            cw_cap,
            beta_target: BETA_TARGET,
            busy_count: 0,
            empty_count: 0,
            intervals: 0,
        })
    }

    pub fn observe(&mut self, kind: SlotKind, n: u64) {
        if kind.is_busy() {
            self.busy_count += n;
        } else {
            self.empty_count += n;
        }
    }

    pub fn observe_counts(&mut self, counts: &SlotCounts) {
        self.busy_count += counts.busy();
        self.empty_count += counts.empty;
    }

    /// Closes the current interval, returning the decision to broadcast.
    /// An interval with no slots leaves the window unchanged.
    pub fn on_beacon(&mut self) -> BeaconDecision {
        self.intervals += 1;
        let (busy, empty) = (self.busy_count, self.empty_count);
        let old_cw = self.cw_current;
        let new_cw = update_cw_integer(old_cw, busy, empty, self.cw_default, self.cw_cap).unwrap_or(old_cw);
        let total = busy + empty;
        let beta = if total == 0 { 0.0 } else { busy as f64 / total as f64 };
        self.cw_current = new_cw;
        self.busy_count = 0;
        self.empty_count = 0;
        BeaconDecision { interval: self.intervals, busy, empty, beta, old_cw, new_cw }
    }
}
