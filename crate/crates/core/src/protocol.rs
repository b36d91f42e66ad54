//! Per-station backoff rules for CSMA/CA, CSMA/ECA and CSMA/E2CA.
//!
//! The state machine is pure: every random backoff value is supplied by the
//! caller, so a station's evolution is a deterministic function of its results
//! and the draws it was handed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Contention protocol family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    CsmaCa,
    CsmaEca,
    CsmaE2ca,
}

impl Variant {
    pub fn default_stickiness(self) -> u32 {
        match self {
            Variant::CsmaCa => 0,
            Variant::CsmaEca => 1,
            Variant::CsmaE2ca => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::CsmaCa => "csma-ca",
            Variant::CsmaEca => "csma-eca",
            Variant::CsmaE2ca => "csma-e2ca",
        }
    }
}

/// Static protocol parameters shared by all contenders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub cw_min: u32,
    pub cw_max: u32,
    /// Number of deterministic backoffs granted by each success (`k`).
    pub stickiness: u32,
}

impl ProtocolConfig {
    pub fn new(variant: Variant, cw_min: u32, cw_max: u32, stickiness: u32) -> Result<Self> {
        let cfg = Self { variant, cw_min, cw_max, stickiness };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Protocol with its default stickiness degree.
    pub fn with_variant(variant: Variant, cw_min: u32, cw_max: u32) -> Result<Self> {
        Self::new(variant, cw_min, cw_max, variant.default_stickiness())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.cw_min.is_power_of_two() || !self.cw_max.is_power_of_two() {
            return invalid(format!(
                "contention windows must be powers of two (cw_min={}, cw_max={})",
                self.cw_min, self.cw_max
            ));
        }
        if self.cw_min < 2 {
            return invalid("cw_min must be at least 2");
        }
        if self.cw_min > self.cw_max {
            return invalid(format!("cw_min {} exceeds cw_max {}", self.cw_min, self.cw_max));
        }
        let k = self.stickiness;
        let ok = match self.variant {
            Variant::CsmaCa => k == 0,
            Variant::CsmaEca => k == 1,
            Variant::CsmaE2ca => k >= 2,
        };
        if !ok {
            return invalid(format!("stickiness {k} not allowed for {}", self.variant.name()));
        }
        Ok(())
    }

    /// Deterministic backoff `C` for the current `cw_min`.
    pub fn deterministic_backoff(&self) -> u32 {
        self.cw_min / 2
    }

    /// Same protocol with both windows replaced by `cw`.
    pub fn with_window(&self, cw: u32) -> Result<Self> {
        Self::new(self.variant, cw, cw, self.stickiness)
    }
}

/// `C = ceil(E[U[0, cw_min - 1]]) = ceil((cw_min - 1) / 2)`.
///
/// A window of one would give `C = 0`, which cannot schedule a transmission,
/// so it is rejected along with zero.
pub fn deterministic_backoff(cw_min: u32) -> Result<u32> {
    if cw_min < 2 {
        return invalid(format!("cw_min {cw_min} yields no usable deterministic backoff"));
    }
    Ok(cw_min / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Random,
    Deterministic,
}

/// Outcome of a transmission attempt as perceived by the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxResult {
    Success,
    /// Collision or channel loss; the station cannot tell them apart.
    Failure,
}

/// One contender's backoff state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationState {
    pub id: usize,
    /// Slots until the next transmission; zero only in the slot the station transmits.
    pub counter: u32,
    pub mode: Mode,
    pub sticky_credit: u32,
    pub cw_current: u32,
    pub consecutive_failures: u32,
}

impl StationState {
    /// Fresh contender. `random_draw` must lie in `[0, cw_min - 1]`.
    pub fn initial(id: usize, config: &ProtocolConfig, random_draw: u32) -> Result<Self> {
        check_draw(random_draw, config.cw_min)?;
        Ok(Self {
            id,
            counter: random_draw + 1,
            mode: Mode::Random,
            sticky_credit: 0,
            cw_current: config.cw_min,
            consecutive_failures: 0,
        })
    }

    /// Applies the result of the transmission that just happened.
    ///
    /// `draw` is called at most once, with the post-update contention window
    /// `w`, and must return a value in `[0, w - 1]`. It is not called when the
    /// next backoff is deterministic.
    pub fn on_result(
        &self,
        result: TxResult,
        config: &ProtocolConfig,
        draw: impl FnOnce(u32) -> u32,
    ) -> Result<Self> {
        if self.counter != 0 {
            return Err(Error::ProtocolViolation(format!(
                "station {} reported a result with {} slots of backoff left",
                self.id, self.counter
            )));
        }
        let c = config.deterministic_backoff();
        let mut next = *self;
        match result {
            TxResult::Success => {
                next.sticky_credit = config.stickiness;
                next.cw_current = config.cw_min;
                next.consecutive_failures = 0;
                if config.stickiness > 0 {
                    next.mode = Mode::Deterministic;
                    next.counter = c;
                } else {
                    next.mode = Mode::Random;
                    next.counter = random_backoff(next.cw_current, draw)?;
                }
            }
            TxResult::Failure => {
                next.consecutive_failures += 1;
                next.sticky_credit = next.sticky_credit.saturating_sub(1);
                if next.sticky_credit > 0 {
                    next.mode = Mode::Deterministic;
                    next.counter = c;
                } else {
                    next.mode = Mode::Random;
                    next.cw_current = next.cw_current.saturating_mul(2).clamp(config.cw_min, config.cw_max);
                    next.counter = random_backoff(next.cw_current, draw)?;
                }
            }
        }
        Ok(next)
    }

    /// Adopts a window broadcast by the access point; pending counters are kept.
    pub fn adopt_window(&mut self, cw: u32) {
        self.cw_current = cw;
    }

    pub fn is_deterministic(&self) -> bool {
        self.mode == Mode::Deterministic
    }
}

fn random_backoff(window: u32, draw: impl FnOnce(u32) -> u32) -> Result<u32> {
    let r = draw(window);
    check_draw(r, window)?;
    Ok(r + 1)
}

fn check_draw(draw: u32, window: u32) -> Result<()> {
    if draw >= window {
        return invalid(format!("random draw {draw} outside [0, {}]", window - 1));
    }
    Ok(())
}
