//! Synchronous slot loop over a shared collision domain.
//!
//! Every counter decrements once per slot, busy or empty. A station whose
//! counter reaches zero transmits in that slot; two or more transmitters
//! collide, and a lone transmission is lost with the channel's drop
//! probability. Lost frames look like collisions to the sender.
//!
//! [`step`] is the literal per-slot rule over a slice of stations. The
//! [`Simulator`] produces the same slot sequence (and consumes the same random
//! draws in the same order) but keeps absolute transmission slots in a heap
//! and skips runs of empty slots in one move.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::{BeaconController, BeaconDecision, DEFAULT_CW_CAP};
use crate::error::{invalid, Result};
use crate::metrics::{busy_fraction, efficiency, IntervalRecord, MetricsReport, SlotCounts, SlotKind, TimingModel};
use crate::protocol::{Mode, ProtocolConfig, StationState, TxResult};

pub type SimRng = ChaCha8Rng;

/// Generator for replication `stream` of a configuration seeded with `seed`.
///
/// Each replication gets its own ChaCha stream under the same key, so
/// replications never share random numbers and can run in any order.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Probability that a lone transmission is lost.
    pub drop_probability: f64,
}

impl ChannelModel {
    pub const IDEAL: ChannelModel = ChannelModel { drop_probability: 0.0 };

    pub fn lossy(drop_probability: f64) -> Result<Self> {
        let m = Self { drop_probability };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return invalid(format!("drop probability {} outside [0, 1]", self.drop_probability));
        }
        Ok(())
    }

    /// Draws the fate of a lone transmission. Consumes randomness only when
    /// the outcome is uncertain.
    pub fn loses<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let p = self.drop_probability;
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            rng.random_bool(p)
        }
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::IDEAL
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "tx", rename_all = "lowercase")]
pub enum SlotOutcome {
    Empty,
    Success(usize),
    Collision(Vec<usize>),
    Drop(usize),
}

impl SlotOutcome {
    pub fn kind(&self) -> SlotKind {
        match self {
            SlotOutcome::Empty => SlotKind::Empty,
            SlotOutcome::Success(_) => SlotKind::Success,
            SlotOutcome::Collision(_) => SlotKind::Collision,
            SlotOutcome::Drop(_) => SlotKind::Drop,
        }
    }

    pub fn transmitters(&self) -> Vec<usize> {
        match self {
            SlotOutcome::Empty => vec![],
            SlotOutcome::Success(id) | SlotOutcome::Drop(id) => vec![*id],
            SlotOutcome::Collision(ids) => ids.clone(),
        }
    }
}

/// One line of the optional slot trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub slot: u64,
    pub outcome: SlotKind,
    pub tx: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub protocol: ProtocolConfig,
    pub sigma: usize,
    pub channel: ChannelModel,
    pub max_slots: u64,
    pub seed: u64,
    pub adaptation_enabled: bool,
    pub timing: TimingModel,
    pub beacon_interval_us: u64,
    pub cw_cap: u32,
    /// Stop after this many beacon intervals, if set.
    pub max_intervals: Option<u32>,
}

impl SimConfig {
    pub fn new(protocol: ProtocolConfig, sigma: usize) -> Self {
        Self {
            protocol,
            sigma,
            channel: ChannelModel::IDEAL,
            max_slots: 1_000_000,
            seed: 0,
            adaptation_enabled: false,
            timing: TimingModel::default(),
            beacon_interval_us: 100_000,
            cw_cap: DEFAULT_CW_CAP,
            max_intervals: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        self.channel.validate()?;
        self.timing.validate()?;
        if self.sigma == 0 {
            return invalid("at least one contender is required");
        }
        if self.max_slots == 0 {
            return invalid("max_slots must be positive");
        }
        if self.beacon_interval_us == 0 {
            return invalid("beacon interval must be positive");
        }
        if self.max_intervals == Some(0) {
            return invalid("max_intervals must be positive");
        }
        if self.adaptation_enabled && (!self.cw_cap.is_power_of_two() || self.cw_cap < self.protocol.cw_min) {
            return invalid(format!("cw cap {} must be a power of two >= cw_min", self.cw_cap));
        }
        Ok(())
    }
}

/// Fresh contenders with their initial random backoffs, drawn in id order.
pub fn initial_stations<R: Rng + ?Sized>(
    protocol: &ProtocolConfig,
    sigma: usize,
    rng: &mut R,
) -> Result<Vec<StationState>> {
    (0..sigma)
        .map(|id| StationState::initial(id, protocol, rng.random_range(0..protocol.cw_min)))
        .collect()
}

fn feedback<R: Rng + ?Sized>(
    station: &StationState,
    result: TxResult,
    protocol: &ProtocolConfig,
    rng: &mut R,
) -> Result<StationState> {
    station.on_result(result, protocol, |w| rng.random_range(0..w))
}

/// Advances every station by one slot.
pub fn step<R: Rng + ?Sized>(
    stations: &mut [StationState],
    protocol: &ProtocolConfig,
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<SlotOutcome> {
    if stations.is_empty() {
        return invalid("no stations to step");
    }
    let mut tx = Vec::new();
    for (i, s) in stations.iter_mut().enumerate() {
        if s.counter == 0 {
            return invalid(format!("station {} starts a slot with an expired counter", s.id));
        }
        s.counter -= 1;
        if s.counter == 0 {
            tx.push(i);
        }
    }
    let outcome = match tx.as_slice() {
        [] => return Ok(SlotOutcome::Empty),
        &[i] => {
            let lost = channel.loses(rng);
            let result = if lost { TxResult::Failure } else { TxResult::Success };
            stations[i] = feedback(&stations[i], result, protocol, rng)?;
            let id = stations[i].id;
            if lost {
                SlotOutcome::Drop(id)
            } else {
                SlotOutcome::Success(id)
            }
        }
        many => {
            for &i in many {
                stations[i] = feedback(&stations[i], TxResult::Failure, protocol, rng)?;
            }
            SlotOutcome::Collision(many.iter().map(|&i| stations[i].id).collect())
        }
    };
    Ok(outcome)
}

/// True when every station holds a full deterministic credit and their next
/// transmissions fall on pairwise distinct offsets modulo `capacity`.
///
/// Counters are relative to the current slot, so comparing them modulo `C`
/// is the same as comparing absolute transmission slots.
pub fn is_collision_free(stations: &[StationState], capacity: u32, stickiness: u32) -> bool {
    if capacity == 0 || stations.len() > capacity as usize {
        return false;
    }
    let all_sticky =
        stations.iter().all(|s| s.mode == Mode::Deterministic && s.sticky_credit == stickiness && stickiness > 0);
    all_sticky && distinct_residues(stations.iter().map(|s| u64::from(s.counter)), capacity)
}

fn distinct_residues(slots: impl Iterator<Item = u64>, capacity: u32) -> bool {
    let mut seen = vec![false; capacity as usize];
    for t in slots {
        let r = (t % u64::from(capacity)) as usize;
        if std::mem::replace(&mut seen[r], true) {
            return false;
        }
    }
    true
}

struct Beacons {
    controller: Option<BeaconController>,
    interval_us: u64,
    next_boundary_us: u64,
    current: SlotCounts,
    records: Vec<IntervalRecord>,
    decisions: Vec<BeaconDecision>,
}

/// Stateful run of one configuration on one random stream.
pub struct Simulator {
    config: SimConfig,
    protocol: ProtocolConfig,
    stations: Vec<StationState>,
    /// Absolute slot of each station's next transmission.
    next_tx: Vec<u64>,
    queue: BinaryHeap<Reverse<(u64, usize)>>,
    rng: SimRng,
    slot: u64,
    time_us: u64,
    counts: SlotCounts,
    full_credit: usize,
    absorbed_at: Option<u64>,
    beacons: Beacons,
}

impl Simulator {
    pub fn new(config: &SimConfig, stream: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_for(config.seed, stream);
        let stations = initial_stations(&config.protocol, config.sigma, &mut rng)?;
        // Initial counter c means transmitting in 0-based slot c - 1.
        let next_tx: Vec<u64> = stations.iter().map(|s| u64::from(s.counter) - 1).collect();
        let queue = next_tx.iter().enumerate().map(|(i, &t)| Reverse((t, i))).collect();
        let controller = if config.adaptation_enabled {
            Some(BeaconController::new(config.protocol.cw_min, config.cw_cap)?)
        } else {
            None
        };
        Ok(Self {
            config: config.clone(),
            protocol: config.protocol,
            stations,
            next_tx,
            queue,
            rng,
            slot: 0,
            time_us: 0,
            counts: SlotCounts::default(),
            full_credit: 0,
            absorbed_at: None,
            beacons: Beacons {
                controller,
                interval_us: config.beacon_interval_us,
                next_boundary_us: config.beacon_interval_us,
                current: SlotCounts::default(),
                records: Vec::new(),
                decisions: Vec::new(),
            },
        })
    }

    /// Slots elapsed so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn protocol(&self) -> &ProtocolConfig {
        &self.protocol
    }

    pub fn counts(&self) -> SlotCounts {
        self.counts
    }

    pub fn absorbed_at(&self) -> Option<u64> {
        self.absorbed_at
    }

    pub fn intervals(&self) -> &[IntervalRecord] {
        &self.beacons.records
    }

    pub fn decisions(&self) -> &[BeaconDecision] {
        &self.beacons.decisions
    }

    /// Station states with counters relative to the next slot to be played
    /// (as they stand at the start of that slot, before its decrement).
    pub fn stations(&self) -> Vec<StationState> {
        self.stations
            .iter()
            .zip(&self.next_tx)
            .map(|(s, &t)| StationState { counter: (t + 1 - self.slot) as u32, ..*s })
            .collect()
    }

    pub fn is_collision_free(&self) -> bool {
        self.full_credit == self.stations.len() && self.residues_distinct()
    }

    fn residues_distinct(&self) -> bool {
        distinct_residues(self.next_tx.iter().copied(), self.protocol.deterministic_backoff())
    }

    fn is_full_credit(&self, s: &StationState) -> bool {
        s.mode == Mode::Deterministic && s.sticky_credit == self.protocol.stickiness
    }

    fn finished(&self) -> bool {
        self.slot >= self.config.max_slots
            || self.config.max_intervals.is_some_and(|m| self.beacons.records.len() as u32 >= m)
    }

    fn record(&mut self, kind: SlotKind, n: u64) -> Result<()> {
        self.slot += n;
        self.time_us += n * self.config.timing.duration(kind);
        self.counts.record(kind, n);
        self.beacons.current.record(kind, n);
        if self.time_us >= self.beacons.next_boundary_us {
            self.close_interval()?;
        }
        Ok(())
    }

    fn close_interval(&mut self) -> Result<()> {
        let b = &mut self.beacons;
        let counts = std::mem::take(&mut b.current);
        let index = b.records.len() as u32 + 1;
        b.records.push(IntervalRecord {
            index,
            counts,
            beta: busy_fraction(&counts).unwrap_or(0.0),
            efficiency: efficiency(&counts, &self.config.timing).unwrap_or(0.0),
            cw: self.protocol.cw_min,
        });
        b.next_boundary_us = (self.time_us / b.interval_us + 1) * b.interval_us;
        if let Some(ctrl) = b.controller.as_mut() {
            ctrl.observe_counts(&counts);
            let decision = ctrl.on_beacon();
            b.decisions.push(decision);
            if decision.new_cw != self.protocol.cw_min || decision.new_cw != self.protocol.cw_max {
                self.protocol = self.protocol.with_window(decision.new_cw)?;
                for s in &mut self.stations {
                    s.adopt_window(decision.new_cw);
                }
                // Full credit does not depend on the window, so the running count stays valid.
            }
        }
        Ok(())
    }

    fn next_transmission(&self) -> u64 {
        self.queue.peek().map(|Reverse((t, _))| *t).expect("at least one station")
    }

    /// Records up to `n` empty slots, stopping early at a beacon boundary.
    fn skip_empty(&mut self, n: u64) -> Result<u64> {
        let t_empty = self.config.timing.t_empty;
        let to_boundary = (self.beacons.next_boundary_us - self.time_us).div_ceil(t_empty);
        let k = n.min(to_boundary.max(1));
        self.record(SlotKind::Empty, k)?;
        Ok(k)
    }

    fn transmit(&mut self) -> Result<SlotOutcome> {
        let now = self.slot;
        let mut tx = Vec::new();
        while let Some(&Reverse((t, i))) = self.queue.peek() {
            if t != now {
                break;
            }
            self.queue.pop();
            tx.push(i);
        }
        debug_assert!(!tx.is_empty());
        let (outcome, results) = if let &[i] = tx.as_slice() {
            if self.config.channel.loses(&mut self.rng) {
                (SlotOutcome::Drop(i), TxResult::Failure)
            } else {
                (SlotOutcome::Success(i), TxResult::Success)
            }
        } else {
            (SlotOutcome::Collision(tx.clone()), TxResult::Failure)
        };
        for &i in &tx {
            let before = StationState { counter: 0, ..self.stations[i] };
            let after = feedback(&before, results, &self.protocol, &mut self.rng)?;
            let was_full = self.is_full_credit(&before);
            let is_full = self.is_full_credit(&after);
            match (was_full, is_full) {
                (false, true) => self.full_credit += 1,
                (true, false) => self.full_credit -= 1,
                _ => {}
            }
            self.stations[i] = after;
            self.next_tx[i] = now + u64::from(after.counter);
            self.queue.push(Reverse((self.next_tx[i], i)));
        }
        let kind = outcome.kind();
        self.record(kind, 1)?;
        if kind == SlotKind::Success && self.absorbed_at.is_none() && self.is_collision_free() {
            self.absorbed_at = Some(self.slot);
        }
        Ok(outcome)
    }

    /// Plays exactly one slot.
    pub fn next_slot(&mut self) -> Result<SlotOutcome> {
        if self.next_transmission() > self.slot {
            self.record(SlotKind::Empty, 1)?;
            Ok(SlotOutcome::Empty)
        } else {
            self.transmit()
        }
    }

    /// Plays slots until the next busy slot, a beacon boundary or the slot
    /// limit, whichever comes first. Returns the busy outcome if one was played.
    pub fn advance(&mut self) -> Result<Option<SlotOutcome>> {
        let gap = self.next_transmission() - self.slot;
        if gap > 0 {
            let budget = gap.min(self.config.max_slots - self.slot);
            self.skip_empty(budget)?;
            return Ok(None);
        }
        self.transmit().map(Some)
    }

    /// Runs until the configured slot or interval limit.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.finished() {
            self.advance()?;
        }
        Ok(())
    }

    /// Runs until collision-free operation or the slot limit.
    pub fn run_to_absorption(&mut self) -> Result<Option<u64>> {
        while self.absorbed_at.is_none() && self.slot < self.config.max_slots {
            self.advance()?;
        }
        Ok(self.absorbed_at)
    }

    pub fn report(&self) -> MetricsReport {
        MetricsReport {
            counts: self.counts,
            intervals: self.beacons.records.clone(),
            absorption_slot: self.absorbed_at,
            total_time_us: self.time_us,
        }
    }

    /// Runs to the end, writing one JSON line per slot.
    pub fn run_traced<W: Write>(&mut self, out: &mut W) -> io::Result<()> {
        while !self.finished() {
            let slot = self.slot;
            let outcome = self.next_slot().map_err(io::Error::other)?;
            let rec = TraceRecord { slot, outcome: outcome.kind(), tx: outcome.transmitters() };
            serde_json::to_writer(&mut *out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs `config` on stream 0.
pub fn run(config: &SimConfig) -> Result<MetricsReport> {
    let mut sim = Simulator::new(config, 0)?;
    sim.run_to_end()?;
    Ok(sim.report())
}

/// Slots elapsed until collision-free operation, or `None` within `max_slots`.
pub fn slots_to_absorption(config: &SimConfig) -> Result<Option<u64>> {
    if config.adaptation_enabled {
        return invalid("absorption is measured with a static contention window");
    }
    Simulator::new(config, 0)?.run_to_absorption()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Variant;
    use proptest::prelude::*;

    fn proto(v: Variant, cw_min: u32, cw_max: u32) -> ProtocolConfig {
        ProtocolConfig::with_variant(v, cw_min, cw_max).unwrap()
    }

    fn at(id: usize, counter: u32) -> StationState {
        StationState {
            id,
            counter,
            mode: Mode::Random,
            sticky_credit: 0,
            cw_current: 32,
            consecutive_failures: 0,
        }
    }

    fn det(id: usize, counter: u32, credit: u32) -> StationState {
        StationState { mode: Mode::Deterministic, sticky_credit: credit, ..at(id, counter) }
    }

    #[test]
    fn simultaneous_expiry_collides() {
        let p = proto(Variant::CsmaE2ca, 32, 32);
        let mut st = vec![at(0, 1), at(1, 1), at(2, 5)];
        let out = step(&mut st, &p, &ChannelModel::IDEAL, &mut rng_for(1, 0)).unwrap();
        assert_eq!(out, SlotOutcome::Collision(vec![0, 1]));
        assert!(st[..2].iter().all(|s| s.consecutive_failures == 1 && s.counter >= 1));
        assert_eq!(st[2].counter, 4);
    }

    #[test]
    fn lone_transmitter_succeeds() {
        let p = proto(Variant::CsmaEca, 32, 32);
        let mut st = vec![at(0, 3), at(1, 1), at(2, 9)];
        let out = step(&mut st, &p, &ChannelModel::IDEAL, &mut rng_for(1, 0)).unwrap();
        assert_eq!(out, SlotOutcome::Success(1));
        assert_eq!((st[1].mode, st[1].counter), (Mode::Deterministic, 16));
    }

    #[test]
    fn certain_loss_is_a_failure() {
        let p = proto(Variant::CsmaEca, 32, 32);
        let mut st = vec![det(0, 1, 1), at(1, 4)];
        let out = step(&mut st, &p, &ChannelModel::lossy(1.0).unwrap(), &mut rng_for(1, 0)).unwrap();
        assert_eq!(out, SlotOutcome::Drop(0));
        assert_eq!((st[0].mode, st[0].consecutive_failures), (Mode::Random, 1));
    }

    #[test]
    fn step_rejects_bad_input() {
        let p = proto(Variant::CsmaCa, 32, 32);
        let mut rng = rng_for(0, 0);
        assert!(step(&mut [], &p, &ChannelModel::IDEAL, &mut rng).is_err());
        assert!(step(&mut [at(0, 0)], &p, &ChannelModel::IDEAL, &mut rng).is_err());
        assert!(ChannelModel::lossy(1.5).is_err());
    }

    #[test]
    fn collision_free_predicate() {
        let three = [det(0, 4, 1), det(1, 1, 1), det(2, 3, 1)];
        assert!(is_collision_free(&three, 4, 1));
        assert!(!is_collision_free(&[det(0, 2, 1), det(1, 6, 1)], 4, 1));
        assert!(!is_collision_free(&[det(0, 2, 1), at(1, 3)], 4, 1));
        // Credit below k means the last attempt failed.
        assert!(!is_collision_free(&[det(0, 2, 1), det(1, 3, 2)], 4, 2));
        assert!(!is_collision_free(&three, 2, 1));
    }

    fn cfg(v: Variant, sigma: usize, cw_max: u32, slots: u64, seed: u64) -> SimConfig {
        SimConfig { max_slots: slots, seed, ..SimConfig::new(proto(v, 32, cw_max), sigma) }
    }

    #[test]
    fn simulator_matches_literal_step() {
        for (v, sigma, cw_max, p) in [
            (Variant::CsmaCa, 5, 1024, 0.0),
            (Variant::CsmaEca, 8, 32, 0.1),
            (Variant::CsmaE2ca, 16, 32, 0.1),
            (Variant::CsmaE2ca, 3, 64, 1.0),
        ] {
            let config = SimConfig { channel: ChannelModel::lossy(p).unwrap(), ..cfg(v, sigma, cw_max, 3000, 42) };
            let mut sim = Simulator::new(&config, 7).unwrap();
            let mut rng = rng_for(42, 7);
            let mut stations = initial_stations(&config.protocol, sigma, &mut rng).unwrap();
            assert_eq!(sim.stations(), stations);
            for slot in 0..3000 {
                let literal = step(&mut stations, &config.protocol, &config.channel, &mut rng).unwrap();
                let fast = sim.next_slot().unwrap();
                assert_eq!(literal, fast, "{v:?} slot {slot}");
            }
            assert_eq!(sim.stations(), stations);
        }
    }

    #[test]
    fn skipping_empty_slots_preserves_counts() {
        let config = cfg(Variant::CsmaE2ca, 6, 32, 20_000, 3);
        let mut slow = Simulator::new(&config, 0).unwrap();
        while slow.slot() < config.max_slots {
            slow.next_slot().unwrap();
        }
        let fast = run(&config).unwrap();
        assert_eq!(slow.report(), fast);
        assert_eq!(fast.counts.total(), 20_000);
    }

    #[test]
    fn lone_station_never_collides() {
        let r = run(&cfg(Variant::CsmaCa, 1, 32, 1000, 9)).unwrap();
        assert_eq!((r.counts.collision, r.counts.drop), (0, 0));
        assert_eq!(r.counts.total(), 1000);
    }

    #[test]
    fn lone_station_absorbs_on_first_success() {
        for seed in 0..50 {
            let at = slots_to_absorption(&cfg(Variant::CsmaEca, 1, 32, 1000, seed)).unwrap().unwrap();
            assert!((1..=32).contains(&at));
        }
    }

    #[test]
    fn over_capacity_never_absorbs() {
        assert_eq!(slots_to_absorption(&cfg(Variant::CsmaE2ca, 17, 32, 50_000, 1)).unwrap(), None);
    }

    #[test]
    fn absorbed_eca_is_periodic() {
        let config = cfg(Variant::CsmaEca, 8, 32, 200_000, 5);
        let mut sim = Simulator::new(&config, 0).unwrap();
        let at = sim.run_to_absorption().unwrap().expect("absorbs");
        assert!(sim.is_collision_free());
        assert!(is_collision_free(&sim.stations(), 16, 1));
        let before = sim.counts();
        for _ in 0..16 * 100 {
            assert!(!matches!(sim.next_slot().unwrap(), SlotOutcome::Collision(_)));
        }
        let after = sim.counts();
        assert_eq!(after.success - before.success, 800);
        assert_eq!(after.empty - before.empty, 800);
        assert!(at <= sim.slot());
    }

    #[test]
    fn adaptation_requires_static_window_for_absorption() {
        let config = SimConfig { adaptation_enabled: true, ..cfg(Variant::CsmaE2ca, 4, 32, 100, 0) };
        assert!(slots_to_absorption(&config).is_err());
    }

    #[test]
    fn intervals_close_on_time() {
        let config = SimConfig { max_intervals: Some(5), ..cfg(Variant::CsmaE2ca, 8, 32, u64::MAX, 2) };
        let r = run(&config).unwrap();
        assert_eq!(r.intervals.len(), 5);
        assert!(r.total_time_us >= 500_000 && r.total_time_us < 500_000 + config.timing.t_success);
        let summed = r.intervals.iter().fold(SlotCounts::default(), |a, i| a + i.counts);
        assert_eq!(summed, r.counts);
    }

    #[test]
    fn trace_is_one_line_per_slot() {
        let config = cfg(Variant::CsmaEca, 3, 32, 200, 4);
        let mut buf = Vec::new();
        Simulator::new(&config, 0).unwrap().run_traced(&mut buf).unwrap();
        let lines: Vec<TraceRecord> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 200);
        assert!(lines.iter().enumerate().all(|(i, r)| r.slot == i as u64));
        let counts = run(&config).unwrap().counts;
        assert_eq!(lines.iter().filter(|r| r.outcome == SlotKind::Success).count() as u64, counts.success);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn accounting_and_determinism(v in 0usize..3, sigma in 1usize..20, p in prop::sample::select(vec![0.0, 0.1, 0.5]), seed in any::<u64>()) {
            let variant = [Variant::CsmaCa, Variant::CsmaEca, Variant::CsmaE2ca][v];
            let config = SimConfig { channel: ChannelModel::lossy(p).unwrap(), ..cfg(variant, sigma, 32, 5_000, seed) };
            let a = run(&config).unwrap();
            let b = run(&config).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.counts.total(), 5_000);
            if p == 0.0 {
                prop_assert_eq!(a.counts.drop, 0);
            }
        }

        #[test]
        fn absorption_is_permanent(sigma in 1usize..=12, seed in any::<u64>()) {
            let config = cfg(Variant::CsmaE2ca, sigma, 32, 1_000_000, seed);
            let mut sim = Simulator::new(&config, 0).unwrap();
            prop_assume!(sim.run_to_absorption().unwrap().is_some());
            for _ in 0..160 {
                prop_assert!(!matches!(sim.next_slot().unwrap(), SlotOutcome::Collision(_)));
                prop_assert!(sim.is_collision_free());
            }
        }
    }
}
