//! Independent replications and their summary statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{SimConfig, Simulator};
use crate::error::{invalid, Result};
use crate::metrics::{SlotCounts, SlotKind};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// `None` with fewer than two samples.
    pub half_width: Option<f64>,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, std_dev: f64::NAN, half_width: None };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { n, mean, std_dev: 0.0, half_width: None };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std_dev = var.sqrt();
        Self { n, mean, std_dev, half_width: Some(Z95 * std_dev / (n as f64).sqrt()) }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width.unwrap_or(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width.unwrap_or(0.0)
    }
}

/// Runs `f` on replications `0..runs` of `config`, one random stream each.
/// Results come back in replication order regardless of scheduling.
pub fn replicate<T, F>(config: &SimConfig, runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Simulator) -> Result<T> + Sync,
{
    if runs == 0 {
        return invalid("at least one replication is required");
    }
    config.validate()?;
    (0..runs as u64).into_par_iter().map(|r| f(Simulator::new(config, r)?)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionStats {
    /// Over absorbed runs only.
    pub slots: Summary,
    pub absorbed: usize,
    pub not_absorbed: usize,
}

/// Mean slots to collision-free operation over `runs` replications.
pub fn monte_carlo_absorption(config: &SimConfig, runs: usize) -> Result<AbsorptionStats> {
    if config.adaptation_enabled {
        return invalid("absorption is measured with a static contention window");
    }
    let outcomes = replicate(config, runs, |mut sim| sim.run_to_absorption())?;
    let absorbed: Vec<f64> = outcomes.iter().flatten().map(|&s| s as f64).collect();
    Ok(AbsorptionStats {
        slots: Summary::of(&absorbed),
        absorbed: absorbed.len(),
        not_absorbed: runs - absorbed.len(),
    })
}

/// Slot-class fractions across replications of a fixed-length run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionStats {
    pub empty: Summary,
    pub success: Summary,
    pub collision: Summary,
    pub drop: Summary,
    /// Counts summed over all replications.
    pub totals: SlotCounts,
}

impl FractionStats {
    pub fn get(&self, kind: SlotKind) -> &Summary {
        match kind {
            SlotKind::Empty => &self.empty,
            SlotKind::Success => &self.success,
            SlotKind::Collision => &self.collision,
            SlotKind::Drop => &self.drop,
        }
    }
}

pub fn slot_fractions(config: &SimConfig, runs: usize) -> Result<FractionStats> {
    let counts = replicate(config, runs, |mut sim| {
        sim.run_to_end()?;
        Ok(sim.counts())
    })?;
    let per = |k: SlotKind| Summary::of(&counts.iter().map(|c| c.fraction(k)).collect::<Vec<_>>());
    Ok(FractionStats {
        empty: per(SlotKind::Empty),
        success: per(SlotKind::Success),
        collision: per(SlotKind::Collision),
        drop: per(SlotKind::Drop),
        totals: counts.iter().fold(SlotCounts::default(), |a, &c| a + c),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalStats {
    pub index: u32,
    pub efficiency: Summary,
    pub beta: Summary,
    pub cw: Summary,
}

/// Per-beacon-interval statistics of an adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationStats {
    pub intervals: Vec<IntervalStats>,
    /// Window sequence of every replication, in replication order.
    pub cw_traces: Vec<Vec<u32>>,
}

impl AdaptationStats {
    /// Share of runs whose window never changes over intervals `from..=to` (1-based).
    pub fn stable_share(&self, from: u32, to: u32) -> f64 {
        let stable = self
            .cw_traces
            .iter()
            .filter(|t| {
                let w = &t[(from - 1) as usize..to as usize];
                w.iter().all(|&c| c == w[0])
            })
            .count();
        stable as f64 / self.cw_traces.len() as f64
    }
}

/// Runs `intervals` beacon intervals of `config` with adaptation switched on.
pub fn adaptation_curve(config: &SimConfig, runs: usize, intervals: u32) -> Result<AdaptationStats> {
    if intervals == 0 {
        return invalid("at least one beacon interval is required");
    }
    let config = SimConfig {
        adaptation_enabled: true,
        max_intervals: Some(intervals),
        max_slots: u64::MAX,
        ..config.clone()
    };
    let records = replicate(&config, runs, |mut sim| {
        sim.run_to_end()?;
        Ok(sim.intervals().to_vec())
    })?;
    let column = |i: usize, f: &dyn Fn(&crate::metrics::IntervalRecord) -> f64| {
        Summary::of(&records.iter().map(|r| f(&r[i])).collect::<Vec<_>>())
    };
    let stats = (0..intervals as usize)
        .map(|i| IntervalStats {
            index: i as u32 + 1,
            efficiency: column(i, &|r| r.efficiency),
            beta: column(i, &|r| r.beta),
            cw: column(i, &|r| f64::from(r.cw)),
        })
        .collect();
    let cw_traces = records.iter().map(|r| r.iter().map(|i| i.cw).collect()).collect();
    Ok(AdaptationStats { intervals: stats, cw_traces })
}
