use anyhow::{bail, Context, Result};
use ecasim_core::experiment::{adaptation_curve, monte_carlo_absorption, slot_fractions};
use ecasim_core::markov::{build_matrix, expected_steps};
use ecasim_core::metrics::efficiency;
use ecasim_core::{deterministic_backoff, ChannelModel, SimConfig, Simulator, SlotKind};
use serde::Serialize;
use serde_json::json;

use crate::grid::{parse_f64_list, parse_protocols, parse_usize_list, GridFile, ProtocolName};
use crate::output::{Cell, Document, Format, Table};
use crate::Flags;

const DEFAULT_CW_MIN: u32 = 32;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_BEACON_MS: u64 = 100;

/// Flag values layered over the optional grid file.
struct Merged<'a> {
    flags: &'a Flags,
    file: GridFile,
}

impl<'a> Merged<'a> {
    fn new(flags: &'a Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => GridFile::load(p)?,
            None => GridFile::default(),
        };
        Ok(Self { flags, file })
    }

    fn protocols(&self, default: &str) -> Result<Vec<ProtocolName>> {
        match (&self.flags.protocol, &self.file.protocols) {
            (Some(s), _) => parse_protocols(s),
            (None, Some(v)) => parse_protocols(&v.join(",")),
            (None, None) => parse_protocols(default),
        }
    }

    fn sigmas(&self, default: &str) -> Result<Vec<usize>> {
        match (&self.flags.sigma, &self.file.sigma) {
            (Some(s), _) => parse_usize_list(s),
            (None, Some(v)) if !v.is_empty() => Ok(v.clone()),
            (None, Some(_)) => bail!("empty sigma list in config file"),
            (None, None) => parse_usize_list(default),
        }
    }

    fn drop_probs(&self, default: &str) -> Result<Vec<f64>> {
        match (&self.flags.drop_prob, &self.file.drop_prob) {
            (Some(s), _) => parse_f64_list(s),
            (None, Some(v)) if !v.is_empty() => Ok(v.clone()),
            (None, Some(_)) => bail!("empty drop_prob list in config file"),
            (None, None) => parse_f64_list(default),
        }
    }

    fn cw_min(&self) -> u32 {
        self.flags.cw_min.or(self.file.cw_min).unwrap_or(DEFAULT_CW_MIN)
    }

    fn cw_max(&self) -> u32 {
        self.flags.cw_max.or(self.file.cw_max).unwrap_or_else(|| self.cw_min())
    }

    fn stickiness(&self) -> Option<u32> {
        self.flags.stickiness.or(self.file.stickiness)
    }

    fn slots(&self, default: u64) -> u64 {
        self.flags.slots.or(self.file.slots).unwrap_or(default)
    }

    fn runs(&self, default: usize) -> usize {
        self.flags.runs.or(self.file.runs).unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.flags.seed.or(self.file.seed).unwrap_or(DEFAULT_SEED)
    }

    fn beacon_us(&self) -> Result<u64> {
        let ms = self.flags.beacon_ms.or(self.file.beacon_ms).unwrap_or(DEFAULT_BEACON_MS);
        if ms == 0 {
            bail!("beacon interval must be positive");
        }
        Ok(ms * 1000)
    }

    fn intervals(&self) -> Option<u32> {
        self.flags.intervals.or(self.file.intervals)
    }

    fn sim_config(&self, protocol: ProtocolName, sigma: usize, drop_prob: f64, slots: u64) -> Result<SimConfig> {
        let config = SimConfig {
            channel: ChannelModel::lossy(drop_prob)?,
            max_slots: slots,
            seed: self.seed(),
            beacon_interval_us: self.beacon_us()?,
            ..SimConfig::new(protocol.resolve(self.cw_min(), self.cw_max(), self.stickiness())?, sigma)
        };
        config.validate().with_context(|| format!("{} with sigma={sigma}", protocol.as_str()))?;
        Ok(config)
    }
}

pub fn resolve_format(flags: &Flags) -> Result<Format> {
    Ok(flags.format.or(Merged::new(flags)?.file.format).unwrap_or(Format::Csv))
}

fn single<T: Copy>(v: &[T], what: &str) -> Result<T> {
    match v {
        [x] => Ok(*x),
        _ => bail!("simulate takes a single {what}"),
    }
}

fn ci(s: &ecasim_core::experiment::Summary) -> Cell {
    s.half_width.into()
}

#[derive(Serialize)]
struct SimulateConfig {
    protocol: ProtocolName,
    sim: SimConfig,
}

/// Returns the document and, when requested, the JSON-lines trace.
pub fn simulate(flags: &Flags, traced: bool) -> Result<(Document, Option<Vec<u8>>)> {
    let m = Merged::new(flags)?;
    let protocol = single(&m.protocols("e2ca")?, "protocol")?;
    let sigma = single(&m.sigmas("8")?, "sigma")?;
    let drop_prob = single(&m.drop_probs("0")?, "drop probability")?;
    let mut config = m.sim_config(protocol, sigma, drop_prob, m.slots(1_000_000))?;
    config.adaptation_enabled = flags.adapt;
    config.max_intervals = m.intervals();
    config.validate()?;

    let mut sim = Simulator::new(&config, 0)?;
    let trace = if traced {
        let mut buf = Vec::new();
        sim.run_traced(&mut buf)?;
        Some(buf)
    } else {
        sim.run_to_end()?;
        None
    };
    let report = sim.report();

    let mut summary = Table::new(
        "summary",
        vec![
            "protocol",
            "sigma",
            "drop_prob",
            "slots",
            "empty",
            "success",
            "collision",
            "drop",
            "empty_frac",
            "success_frac",
            "collision_frac",
            "drop_frac",
            "efficiency",
            "absorption_slot",
            "total_time_us",
            "final_cw",
        ],
    );
    let c = report.counts;
    summary.push(vec![
        protocol.as_str().into(),
        sigma.into(),
        drop_prob.into(),
        c.total().into(),
        c.empty.into(),
        c.success.into(),
        c.collision.into(),
        c.drop.into(),
        c.fraction(SlotKind::Empty).into(),
        c.fraction(SlotKind::Success).into(),
        c.fraction(SlotKind::Collision).into(),
        c.fraction(SlotKind::Drop).into(),
        efficiency(&c, &config.timing)?.into(),
        report.absorption_slot.into(),
        report.total_time_us.into(),
        sim.protocol().cw_min.into(),
    ]);

    let mut intervals = Table::new(
        "intervals",
        vec!["interval", "empty", "success", "collision", "drop", "beta", "efficiency", "cw"],
    );
    for r in &report.intervals {
        intervals.push(vec![
            r.index.into(),
            r.counts.empty.into(),
            r.counts.success.into(),
            r.counts.collision.into(),
            r.counts.drop.into(),
            r.beta.into(),
            r.efficiency.into(),
            r.cw.into(),
        ]);
    }
    let mut tables = vec![summary, intervals];
    if config.adaptation_enabled {
        let mut beacons = Table::new("beacons", vec!["interval", "busy", "empty", "beta", "old_cw", "new_cw"]);
        for d in sim.decisions() {
            beacons.push(vec![
                d.interval.into(),
                d.busy.into(),
                d.empty.into(),
                d.beta.into(),
                d.old_cw.into(),
                d.new_cw.into(),
            ]);
        }
        tables.push(beacons);
    }
    let resolved = serde_json::to_value(SimulateConfig { protocol, sim: config })?;
    Ok((Document { command: "simulate", config: resolved, tables }, trace))
}

pub fn analyze(flags: &Flags) -> Result<Document> {
    let m = Merged::new(flags)?;
    let sigmas = m.sigmas("1-16")?;
    let cw_min = m.cw_min();
    let capacity = deterministic_backoff(cw_min)? as usize;
    let runs = m.runs(0);
    let protocol = single(&m.protocols("eca")?, "protocol")?;
    let slots = m.slots(1_000_000_000);

    let mut columns = vec!["sigma", "capacity", "status", "expected_steps", "expected_slots"];
    if runs > 0 {
        columns.extend(["mc_protocol", "mc_cw_max", "mc_mean", "mc_ci95", "mc_absorbed", "mc_not_absorbed"]);
    }
    let mut table = Table::new("absorption", columns);
    let mut mc_cw_max = None;
    for &sigma in &sigmas {
        let reachable = sigma >= 1 && sigma <= capacity;
        let mut row: Vec<Cell> = vec![sigma.into(), capacity.into()];
        if reachable {
            let r = expected_steps(&build_matrix::<f64>(sigma, capacity)?)?;
            row.extend(["ok".into(), r.steps[0].into(), r.expected_slots.into()]);
        } else {
            row.extend(["unreachable".into(), Cell::Missing, Cell::Missing]);
        }
        if runs > 0 {
            let config = m.sim_config(protocol, sigma.max(1), 0.0, slots)?;
            mc_cw_max = Some(config.protocol.cw_max);
            row.extend([protocol.as_str().into(), config.protocol.cw_max.into()]);
            if reachable {
                let s = monte_carlo_absorption(&config, runs)?;
                row.extend([s.slots.mean.into(), ci(&s.slots), s.absorbed.into(), s.not_absorbed.into()]);
            } else {
                row.extend([Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing]);
            }
        }
        table.push(row);
    }
    let config = json!({
        "sigma": sigmas,
        "cw_min": cw_min,
        "capacity": capacity,
        "runs": runs,
        "mc_protocol": protocol,
        "mc_cw_max": mc_cw_max,
        "mc_stickiness": m.stickiness(),
        "max_slots": slots,
        "seed": m.seed(),
    });
    Ok(Document { command: "analyze", config, tables: vec![table] })
}

pub fn sweep(flags: &Flags) -> Result<Document> {
    let m = Merged::new(flags)?;
    let protocols = m.protocols("ca,ca-beb,eca,e2ca")?;
    let sigmas = m.sigmas("2-16")?;
    let drops = m.drop_probs("0,0.1")?;
    let slots = m.slots(1_000_000);
    let runs = m.runs(10);
    if runs == 0 {
        bail!("runs must be at least 1");
    }

    let mut table = Table::new(
        "fractions",
        vec![
            "protocol",
            "cw_min",
            "cw_max",
            "stickiness",
            "sigma",
            "drop_prob",
            "runs",
            "slots",
            "empty",
            "empty_ci95",
            "success",
            "success_ci95",
            "collision",
            "collision_ci95",
            "drop",
            "drop_ci95",
            "drop_per_success",
            "efficiency",
        ],
    );
    let mut resolved = Vec::new();
    for &protocol in &protocols {
        for &p in &drops {
            for &sigma in &sigmas {
                let config = m.sim_config(protocol, sigma, p, slots)?;
                let f = slot_fractions(&config, runs)?;
                let t = f.totals;
                let per_success = if t.success == 0 { None } else { Some(t.drop as f64 / t.success as f64) };
                table.push(vec![
                    protocol.as_str().into(),
                    config.protocol.cw_min.into(),
                    config.protocol.cw_max.into(),
                    config.protocol.stickiness.into(),
                    sigma.into(),
                    p.into(),
                    runs.into(),
                    slots.into(),
                    f.empty.mean.into(),
                    ci(&f.empty),
                    f.success.mean.into(),
                    ci(&f.success),
                    f.collision.mean.into(),
                    ci(&f.collision),
                    f.drop.mean.into(),
                    ci(&f.drop),
                    per_success.into(),
                    efficiency(&t, &config.timing)?.into(),
                ]);
                if sigma == sigmas[0] && p == drops[0] {
                    resolved.push(json!({ "name": protocol, "config": config.protocol }));
                }
            }
        }
    }
    let config = json!({
        "protocols": resolved,
        "sigma": sigmas,
        "drop_prob": drops,
        "slots": slots,
        "runs": runs,
        "seed": m.seed(),
        "timing": ecasim_core::TimingModel::default(),
    });
    Ok(Document { command: "sweep", config, tables: vec![table] })
}

pub fn adapt(flags: &Flags) -> Result<Document> {
    let m = Merged::new(flags)?;
    let protocol = single(&m.protocols("e2ca")?, "protocol")?;
    let sigmas = m.sigmas("20,40,60,80,100")?;
    let intervals = m.intervals().unwrap_or(10);
    let runs = m.runs(5000);
    let drop_prob = single(&m.drop_probs("0")?, "drop probability")?;

    let mut table = Table::new(
        "efficiency",
        vec!["sigma", "interval", "efficiency", "efficiency_ci95", "beta", "beta_ci95", "cw_mean"],
    );
    let mut template = None;
    for &sigma in &sigmas {
        // The controller keeps CW_max equal to CW_min.
        let mut config = m.sim_config(protocol, sigma, drop_prob, u64::MAX)?;
        config.protocol = config.protocol.with_window(config.protocol.cw_min)?;
        config.adaptation_enabled = true;
        config.max_intervals = Some(intervals);
        let stats = adaptation_curve(&config, runs, intervals)?;
        for i in &stats.intervals {
            table.push(vec![
                sigma.into(),
                i.index.into(),
                i.efficiency.mean.into(),
                ci(&i.efficiency),
                i.beta.mean.into(),
                ci(&i.beta),
                i.cw.mean.into(),
            ]);
        }
        template.get_or_insert(config);
    }
    let config = json!({
        "protocol": protocol,
        "sigma": sigmas,
        "intervals": intervals,
        "runs": runs,
        "sim": template,
    });
    Ok(Document { command: "adapt", config, tables: vec![table] })
}
