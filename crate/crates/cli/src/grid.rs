//! Parameter lists, protocol names and the grid config file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ecasim_core::{ProtocolConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::output::Format;

/// Window used by the `ca-beb` protocol name.
pub const BEB_CW_MAX: u32 = 1024;

/// Protocol as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Ca,
    CaBeb,
    Eca,
    E2ca,
}

impl ProtocolName {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "ca" | "csma-ca" => Self::Ca,
            "ca-beb" | "csma-ca-beb" | "beb" => Self::CaBeb,
            "eca" | "csma-eca" => Self::Eca,
            "e2ca" | "csma-e2ca" => Self::E2ca,
            other => bail!("unknown protocol {other:?} (expected ca, ca-beb, eca or e2ca)"),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ca => "ca",
            Self::CaBeb => "ca-beb",
            Self::Eca => "eca",
            Self::E2ca => "e2ca",
        }
    }

    /// Stickiness applies to E2CA only; BEB always widens up to 1024 slots.
    pub fn resolve(self, cw_min: u32, cw_max: u32, stickiness: Option<u32>) -> Result<ProtocolConfig> {
        let cfg = match self {
            Self::Ca => ProtocolConfig::with_variant(Variant::CsmaCa, cw_min, cw_max),
            Self::CaBeb => ProtocolConfig::with_variant(Variant::CsmaCa, cw_min, BEB_CW_MAX.max(cw_min)),
            Self::Eca => ProtocolConfig::with_variant(Variant::CsmaEca, cw_min, cw_max),
            Self::E2ca => ProtocolConfig::new(
                Variant::CsmaE2ca,
                cw_min,
                cw_max,
                stickiness.unwrap_or(Variant::CsmaE2ca.default_stickiness()),
            ),
        };
        cfg.with_context(|| format!("protocol {}", self.as_str()))
    }
}

pub fn parse_protocols(s: &str) -> Result<Vec<ProtocolName>> {
    let v = s.split(',').filter(|t| !t.trim().is_empty()).map(ProtocolName::parse).collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        bail!("empty protocol list");
    }
    Ok(v)
}

/// `"2-16"`, `"2,4,8"` or a mix such as `"1-4,8,12"`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("descending range {part:?}");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad integer {part:?}"))?),
        }
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("bad number {p:?}")))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        bail!("empty list");
    }
    Ok(v)
}

/// Grid description read from a TOML file; flags override its fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub protocols: Option<Vec<String>>,
    pub sigma: Option<Vec<usize>>,
    pub cw_min: Option<u32>,
    pub cw_max: Option<u32>,
    pub stickiness: Option<u32>,
    pub drop_prob: Option<Vec<f64>>,
    pub slots: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub beacon_ms: Option<u64>,
    pub intervals: Option<u32>,
    pub format: Option<Format>,
}

impl GridFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
