//! Run configuration: a JSON file whose values are overridden by command-line
//! flags, which in turn override the built-in defaults.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::BoundMode;
use crate::error::{Error, Result};
use crate::planner::{SPolicy, SweepAxis};
use crate::simulator::SimConfig;
use crate::target::{DensitySpec, DEFAULT_A1_GRID_MAX, DEFAULT_A1_GRID_N};

/// Which bound a command evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Hitting,
    Tv,
    TvUnreflected,
}

impl ModeArg {
    pub fn bound_mode(self) -> BoundMode {
        match self {
            ModeArg::Hitting => BoundMode::HittingTail,
            ModeArg::Tv | ModeArg::TvUnreflected => BoundMode::TotalVariation,
        }
    }
}

impl std::str::FromStr for ModeArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hitting" => Ok(ModeArg::Hitting),
            "tv" | "tv-reflected" => Ok(ModeArg::Tv),
            "tv-unreflected" | "tv_unreflected" => Ok(ModeArg::TvUnreflected),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected hitting, tv or tv-unreflected)"
            ))),
        }
    }
}

/// `s` given as a number or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SArg {
    Fixed(f64),
    Auto,
}

impl SArg {
    pub fn policy(self) -> SPolicy {
        match self {
            SArg::Fixed(s) => SPolicy::Fixed(s),
            SArg::Auto => SPolicy::Optimize,
        }
    }
}

impl std::str::FromStr for SArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(SArg::Auto);
        }
        s.parse::<f64>()
            .map(SArg::Fixed)
            .map_err(|_| Error::Config(format!("s must be a number or 'auto', got '{s}'")))
    }
}

impl Serialize for SArg {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SArg::Fixed(v) => ser.serialize_f64(*v),
            SArg::Auto => ser.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for SArg {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(SArg::Fixed(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct A1Grid {
    pub max: f64,
    pub n: usize,
}

impl Default for A1Grid {
    fn default() -> Self {
        Self {
            max: DEFAULT_A1_GRID_MAX,
            n: DEFAULT_A1_GRID_N,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Optional CSV path for `bound`, `plan` and `sweep`.
    pub csv: Option<String>,
    /// Directory for `validate` outputs.
    pub dir: Option<String>,
}

/// Fully-resolved configuration of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub density: DensitySpec,
    pub y: f64,
    pub s: SArg,
    pub t: f64,
    pub epsilon: f64,
    pub mode: ModeArg,
    pub sweep: Option<SweepSpec>,
    pub sim: SimConfig,
    /// Paths used for the two pgf checks in `validate`.
    pub pgf_paths: usize,
    pub a1_grid: A1Grid,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            density: DensitySpec::ExpPower { beta: 2.0 },
            y: 2.0,
            s: SArg::Fixed(1.4),
            t: 20.0,
            epsilon: 0.01,
            mode: ModeArg::Hitting,
            sweep: None,
            sim: SimConfig::default(),
            pgf_paths: 20_000,
            a1_grid: A1Grid::default(),
            output: OutputSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("y", self.y), ("t", self.t), ("epsilon", self.epsilon)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if let SArg::Fixed(s) = self.s {
            if !s.is_finite() {
                return Err(Error::Config("s must be finite".into()));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.grid.is_empty() {
                return Err(Error::Config("sweep grid is empty".into()));
            }
        }
        self.sim.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_takes_defaults() {
        let c = RunConfig::from_json(r#"{"density":{"family":"exp_power","beta":1.1},"y":10,"s":1.3}"#)
            .unwrap();
        assert_eq!(c.y, 10.0);
        assert_eq!(c.s, SArg::Fixed(1.3));
        assert_eq!(c.epsilon, 0.01);
        assert_eq!(c.sim.dt, 1e-3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"why":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"sim":{"dt":0.1,"steps":3}}"#).is_err());
    }

    #[test]
    fn s_auto_round_trips() {
        let c = RunConfig::from_json(r#"{"s":"auto"}"#).unwrap();
        assert_eq!(c.s, SArg::Auto);
        let back = serde_json::to_string(&c).unwrap();
        assert!(back.contains(r#""s":"auto""#));
        assert!(RunConfig::from_json(r#"{"s":"best"}"#).is_err());
    }
}
