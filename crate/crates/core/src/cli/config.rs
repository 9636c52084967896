//! Run configuration: a JSON document with a closed key set.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{RadialGrid, RunPlan, DEFAULT_CFL};
use crate::geometry::{make_scenario, Scenario, ScenarioKind};
use crate::profile::{InitialData, ProfileSpec, RadialProfile};
use crate::radiation::BOUNDARY_CLEARANCE_CELLS;

/// Distances of automatic probes from their end, as fractions of the grid length.
pub const AUTO_PROBE_FRACTIONS: [f64; 3] = [0.05, 0.10, 0.15];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeSpec {
    Auto(AutoTag),
    List(Vec<f64>),
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec::Auto(AutoTag::Auto)
    }
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_lambdas() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}

fn default_stride() -> usize {
    10
}

/// A parsed and validated run configuration. `data` is the displacement
/// profile; the optional `velocity` profile defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub mass: f64,
    pub grid: GridSpec,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    pub data: ProfileSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<ProfileSpec>,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default = "default_stride")]
    pub state_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn schema_key(path: &str, message: &str) -> String {
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = message.strip_prefix(marker) {
            if let Some(name) = rest.split('`').next() {
                return if path == "." || path.is_empty() {
                    name.to_string()
                } else if path == name || path.ends_with(&format!(".{name}")) {
                    path.to_string()
                } else {
                    format!("{path}.{name}")
                };
            }
        }
    }
    path.to_string()
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(match inner.classify() {
                serde_json::error::Category::Data => {
                    // serde_json appends " at line L column C" to data errors
                    let full = inner.to_string();
                    let message = full
                        .rsplit_once(" at line ")
                        .map_or(full.as_str(), |(m, _)| m)
                        .to_string();
                    Error::ConfigSchema {
                        key: schema_key(&path, &message),
                        message,
                    }
                }
                _ => Error::ConfigParse {
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                },
            });
        }
    };
    de.end().map_err(|e| Error::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn semantic(msg: impl Into<String>) -> Error {
    Error::ConfigSemantic(msg.into())
}

impl RunConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        make_scenario(self.scenario, self.mass).map_err(|e| semantic(e.to_string()))
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        let g = RadialGrid::new(self.grid.min, self.grid.max, self.grid.cells)
            .map_err(|e| semantic(e.to_string()))?;
        g.validate_for(&self.scenario()?).map_err(|e| semantic(e.to_string()))?;
        Ok(g)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let phi = RadialProfile::from_spec(self.data).map_err(|e| semantic(format!("data: {e}")))?;
        let psi = match self.velocity {
            Some(v) => RadialProfile::from_spec(v).map_err(|e| semantic(format!("velocity: {e}")))?,
            None => RadialProfile::zero(),
        };
        Ok(InitialData::new(phi, psi))
    }

    /// Probe positions, resolving `"auto"` to three points near each end.
    pub fn probe_positions(&self) -> Result<Vec<f64>> {
        let g = self.radial_grid()?;
        match &self.probes {
            ProbeSpec::List(v) => Ok(v.clone()),
            ProbeSpec::Auto(_) => {
                let len = g.max - g.min;
                let clearance = BOUNDARY_CLEARANCE_CELLS * g.spacing();
                if AUTO_PROBE_FRACTIONS[0] * len <= clearance {
                    return Err(semantic(format!(
                        "grid too coarse for automatic probes ({} cells); list probes explicitly",
                        g.cells
                    )));
                }
                let mut out: Vec<f64> = AUTO_PROBE_FRACTIONS.iter().map(|f| g.max - f * len).collect();
                if self.scenario.is_two_ended() {
                    out.extend(AUTO_PROBE_FRACTIONS.iter().map(|f| g.min + f * len));
                }
                Ok(out)
            }
        }
    }

    pub fn run_plan(&self) -> Result<RunPlan> {
        Ok(RunPlan {
            t_final: self.t_final,
            probes: self.probe_positions()?,
            state_stride: self.state_stride,
            sample_times: self.sample_times.clone(),
        })
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        let sc = self.scenario()?;
        let grid = self.radial_grid()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(semantic(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(semantic(format!("t_final must be finite and >= 0, got {}", self.t_final)));
        }
        if self.state_stride == 0 {
            return Err(semantic("state_stride must be at least 1"));
        }
        let data = self.initial_data()?;
        if !data.is_zero() {
            let (lo, hi) = data.support();
            let below_ok = sc.kind().is_radial() || lo > grid.min;
            if !(below_ok && hi < grid.max) {
                return Err(semantic(format!(
                    "data support [{lo}, {hi}] lies outside the grid [{}, {}]",
                    grid.min, grid.max
                )));
            }
        }
        if sc.kind().is_radial() {
            // off-center profiles must vanish near r = 0 to stay even in r
            for (name, p) in [("data", &data.phi), ("velocity", &data.psi)] {
                let centered = matches!(
                    p.spec(),
                    Some(ProfileSpec::Gaussian { center, .. } | ProfileSpec::Bump { center, .. }) if center == 0.0
                );
                if !p.is_zero() && !centered && p.support().0 < 0.0 {
                    return Err(semantic(format!("{name} profile is not smooth at the origin")));
                }
            }
        }
        if self.sample_times.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= self.t_final)) {
            return Err(semantic("sample_times must lie in [0, t_final]"));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(semantic("sample_times must be strictly increasing"));
        }
        if self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(semantic("lambdas must be finite"));
        }
        for p in self.probe_positions()? {
            if !(p >= grid.min && p <= grid.max) {
                return Err(semantic(format!("probe {p} lies outside the grid")));
            }
        }
        Ok(())
    }

    /// Output directory: explicit override, then the `out` key, then
    /// `$NULLCONE_OUT/<stem>`, then `out/<stem>`.
    pub fn output_dir(&self, override_dir: Option<&Path>, stem: &str) -> PathBuf {
        if let Some(d) = override_dir {
            return d.to_path_buf();
        }
        if let Some(o) = &self.out {
            return PathBuf::from(o);
        }
        match std::env::var_os("NULLCONE_OUT") {
            Some(root) if !root.is_empty() => PathBuf::from(root).join(stem),
            _ => PathBuf::from("out").join(stem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "scenario": "wave1d",
        "grid": {"min": -40, "max": 40, "cells": 1024},
        "t_final": 30,
        "data": {"kind": "gaussian", "center": 0, "width": 1, "amplitude": 1}
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.cfl, 0.9);
        assert_eq!(c.probes, ProbeSpec::default());
        assert_eq!(c.lambdas, vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.probe_positions().unwrap(), vec![36.0, 32.0, 28.0, -36.0, -32.0, -28.0]);
        assert!(c.initial_data().unwrap().psi.is_zero());
    }

    #[test]
    fn unknown_keys_are_named() {
        let doc = MINIMAL.replace("\"t_final\"", "\"cflx\": 0.5, \"t_final\"");
        match parse_config(&doc) {
            Err(Error::ConfigSchema { key, .. }) => assert_eq!(key, "cflx"),
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("\"cells\": 1024", "\"cells\": 1024, \"size\": 3");
        match parse_config(&doc) {
            Err(Error::ConfigSchema { key, .. }) => assert_eq!(key, "grid.size"),
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("\"amplitude\": 1", "\"amplitude\": 1, \"phase\": 0");
        assert!(matches!(parse_config(&doc), Err(Error::ConfigSchema { .. })));
        let doc = MINIMAL.replace("\"t_final\": 30,", "");
        match parse_config(&doc) {
            Err(Error::ConfigSchema { key, .. }) => assert_eq!(key, "t_final"),
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("1024", "\"many\"");
        match parse_config(&doc) {
            Err(Error::ConfigSchema { key, .. }) => assert_eq!(key, "grid.cells"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{\n  \"scenario\": \"wave1d\",\n  oops\n}") {
            Err(Error::ConfigParse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_violations() {
        let bh = r#"{"scenario": "schwarzschild", "mass": 0,
            "grid": {"min": -40, "max": 40, "cells": 1024}, "t_final": 10,
            "data": {"kind": "gaussian", "center": 10, "width": 1, "amplitude": 1}}"#;
        assert!(matches!(parse_config(bh), Err(Error::ConfigSemantic(_))));
        let escaping = MINIMAL.replace("\"center\": 0", "\"center\": 38");
        assert!(matches!(parse_config(&escaping), Err(Error::ConfigSemantic(_))));
        let cfl = MINIMAL.replace("\"t_final\"", "\"cfl\": 1.5, \"t_final\"");
        assert!(matches!(parse_config(&cfl), Err(Error::ConfigSemantic(_))));
        let times = MINIMAL.replace("\"t_final\"", "\"sample_times\": [5, 3], \"t_final\"");
        assert!(matches!(parse_config(&times), Err(Error::ConfigSemantic(_))));
        let coarse = MINIMAL.replace("1024", "32");
        assert!(matches!(parse_config(&coarse), Err(Error::ConfigSemantic(_))));
        let probes = MINIMAL.replace("\"t_final\"", "\"probes\": [1, 2, 50], \"t_final\"");
        assert!(matches!(parse_config(&probes), Err(Error::ConfigSemantic(_))));
        let bad_auto = MINIMAL.replace("\"t_final\"", "\"probes\": \"manual\", \"t_final\"");
        assert!(matches!(parse_config(&bad_auto), Err(Error::ConfigSchema { .. })));
    }

    #[test]
    fn output_dir_precedence() {
        let mut c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.output_dir(Some(Path::new("/x")), "run"), PathBuf::from("/x"));
        c.out = Some("here".into());
        assert_eq!(c.output_dir(None, "run"), PathBuf::from("here"));
    }

    #[test]
    fn schwarzschild_auto_probes_cover_both_ends() {
        let doc = r#"{"scenario": "schwarzschild", "mass": 1,
            "grid": {"min": -80, "max": 120, "cells": 2048}, "t_final": 10,
            "data": {"kind": "gaussian", "center": 20, "width": 1, "amplitude": 1}}"#;
        let p = parse_config(doc).unwrap().probe_positions().unwrap();
        assert_eq!(p.iter().filter(|x| **x > 80.0).count(), 3);
        assert_eq!(p.iter().filter(|x| **x < -40.0).count(), 3);
    }
}
