//! Scenario reports: JSON objects, newline-delimited when batched.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::estimators::HistogramBin;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative pass tolerance over claimed constants.
pub const PASS_TOLERANCE: f64 = 1e-6;

/// One assertion within a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            claimed: None,
            observed: None,
            detail: None,
        }
    }

    /// Passes iff `observed <= claimed·(1 + 1e-6)`.
    pub fn bound(name: &str, claimed: f64, observed: f64) -> Self {
        Self {
            pass: observed <= claimed * (1.0 + PASS_TOLERANCE),
            claimed: Some(claimed),
            observed: Some(observed),
            ..Self::new(name, true)
        }
    }

    /// Passes iff `observed <= limit`.
    pub fn at_most(name: &str, limit: f64, observed: f64) -> Self {
        Self {
            pass: observed <= limit,
            claimed: Some(limit),
            observed: Some(observed),
            ..Self::new(name, true)
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

/// Data behind the optional SVG plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotData {
    Drift {
        k: Vec<u32>,
        drift: Vec<f64>,
        predicted: Vec<f64>,
    },
    Histogram {
        bins: Vec<HistogramBin>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    /// Construction variant within the scenario, e.g. `latitude beta=0.5 n=2`.
    pub case: String,
    pub pass: bool,
    pub claimed: Option<f64>,
    pub observed: Option<f64>,
    pub worst_witness: Option<Witness>,
    pub n_samples: usize,
    pub seed: u64,
    pub wall_time_ms: u64,
    pub tool_version: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotData>,
}

impl Report {
    pub fn new(scenario: &str, case: impl Into<String>, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            case: case.into(),
            pass: true,
            claimed: None,
            observed: None,
            worst_witness: None,
            n_samples: 0,
            seed,
            wall_time_ms: 0,
            tool_version: TOOL_VERSION.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            plot: None,
        }
    }

    /// Appends a check; the report passes only while every check passes.
    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }

    /// JSON with the wall-time field removed; identical for identical
    /// (config, seed).
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_time_ms");
        }
        serde_json::to_string(&v).expect("value serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| GeomError::Parse(e.to_string()))
    }
}

/// Writes one JSON object per line.
pub fn write_ndjson<W: Write>(mut w: W, reports: &[Report]) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", r.to_json())?;
    }
    Ok(())
}

pub fn read_ndjson(text: &str) -> Result<Vec<Report>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(Report::from_json)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_gate_pass() {
        let mut r = Report::new("radial", "x", 1);
        r.push(Check::bound("a", 2.0, 2.0 * (1.0 + 0.5e-6)));
        assert!(r.pass);
        r.push(Check::bound("b", 2.0, 2.0 * (1.0 + 2e-6)));
        assert!(!r.pass);
        assert!(!r.check("b").unwrap().pass);
    }

    #[test]
    fn json_round_trip_and_canonical_form() {
        let mut r = Report::new("spiral", "log c=1", 7);
        r.claimed = Some(3.0);
        r.wall_time_ms = 12;
        r.plot = Some(PlotData::Drift {
            k: vec![1, 2],
            drift: vec![2.0, 4.0],
            predicted: vec![2.0, 4.0],
        });
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let mut later = r.clone();
        later.wall_time_ms = 999;
        assert_eq!(later.canonical_json(), r.canonical_json());
        assert!(!r.canonical_json().contains("wall_time_ms"));
        let mut buf = Vec::new();
        write_ndjson(&mut buf, &[r.clone(), later]).unwrap();
        assert_eq!(
            read_ndjson(std::str::from_utf8(&buf).unwrap())
                .unwrap()
                .len(),
            2
        );
    }
}
