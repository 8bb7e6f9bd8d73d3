//! Scenario configuration in a flat key-value text format.
//!
//! ```text
//! file   := line*
//! line   := blank | comment | entry
//! comment:= '#' any*
//! entry  := key '=' value [ '#' any* ]
//! key    := [a-z0-9_-]+
//! value  := any non-'#' text, surrounding whitespace trimmed
//! ```
//!
//! Keys may appear once. Lists (such as `x0`) are comma-separated numbers.
//! Every scenario documents its keys and defaults in [`Scenario::defaults`];
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{GeomError, Result};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "QIGEOM_SEED";

/// Seed used when neither the configuration nor [`SEED_ENV`] sets one.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Radial,
    Psi,
    PsiDrift,
    Homomorphism,
    Product,
    Density,
    Spiral,
    SpiralKernel,
    PlNorm,
    Metric,
    MatrixNorms,
    All,
}

/// The scenarios of the default suite, in run order.
pub const DEFAULT_SUITE: [Scenario; 11] = [
    Scenario::Radial,
    Scenario::Psi,
    Scenario::PsiDrift,
    Scenario::Homomorphism,
    Scenario::Product,
    Scenario::Density,
    Scenario::Spiral,
    Scenario::SpiralKernel,
    Scenario::PlNorm,
    Scenario::Metric,
    Scenario::MatrixNorms,
];

const COMMON_KEYS: [(&str, &str); 3] = [("seed", ""), ("out", ""), ("svg", "")];

const SAMPLER_KEYS: [(&str, &str); 4] = [
    ("global", "0.4"),
    ("local", "0.3"),
    ("witness", "0.3"),
    ("local_scale", "1e-3"),
];

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Radial => "radial",
            Scenario::Psi => "psi",
            Scenario::PsiDrift => "psi-drift",
            Scenario::Homomorphism => "homomorphism",
            Scenario::Product => "product",
            Scenario::Density => "density",
            Scenario::Spiral => "spiral",
            Scenario::SpiralKernel => "spiral-kernel",
            Scenario::PlNorm => "pl-norm",
            Scenario::Metric => "metric",
            Scenario::MatrixNorms => "matrix-norms",
            Scenario::All => "all",
        }
    }

    pub fn all_names() -> Vec<&'static str> {
        DEFAULT_SUITE
            .iter()
            .map(Scenario::name)
            .chain(["all"])
            .collect()
    }

    /// Scenario-specific keys with their default values.
    pub fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            // sphere: latitude | orthogonal; angle is the rotation angle of the orthogonal map.
            // claim, when set, replaces the derived constant (radial, psi, spiral)
            Scenario::Radial => &[
                ("n", "2"),
                ("sphere", "latitude"),
                ("beta", "0.5"),
                ("angle", "0.7"),
                ("pairs", "1000000"),
                ("radius", "100"),
                ("sphere_pairs", "100000"),
                ("claim", ""),
            ],
            // disk: twist | pl-twist; amplitude is the bump height or the PL rotation
            Scenario::Psi => &[
                ("n", "2"),
                ("disk", "twist"),
                ("amplitude", "1.0"),
                ("resolution", "6"),
                ("pairs", "1000000"),
                ("radius", "300"),
                ("cross_pairs", "10000"),
                ("claim", ""),
            ],
            Scenario::PsiDrift => &[
                ("n", "2"),
                ("amplitude", "1.0"),
                ("x0", "0.3,-0.4"),
                ("k", "40"),
                ("threshold", "1e6"),
            ],
            // kind: psi | translated | radial
            Scenario::Homomorphism => &[
                ("n", "2"),
                ("kind", "psi"),
                ("amplitude", "1.0"),
                ("amplitude2", "-0.6"),
                ("beta", "0.5"),
                ("beta2", "-0.3"),
                ("points", "10000"),
                ("restriction_points", "1000"),
                ("radius", "300"),
            ],
            Scenario::Product => &[
                ("n", "2"),
                ("beta", "0.5"),
                ("c", "1.0"),
                ("amplitude", "1.5"),
                ("pairs", "100000"),
                ("radius", "50"),
                ("points", "10000"),
            ],
            Scenario::Density => &[
                ("amplitude", "1.0"),
                ("resolution", "8"),
                ("pl_amplitude", "0.3"),
                ("step", "0.2"),
                ("half_width", "3.0"),
            ],
            Scenario::Spiral => &[
                ("n", "2"),
                ("c", "1.0"),
                ("pairs", "1000000"),
                ("r_min", "1e-3"),
                ("r_max", "1e4"),
                ("sphere_pairs", "10000"),
                ("claim", ""),
            ],
            Scenario::SpiralKernel => &[
                ("n", "2"),
                ("angle", "3.141592653589793"),
                ("b", "4.0"),
                ("amplitude", "1.0"),
                ("k", "40"),
                ("threshold", "1e6"),
            ],
            // plmap: optional CSV path; otherwise a random interior displacement
            Scenario::PlNorm => &[
                ("n", "2"),
                ("resolution", "8"),
                ("amplitude", "0.2"),
                ("pairs", "1000000"),
                ("plmap", ""),
            ],
            // cloud: circle | sphere | ellipse; eps empty picks a per-cloud default
            Scenario::Metric => &[
                ("cloud", "circle"),
                ("points", "10000"),
                ("eps", ""),
                ("sources", "64"),
                ("a", "2.0"),
                ("b", "1.0"),
            ],
            Scenario::MatrixNorms => &[("count", "1000"), ("n_max", "8")],
            Scenario::All => &[],
        }
    }

    fn uses_sampler(&self) -> bool {
        matches!(
            self,
            Scenario::Radial | Scenario::Psi | Scenario::Product | Scenario::Spiral
        )
    }

    fn allows(&self, key: &str) -> bool {
        COMMON_KEYS.iter().any(|(k, _)| *k == key)
            || self.defaults().iter().any(|(k, _)| *k == key)
            || (self.uses_sampler() && SAMPLER_KEYS.iter().any(|(k, _)| *k == key))
            || (*self == Scenario::All && DEFAULT_SUITE.iter().any(|s| s.allows(key)))
    }
}

impl FromStr for Scenario {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        DEFAULT_SUITE
            .iter()
            .chain([Scenario::All].iter())
            .find(|sc| sc.name() == s)
            .copied()
            .ok_or_else(|| {
                GeomError::Config(format!(
                    "unknown scenario '{s}' (expected one of {})",
                    Scenario::all_names().join(", ")
                ))
            })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scenario with its explicitly set keys.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    values: BTreeMap<String, String>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

/// Parses the flat key-value text into an ordered map.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| GeomError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !valid_key(k) {
            return Err(GeomError::Config(format!(
                "line {}: invalid key '{k}'",
                i + 1
            )));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(GeomError::Config(format!(
                "line {}: duplicate key '{k}'",
                i + 1
            )));
        }
    }
    Ok(out)
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            values: BTreeMap::new(),
        }
    }

    /// Reads a configuration file's text. A `scenario` key is required
    /// unless `scenario` is given.
    pub fn from_text(text: &str, scenario: Option<Scenario>) -> Result<Self> {
        let mut values = parse_kv(text)?;
        let named = values
            .remove("scenario")
            .map(|s| s.parse::<Scenario>())
            .transpose()?;
        let scenario = match (scenario, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(GeomError::Config(format!("config is for '{b}', not '{a}'")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(GeomError::Config("missing 'scenario' key".into())),
        };
        let mut cfg = Self::new(scenario);
        for (k, v) in values {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Sets one key, rejecting keys the scenario does not know.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if !self.scenario.allows(&key) {
            return Err(GeomError::Config(format!(
                "unknown key '{key}' for scenario '{}'",
                self.scenario
            )));
        }
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// The explicit value of `key`, else its default.
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).or_else(|| {
            self.scenario
                .defaults()
                .iter()
                .chain(SAMPLER_KEYS.iter())
                .chain(COMMON_KEYS.iter())
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
        })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .raw(key)
            .ok_or_else(|| GeomError::Config(format!("missing key '{key}'")))?;
        raw.parse::<T>()
            .map_err(|_| GeomError::Config(format!("invalid value '{raw}' for '{key}'")))
    }

    /// A non-empty string value.
    pub fn get_opt(&self, key: &str) -> Option<String> {
        self.raw(key).filter(|v| !v.is_empty()).map(str::to_string)
    }

    pub fn get_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key).unwrap_or("");
        raw.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| GeomError::Config(format!("invalid number '{s}' in '{key}'")))
            })
            .collect()
    }

    /// Seed precedence: explicit key, then [`SEED_ENV`], then [`DEFAULT_SEED`].
    pub fn seed(&self) -> Result<u64> {
        if let Some(s) = self.values.get("seed").filter(|s| !s.is_empty()) {
            return s
                .parse()
                .map_err(|_| GeomError::Config(format!("invalid seed '{s}'")));
        }
        match std::env::var(SEED_ENV) {
            Ok(s) if !s.trim().is_empty() => s
                .trim()
                .parse()
                .map_err(|_| GeomError::Config(format!("invalid {SEED_ENV} '{s}'"))),
            _ => Ok(DEFAULT_SEED),
        }
    }

    /// Every effective parameter (defaults filled in), for reports.
    pub fn effective(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .scenario
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if self.scenario.uses_sampler() {
            for (k, v) in SAMPLER_KEYS {
                out.insert(k.into(), v.into());
            }
        }
        for (k, v) in &self.values {
            if k != "out" && k != "svg" && k != "seed" {
                out.insert(k.clone(), v.clone());
            }
        }
        out
    }

    /// The same explicit keys re-targeted to another scenario, keeping
    /// only the keys that scenario knows.
    pub fn for_scenario(&self, scenario: Scenario) -> Self {
        let values = self
            .values
            .iter()
            .filter(|(k, _)| scenario.allows(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { scenario, values }
    }

    /// Serialises explicit keys back to the text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("scenario = {}\n", self.scenario);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
