//! Scenario files: what to check, on which fixture, with which sample.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::registry;
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Prelie,
    Poisson,
    Algebroid,
    Bridge,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Prelie, Kind::Poisson, Kind::Algebroid, Kind::Bridge];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Prelie => "prelie",
            Kind::Poisson => "poisson",
            Kind::Algebroid => "algebroid",
            Kind::Bridge => "bridge",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A coefficient given either as a number or as a polynomial in `x1..xn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Number(f64),
    Expr(String),
}

impl CoefficientSpec {
    pub fn source(&self) -> String {
        match self {
            CoefficientSpec::Number(v) => format!("{v}"),
            CoefficientSpec::Expr(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFixture {
    pub dim: usize,
    pub coefficients: BTreeMap<String, CoefficientSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixtureRef {
    Name(String),
    Inline(InlineFixture),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    20
}

impl Default for Sample {
    fn default() -> Self {
        Self { seed: 0, points: default_points() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    pub fixture: FixtureRef,
    pub suite: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub sample: Sample,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.suite.is_empty() {
            return Err(ConfigError::Invalid { field: "suite".into(), message: "must list at least one check".into() });
        }
        let valid = registry::suites(self.kind);
        for name in &self.suite {
            if !valid.contains(&name.as_str()) {
                return Err(ConfigError::Invalid {
                    field: "suite".into(),
                    message: format!("unknown {} suite {name:?}; valid suites: {}", self.kind, valid.join(", ")),
                });
            }
        }
        for (name, tol) in &self.tolerances {
            if !valid.contains(&name.as_str()) {
                return Err(ConfigError::Invalid {
                    field: format!("tolerances.{name}"),
                    message: format!("not a {} suite; valid suites: {}", self.kind, valid.join(", ")),
                });
            }
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(ConfigError::Invalid { field: format!("tolerances.{name}"), message: "must be a finite non-negative number".into() });
            }
        }
        if self.sample.points == 0 {
            return Err(ConfigError::Invalid { field: "sample.points".into(), message: "must be positive".into() });
        }
        registry::resolve(self.kind, &self.fixture)?;
        Ok(())
    }

    pub fn tolerance(&self, suite: &str) -> f64 {
        self.tolerances.get(suite).copied().unwrap_or_else(|| registry::default_tolerance(self.kind, suite))
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Scenario::from_json(&text)
}
