//! Scenario config files.
//!
//! ```toml
//! [[scenario]]
//! id = "dw_dca"
//! kind = "optimize"
//! seed = 0
//! [scenario.params]
//! energy = "double_well"
//! scheme = "dca"
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{quoted_key, HarnessError, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Optimize,
    LvContinuous,
    LvDiscrete,
    LvMutation,
    Cd,
    Regcd,
    Petviashvili,
    Diagnose,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Optimize,
        Kind::LvContinuous,
        Kind::LvDiscrete,
        Kind::LvMutation,
        Kind::Cd,
        Kind::Regcd,
        Kind::Petviashvili,
        Kind::Diagnose,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Optimize => "optimize",
            Kind::LvContinuous => "lv_continuous",
            Kind::LvDiscrete => "lv_discrete",
            Kind::LvMutation => "lv_mutation",
            Kind::Cd => "cd",
            Kind::Regcd => "regcd",
            Kind::Petviashvili => "petviashvili",
            Kind::Diagnose => "diagnose",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    kind: Kind,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    params: toml::Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    pub params: Params,
    /// Artifact paths relative to the output directory.
    pub outputs: Vec<String>,
    pub seed: u64,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !id.starts_with('.')
}

/// Parse config text. Relative trace paths in `diagnose` scenarios resolve against `base`.
pub fn load_config_str(text: &str, base: &Path) -> Result<Vec<Scenario>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let message = e.message().to_string();
        HarnessError::Parse { line, key: quoted_key(&message), message }
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.scenario.len());
    for s in raw.scenario {
        if !valid_id(&s.id) {
            return Err(HarnessError::validation(&s.id, "id", "ids use letters, digits, `_`, `-` and `.` only"));
        }
        if !seen.insert(s.id.clone()) {
            return Err(HarnessError::validation(&s.id, "id", "duplicate id"));
        }
        let mut params = Params::from_table(s.kind, &s.id, s.params)?;
        if let Params::Diagnose(d) = &mut params {
            if d.trace.is_relative() {
                d.trace = base.join(&d.trace);
            }
        }
        params.validate(&s.id, s.seed)?;
        let outputs = params.artifacts().iter().map(|a| format!("{}/{a}", s.id)).collect();
        out.push(Scenario { id: s.id, kind: s.kind, params, outputs, seed: s.seed });
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    load_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}
