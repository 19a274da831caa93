//! INI-style run configuration.
//!
//! One `[section]` per command holds `key = value` pairs mirroring that
//! command's flags; repeated `[scenario]` blocks each describe one flow
//! scenario for the reporting commands. `#` starts a comment anywhere on a
//! line. Later duplicates of a key within a section overwrite earlier ones.

use std::collections::BTreeMap;

use crate::advantage::{FlowParams, FlowScenario, ScenarioQuery};
use crate::error::{Error, Result};

/// Parsed configuration file: named sections plus ordered scenario blocks.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
    pub scenarios: Vec<BTreeMap<String, String>>,
}

/// Where `key = value` lines are currently being collected.
enum Cursor {
    Nowhere,
    Section(String),
    Scenario(usize),
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut file = ConfigFile::default();
    let mut cursor = Cursor::Nowhere;

    for (index, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let lineno = index + 1;

        if let Some(header) = line.strip_prefix('[') {
            let Some(name) = header.strip_suffix(']') else {
                return Err(Error::Config(format!(
                    "line {lineno}: section header `{line}` is missing its closing `]`"
                )));
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Config(format!(
                    "line {lineno}: empty section header"
                )));
            }
            if name == "scenario" {
                file.scenarios.push(BTreeMap::new());
                cursor = Cursor::Scenario(file.scenarios.len() - 1);
            } else {
                file.sections.entry(name.to_string()).or_default();
                cursor = Cursor::Section(name.to_string());
            }
            continue;
        }

        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {lineno}: expected `key = value` or `[section]`, got `{line}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config(format!(
                "line {lineno}: missing key before `=`"
            )));
        }
        match &cursor {
            Cursor::Nowhere => {
                return Err(Error::Config(format!(
                    "line {lineno}: key `{key}` appears before any `[section]` header"
                )));
            }
            Cursor::Section(name) => {
                file.sections
                    .get_mut(name)
                    .expect("section created at header")
                    .insert(key.to_string(), value.to_string());
            }
            Cursor::Scenario(idx) => {
                file.scenarios[*idx].insert(key.to_string(), value.to_string());
            }
        }
    }

    Ok(file)
}

const SCENARIO_KEYS: &[&str] = &["L", "Re", "U", "k", "name", "nu", "q_a"];

/// Convert one `[scenario]` block into a scenario plus optional per-scenario
/// order/ancilla overrides. The flow is fixed either by `Re` alone, by the
/// physical triple `U`, `L`, `nu`, or by both (cross-checked for consistency).
pub fn scenario_from_block(block: &BTreeMap<String, String>) -> Result<ScenarioQuery> {
    for key in block.keys() {
        if !SCENARIO_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown scenario key `{key}`; valid keys: {}",
                SCENARIO_KEYS.join(", ")
            )));
        }
    }
    let name = block
        .get("name")
        .ok_or_else(|| Error::Config("scenario block is missing `name`".into()))?;

    let re = parse_field::<f64>(block, "Re")?;
    let speed = parse_field::<f64>(block, "U")?;
    let length = parse_field::<f64>(block, "L")?;
    let viscosity = parse_field::<f64>(block, "nu")?;

    let flow = match (speed, length, viscosity) {
        (Some(speed), Some(length), Some(viscosity)) => Some(FlowParams {
            speed,
            length,
            viscosity,
        }),
        (None, None, None) => None,
        _ => {
            return Err(Error::Config(format!(
                "scenario `{name}`: partial flow parameters; give all of U, L, nu or none"
            )));
        }
    };
    let scenario = match (re, flow) {
        (Some(re), None) => FlowScenario::from_reynolds(name, re)?,
        (None, Some(flow)) => FlowScenario::from_flow(name, flow.speed, flow.length, flow.viscosity)?,
        (Some(re), Some(flow)) => FlowScenario::with_flow_checked(name, re, flow)?,
        (None, None) => {
            return Err(Error::Config(format!(
                "scenario `{name}` needs either `Re` or the triple `U`, `L`, `nu`"
            )));
        }
    };

    Ok(ScenarioQuery {
        scenario,
        order: parse_field::<u32>(block, "k")?,
        ancillas: parse_field::<u32>(block, "q_a")?,
    })
}

fn parse_field<T: std::str::FromStr>(
    block: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match block.get(key) {
        None => Ok(None),
        Some(text) => text.trim().parse::<T>().map(Some).map_err(|_| {
            Error::Config(format!(
                "scenario key `{key}`: cannot parse `{text}` as {}",
                std::any::type_name::<T>()
            ))
        }),
    }
}
