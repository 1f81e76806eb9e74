//! Mapping configuration and its TOML file format.
//!
//! ```toml
//! closed_world = true
//! prefix = "auto"              # "none" (default), "auto" or "explicit"
//!
//! [prefix_map]                 # MFrag name -> resident-node prefix
//! MTI_Report = "MR"
//!
//! [ov_alias]                   # "Relation.Attribute" -> ordinary variable
//! "TargetTemporalProperty.TargetID" = "tr"
//!
//! [entity_alias]               # key attribute ("Attr" or "Relation.Attr") -> entity relation
//! PatrolDriver = "Soldier"
//!
//! [entity_name]                # relation -> entity type name
//! ReportedTarget = "REPORTEDTARGET_MTIRPT"
//! ```
//!
//! A non-empty `[prefix_map]` without an explicit `prefix` key selects the
//! explicit policy.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum PrefixPolicy {
    #[default]
    None,
    Auto,
    /// MFrag name -> prefix. MFrags without an entry keep their node names.
    Explicit(BTreeMap<String, String>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingConfig {
    pub prefix_policy: PrefixPolicy,
    pub ov_alias: BTreeMap<String, String>,
    pub entity_alias: BTreeMap<String, String>,
    pub entity_names: BTreeMap<String, String>,
    pub closed_world: bool,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown prefix policy `{0}` (expected none, auto or explicit)")]
    UnknownPolicy(String),
    #[error("prefix `{prefix}` is assigned to both `{first}` and `{second}`")]
    PrefixCollision {
        prefix: String,
        first: String,
        second: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    closed_world: bool,
    prefix: Option<String>,
    #[serde(default)]
    prefix_map: BTreeMap<String, String>,
    #[serde(default)]
    ov_alias: BTreeMap<String, String>,
    #[serde(default)]
    entity_alias: BTreeMap<String, String>,
    #[serde(default)]
    entity_name: BTreeMap<String, String>,
}

impl MappingConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let prefix_policy = match raw.prefix.as_deref() {
            None if raw.prefix_map.is_empty() => PrefixPolicy::None,
            None | Some("explicit") => PrefixPolicy::explicit(raw.prefix_map)?,
            Some(other) => PrefixPolicy::parse_keyword(other)
                .ok_or_else(|| ConfigError::UnknownPolicy(other.to_string()))?,
        };
        Ok(Self {
            prefix_policy,
            ov_alias: raw.ov_alias,
            entity_alias: raw.entity_alias,
            entity_names: raw.entity_name,
            closed_world: raw.closed_world,
        })
    }

    /// Ordinary-variable alias for `relation.attribute`.
    pub fn ov_alias_for(&self, relation: &str, attribute: &str) -> Option<&str> {
        self.ov_alias
            .get(&format!("{relation}.{attribute}"))
            .map(String::as_str)
    }

    /// Entity alias for a key attribute; the qualified form wins.
    pub fn entity_alias_for(&self, relation: &str, attribute: &str) -> Option<&str> {
        self.entity_alias
            .get(&format!("{relation}.{attribute}"))
            .or_else(|| self.entity_alias.get(attribute))
            .map(String::as_str)
    }
}

impl PrefixPolicy {
    pub fn parse_keyword(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "auto" => Some(Self::Auto),
            _ => None,
        }
    }

    pub fn explicit(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut owners: HashMap<&str, &str> = HashMap::new();
        for (mfrag, prefix) in &map {
            if let Some(first) = owners.insert(prefix, mfrag) {
                return Err(ConfigError::PrefixCollision {
                    prefix: prefix.clone(),
                    first: first.to_string(),
                    second: mfrag.clone(),
                });
            }
        }
        Ok(Self::Explicit(map))
    }

    /// Reads a prefix map file: a flat TOML table of `MFrag = "PREFIX"` pairs.
    pub fn from_map_file(text: &str) -> Result<Self, ConfigError> {
        let map: BTreeMap<String, String> = toml::from_str(text)?;
        Self::explicit(map)
    }
}
