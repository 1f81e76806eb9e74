//! Ground assertions from relation instances.
//!
//! A tuple of a key-only relationship relation asserts its predicate true.
//! Every non-null non-key cell asserts the function node of its attribute.
//! Under the closed-world assumption, absent tuples assert the predicate false.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::config::MappingConfig;
use crate::database::RelationalDatabase;
use crate::mebn::{MFrag, MTheory, ResidentNode};
use crate::schema::RelationSchema;

/// `Name(a1,a2)=value`. Arguments are key values and must not contain
/// `,`, `(`, `)` or `=`; the value may contain anything but a line break.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assertion {
    pub node_name: String,
    pub arguments: Vec<String>,
    pub value: String,
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})={}", self.node_name, self.arguments.join(","), self.value)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed assertion `{0}`")]
pub struct AssertionParseError(pub String);

impl FromStr for Assertion {
    type Err = AssertionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AssertionParseError(s.to_string());
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let (args, value) = rest.split_once(")=").ok_or_else(bad)?;
        if name.is_empty() || args.contains([')', '(', '=']) {
            return Err(bad());
        }
        let arguments = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::to_string).collect()
        };
        Ok(Self {
            node_name: name.to_string(),
            arguments,
            value: value.to_string(),
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("false assertions need the closed-world assumption")]
    OpenWorldRequested,
    #[error("{relation}.{attribute}: no finite set of entity instances to range over")]
    UnboundedEntitySet { relation: String, attribute: String },
    #[error("node {node} takes {expected} arguments but relation {relation} has {found} key attributes")]
    ArityMismatch {
        node: String,
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("theory does not match the data's schema: {0}")]
    SchemaMismatch(String),
}

/// The resident nodes of `relation` in `theory`, one per non-key attribute
/// (or the single predicate), checked for shape.
fn nodes_for<'t>(
    relation: &RelationSchema,
    frags: &HashMap<&str, &'t MFrag>,
) -> Result<Option<&'t [ResidentNode]>, InstanceError> {
    let width = relation.key_width();
    let non_key = relation.non_key().count();
    let Some(f) = frags.get(relation.name.as_str()) else {
        let is_entity = width == 1 && relation.primary_key().all(|a| a.references.is_none());
        if is_entity && non_key == 0 {
            return Ok(None);
        }
        return Err(InstanceError::SchemaMismatch(format!("no MFrag for relation {}", relation.name)));
    };
    let expected = non_key.max(1);
    if f.resident_nodes.len() != expected {
        return Err(InstanceError::SchemaMismatch(format!(
            "MFrag {} has {} resident nodes, relation has {expected} to map",
            f.name,
            f.resident_nodes.len()
        )));
    }
    for node in &f.resident_nodes {
        if node.arguments.len() != width {
            return Err(InstanceError::ArityMismatch {
                node: node.name.clone(),
                relation: relation.name.clone(),
                expected: node.arguments.len(),
                found: width,
            });
        }
    }
    Ok(Some(&f.resident_nodes))
}

fn index(theory: &MTheory) -> HashMap<&str, &MFrag> {
    theory.mfrags.iter().map(|f| (f.name.as_str(), f)).collect()
}

fn key_positions(relation: &RelationSchema) -> Vec<usize> {
    (0..relation.attributes.len())
        .filter(|&i| relation.attributes[i].in_primary_key)
        .collect()
}

/// Assertions in relation order, then row order, then attribute order.
pub fn map_instances(
    db: &RelationalDatabase,
    theory: &MTheory,
    _config: &MappingConfig,
) -> Result<Vec<Assertion>, InstanceError> {
    let frags = index(theory);
    let mut out = Vec::new();
    for (relation, instance) in db.schema().relations().iter().zip(db.instances()) {
        let Some(nodes) = nodes_for(relation, &frags)? else { continue };
        let keys = key_positions(relation);
        let non_key: Vec<usize> = (0..relation.attributes.len())
            .filter(|&i| !relation.attributes[i].in_primary_key)
            .collect();
        for row in &instance.rows {
            let arguments: Vec<String> = keys
                .iter()
                .map(|&i| row[i].clone().expect("key cells are non-null"))
                .collect();
            if non_key.is_empty() {
                out.push(Assertion {
                    node_name: nodes[0].name.clone(),
                    arguments,
                    value: "true".into(),
                });
                continue;
            }
            for (node, &i) in nodes.iter().zip(&non_key) {
                if let Some(value) = &row[i] {
                    out.push(Assertion {
                        node_name: node.name.clone(),
                        arguments: arguments.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Every absent tuple of every predicate, over the key values of the entity
/// relations its arguments range over.
pub fn enumerate_false_assertions(
    db: &RelationalDatabase,
    theory: &MTheory,
    config: &MappingConfig,
) -> Result<Vec<Assertion>, InstanceError> {
    if !config.closed_world {
        return Err(InstanceError::OpenWorldRequested);
    }
    let frags = index(theory);
    let mut out = Vec::new();
    for (relation, instance) in db.schema().relations().iter().zip(db.instances()) {
        if relation.non_key().next().is_some() {
            continue;
        }
        let Some(nodes) = nodes_for(relation, &frags)? else { continue };
        let keys = key_positions(relation);
        let universes = relation
            .primary_key()
            .map(|a| {
                a.references
                    .as_deref()
                    .and_then(|t| db.key_values(t))
                    .ok_or_else(|| InstanceError::UnboundedEntitySet {
                        relation: relation.name.clone(),
                        attribute: a.name.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let present: HashSet<Vec<&str>> = instance
            .rows
            .iter()
            .map(|row| keys.iter().map(|&i| row[i].as_deref().unwrap_or_default()).collect())
            .collect();
        for tuple in universes.into_iter().multi_cartesian_product() {
            if !present.contains(&tuple) {
                out.push(Assertion {
                    node_name: nodes[0].name.clone(),
                    arguments: tuple.into_iter().map(str::to_string).collect(),
                    value: "false".into(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::database::RelationInstance;
    use crate::mapper::map_rdbs_to_mtheory;
    use crate::schema::fixtures::vehicle_normalized;

    fn rows(rel: &str, data: &[&[Option<&str>]]) -> RelationInstance {
        RelationInstance {
            relation: rel.into(),
            rows: data
                .iter()
                .map(|r| r.iter().map(|c| c.map(str::to_string)).collect())
                .collect(),
        }
    }

    fn db() -> RelationalDatabase {
        RelationalDatabase::new(
            vehicle_normalized(),
            vec![
                rows(
                    "Vehicle",
                    &[
                        &[Some("v1"), Some("wheeled")],
                        &[Some("v2"), Some("tracked")],
                        &[Some("v3"), None],
                    ],
                ),
                rows(
                    "Region",
                    &[&[Some("r1"), Some("off-road"), None], &[Some("r1_1"), Some("road"), Some("r1")]],
                ),
                rows("VehicleLocation", &[&[Some("v1"), Some("t1"), Some("r1")]]),
                rows("Time", &[&[Some("t1")]]),
                rows("Follow", &[&[Some("v1"), Some("v2")], &[Some("v2"), Some("v3")]]),
            ],
        )
        .unwrap()
    }

    fn lines(v: &[Assertion]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn fig_two_style_assertions() {
        let cfg = MappingConfig::default();
        let t = map_rdbs_to_mtheory(&vehicle_normalized(), &cfg).unwrap();
        let got = lines(&map_instances(&db(), &t, &cfg).unwrap());
        assert_eq!(
            got,
            [
                "VehicleClass(v1)=wheeled",
                "VehicleClass(v2)=tracked",
                "TerrainType(r1)=off-road",
                "TerrainType(r1_1)=road",
                "ContainingRegion(r1_1)=r1",
                "Location(v1,t1)=r1",
                "Follow(v1,v2)=true",
                "Follow(v2,v3)=true",
            ]
        );
    }

    #[test]
    fn closed_world_false_follow() {
        let mut cfg = MappingConfig::default();
        let t = map_rdbs_to_mtheory(&vehicle_normalized(), &cfg).unwrap();
        assert_eq!(
            enumerate_false_assertions(&db(), &t, &cfg),
            Err(InstanceError::OpenWorldRequested)
        );
        cfg.closed_world = true;
        let got = lines(&enumerate_false_assertions(&db(), &t, &cfg).unwrap());
        assert_eq!(got.len(), 7);
        assert!(got.contains(&"Follow(v1,v1)=false".to_string()));
        assert!(!got.contains(&"Follow(v1,v2)=false".to_string()));
    }

    #[test]
    fn shape_mismatches() {
        let cfg = MappingConfig::default();
        let mut t = map_rdbs_to_mtheory(&vehicle_normalized(), &cfg).unwrap();
        t.mfrags[3].resident_nodes[0].arguments.pop();
        assert!(matches!(map_instances(&db(), &t, &cfg), Err(InstanceError::ArityMismatch { .. })));
        t.mfrags.pop();
        assert!(matches!(map_instances(&db(), &t, &cfg), Err(InstanceError::SchemaMismatch(_))));
    }

    #[test]
    fn assertion_text_round_trips() {
        for s in ["Follow(v1,v2)=true", "X()=a, b", "TerrainType(r1)=off-road"] {
            assert_eq!(s.parse::<Assertion>().unwrap().to_string(), s);
        }
        assert!("Follow v1".parse::<Assertion>().is_err());
        assert!("(a)=b".parse::<Assertion>().is_err());
    }
}
