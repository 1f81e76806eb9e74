//! Schema to MTheory mapping: entities, resident nodes, MFrags and theories.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::config::{MappingConfig, PrefixPolicy};
use crate::mebn::{
    validate_mtheory, ContextNode, EntityType, MFrag, MTheory, MTheoryViolation, NodeKind, OrdinaryVariable,
    PossibleValues, ResidentNode,
};
use crate::naming::initials;
use crate::schema::{AttributeDef, RelationKind, RelationSchema, RelationalDatabaseSchema, Violation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("schema is not in entity-relationship normal form ({}); run with --normalize", join(.0))]
    NotNormalized(Vec<Violation>),
    #[error("{0} is not an entity relation")]
    NotEntityRelation(String),
    #[error("{0} is not a relationship relation")]
    NotRelationshipRelation(String),
    #[error("{0} has non-key attributes and maps to function nodes, not a predicate")]
    HasNonKeyAttributes(String),
    #[error("{relation}.{attribute} is a primary-key attribute")]
    AttributeIsKey { relation: String, attribute: String },
    #[error("resident node {node} is defined in both {first} and {second}; use --prefix auto or a prefix map")]
    UniqueHome {
        node: String,
        first: String,
        second: String,
    },
    #[error("prefix `{prefix}` is assigned to both {first} and {second}")]
    PrefixCollision {
        prefix: String,
        first: String,
        second: String,
    },
    #[error("relations {first} and {second} both map to entity {entity}")]
    EntityCollision {
        entity: String,
        first: String,
        second: String,
    },
    #[error("{mfrag}: two key attributes map to ordinary variable {variable}")]
    VariableCollision { mfrag: String, variable: String },
    #[error("mapped theory is invalid: {}", join(.0))]
    InvalidTheory(Vec<MTheoryViolation>),
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Entity type name for an entity relation: the configured name, or the
/// relation name uppercased.
pub fn entity_name(relation: &str, config: &MappingConfig) -> String {
    config
        .entity_names
        .get(relation)
        .cloned()
        .unwrap_or_else(|| relation.to_uppercase())
}

fn is_entity(relation: &RelationSchema) -> bool {
    let mut key = relation.primary_key();
    matches!((key.next(), key.next()), (Some(a), None) if a.references.is_none())
}

pub fn map_entity(relation: &RelationSchema, config: &MappingConfig) -> Result<EntityType, MapError> {
    if !is_entity(relation) {
        return Err(MapError::NotEntityRelation(relation.name.clone()));
    }
    Ok(EntityType(entity_name(&relation.name, config)))
}

/// The ordinary variable standing for a key attribute of `relation`.
pub fn derive_ordinary_variable(
    relation: &RelationSchema,
    attribute: &AttributeDef,
    config: &MappingConfig,
) -> OrdinaryVariable {
    let name = config
        .ov_alias_for(&relation.name, &attribute.name)
        .map(str::to_string)
        .unwrap_or_else(|| attribute.name.to_lowercase());
    let owner = attribute.references.as_deref().unwrap_or(&relation.name);
    OrdinaryVariable::new(name, entity_name(owner, config))
}

fn key_variables(relation: &RelationSchema, config: &MappingConfig) -> Result<Vec<OrdinaryVariable>, MapError> {
    let ovs: Vec<OrdinaryVariable> = relation
        .primary_key()
        .map(|a| derive_ordinary_variable(relation, a, config))
        .collect();
    let mut seen = HashSet::new();
    for ov in &ovs {
        if !seen.insert(ov.name.as_str()) {
            return Err(MapError::VariableCollision {
                mfrag: relation.name.clone(),
                variable: ov.name.clone(),
            });
        }
    }
    Ok(ovs)
}

fn names(ovs: &[OrdinaryVariable]) -> Vec<String> {
    ovs.iter().map(|ov| ov.name.clone()).collect()
}

fn require_relationship(relation: &RelationSchema, schema: &RelationalDatabaseSchema) -> Result<(), MapError> {
    if schema.kind_of(relation) == RelationKind::RelationshipRelation {
        Ok(())
    } else {
        Err(MapError::NotRelationshipRelation(relation.name.clone()))
    }
}

pub fn map_predicate_resident(
    relation: &RelationSchema,
    schema: &RelationalDatabaseSchema,
    config: &MappingConfig,
) -> Result<ResidentNode, MapError> {
    require_relationship(relation, schema)?;
    if relation.non_key().next().is_some() {
        return Err(MapError::HasNonKeyAttributes(relation.name.clone()));
    }
    let ovs = key_variables(relation, config)?;
    Ok(predicate(relation, &ovs))
}

fn predicate(relation: &RelationSchema, ovs: &[OrdinaryVariable]) -> ResidentNode {
    ResidentNode::new(relation.name.clone(), names(ovs), NodeKind::Predicate)
}

pub fn map_function_resident(
    relation: &RelationSchema,
    attribute: &AttributeDef,
    config: &MappingConfig,
) -> Result<ResidentNode, MapError> {
    if attribute.in_primary_key {
        return Err(MapError::AttributeIsKey {
            relation: relation.name.clone(),
            attribute: attribute.name.clone(),
        });
    }
    let ovs = key_variables(relation, config)?;
    Ok(function(attribute, &ovs, config))
}

fn function(attribute: &AttributeDef, ovs: &[OrdinaryVariable], config: &MappingConfig) -> ResidentNode {
    let values = match (&attribute.references, &attribute.domain) {
        (Some(target), _) => PossibleValues::EntityInstances(entity_name(target, config)),
        (None, Some(domain)) => PossibleValues::Domain(domain.clone()),
        (None, None) => PossibleValues::Open,
    };
    ResidentNode::new(attribute.name.clone(), names(ovs), NodeKind::Function(values))
}

/// The partial MFrag for one relation; an entity relation without non-key
/// attributes yields none.
pub fn map_rs_to_mfrag(
    relation: &RelationSchema,
    schema: &RelationalDatabaseSchema,
    config: &MappingConfig,
) -> Result<Option<MFrag>, MapError> {
    let violations = schema.relation_violations(relation);
    if !violations.is_empty() {
        return Err(MapError::NotNormalized(violations));
    }
    mfrag(relation, config)
}

/// Assumes the relation is an entity or relationship relation.
fn mfrag(relation: &RelationSchema, config: &MappingConfig) -> Result<Option<MFrag>, MapError> {
    let has_non_key = relation.non_key().next().is_some();
    if !has_non_key && is_entity(relation) {
        return Ok(None);
    }
    let ovs = key_variables(relation, config)?;
    let mut f = MFrag::new(relation.name.clone());
    f.resident_nodes = if has_non_key {
        relation.non_key().map(|a| function(a, &ovs, config)).collect()
    } else {
        vec![predicate(relation, &ovs)]
    };
    f.context_nodes = ovs.into_iter().map(ContextNode::IsA).collect();
    Ok(Some(f))
}

pub fn map_rdbs_to_mtheory(schema: &RelationalDatabaseSchema, config: &MappingConfig) -> Result<MTheory, MapError> {
    let order = schema.sort_relations().map_err(|e| match e {
        crate::schema::SchemaError::NotNormalized(v) => MapError::NotNormalized(v),
        other => unreachable!("sort_relations only reports normal-form violations: {other}"),
    })?;
    let mut theory = MTheory::new(schema.name());
    let mut owners: HashMap<String, &str> = HashMap::new();
    for rel in &order {
        if let Ok(entity) = map_entity(rel, config) {
            if let Some(first) = owners.insert(entity.0.clone(), &rel.name) {
                return Err(MapError::EntityCollision {
                    entity: entity.0,
                    first: first.to_string(),
                    second: rel.name.clone(),
                });
            }
            theory.entities.insert(entity);
        }
    }
    for rel in &order {
        if let Some(f) = mfrag(rel, config)? {
            theory.mfrags.push(f);
        }
    }
    let theory = apply_prefix_policy(theory, config)?;
    let violations = validate_mtheory(&theory);
    if let Some(MTheoryViolation::UniqueHome { node, mfrags }) = violations
        .iter()
        .find(|v| matches!(v, MTheoryViolation::UniqueHome { .. }))
    {
        return Err(MapError::UniqueHome {
            node: node.clone(),
            first: mfrags[0].clone(),
            second: mfrags[1].clone(),
        });
    }
    if !violations.is_empty() {
        return Err(MapError::InvalidTheory(violations));
    }
    Ok(theory)
}

/// Renames resident nodes to `<PREFIX>_<name>` per MFrag.
pub fn apply_prefix_policy(mut theory: MTheory, config: &MappingConfig) -> Result<MTheory, MapError> {
    let prefixes: Vec<Option<String>> = match &config.prefix_policy {
        PrefixPolicy::None => return Ok(theory),
        PrefixPolicy::Auto => {
            let mut used = HashSet::new();
            theory
                .mfrags
                .iter()
                .map(|f| {
                    let base = initials(&f.name);
                    let mut candidate = base.clone();
                    let mut n = 2;
                    while !used.insert(candidate.clone()) {
                        candidate = format!("{base}{n}");
                        n += 1;
                    }
                    Some(candidate)
                })
                .collect()
        }
        PrefixPolicy::Explicit(map) => {
            let mut owners: HashMap<&str, &str> = HashMap::new();
            for (mfrag, prefix) in map {
                if let Some(first) = owners.insert(prefix, mfrag) {
                    return Err(MapError::PrefixCollision {
                        prefix: prefix.clone(),
                        first: first.to_string(),
                        second: mfrag.clone(),
                    });
                }
            }
            theory.mfrags.iter().map(|f| map.get(&f.name).cloned()).collect()
        }
    };
    for (f, prefix) in theory.mfrags.iter_mut().zip(prefixes) {
        let Some(prefix) = prefix else { continue };
        for r in &mut f.resident_nodes {
            r.name = format!("{prefix}_{}", r.name);
        }
    }
    Ok(theory)
}
