//! Relational schemas: attributes, relation schemas, key classification and
//! the Entity-Relationship Normal Form check.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::naming::is_identifier;

/// An attribute `Name[*][/Target][:{v1,...}]` of a relation schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    /// Declared finite domain, in declaration order. `None` means open.
    pub domain: Option<Vec<String>>,
    pub in_primary_key: bool,
    /// Home relation of a foreign key.
    pub references: Option<String>,
    /// Column type as written in DDL input. Never consulted by the mapper.
    pub sql_type: Option<String>,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            domain: None,
            in_primary_key: false,
            references: None,
            sql_type: None,
        }
    }

    pub fn key(mut self) -> Self {
        self.in_primary_key = true;
        self
    }

    pub fn references(mut self, target: impl Into<String>) -> Self {
        self.references = Some(target.into());
        self
    }

    pub fn domain<I, S>(mut self, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.domain = Some(values.into_iter().map(Into::into).collect());
        self
    }

    pub fn class(&self) -> AttributeClass {
        match (self.in_primary_key, self.references.is_some()) {
            (true, true) => AttributeClass::PrimaryKeyForeign,
            (true, false) => AttributeClass::PrimaryKeyOriginal,
            (false, true) => AttributeClass::NonPrimaryForeignKey,
            (false, false) => AttributeClass::NonForeignKeyAttribute,
        }
    }
}

/// The four disjoint roles an attribute can play within its relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttributeClass {
    PrimaryKeyForeign,
    PrimaryKeyOriginal,
    NonPrimaryForeignKey,
    NonForeignKeyAttribute,
}

impl AttributeClass {
    pub fn is_key(self) -> bool {
        matches!(self, Self::PrimaryKeyForeign | Self::PrimaryKeyOriginal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSchema {
    pub name: String,
    pub attributes: Vec<AttributeDef>,
}

impl RelationSchema {
    pub fn new(name: impl Into<String>, attributes: Vec<AttributeDef>) -> Self {
        Self {
            name: name.into(),
            attributes,
        }
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Primary-key attributes in declaration order.
    pub fn primary_key(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(|a| a.in_primary_key)
    }

    /// The NF and NK attributes (everything outside the key), in order.
    pub fn non_key(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(|a| !a.in_primary_key)
    }

    pub fn key_width(&self) -> usize {
        self.primary_key().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    EntityRelation,
    RelationshipRelation,
    NonNormal,
}

/// Why a relation falls outside Entity-Relationship Normal Form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    /// A composite primary key contains attributes that are not foreign keys.
    OriginalKeyInCompositeKey,
    /// A primary-key foreign key points at something other than an entity relation.
    KeyReferencesNonEntity,
    /// A non-primary foreign key points at something other than an entity relation.
    ReferenceToNonEntity,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OriginalKeyInCompositeKey => "non-foreign-key attribute in a composite primary key",
            Self::KeyReferencesNonEntity => "primary-key foreign key does not reference an entity relation",
            Self::ReferenceToNonEntity => "foreign key does not reference an entity relation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub relation: String,
    pub attributes: Vec<String>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.attributes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}.{}", self.relation, a)?;
        }
        write!(f, ": {}", self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("duplicate attribute `{relation}.{attribute}`")]
    DuplicateAttribute { relation: String, attribute: String },
    #[error("duplicate value `{value}` in domain of `{relation}.{attribute}`")]
    DuplicateDomainValue {
        relation: String,
        attribute: String,
        value: String,
    },
    #[error("relation `{0}` has no primary key attribute")]
    NoPrimaryKey(String),
    #[error("`{relation}.{attribute}` references unknown relation `{target}`")]
    UnresolvedReference {
        relation: String,
        attribute: String,
        target: String,
    },
    #[error("`{relation}.{attribute}` references `{target}`, whose primary key is not a single attribute")]
    CompositeReferenceTarget {
        relation: String,
        attribute: String,
        target: String,
    },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown attribute `{relation}.{attribute}`")]
    UnknownAttribute { relation: String, attribute: String },
    #[error("schema is not in Entity-Relationship Normal Form ({} violation(s), first: {})",
        .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    NotNormalized(Vec<Violation>),
    #[error("synthesized entity relation `{0}` collides with an existing relation that is not an entity relation")]
    NameCollision(String),
}

impl SchemaError {
    /// Relation and attribute the error is about, for locating it in source text.
    pub fn subject(&self) -> (Option<&str>, Option<&str>) {
        match self {
            Self::InvalidName(n) | Self::DuplicateRelation(n) | Self::NoPrimaryKey(n) => {
                (Some(n), None)
            }
            Self::DuplicateAttribute {
                relation,
                attribute,
            }
            | Self::DuplicateDomainValue {
                relation,
                attribute,
                ..
            }
            | Self::UnresolvedReference {
                relation,
                attribute,
                ..
            }
            | Self::CompositeReferenceTarget {
                relation,
                attribute,
                ..
            } => (Some(relation), Some(attribute)),
            _ => (None, None),
        }
    }
}

/// A named, structurally valid set of relation schemas.
///
/// Construction checks identifier syntax, uniqueness of relation and
/// attribute names, non-empty primary keys, and that every foreign key
/// resolves to a relation with a single-attribute primary key.
#[derive(Debug, Clone)]
pub struct RelationalDatabaseSchema {
    name: String,
    relations: Vec<RelationSchema>,
    index: HashMap<String, usize>,
}

impl PartialEq for RelationalDatabaseSchema {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.relations == other.relations
    }
}

impl Eq for RelationalDatabaseSchema {}

impl RelationalDatabaseSchema {
    pub fn new(name: impl Into<String>, relations: Vec<RelationSchema>) -> Result<Self, SchemaError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(SchemaError::InvalidName(name));
        }
        let mut index = HashMap::with_capacity(relations.len());
        for (i, rel) in relations.iter().enumerate() {
            if !is_identifier(&rel.name) {
                return Err(SchemaError::InvalidName(rel.name.clone()));
            }
            if index.insert(rel.name.clone(), i).is_some() {
                return Err(SchemaError::DuplicateRelation(rel.name.clone()));
            }
        }
        for rel in &relations {
            check_relation(rel)?;
        }
        for rel in &relations {
            for attr in &rel.attributes {
                let Some(target) = &attr.references else { continue };
                let Some(&t) = index.get(target) else {
                    return Err(SchemaError::UnresolvedReference {
                        relation: rel.name.clone(),
                        attribute: attr.name.clone(),
                        target: target.clone(),
                    });
                };
                if relations[t].key_width() != 1 {
                    return Err(SchemaError::CompositeReferenceTarget {
                        relation: rel.name.clone(),
                        attribute: attr.name.clone(),
                        target: target.clone(),
                    });
                }
            }
        }
        Ok(Self {
            name,
            relations,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[RelationSchema] {
        &self.relations
    }

    pub fn into_parts(self) -> (String, Vec<RelationSchema>) {
        (self.name, self.relations)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSchema> {
        self.index.get(name).map(|&i| &self.relations[i])
    }

    fn require(&self, name: &str) -> Result<&RelationSchema, SchemaError> {
        self.relation(name)
            .ok_or_else(|| SchemaError::UnknownRelation(name.to_string()))
    }

    pub fn classify_attribute(&self, relation: &str, attribute: &str) -> Result<AttributeClass, SchemaError> {
        let rel = self.require(relation)?;
        rel.attribute(attribute)
            .map(AttributeDef::class)
            .ok_or_else(|| SchemaError::UnknownAttribute {
                relation: relation.to_string(),
                attribute: attribute.to_string(),
            })
    }

    pub fn classify_relation(&self, relation: &str) -> Result<RelationKind, SchemaError> {
        let rel = self.require(relation)?;
        Ok(self.kind_of(rel))
    }

    /// Entity status is decided by a relation's own key alone, so resolving the
    /// targets of key foreign keys never recurses further. Key FK chains that
    /// never reach an entity relation (including cycles) classify as NonNormal.
    pub(crate) fn kind_of(&self, rel: &RelationSchema) -> RelationKind {
        if is_entity(rel) {
            return RelationKind::EntityRelation;
        }
        let grounded = rel
            .primary_key()
            .all(|a| a.references.as_deref().is_some_and(|t| self.is_entity_relation(t)));
        if grounded {
            RelationKind::RelationshipRelation
        } else {
            RelationKind::NonNormal
        }
    }

    pub fn is_entity_relation(&self, name: &str) -> bool {
        self.relation(name).is_some_and(is_entity)
    }

    pub fn check_er_normal_form(&self) -> Vec<Violation> {
        self.relations
            .iter()
            .flat_map(|rel| self.relation_violations(rel))
            .collect()
    }

    /// The normal-form violations of a single relation of this schema.
    pub fn relation_violations(&self, rel: &RelationSchema) -> Vec<Violation> {
        let mut out = Vec::new();
        let width = rel.key_width();
        let mut push = |kind, attributes: Vec<String>| {
            if !attributes.is_empty() {
                out.push(Violation {
                    relation: rel.name.clone(),
                    attributes,
                    kind,
                });
            }
        };
        if width > 1 {
            push(
                ViolationKind::OriginalKeyInCompositeKey,
                rel.primary_key()
                    .filter(|a| a.references.is_none())
                    .map(|a| a.name.clone())
                    .collect(),
            );
        }
        let bad_target = |a: &&AttributeDef| {
            a.references
                .as_deref()
                .is_some_and(|t| !self.is_entity_relation(t))
        };
        push(
            ViolationKind::KeyReferencesNonEntity,
            rel.primary_key().filter(bad_target).map(|a| a.name.clone()).collect(),
        );
        push(
            ViolationKind::ReferenceToNonEntity,
            rel.non_key().filter(bad_target).map(|a| a.name.clone()).collect(),
        );
        out
    }

    /// Stable partition: entity relations first, relationship relations second.
    pub fn sort_relations(&self) -> Result<Vec<&RelationSchema>, SchemaError> {
        let violations = self.check_er_normal_form();
        if !violations.is_empty() {
            return Err(SchemaError::NotNormalized(violations));
        }
        let (mut entities, relationships): (Vec<_>, Vec<_>) = self
            .relations
            .iter()
            .partition(|r| self.kind_of(r) == RelationKind::EntityRelation);
        entities.extend(relationships);
        Ok(entities)
    }

    /// Copy with DDL column types dropped, for comparing against DSL input.
    pub fn without_column_types(&self) -> Self {
        let mut out = self.clone();
        for rel in &mut out.relations {
            for attr in &mut rel.attributes {
                attr.sql_type = None;
            }
        }
        out
    }
}

fn is_entity(rel: &RelationSchema) -> bool {
    let mut key = rel.primary_key();
    matches!((key.next(), key.next()), (Some(a), None) if a.references.is_none())
}

fn check_relation(rel: &RelationSchema) -> Result<(), SchemaError> {
    let mut seen = HashSet::new();
    for attr in &rel.attributes {
        if !is_identifier(&attr.name) {
            return Err(SchemaError::InvalidName(attr.name.clone()));
        }
        if !seen.insert(attr.name.as_str()) {
            return Err(SchemaError::DuplicateAttribute {
                relation: rel.name.clone(),
                attribute: attr.name.clone(),
            });
        }
        if let Some(domain) = &attr.domain {
            let mut values = HashSet::new();
            for v in domain {
                if !values.insert(v.as_str()) {
                    return Err(SchemaError::DuplicateDomainValue {
                        relation: rel.name.clone(),
                        attribute: attr.name.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
    }
    if !rel.attributes.iter().any(|a| a.in_primary_key) {
        return Err(SchemaError::NoPrimaryKey(rel.name.clone()));
    }
    Ok(())
}
