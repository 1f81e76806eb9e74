//! Relation instances and databases.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::schema::RelationalDatabaseSchema;

/// A cell value; `None` is SQL null.
pub type Cell = Option<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub relation: String,
    /// Tuples aligned positionally with the relation's attribute list.
    pub rows: Vec<Vec<Cell>>,
}

impl RelationInstance {
    pub fn empty(relation: impl Into<String>) -> Self {
        Self {
            relation: relation.into(),
            rows: Vec::new(),
        }
    }
}

/// Rows are numbered from 1 in error messages.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("no relation `{0}` in schema")]
    UnknownRelation(String),
    #[error("no instance supplied for relation `{0}`")]
    MissingInstance(String),
    #[error("duplicate instance for relation `{0}`")]
    DuplicateInstance(String),
    #[error("{relation} row {row}: expected {expected} cells, found {found}")]
    ArityMismatch {
        relation: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{relation} row {row}: `{value}` is not in the domain of {attribute}")]
    DomainViolation {
        relation: String,
        row: usize,
        attribute: String,
        value: String,
    },
    #[error("{relation} row {row}: primary key attribute {attribute} is null")]
    NullPrimaryKey {
        relation: String,
        row: usize,
        attribute: String,
    },
    #[error("{relation} row {row}: duplicate primary key ({key})")]
    DuplicatePrimaryKey {
        relation: String,
        row: usize,
        key: String,
    },
    #[error("{relation} row {row}: {attribute} = `{value}` has no matching key in {target}")]
    ReferentialIntegrity {
        relation: String,
        row: usize,
        attribute: String,
        value: String,
        target: String,
    },
}

/// A schema together with one instance per relation, in schema order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalDatabase {
    schema: RelationalDatabaseSchema,
    instances: Vec<RelationInstance>,
}

impl RelationalDatabase {
    /// Checks cell arity, declared domains, non-null unique primary keys and
    /// referential integrity of every foreign-key cell.
    pub fn new(
        schema: RelationalDatabaseSchema,
        instances: Vec<RelationInstance>,
    ) -> Result<Self, DataError> {
        let mut by_name: HashMap<String, RelationInstance> = HashMap::new();
        for inst in instances {
            if schema.relation(&inst.relation).is_none() {
                return Err(DataError::UnknownRelation(inst.relation));
            }
            let name = inst.relation.clone();
            if by_name.insert(name.clone(), inst).is_some() {
                return Err(DataError::DuplicateInstance(name));
            }
        }
        let mut ordered = Vec::with_capacity(schema.relations().len());
        for rel in schema.relations() {
            let inst = by_name
                .remove(&rel.name)
                .ok_or_else(|| DataError::MissingInstance(rel.name.clone()))?;
            check_instance(rel, &inst)?;
            ordered.push(inst);
        }
        let db = Self {
            schema,
            instances: ordered,
        };
        db.check_references()?;
        Ok(db)
    }

    pub fn schema(&self) -> &RelationalDatabaseSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[RelationInstance] {
        &self.instances
    }

    pub fn instance(&self, relation: &str) -> Option<&RelationInstance> {
        self.instances.iter().find(|i| i.relation == relation)
    }

    /// Primary-key values of a single-key relation, in row order.
    pub fn key_values(&self, relation: &str) -> Option<Vec<&str>> {
        let rel = self.schema.relation(relation)?;
        let mut keys = rel.attributes.iter().enumerate().filter(|(_, a)| a.in_primary_key);
        let (col, _) = keys.next()?;
        if keys.next().is_some() {
            return None;
        }
        let inst = self.instance(relation)?;
        Some(inst.rows.iter().filter_map(|r| r[col].as_deref()).collect())
    }

    fn check_references(&self) -> Result<(), DataError> {
        let mut key_sets: HashMap<&str, HashSet<&str>> = HashMap::new();
        for (rel, inst) in self.schema.relations().iter().zip(&self.instances) {
            for (col, attr) in rel.attributes.iter().enumerate() {
                let Some(target) = attr.references.as_deref() else { continue };
                if !key_sets.contains_key(target) {
                    let keys = self.key_values(target).unwrap_or_default();
                    key_sets.insert(target, keys.into_iter().collect());
                }
                let keys = &key_sets[target];
                for (r, row) in inst.rows.iter().enumerate() {
                    if let Some(v) = &row[col] {
                        if !keys.contains(v.as_str()) {
                            return Err(DataError::ReferentialIntegrity {
                                relation: rel.name.clone(),
                                row: r + 1,
                                attribute: attr.name.clone(),
                                value: v.clone(),
                                target: target.to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_instance(rel: &crate::schema::RelationSchema, inst: &RelationInstance) -> Result<(), DataError> {
    let key_cols: Vec<usize> = rel
        .attributes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.in_primary_key)
        .map(|(i, _)| i)
        .collect();
    let mut seen = HashSet::new();
    for (r, row) in inst.rows.iter().enumerate() {
        let row_no = r + 1;
        if row.len() != rel.attributes.len() {
            return Err(DataError::ArityMismatch {
                relation: rel.name.clone(),
                row: row_no,
                expected: rel.attributes.len(),
                found: row.len(),
            });
        }
        for (attr, cell) in rel.attributes.iter().zip(row) {
            match cell {
                None if attr.in_primary_key => {
                    return Err(DataError::NullPrimaryKey {
                        relation: rel.name.clone(),
                        row: row_no,
                        attribute: attr.name.clone(),
                    })
                }
                Some(v) => {
                    if let Some(domain) = &attr.domain {
                        if !domain.iter().any(|d| d == v) {
                            return Err(DataError::DomainViolation {
                                relation: rel.name.clone(),
                                row: row_no,
                                attribute: attr.name.clone(),
                                value: v.clone(),
                            });
                        }
                    }
                }
                None => {}
            }
        }
        let key: Vec<&str> = key_cols.iter().filter_map(|&c| row[c].as_deref()).collect();
        if !seen.insert(key.clone()) {
            return Err(DataError::DuplicatePrimaryKey {
                relation: rel.name.clone(),
                row: row_no,
                key: key.join(", "),
            });
        }
    }
    Ok(())
}
