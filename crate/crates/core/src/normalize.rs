//! Entity-Relationship normalization: repairs a structurally valid schema so
//! that every relation is an entity or a relationship relation.
//!
//! The repair runs in three passes:
//!
//! 1. Cycles of single-key foreign keys (`A[a*/B]`, `B[b*/A]`, or a
//!    self-referencing key) are grounded by turning the key of the first
//!    relation on the cycle, in schema order, into an original key.
//! 2. Every non-foreign attribute of a composite primary key is rewritten as a
//!    foreign key to an entity relation named after it, synthesizing
//!    `Entity[EntityID*]` at the end of the schema when no relation of that
//!    name exists.
//! 3. Foreign keys aimed at a single-key relation that is not itself an
//!    entity relation are redirected along the key chain to the entity
//!    relation it grounds in.

use std::collections::HashMap;

use crate::config::MappingConfig;
use crate::naming::{derive_entity_name, is_identifier};
use crate::schema::{AttributeDef, RelationSchema, RelationalDatabaseSchema, SchemaError};

pub fn normalize_er(
    schema: &RelationalDatabaseSchema,
    config: &MappingConfig,
) -> Result<RelationalDatabaseSchema, SchemaError> {
    let mut relations = schema.relations().to_vec();
    let mut index: HashMap<String, usize> = relations
        .iter()
        .enumerate()
        .map(|(i, r)| (r.name.clone(), i))
        .collect();

    ground_key_cycles(&mut relations, &index);

    let mut folded: HashMap<String, usize> = HashMap::new();
    for (i, r) in relations.iter().enumerate() {
        folded.entry(r.name.to_uppercase()).or_insert(i);
    }

    let original_len = relations.len();
    for i in 0..original_len {
        if relations[i].key_width() < 2 {
            continue;
        }
        for a in 0..relations[i].attributes.len() {
            let attr = &relations[i].attributes[a];
            if !attr.in_primary_key || attr.references.is_some() {
                continue;
            }
            let mut entity = entity_for(&relations[i].name, &attr.name, config);
            // Entity types are named by the uppercased relation name, so a
            // relation differing only in case already stands for this entity.
            match folded.get(&entity.to_uppercase()) {
                Some(&e) if is_entity(&relations[e]) => entity = relations[e].name.clone(),
                Some(_) => return Err(SchemaError::NameCollision(entity)),
                None => {
                    index.insert(entity.clone(), relations.len());
                    folded.insert(entity.to_uppercase(), relations.len());
                    relations.push(RelationSchema::new(
                        entity.clone(),
                        vec![AttributeDef::new(format!("{entity}ID")).key()],
                    ));
                }
            }
            relations[i].attributes[a].references = Some(entity);
        }
    }

    for i in 0..relations.len() {
        for a in 0..relations[i].attributes.len() {
            let Some(target) = relations[i].attributes[a].references.clone() else {
                continue;
            };
            let grounded = ground(&relations, &index, &target);
            if grounded != target {
                relations[i].attributes[a].references = Some(grounded);
            }
        }
    }

    RelationalDatabaseSchema::new(schema.name(), relations)
}

fn entity_for(relation: &str, attribute: &str, config: &MappingConfig) -> String {
    if let Some(alias) = config.entity_alias_for(relation, attribute) {
        return alias.to_string();
    }
    let derived = derive_entity_name(attribute);
    if is_identifier(&derived) {
        derived
    } else {
        attribute.to_string()
    }
}

fn is_entity(rel: &RelationSchema) -> bool {
    let mut key = rel.primary_key();
    matches!((key.next(), key.next()), (Some(a), None) if a.references.is_none())
}

/// Target of a relation's key when the key is a single foreign key.
fn key_target<'a>(rel: &'a RelationSchema) -> Option<&'a str> {
    let mut key = rel.primary_key();
    match (key.next(), key.next()) {
        (Some(a), None) => a.references.as_deref(),
        _ => None,
    }
}

fn ground_key_cycles(relations: &mut [RelationSchema], index: &HashMap<String, usize>) {
    const FRESH: u8 = 0;
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![FRESH; relations.len()];
    for start in 0..relations.len() {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                DONE => break,
                ON_PATH => {
                    let at = path.iter().position(|&p| p == i).expect("node on path");
                    let first: usize = *path[at..].iter().min().expect("non-empty cycle");
                    let rel: &mut RelationSchema = &mut relations[first];
                    if let Some(k) = rel.attributes.iter_mut().find(|a| a.in_primary_key) {
                        k.references = None;
                    }
                    break;
                }
                _ => {
                    state[i] = ON_PATH;
                    path.push(i);
                    cur = key_target(&relations[i]).and_then(|t| index.get(t).copied());
                }
            }
        }
        for p in path {
            state[p] = DONE;
        }
    }
}

fn ground(relations: &[RelationSchema], index: &HashMap<String, usize>, target: &str) -> String {
    let mut cur = target;
    // bounded: key chains are acyclic after ground_key_cycles
    for _ in 0..=relations.len() {
        let rel = &relations[index[cur]];
        match key_target(rel) {
            Some(next) if !is_entity(rel) => cur = next,
            _ => break,
        }
    }
    cur.to_string()
}
