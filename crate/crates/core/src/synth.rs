//! Seeded generator of random normalized schemas.
//!
//! Entity relations come first, relationship relations after them, so every
//! key foreign key points backwards.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::schema::{AttributeDef, RelationSchema, RelationalDatabaseSchema};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaSpec {
    pub relations: usize,
    /// Share of entity relations; at least one is generated when
    /// `relations > 0`.
    pub entity_fraction: f64,
    /// Key width of relationship relations, drawn from this inclusive range.
    pub key_width: (usize, usize),
    /// Non-key attributes per relation, drawn from this inclusive range.
    pub attributes: (usize, usize),
    /// Chance that a non-key attribute is a foreign key to an entity relation.
    pub reference_probability: f64,
    /// Chance that a plain non-key attribute gets a declared domain.
    pub domain_probability: f64,
    /// Reuse the same non-key attribute names in every relation, so that
    /// unprefixed node names collide.
    pub shared_attribute_names: bool,
}

impl Default for SchemaSpec {
    fn default() -> Self {
        Self {
            relations: 10,
            entity_fraction: 0.5,
            key_width: (2, 2),
            attributes: (1, 5),
            reference_probability: 0.1,
            domain_probability: 0.3,
            shared_attribute_names: false,
        }
    }
}

pub fn generate_schema(spec: &SchemaSpec, rng: &mut impl Rng, name: &str) -> RelationalDatabaseSchema {
    let n = spec.relations;
    let entities = if n == 0 {
        0
    } else {
        ((n as f64 * spec.entity_fraction).round() as usize).clamp(1, n)
    };
    let entity_names: Vec<String> = (0..entities).map(|i| format!("E{i}")).collect();
    let mut relations = Vec::with_capacity(n);

    let non_key = |rng: &mut dyn rand::RngCore, owner: &str| -> Vec<AttributeDef> {
        let count = rng.gen_range(spec.attributes.0..=spec.attributes.1);
        (0..count)
            .map(|j| {
                let name = if spec.shared_attribute_names {
                    format!("A{j}")
                } else {
                    format!("{owner}_A{j}")
                };
                let attr = AttributeDef::new(name);
                if rng.gen_bool(spec.reference_probability) {
                    attr.references(entity_names.choose(rng).expect("an entity exists").clone())
                } else if rng.gen_bool(spec.domain_probability) {
                    let size = rng.gen_range(2..=4);
                    attr.domain((0..size).map(|v| format!("v{v}")))
                } else {
                    attr
                }
            })
            .collect()
    };

    for e in &entity_names {
        let mut attrs = vec![AttributeDef::new(format!("{e}ID")).key()];
        attrs.extend(non_key(rng, e));
        relations.push(RelationSchema::new(e.clone(), attrs));
    }
    for i in 0..n - entities {
        let name = format!("R{i}");
        let width = rng.gen_range(spec.key_width.0.max(1)..=spec.key_width.1.max(1));
        let mut attrs: Vec<AttributeDef> = (0..width)
            .map(|j| {
                AttributeDef::new(format!("K{j}"))
                    .key()
                    .references(entity_names.choose(rng).expect("an entity exists").clone())
            })
            .collect();
        attrs.extend(non_key(rng, &name));
        relations.push(RelationSchema::new(name, attrs));
    }
    RelationalDatabaseSchema::new(name, relations).expect("generated schemas are well formed")
}
