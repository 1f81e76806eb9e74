//! Element counts of a schema and its mapped theory.

use std::fmt;
use std::time::Duration;

use crate::mebn::MTheory;
use crate::schema::{RelationKind, RelationalDatabaseSchema};

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub relations: usize,
    pub entity_relations: usize,
    pub relationship_relations: usize,
    pub attributes: usize,
    pub primary_key_attributes: usize,
    pub entities: usize,
    pub mfrags: usize,
    pub context_nodes: usize,
    pub resident_nodes: usize,
    pub mapping_seconds: f64,
}

impl StatsReport {
    pub fn new(schema: &RelationalDatabaseSchema, theory: &MTheory, mapping_time: Duration) -> Self {
        let kinds: Vec<RelationKind> = schema.relations().iter().map(|r| schema.kind_of(r)).collect();
        let count = |k| kinds.iter().filter(|&&x| x == k).count();
        Self {
            relations: schema.relations().len(),
            entity_relations: count(RelationKind::EntityRelation),
            relationship_relations: count(RelationKind::RelationshipRelation),
            attributes: schema.relations().iter().map(|r| r.attributes.len()).sum(),
            primary_key_attributes: schema.relations().iter().map(|r| r.key_width()).sum(),
            entities: theory.entities.len(),
            mfrags: theory.mfrags.len(),
            context_nodes: theory.context_node_count(),
            resident_nodes: theory.resident_node_count(),
            mapping_seconds: mapping_time.as_secs_f64(),
        }
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "relations={}", self.relations)?;
        writeln!(f, "entity_relations={}", self.entity_relations)?;
        writeln!(f, "relationship_relations={}", self.relationship_relations)?;
        writeln!(f, "attributes={}", self.attributes)?;
        writeln!(f, "primary_key_attributes={}", self.primary_key_attributes)?;
        writeln!(f, "entities={}", self.entities)?;
        writeln!(f, "mfrags={}", self.mfrags)?;
        writeln!(f, "context_nodes={}", self.context_nodes)?;
        writeln!(f, "resident_nodes={}", self.resident_nodes)?;
        writeln!(f, "mapping_seconds={:.6}", self.mapping_seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MappingConfig;
    use crate::mapper::map_rdbs_to_mtheory;
    use crate::schema::fixtures::vehicle_normalized;

    #[test]
    fn vehicle_counts() {
        let s = vehicle_normalized();
        let t = map_rdbs_to_mtheory(&s, &MappingConfig::default()).unwrap();
        let r = StatsReport::new(&s, &t, Duration::from_millis(2));
        assert_eq!(
            (r.relations, r.entity_relations, r.relationship_relations),
            (5, 3, 2)
        );
        assert_eq!((r.attributes, r.primary_key_attributes), (11, 7));
        assert_eq!((r.entities, r.mfrags, r.context_nodes, r.resident_nodes), (3, 4, 6, 5));
        let text = r.to_string();
        assert!(text.starts_with("relations=5\n"));
        assert!(text.ends_with("mapping_seconds=0.002000\n"));
    }
}
