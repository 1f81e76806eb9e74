use std::collections::{BTreeSet, HashSet};

use mebn_rm::config::{MappingConfig, PrefixPolicy};
use mebn_rm::database::{RelationInstance, RelationalDatabase};
use mebn_rm::ingest::{parse_schema_dsl, parse_schema_json, render_schema_dsl, render_schema_json};
use mebn_rm::instances::{enumerate_false_assertions, map_instances};
use mebn_rm::mapper::map_rdbs_to_mtheory;
use mebn_rm::mebn::{emit_script, parse_script, validate_mtheory};
use mebn_rm::normalize::normalize_er;
use mebn_rm::schema::{AttributeDef, RelationKind, RelationSchema, RelationalDatabaseSchema};
use mebn_rm::synth::{generate_schema, SchemaSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEY_NAMES: &[&str] = &["ItemID", "item_id", "Slot", "PatrolDriver", "TimeId", "k", "LocatingTimeID"];

/// Raw, structurally valid schemas: composite keys with plain attributes,
/// key foreign keys, chains and cycles between single-key relations.
fn raw_schema() -> impl Strategy<Value = RelationalDatabaseSchema> {
    (1usize..8)
        .prop_flat_map(|n| {
            let widths = prop::collection::vec(1usize..4, n);
            let picks = prop::collection::vec(prop::collection::vec((any::<u8>(), any::<u8>(), any::<bool>()), 0..4), n);
            let plain = prop::collection::vec(any::<u8>(), n * 8);
            (widths, picks, plain)
        })
        .prop_map(|(widths, picks, plain)| {
            let singles: Vec<usize> = (0..widths.len()).filter(|&i| widths[i] == 1).collect();
            let mut plain = plain.into_iter().cycle();
            let relations = widths
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let mut attrs = Vec::new();
                    for j in 0..w {
                        let choice = plain.next().unwrap();
                        let attr = if choice % 3 == 0 && !singles.is_empty() {
                            AttributeDef::new(format!("K{j}"))
                                .references(format!("R{}", singles[choice as usize % singles.len()]))
                        } else {
                            AttributeDef::new(format!("{}{}", KEY_NAMES[choice as usize % KEY_NAMES.len()], j))
                        };
                        attrs.push(attr.key());
                    }
                    for (j, (a, b, domain)) in picks[i].iter().enumerate() {
                        let mut attr = AttributeDef::new(format!("A{j}"));
                        if a % 2 == 0 && !singles.is_empty() {
                            attr = attr.references(format!("R{}", singles[*b as usize % singles.len()]));
                        } else if *domain {
                            attr = attr.domain(["x", "y-1", "z_2"]);
                        }
                        attrs.push(attr);
                    }
                    RelationSchema::new(format!("R{i}"), attrs)
                })
                .collect();
            RelationalDatabaseSchema::new("Raw", relations).expect("valid by construction")
        })
}

fn normalized_spec() -> impl Strategy<Value = (u64, SchemaSpec)> {
    (any::<u64>(), 0usize..40, 1usize..=4, 0usize..6, any::<bool>()).prop_map(|(seed, n, k, a, shared)| {
        (
            seed,
            SchemaSpec {
                relations: n,
                entity_fraction: 0.4,
                key_width: (1, k),
                attributes: (0, a),
                reference_probability: 0.2,
                domain_probability: 0.3,
                shared_attribute_names: shared,
            },
        )
    })
}

fn auto() -> MappingConfig {
    MappingConfig {
        prefix_policy: PrefixPolicy::Auto,
        ..MappingConfig::default()
    }
}

proptest! {
    #[test]
    fn dsl_and_json_round_trip(s in raw_schema()) {
        prop_assert_eq!(parse_schema_dsl(&render_schema_dsl(&s)).unwrap(), s.clone());
        prop_assert_eq!(parse_schema_json(&render_schema_json(&s)).unwrap(), s);
    }

    #[test]
    fn normalization_is_total_idempotent_and_normal(s in raw_schema()) {
        let cfg = MappingConfig::default();
        let n = normalize_er(&s, &cfg).unwrap();
        prop_assert!(n.check_er_normal_form().is_empty(), "{:?}", n.check_er_normal_form());
        prop_assert_eq!(normalize_er(&n, &cfg).unwrap(), n.clone());
        // original relations keep their names and order
        for (a, b) in s.relations().iter().zip(n.relations()) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert_eq!(a.attributes.len(), b.attributes.len());
        }
        let t = map_rdbs_to_mtheory(&n, &auto()).unwrap();
        prop_assert!(validate_mtheory(&t).is_empty());
    }

    #[test]
    fn sort_is_a_stable_partition((seed, spec) in normalized_spec()) {
        let s = generate_schema(&spec, &mut ChaCha8Rng::seed_from_u64(seed), "S");
        let sorted: Vec<&str> = s.sort_relations().unwrap().iter().map(|r| r.name.as_str()).collect();
        let mut expected: Vec<&str> = s.relations().iter()
            .filter(|r| s.classify_relation(&r.name) == Ok(RelationKind::EntityRelation))
            .map(|r| r.name.as_str()).collect();
        expected.extend(s.relations().iter()
            .filter(|r| s.classify_relation(&r.name) == Ok(RelationKind::RelationshipRelation))
            .map(|r| r.name.as_str()));
        prop_assert_eq!(sorted, expected);
    }

    #[test]
    fn counting_laws_and_script_round_trip((seed, spec) in normalized_spec()) {
        let s = generate_schema(&spec, &mut ChaCha8Rng::seed_from_u64(seed), "S");
        let t = map_rdbs_to_mtheory(&s, &auto()).unwrap();
        let ers: Vec<&RelationSchema> = s.relations().iter()
            .filter(|r| r.attributes.iter().filter(|a| a.in_primary_key).count() == 1
                && r.attributes.iter().all(|a| !a.in_primary_key || a.references.is_none()))
            .collect();
        let non_key = |r: &RelationSchema| r.attributes.iter().filter(|a| !a.in_primary_key).count();
        prop_assert_eq!(t.entities.len(), ers.len());
        let with_frag: Vec<&RelationSchema> = s.relations().iter()
            .filter(|r| !ers.iter().any(|e| e.name == r.name) || non_key(r) > 0)
            .collect();
        prop_assert_eq!(t.mfrags.len(), with_frag.len());
        for f in &t.mfrags {
            let r = s.relation(&f.name).unwrap();
            prop_assert_eq!(f.context_nodes.len(), r.attributes.iter().filter(|a| a.in_primary_key).count());
            prop_assert_eq!(f.resident_nodes.len(), non_key(r).max(1));
        }
        let text = emit_script(&t).unwrap();
        let back = parse_script(&text, s.name()).unwrap();
        prop_assert_eq!(&back, &t.skeleton());
        prop_assert_eq!(emit_script(&back).unwrap(), text);
    }

    #[test]
    fn closed_world_partition(vehicles in 0usize..7, links in prop::collection::vec((0usize..7, 0usize..7), 0..20)) {
        let schema = parse_schema_dsl(
            "S[Vehicle[VehicleID*], Follow[FollowingVehicleID*/Vehicle, LeadingVehicleID*/Vehicle]]"
        ).unwrap();
        let ids: Vec<String> = (0..vehicles).map(|i| format!("v{i}")).collect();
        let present: BTreeSet<(usize, usize)> = links.into_iter()
            .filter(|&(a, b)| a < vehicles && b < vehicles).collect();
        let db = RelationalDatabase::new(schema.clone(), vec![
            RelationInstance { relation: "Vehicle".into(), rows: ids.iter().map(|v| vec![Some(v.clone())]).collect() },
            RelationInstance { relation: "Follow".into(), rows: present.iter()
                .map(|&(a, b)| vec![Some(ids[a].clone()), Some(ids[b].clone())]).collect() },
        ]).unwrap();
        let cfg = MappingConfig { closed_world: true, ..MappingConfig::default() };
        let t = map_rdbs_to_mtheory(&schema, &cfg).unwrap();
        let trues = map_instances(&db, &t, &cfg).unwrap();
        let falses = enumerate_false_assertions(&db, &t, &cfg).unwrap();
        let key = |a: &mebn_rm::instances::Assertion| (a.arguments[0].clone(), a.arguments[1].clone());
        let t_set: HashSet<_> = trues.iter().map(key).collect();
        let f_set: HashSet<_> = falses.iter().map(key).collect();
        prop_assert!(trues.iter().all(|a| a.value == "true"));
        prop_assert!(falses.iter().all(|a| a.value == "false"));
        prop_assert!(t_set.is_disjoint(&f_set));
        let mut full = HashSet::new();
        for a in &ids { for b in &ids { full.insert((a.clone(), b.clone())); } }
        let union: HashSet<_> = t_set.union(&f_set).cloned().collect();
        prop_assert_eq!(union, full);
        prop_assert_eq!(trues.len() + falses.len(), vehicles * vehicles);
    }
}
