//! JSON form of a schema, for tools that already hold the schema as data.
//!
//! ```json
//! {"name": "S", "relations": [
//!   {"name": "Vehicle", "attributes": [
//!     {"name": "VehicleID", "primary_key": true},
//!     {"name": "VehicleClass", "domain": ["wheeled", "tracked"]}]}]}
//! ```

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::cursor::Pos;
use crate::schema::{AttributeDef, RelationSchema, RelationalDatabaseSchema};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSchema {
    name: String,
    #[serde(default)]
    relations: Vec<JsonRelation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRelation {
    name: String,
    attributes: Vec<JsonAttribute>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonAttribute {
    name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    primary_key: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    references: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sql_type: Option<String>,
}

pub fn parse_schema_json(text: &str) -> Result<RelationalDatabaseSchema, IngestError> {
    let raw: JsonSchema = serde_json::from_str(text).map_err(|e| IngestError::Syntax {
        pos: Pos {
            line: e.line().max(1),
            col: e.column().max(1),
        },
        expected: "schema JSON".into(),
        found: e.to_string(),
    })?;
    let relations = raw
        .relations
        .into_iter()
        .map(|r| {
            RelationSchema::new(
                r.name,
                r.attributes
                    .into_iter()
                    .map(|a| AttributeDef {
                        name: a.name,
                        domain: a.domain,
                        in_primary_key: a.primary_key,
                        references: a.references,
                        sql_type: a.sql_type,
                    })
                    .collect(),
            )
        })
        .collect();
    RelationalDatabaseSchema::new(raw.name, relations).map_err(|source| IngestError::Schema {
        pos: Pos { line: 1, col: 1 },
        source,
    })
}

pub fn render_schema_json(schema: &RelationalDatabaseSchema) -> String {
    let raw = JsonSchema {
        name: schema.name().to_string(),
        relations: schema
            .relations()
            .iter()
            .map(|r| JsonRelation {
                name: r.name.clone(),
                attributes: r
                    .attributes
                    .iter()
                    .map(|a| JsonAttribute {
                        name: a.name.clone(),
                        primary_key: a.in_primary_key,
                        references: a.references.clone(),
                        domain: a.domain.clone(),
                        sql_type: a.sql_type.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("schema serializes") + "\n"
}
