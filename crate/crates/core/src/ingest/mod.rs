//! Schema and instance ingestion: the bracket DSL (`.rdbs`), a SQL DDL subset
//! (`.sql`), a JSON structured form (`.json`) and per-relation CSV tables.

mod ddl;
mod dsl;
mod structured;
mod tables;

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::cursor::Pos;
use crate::schema::{RelationalDatabaseSchema, SchemaError};

pub use ddl::parse_sql_ddl;
pub use dsl::{parse_schema_dsl, render_schema_dsl};
pub use structured::{parse_schema_json, render_schema_json};
pub use tables::{load_instances, read_instance, LoadError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("{pos}: syntax error: expected {expected}, found {found}")]
    Syntax {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: unsupported statement: {what}")]
    UnsupportedStatement { pos: Pos, what: String },
    #[error("{pos}: dangling reference: {what}")]
    DanglingReference { pos: Pos, what: String },
    #[error("{pos}: {source}")]
    Schema { pos: Pos, source: SchemaError },
}

impl IngestError {
    pub fn pos(&self) -> Pos {
        match self {
            Self::Syntax { pos, .. }
            | Self::UnsupportedStatement { pos, .. }
            | Self::DanglingReference { pos, .. }
            | Self::Schema { pos, .. } => *pos,
        }
    }

    pub(crate) fn syntax(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Self::Syntax {
            pos,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaFormat {
    Dsl,
    Ddl,
    Structured,
}

impl SchemaFormat {
    /// Format implied by a file extension. Content is never sniffed.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "rdbs" => Some(Self::Dsl),
            "sql" => Some(Self::Ddl),
            "json" => Some(Self::Structured),
            _ => None,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "dsl" | "rdbs" => Some(Self::Dsl),
            "ddl" | "sql" => Some(Self::Ddl),
            "json" | "structured" => Some(Self::Structured),
            _ => None,
        }
    }
}

impl fmt::Display for SchemaFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dsl => "dsl",
            Self::Ddl => "ddl",
            Self::Structured => "json",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SchemaSource {
    pub format: SchemaFormat,
    pub text: String,
    /// File path or `<stdin>`.
    pub origin: String,
}

impl SchemaSource {
    /// Parses the source. DDL carries no schema name, so the file stem of
    /// `origin` (or `schema` for stdin) names the result.
    pub fn parse(&self) -> Result<RelationalDatabaseSchema, IngestError> {
        match self.format {
            SchemaFormat::Dsl => parse_schema_dsl(&self.text),
            SchemaFormat::Ddl => parse_sql_ddl(&self.text, &self.ddl_schema_name()),
            SchemaFormat::Structured => parse_schema_json(&self.text),
        }
    }

    fn ddl_schema_name(&self) -> String {
        let stem = Path::new(&self.origin)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("schema");
        let cleaned: String = stem
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
            .collect();
        if crate::naming::is_identifier(&cleaned) {
            cleaned
        } else {
            format!("_{cleaned}")
        }
    }
}

/// Maps a schema validation error to the position of the item it names.
pub(crate) fn locate(
    err: SchemaError,
    spans: &[(String, Option<String>, Pos)],
    fallback: Pos,
) -> IngestError {
    let pos = {
        let (rel, attr) = err.subject();
        let matches = |(r, a, _): &&(String, Option<String>, Pos)| {
            Some(r.as_str()) == rel && a.as_deref() == attr
        };
        let prefer_last = matches!(
            err,
            SchemaError::DuplicateRelation(_) | SchemaError::DuplicateAttribute { .. }
        );
        let hit = if prefer_last {
            spans.iter().rev().find(matches)
        } else {
            spans.iter().find(matches)
        };
        hit.map(|(_, _, p)| *p).unwrap_or(fallback)
    };
    IngestError::Schema { pos, source: err }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_from_extension_only() {
        assert_eq!(SchemaFormat::from_path(Path::new("a/b.rdbs")), Some(SchemaFormat::Dsl));
        assert_eq!(SchemaFormat::from_path(Path::new("b.sql")), Some(SchemaFormat::Ddl));
        assert_eq!(SchemaFormat::from_path(Path::new("b.json")), Some(SchemaFormat::Structured));
        assert_eq!(SchemaFormat::from_path(Path::new("b.txt")), None);
        assert_eq!(SchemaFormat::from_path(Path::new("b")), None);
    }

    #[test]
    fn ddl_source_named_after_file() {
        let src = SchemaSource {
            format: SchemaFormat::Ddl,
            text: "CREATE TABLE T (a INT PRIMARY KEY);".into(),
            origin: "dir/my-db.sql".into(),
        };
        assert_eq!(src.parse().unwrap().name(), "my_db");
    }
}
