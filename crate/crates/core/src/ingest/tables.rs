//! Relation instances from a directory of `<relation>.csv` files.
//!
//! Comma separated, UTF-8, first line is the header (attribute names in
//! schema order), quoting by doubled quotes. An empty cell or the literal
//! `null` is a null.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::database::{Cell, DataError, RelationInstance, RelationalDatabase};
use crate::schema::{RelationSchema, RelationalDatabaseSchema};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: header {found:?} does not match attributes {expected:?}", path.display())]
    HeaderMismatch {
        path: PathBuf,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: DataError },
}

/// Loads one instance per relation. A missing file yields an empty instance
/// and a warning line.
pub fn load_instances(
    dir: &Path,
    schema: &RelationalDatabaseSchema,
) -> Result<(RelationalDatabase, Vec<String>), LoadError> {
    if !dir.is_dir() {
        return Err(LoadError::Io {
            path: dir.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "data directory not found"),
        });
    }
    let mut warnings = Vec::new();
    let mut instances = Vec::with_capacity(schema.relations().len());
    for rel in schema.relations() {
        let path = dir.join(format!("{}.csv", rel.name));
        if !path.exists() {
            warnings.push(format!(
                "{}: no data file, relation {} is empty",
                path.display(),
                rel.name
            ));
            instances.push(RelationInstance::empty(&rel.name));
            continue;
        }
        let file = File::open(&path).map_err(|source| LoadError::Io {
            path: path.clone(),
            source,
        })?;
        instances.push(read_instance(file, rel).map_err(|e| e.with_path(&path))?);
    }
    match RelationalDatabase::new(schema.clone(), instances) {
        Ok(db) => Ok((db, warnings)),
        Err(source) => {
            let relation = match &source {
                DataError::ArityMismatch { relation, .. }
                | DataError::DomainViolation { relation, .. }
                | DataError::NullPrimaryKey { relation, .. }
                | DataError::DuplicatePrimaryKey { relation, .. }
                | DataError::ReferentialIntegrity { relation, .. } => relation.clone(),
                DataError::UnknownRelation(r) | DataError::MissingInstance(r) | DataError::DuplicateInstance(r) => {
                    r.clone()
                }
            };
            Err(LoadError::Data {
                path: dir.join(format!("{relation}.csv")),
                source,
            })
        }
    }
}

impl LoadError {
    fn with_path(self, p: &Path) -> Self {
        match self {
            Self::Io { source, .. } => Self::Io {
                path: p.to_path_buf(),
                source,
            },
            Self::Csv { source, .. } => Self::Csv {
                path: p.to_path_buf(),
                source,
            },
            Self::HeaderMismatch { expected, found, .. } => Self::HeaderMismatch {
                path: p.to_path_buf(),
                expected,
                found,
            },
            Self::Data { source, .. } => Self::Data {
                path: p.to_path_buf(),
                source,
            },
        }
    }
}

/// Reads a single table for `relation`; per-row checks happen when the
/// instances are assembled into a [`RelationalDatabase`].
pub fn read_instance(reader: impl Read, relation: &RelationSchema) -> Result<RelationInstance, LoadError> {
    let no_path = PathBuf::new;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|source| LoadError::Csv { path: no_path(), source })?
        .clone();
    let found: Vec<String> = headers.iter().map(str::to_string).collect();
    let expected: Vec<String> = relation.attributes.iter().map(|a| a.name.clone()).collect();
    if found != expected {
        return Err(LoadError::HeaderMismatch {
            path: no_path(),
            expected,
            found,
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| LoadError::Csv { path: no_path(), source })?;
        let row: Vec<Cell> = record
            .iter()
            .map(|cell| match cell {
                "" | "null" => None,
                v => Some(v.to_string()),
            })
            .collect();
        rows.push(row);
    }
    Ok(RelationInstance {
        relation: relation.name.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::fixtures::vehicle_normalized;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn loads_vehicle_rows_and_warns_on_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "Vehicle.csv",
            "VehicleID,VehicleClass\nv1,wheeled\nv2,tracked\nv3,tracked\nv4,tracked\nv5,wheeled\nv6,tracked\n",
        );
        write(
            dir.path(),
            "Region.csv",
            "RegionID,TerrainType,ContainingRegion\nr1,off-road,null\nr1_1,\"road\",r1\n",
        );
        let (db, warnings) = load_instances(dir.path(), &vehicle_normalized()).unwrap();
        assert_eq!(db.instance("Vehicle").unwrap().rows.len(), 6);
        assert_eq!(db.instance("Region").unwrap().rows[0][2], None);
        assert_eq!(warnings.len(), 3);
    }

    #[test]
    fn header_only_file_is_empty_instance() {
        let rel = &vehicle_normalized().relations()[0].clone();
        let inst = read_instance("VehicleID,VehicleClass\n".as_bytes(), rel).unwrap();
        assert!(inst.rows.is_empty());
    }

    #[test]
    fn header_mismatch() {
        let rel = &vehicle_normalized().relations()[0].clone();
        assert!(matches!(
            read_instance("VehicleClass,VehicleID\n".as_bytes(), rel),
            Err(LoadError::HeaderMismatch { .. })
        ));
        assert!(matches!(read_instance("".as_bytes(), rel), Err(LoadError::HeaderMismatch { .. })));
    }

    #[test]
    fn duplicate_key_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "Vehicle.csv", "VehicleID,VehicleClass\nv1,wheeled\nv1,tracked\n");
        let err = load_instances(dir.path(), &vehicle_normalized()).unwrap_err();
        match err {
            LoadError::Data {
                path,
                source: DataError::DuplicatePrimaryKey { row: 2, .. },
            } => assert!(path.ends_with("Vehicle.csv")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quoted_cells_keep_commas() {
        let rel = RelationSchema::new(
            "R",
            vec![crate::schema::AttributeDef::new("K").key(), crate::schema::AttributeDef::new("V")],
        );
        let inst = read_instance("K,V\nk1,\"a, \"\"b\"\"\"\n".as_bytes(), &rel).unwrap();
        assert_eq!(inst.rows[0][1].as_deref(), Some("a, \"b\""));
    }
}
