//! Structural checks on an MTheory.
//!
//! Only the conditions a partial theory can violate are checked. The mapping
//! introduces no dependency edges, so acyclicity, bounded causal depth and
//! recursive specification hold vacuously and are not examined here.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::model::{ContextNode, EntityType, MTheory};
use crate::naming::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MTheoryViolation {
    /// A resident node is defined in more than one place.
    UniqueHome { node: String, mfrags: Vec<String> },
    DuplicateMFrag(String),
    UndeclaredVariable {
        mfrag: String,
        node: String,
        variable: String,
    },
    /// The same ordinary variable is typed by more than one `IsA` node.
    ConflictingVariable { mfrag: String, variable: String },
    NonUppercaseEntity(String),
    UnknownEntity { mfrag: String, entity: String },
    ArityMismatch { node: String, arities: Vec<usize> },
    InvalidName(String),
}

impl fmt::Display for MTheoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniqueHome { node, mfrags } => {
                write!(f, "resident node {node} is defined in several MFrags: {}", mfrags.join(", "))
            }
            Self::DuplicateMFrag(n) => write!(f, "duplicate MFrag {n}"),
            Self::UndeclaredVariable { mfrag, node, variable } => {
                write!(f, "{mfrag}: {node} uses undeclared ordinary variable {variable}")
            }
            Self::ConflictingVariable { mfrag, variable } => {
                write!(f, "{mfrag}: ordinary variable {variable} has more than one IsA node")
            }
            Self::NonUppercaseEntity(e) => write!(f, "entity type {e} is not uppercase"),
            Self::UnknownEntity { mfrag, entity } => write!(f, "{mfrag}: unknown entity type {entity}"),
            Self::ArityMismatch { node, arities } => {
                write!(f, "{node} is used with different arities {arities:?}")
            }
            Self::InvalidName(n) => write!(f, "`{n}` is not a valid identifier"),
        }
    }
}

pub fn validate_mtheory(theory: &MTheory) -> Vec<MTheoryViolation> {
    let mut out = Vec::new();
    let bad_name = |n: &str, out: &mut Vec<MTheoryViolation>| {
        if !is_identifier(n) {
            out.push(MTheoryViolation::InvalidName(n.to_string()));
        }
    };

    for e in &theory.entities {
        bad_name(e.as_str(), &mut out);
        if e.as_str().chars().any(char::is_lowercase) {
            out.push(MTheoryViolation::NonUppercaseEntity(e.0.clone()));
        }
    }

    let mut homes: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut arities: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut mfrag_names = HashSet::new();

    for f in &theory.mfrags {
        bad_name(&f.name, &mut out);
        if !mfrag_names.insert(f.name.as_str()) {
            out.push(MTheoryViolation::DuplicateMFrag(f.name.clone()));
        }
        let mut declared: HashMap<&str, &str> = HashMap::new();
        for c in &f.context_nodes {
            let ContextNode::IsA(ov) = c else { continue };
            bad_name(&ov.name, &mut out);
            if declared.insert(&ov.name, &ov.entity).is_some() {
                out.push(MTheoryViolation::ConflictingVariable {
                    mfrag: f.name.clone(),
                    variable: ov.name.clone(),
                });
            }
            if !theory.entities.contains(&EntityType(ov.entity.clone())) {
                out.push(MTheoryViolation::UnknownEntity {
                    mfrag: f.name.clone(),
                    entity: ov.entity.clone(),
                });
            }
        }

        let check_args = |node: &str, args: &[String], out: &mut Vec<MTheoryViolation>| {
            for a in args {
                if !declared.contains_key(a.as_str()) {
                    out.push(MTheoryViolation::UndeclaredVariable {
                        mfrag: f.name.clone(),
                        node: node.to_string(),
                        variable: a.clone(),
                    });
                }
            }
        };
        let refs = f
            .resident_nodes
            .iter()
            .flat_map(|r| r.inputs.iter().chain(&r.parents))
            .chain(&f.input_refs)
            .chain(&f.parent_refs);
        for r in refs {
            bad_name(&r.name, &mut out);
            check_args(&r.name, &r.arguments, &mut out);
            arities.entry(&r.name).or_default().push(r.arguments.len());
        }
        for r in &f.resident_nodes {
            bad_name(&r.name, &mut out);
            check_args(&r.name, &r.arguments, &mut out);
            homes.entry(&r.name).or_default().push(&f.name);
            arities.entry(&r.name).or_default().push(r.arguments.len());
        }
    }

    for (node, mfrags) in homes {
        if mfrags.len() > 1 {
            out.push(MTheoryViolation::UniqueHome {
                node: node.to_string(),
                mfrags: mfrags.into_iter().map(str::to_string).collect(),
            });
        }
    }
    for (node, mut a) in arities {
        a.sort_unstable();
        a.dedup();
        if a.len() > 1 {
            out.push(MTheoryViolation::ArityMismatch {
                node: node.to_string(),
                arities: a,
            });
        }
    }
    out
}
