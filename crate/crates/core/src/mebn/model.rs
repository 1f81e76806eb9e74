use std::collections::BTreeSet;
use std::fmt;

/// An entity type such as `VEHICLE`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityType(pub String);

impl EntityType {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A typed placeholder argument of an MFrag's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinaryVariable {
    pub name: String,
    pub entity: String,
}

impl OrdinaryVariable {
    pub fn new(name: impl Into<String>, entity: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entity: entity.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextNode {
    /// `IsA(ov, ENTITY)`, the only context node the mapping produces.
    IsA(OrdinaryVariable),
    /// Any other context expression, kept as whitespace-normalized text.
    Formula(String),
}

/// Values a function node ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PossibleValues {
    /// The attribute's declared domain.
    Domain(Vec<String>),
    /// Instances of an entity type, enumerated only when data is present.
    EntityInstances(String),
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// Boolean node; its possible values are exactly `true` and `false`.
    Predicate,
    Function(PossibleValues),
    /// Kind not known, e.g. a node read back from a script.
    Unspecified,
}

/// A reference to a random variable by name, as used by `IP` and `RP` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRef {
    pub name: String,
    pub arguments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidentNode {
    pub name: String,
    pub arguments: Vec<String>,
    pub kind: NodeKind,
    pub inputs: Vec<NodeRef>,
    pub parents: Vec<NodeRef>,
    /// Opaque `L` payloads.
    pub distributions: Vec<String>,
}

impl ResidentNode {
    pub fn new(name: impl Into<String>, arguments: Vec<String>, kind: NodeKind) -> Self {
        Self {
            name: name.into(),
            arguments,
            kind,
            inputs: Vec::new(),
            parents: Vec::new(),
            distributions: Vec::new(),
        }
    }

    pub fn is_predicate(&self) -> bool {
        self.kind == NodeKind::Predicate
    }

    /// `None` when the value set is open or not known.
    pub fn possible_values(&self) -> Option<Vec<String>> {
        match &self.kind {
            NodeKind::Predicate => Some(vec!["true".into(), "false".into()]),
            NodeKind::Function(PossibleValues::Domain(d)) => Some(d.clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MFrag {
    pub name: String,
    pub context_nodes: Vec<ContextNode>,
    pub resident_nodes: Vec<ResidentNode>,
    pub input_refs: Vec<NodeRef>,
    pub parent_refs: Vec<NodeRef>,
    pub distributions: Vec<String>,
}

impl MFrag {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            context_nodes: Vec::new(),
            resident_nodes: Vec::new(),
            input_refs: Vec::new(),
            parent_refs: Vec::new(),
            distributions: Vec::new(),
        }
    }

    /// Ordinary variables declared by `IsA` context nodes, in order.
    pub fn ordinary_variables(&self) -> impl Iterator<Item = &OrdinaryVariable> {
        self.context_nodes.iter().filter_map(|c| match c {
            ContextNode::IsA(ov) => Some(ov),
            ContextNode::Formula(_) => None,
        })
    }

    pub fn resident(&self, name: &str) -> Option<&ResidentNode> {
        self.resident_nodes.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MTheory {
    pub name: String,
    pub entities: BTreeSet<EntityType>,
    pub mfrags: Vec<MFrag>,
}

impl MTheory {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entities: BTreeSet::new(),
            mfrags: Vec::new(),
        }
    }

    pub fn mfrag(&self, name: &str) -> Option<&MFrag> {
        self.mfrags.iter().find(|f| f.name == name)
    }

    pub fn context_node_count(&self) -> usize {
        self.mfrags.iter().map(|f| f.context_nodes.len()).sum()
    }

    pub fn resident_node_count(&self) -> usize {
        self.mfrags.iter().map(|f| f.resident_nodes.len()).sum()
    }

    /// The part of the theory a script can carry: node kinds are dropped and
    /// only entity types named by some `IsA` node are kept.
    pub fn skeleton(&self) -> MTheory {
        let mut out = self.clone();
        out.entities = entities_in_use(&self.mfrags);
        for f in &mut out.mfrags {
            for r in &mut f.resident_nodes {
                r.kind = NodeKind::Unspecified;
            }
        }
        out
    }
}

pub(crate) fn entities_in_use(mfrags: &[MFrag]) -> BTreeSet<EntityType> {
    mfrags
        .iter()
        .flat_map(MFrag::ordinary_variables)
        .map(|ov| EntityType(ov.entity.clone()))
        .collect()
}
