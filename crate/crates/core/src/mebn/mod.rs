//! MEBN side: theories, MFrags and nodes, plus the script format.

mod model;
mod script;
mod validate;

pub use model::{
    ContextNode, EntityType, MFrag, MTheory, NodeKind, NodeRef, OrdinaryVariable, PossibleValues, ResidentNode,
};
pub use script::{emit_script, parse_script, EmitError, ScriptSyntaxError};
pub use validate::{validate_mtheory, MTheoryViolation};
