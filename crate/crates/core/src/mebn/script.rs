//! The bracketed MTheory script: `[F: …]` blocks holding `C`, `R`, `IP`,
//! `RP` and `L` nodes.

use std::fmt::Write as _;

use thiserror::Error;

use super::model::{
    entities_in_use, ContextNode, MFrag, MTheory, NodeKind, NodeRef, OrdinaryVariable, ResidentNode,
};
use super::validate::{validate_mtheory, MTheoryViolation};
use crate::cursor::{Cursor, Pos};

const INDENT: &str = "    ";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("theory violates its invariants: {}", list(.0))]
    InvariantViolation(Vec<MTheoryViolation>),
    #[error("{0:?} cannot be written as script text")]
    Unrepresentable(String),
}

fn list(v: &[MTheoryViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{pos}: expected {expected}, found {found}")]
pub struct ScriptSyntaxError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

/// Writes the canonical script. Equal theories give byte-identical text.
pub fn emit_script(theory: &MTheory) -> Result<String, EmitError> {
    let violations = validate_mtheory(theory);
    if !violations.is_empty() {
        return Err(EmitError::InvariantViolation(violations));
    }
    let mut out = String::new();
    for f in &theory.mfrags {
        writeln!(out, "[F: {}", f.name).unwrap();
        for c in &f.context_nodes {
            match c {
                ContextNode::IsA(ov) => writeln!(out, "{INDENT}[C: IsA({}, {})]", ov.name, ov.entity).unwrap(),
                ContextNode::Formula(text) => {
                    if normalize_formula(text) != *text || text.is_empty() || looks_like_isa(text) || !balanced(text)
                    {
                        return Err(EmitError::Unrepresentable(text.clone()));
                    }
                    writeln!(out, "{INDENT}[C: {text}]").unwrap();
                }
            }
        }
        for r in &f.resident_nodes {
            let head = format!("{INDENT}[R: {}({})", r.name, r.arguments.join(", "));
            if r.inputs.is_empty() && r.parents.is_empty() && r.distributions.is_empty() {
                writeln!(out, "{head}]").unwrap();
            } else {
                writeln!(out, "{head}").unwrap();
                let inner = format!("{INDENT}{INDENT}");
                emit_children(&mut out, &inner, &r.inputs, &r.parents, &r.distributions)?;
                writeln!(out, "{INDENT}]").unwrap();
            }
        }
        emit_children(&mut out, INDENT, &f.input_refs, &f.parent_refs, &f.distributions)?;
        out.push_str("]\n");
    }
    Ok(out)
}

fn emit_children(
    out: &mut String,
    indent: &str,
    inputs: &[NodeRef],
    parents: &[NodeRef],
    distributions: &[String],
) -> Result<(), EmitError> {
    for (marker, refs) in [("IP", inputs), ("RP", parents)] {
        for r in refs {
            writeln!(out, "{indent}[{marker}: {}({})]", r.name, r.arguments.join(", ")).unwrap();
        }
    }
    for d in distributions {
        if d.trim() != d || !balanced(d) {
            return Err(EmitError::Unrepresentable(d.clone()));
        }
        writeln!(out, "{indent}[L: {d}]").unwrap();
    }
    Ok(())
}

fn balanced(text: &str) -> bool {
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth == 0 => return false,
            ']' => depth -= 1,
            _ => {}
        }
    }
    depth == 0
}

fn normalize_formula(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn looks_like_isa(text: &str) -> bool {
    text.strip_prefix("IsA")
        .is_some_and(|rest| rest.trim_start().starts_with('('))
}

/// Parses script text into a theory named `name`. Entity types are those
/// named by `IsA` nodes; resident node kinds are left unspecified.
pub fn parse_script(text: &str, name: &str) -> Result<MTheory, ScriptSyntaxError> {
    let mut p = Parser { cur: Cursor::new(text) };
    let mut mfrags = Vec::new();
    loop {
        p.cur.skip_ws();
        if p.cur.at_end() {
            break;
        }
        mfrags.push(p.block()?);
    }
    Ok(MTheory {
        name: name.to_string(),
        entities: entities_in_use(&mfrags),
        mfrags,
    })
}

struct Parser<'a> {
    cur: Cursor<'a>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, expected: &str) -> Result<T, ScriptSyntaxError> {
        Err(ScriptSyntaxError {
            pos: self.cur.here(),
            expected: expected.to_string(),
            found: self.cur.found(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ScriptSyntaxError> {
        self.cur.skip_ws();
        if self.cur.eat(c) {
            Ok(())
        } else {
            self.err(&format!("`{c}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, ScriptSyntaxError> {
        self.cur.skip_ws();
        match self.cur.ident() {
            Some(s) => Ok(s),
            None => self.err(what),
        }
    }

    /// `[` marker `:`; the caller has checked that `[` is next.
    fn open(&mut self) -> Result<(Pos, &'a str), ScriptSyntaxError> {
        self.expect('[')?;
        self.cur.skip_ws();
        let at = self.cur.here();
        let marker = self.ident("node marker")?;
        self.expect(':')?;
        Ok((at, marker))
    }

    fn block(&mut self) -> Result<MFrag, ScriptSyntaxError> {
        if self.cur.peek() != Some('[') {
            return self.err("`[F:`");
        }
        let (at, marker) = self.open()?;
        if marker != "F" {
            return Err(ScriptSyntaxError {
                pos: at,
                expected: "`F`".into(),
                found: format!("`{marker}`"),
            });
        }
        let mut f = MFrag::new(self.ident("MFrag name")?);
        loop {
            self.cur.skip_ws();
            match self.cur.peek() {
                Some(']') => {
                    self.cur.bump();
                    return Ok(f);
                }
                Some('[') => {}
                _ => return self.err("node or `]`"),
            }
            let (at, marker) = self.open()?;
            match marker {
                "C" => f.context_nodes.push(self.context()?),
                "R" => f.resident_nodes.push(self.resident()?),
                "IP" => f.input_refs.push(self.reference()?),
                "RP" => f.parent_refs.push(self.reference()?),
                "L" => f.distributions.push(self.opaque()?),
                other => return Err(unknown_marker(at, other, "`C`, `R`, `IP`, `RP` or `L`")),
            }
        }
    }

    fn context(&mut self) -> Result<ContextNode, ScriptSyntaxError> {
        self.cur.skip_ws();
        if looks_like_isa(self.cur.rest()) {
            self.ident("IsA")?;
            self.expect('(')?;
            let ov = self.ident("ordinary variable")?;
            self.expect(',')?;
            let entity = self.ident("entity type")?;
            self.expect(')')?;
            self.expect(']')?;
            return Ok(ContextNode::IsA(OrdinaryVariable::new(ov, entity)));
        }
        let text = normalize_formula(&self.opaque()?);
        if text.is_empty() {
            return self.err("context expression");
        }
        Ok(ContextNode::Formula(text))
    }

    /// `Name(args)` without the closing bracket.
    fn rv(&mut self) -> Result<NodeRef, ScriptSyntaxError> {
        let name = self.ident("node name")?.to_string();
        self.expect('(')?;
        let mut arguments = Vec::new();
        self.cur.skip_ws();
        if !self.cur.eat(')') {
            loop {
                arguments.push(self.ident("ordinary variable")?.to_string());
                self.cur.skip_ws();
                if self.cur.eat(')') {
                    break;
                }
                if !self.cur.eat(',') {
                    return self.err("`,` or `)`");
                }
            }
        }
        Ok(NodeRef { name, arguments })
    }

    fn reference(&mut self) -> Result<NodeRef, ScriptSyntaxError> {
        let r = self.rv()?;
        self.expect(']')?;
        Ok(r)
    }

    fn resident(&mut self) -> Result<ResidentNode, ScriptSyntaxError> {
        let NodeRef { name, arguments } = self.rv()?;
        let mut node = ResidentNode::new(name, arguments, NodeKind::Unspecified);
        loop {
            self.cur.skip_ws();
            match self.cur.peek() {
                Some(']') => {
                    self.cur.bump();
                    return Ok(node);
                }
                Some('[') => {}
                _ => return self.err("`IP`, `RP`, `L` node or `]`"),
            }
            let (at, marker) = self.open()?;
            match marker {
                "IP" => node.inputs.push(self.reference()?),
                "RP" => node.parents.push(self.reference()?),
                "L" => node.distributions.push(self.opaque()?),
                other => return Err(unknown_marker(at, other, "`IP`, `RP` or `L`")),
            }
        }
    }

    /// Text up to the `]` that balances the already-consumed opening bracket,
    /// trimmed. The closing bracket is consumed.
    fn opaque(&mut self) -> Result<String, ScriptSyntaxError> {
        let rest = self.cur.rest();
        let mut depth = 0usize;
        let mut len = None;
        for (i, c) in rest.char_indices() {
            match c {
                '[' => depth += 1,
                ']' if depth == 0 => {
                    len = Some(i);
                    break;
                }
                ']' => depth -= 1,
                _ => {}
            }
        }
        let Some(len) = len else {
            while self.cur.bump().is_some() {}
            return self.err("`]`");
        };
        let text = rest[..len].trim().to_string();
        while self.cur.rest().len() > rest.len() - len {
            self.cur.bump();
        }
        self.cur.bump();
        Ok(text)
    }
}

fn unknown_marker(at: Pos, found: &str, expected: &str) -> ScriptSyntaxError {
    ScriptSyntaxError {
        pos: at,
        expected: expected.to_string(),
        found: format!("`{found}`"),
    }
}
