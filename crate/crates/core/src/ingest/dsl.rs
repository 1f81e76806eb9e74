//! The bracket schema DSL.
//!
//! ```text
//! Schema   ::= Name "[" (Relation ("," Relation)*)? "]"
//! Relation ::= Name "[" Attr ("," Attr)* "]"
//! Attr     ::= Name "*"? ("/" Name)? (":" "{" Value ("," Value)* "}")?
//! ```
//!
//! Names are `[A-Za-z_][A-Za-z0-9_]*`; domain values are runs of
//! `[A-Za-z0-9_.+-]`. Whitespace between tokens is ignored.

use std::fmt::Write;

use super::{locate, IngestError};
use crate::cursor::{Cursor, Pos};
use crate::schema::{AttributeDef, RelationSchema, RelationalDatabaseSchema};

type Spans = Vec<(String, Option<String>, Pos)>;

pub fn parse_schema_dsl(text: &str) -> Result<RelationalDatabaseSchema, IngestError> {
    let mut c = Cursor::new(text);
    let mut spans = Spans::new();
    c.skip_ws();
    let start = c.here();
    let name = expect_ident(&mut c, "schema name")?;
    expect(&mut c, '[')?;
    let mut relations = Vec::new();
    c.skip_ws();
    if c.peek() != Some(']') {
        loop {
            relations.push(relation(&mut c, &mut spans)?);
            c.skip_ws();
            if !c.eat(',') {
                break;
            }
        }
    }
    expect(&mut c, ']')?;
    c.skip_ws();
    if !c.at_end() {
        return Err(IngestError::syntax(c.here(), "end of input", c.found()));
    }
    RelationalDatabaseSchema::new(name, relations).map_err(|e| locate(e, &spans, start))
}

fn expect_ident<'a>(c: &mut Cursor<'a>, what: &str) -> Result<&'a str, IngestError> {
    c.skip_ws();
    c.ident()
        .ok_or_else(|| IngestError::syntax(c.here(), what, c.found()))
}

fn expect(c: &mut Cursor<'_>, ch: char) -> Result<(), IngestError> {
    c.skip_ws();
    if c.eat(ch) {
        Ok(())
    } else {
        Err(IngestError::syntax(c.here(), format!("{ch:?}"), c.found()))
    }
}

fn relation(c: &mut Cursor<'_>, spans: &mut Spans) -> Result<RelationSchema, IngestError> {
    c.skip_ws();
    let pos = c.here();
    let name = expect_ident(c, "relation name")?.to_string();
    spans.push((name.clone(), None, pos));
    expect(c, '[')?;
    let mut attributes = Vec::new();
    loop {
        attributes.push(attribute(c, &name, spans)?);
        c.skip_ws();
        if !c.eat(',') {
            break;
        }
    }
    expect(c, ']')?;
    Ok(RelationSchema::new(name, attributes))
}

fn attribute(c: &mut Cursor<'_>, relation: &str, spans: &mut Spans) -> Result<AttributeDef, IngestError> {
    c.skip_ws();
    let pos = c.here();
    let mut attr = AttributeDef::new(expect_ident(c, "attribute name")?);
    spans.push((relation.to_string(), Some(attr.name.clone()), pos));
    c.skip_ws();
    attr.in_primary_key = c.eat('*');
    c.skip_ws();
    if c.eat('/') {
        attr.references = Some(expect_ident(c, "referenced relation name")?.to_string());
        c.skip_ws();
    }
    if c.eat(':') {
        expect(c, '{')?;
        let mut values = Vec::new();
        loop {
            c.skip_ws();
            let v = c.take_while(|ch| ch.is_ascii_alphanumeric() || "_.+-".contains(ch));
            if v.is_empty() {
                return Err(IngestError::syntax(c.here(), "domain value", c.found()));
            }
            values.push(v.to_string());
            c.skip_ws();
            if !c.eat(',') {
                break;
            }
        }
        expect(c, '}')?;
        attr.domain = Some(values);
    }
    Ok(attr)
}

/// Canonical DSL text: one relation per line, 4-space indent.
pub fn render_schema_dsl(schema: &RelationalDatabaseSchema) -> String {
    let mut out = String::new();
    if schema.relations().is_empty() {
        let _ = writeln!(out, "{}[]", schema.name());
        return out;
    }
    let _ = writeln!(out, "{}[", schema.name());
    let n = schema.relations().len();
    for (i, rel) in schema.relations().iter().enumerate() {
        let _ = write!(out, "    {}[", rel.name);
        for (j, a) in rel.attributes.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&a.name);
            if a.in_primary_key {
                out.push('*');
            }
            if let Some(t) = &a.references {
                let _ = write!(out, "/{t}");
            }
            if let Some(d) = &a.domain {
                let _ = write!(out, ":{{{}}}", d.join(","));
            }
        }
        out.push(']');
        if i + 1 < n {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}
