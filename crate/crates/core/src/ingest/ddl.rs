//! A deliberately small SQL DDL subset.
//!
//! Accepted: `CREATE TABLE name ( ... );` whose elements are column
//! definitions (`name type [PRIMARY KEY] [NOT NULL] [REFERENCES t[(col)]]`),
//! table-level `[CONSTRAINT c] PRIMARY KEY (cols)` and
//! `[CONSTRAINT c] FOREIGN KEY (col) REFERENCES t[(col)]`. A MySQL-style
//! `ENUM('a','b')` column type becomes the attribute's domain. `--` and
//! `/* */` comments are skipped. Anything else is refused with a located
//! error rather than dropped.

use std::collections::HashMap;

use super::{locate, IngestError};
use crate::cursor::{Cursor, Pos};
use crate::schema::{AttributeDef, RelationSchema, RelationalDatabaseSchema, SchemaError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Str(String),
    Num(String),
    Punct(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) | Tok::Quoted(w) => format!("`{w}`"),
            Tok::Str(s) => format!("'{s}'"),
            Tok::Num(n) => n.clone(),
            Tok::Punct(c) => format!("{c:?}"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, IngestError> {
    let mut c = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        c.skip_ws();
        let pos = c.here();
        let Some(ch) = c.peek() else { break };
        if ch == '-' && c.peek_nth(1) == Some('-') {
            c.take_while(|ch| ch != '\n');
            continue;
        }
        if ch == '/' && c.peek_nth(1) == Some('*') {
            c.bump();
            c.bump();
            loop {
                match c.bump() {
                    Some('*') if c.peek() == Some('/') => {
                        c.bump();
                        break;
                    }
                    Some(_) => {}
                    None => return Err(IngestError::syntax(pos, "end of comment `*/`", "end of input")),
                }
            }
            continue;
        }
        let tok = if ch.is_ascii_alphabetic() || ch == '_' {
            Tok::Word(c.ident().unwrap_or_default().to_string())
        } else if ch.is_ascii_digit() {
            Tok::Num(c.take_while(|ch| ch.is_ascii_digit()).to_string())
        } else if ch == '"' || ch == '`' || ch == '\'' {
            c.bump();
            let mut s = String::new();
            loop {
                match c.bump() {
                    Some(q) if q == ch => {
                        if c.peek() == Some(ch) {
                            c.bump();
                            s.push(ch);
                        } else {
                            break;
                        }
                    }
                    Some(other) => s.push(other),
                    None => return Err(IngestError::syntax(pos, format!("closing {ch}"), "end of input")),
                }
            }
            if ch == '\'' {
                Tok::Str(s)
            } else {
                Tok::Quoted(s)
            }
        } else if "(),;".contains(ch) {
            c.bump();
            Tok::Punct(ch)
        } else {
            return Err(IngestError::syntax(pos, "SQL token", c.found()));
        };
        out.push((tok, pos));
    }
    Ok(out)
}

struct Table {
    name: String,
    pos: Pos,
    columns: Vec<(AttributeDef, Pos)>,
    table_key: Option<(Vec<(String, Pos)>, Pos)>,
    /// (column, target table, target column, position)
    foreign: Vec<(String, String, Option<String>, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

const COLUMN_CLAUSES_REFUSED: &[&str] = &[
    "DEFAULT",
    "UNIQUE",
    "CHECK",
    "AUTO_INCREMENT",
    "AUTOINCREMENT",
    "COLLATE",
    "GENERATED",
    "COMMENT",
    "NULL",
    "CONSTRAINT",
    "IDENTITY",
    "ON",
];

const STOP_WORDS: &[&str] = &["PRIMARY", "NOT", "REFERENCES"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn found(&self) -> String {
        self.peek().map(Tok::describe).unwrap_or_else(|| "end of input".into())
    }

    fn err(&self, expected: &str) -> IngestError {
        IngestError::syntax(self.pos(), expected, self.found())
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), IngestError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(kw))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Punct(c));
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_punct(&mut self, c: char) -> Result<(), IngestError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.err(&format!("{c:?}")))
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), IngestError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Word(w)) | Some(Tok::Quoted(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok((w, pos))
            }
            _ => Err(self.err(what)),
        }
    }

    fn unsupported(&self, pos: Pos, what: impl Into<String>) -> IngestError {
        IngestError::UnsupportedStatement {
            pos,
            what: what.into(),
        }
    }

    fn statement(&mut self) -> Result<Option<Table>, IngestError> {
        if self.eat_punct(';') {
            return Ok(None);
        }
        let pos = self.pos();
        let first = match self.peek() {
            Some(Tok::Word(w)) => w.to_ascii_uppercase(),
            _ => return Err(self.err("CREATE TABLE")),
        };
        if first != "CREATE" {
            return Err(self.unsupported(pos, first));
        }
        self.at += 1;
        if !self.is_kw("TABLE") {
            let what = match self.peek() {
                Some(Tok::Word(w)) => format!("CREATE {}", w.to_ascii_uppercase()),
                _ => return Err(self.err("TABLE")),
            };
            return Err(self.unsupported(pos, what));
        }
        self.at += 1;
        if self.is_kw("IF") {
            return Err(self.unsupported(self.pos(), "IF NOT EXISTS"));
        }
        let (name, name_pos) = self.name("table name")?;
        let mut table = Table {
            name,
            pos: name_pos,
            columns: Vec::new(),
            table_key: None,
            foreign: Vec::new(),
        };
        self.expect_punct('(')?;
        loop {
            self.element(&mut table)?;
            if !self.eat_punct(',') {
                break;
            }
        }
        self.expect_punct(')')?;
        if self.peek().is_some() && !self.eat_punct(';') {
            return Err(self.err("';'"));
        }
        Ok(Some(table))
    }

    fn element(&mut self, table: &mut Table) -> Result<(), IngestError> {
        let pos = self.pos();
        if self.eat_kw("CONSTRAINT") {
            self.name("constraint name")?;
            if !(self.is_kw("PRIMARY") || self.is_kw("FOREIGN")) {
                return Err(self.unsupported(self.pos(), format!("constraint {}", self.found())));
            }
        }
        if self.eat_kw("PRIMARY") {
            self.expect_kw("KEY")?;
            let cols = self.column_list()?;
            if table.table_key.is_some() {
                return Err(self.unsupported(pos, "second PRIMARY KEY clause"));
            }
            table.table_key = Some((cols, pos));
            return Ok(());
        }
        if self.eat_kw("FOREIGN") {
            self.expect_kw("KEY")?;
            let cols = self.column_list()?;
            if cols.len() != 1 {
                return Err(self.unsupported(pos, "composite FOREIGN KEY"));
            }
            let (target, target_col) = self.references_tail()?;
            let (col, col_pos) = cols.into_iter().next().expect("one column");
            table.foreign.push((col, target, target_col, col_pos));
            return Ok(());
        }
        for kw in ["UNIQUE", "CHECK", "INDEX", "KEY", "FULLTEXT", "EXCLUDE"] {
            if self.is_kw(kw) {
                return Err(self.unsupported(pos, format!("table constraint {kw}")));
            }
        }
        let (name, col_pos) = self.name("column name")?;
        let mut attr = AttributeDef::new(name);
        attr.sql_type = self.column_type(&mut attr)?;
        loop {
            let here = self.pos();
            if self.eat_kw("PRIMARY") {
                self.expect_kw("KEY")?;
                attr.in_primary_key = true;
            } else if self.eat_kw("NOT") {
                self.expect_kw("NULL")?;
            } else if self.is_kw("REFERENCES") {
                let (target, target_col) = self.references_tail()?;
                table.foreign.push((attr.name.clone(), target, target_col, here));
            } else {
                match self.peek() {
                    Some(Tok::Punct(',')) | Some(Tok::Punct(')')) => break,
                    Some(Tok::Word(w)) => {
                        return Err(self.unsupported(here, format!("column clause {}", w.to_ascii_uppercase())))
                    }
                    _ => return Err(self.err("',' or ')'")),
                }
            }
        }
        table.columns.push((attr, col_pos));
        Ok(())
    }

    fn column_type(&mut self, attr: &mut AttributeDef) -> Result<Option<String>, IngestError> {
        let mut words = Vec::new();
        while let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if STOP_WORDS.contains(&upper.as_str()) {
                break;
            }
            if COLUMN_CLAUSES_REFUSED.contains(&upper.as_str()) {
                return Err(self.unsupported(self.pos(), format!("column clause {upper}")));
            }
            words.push(upper);
            self.at += 1;
        }
        if words.is_empty() {
            return Ok(None);
        }
        let mut ty = words.join(" ");
        if self.eat_punct('(') {
            let is_enum = ty == "ENUM";
            let mut args = Vec::new();
            let mut values = Vec::new();
            loop {
                match self.peek().cloned() {
                    Some(Tok::Num(n)) if !is_enum => args.push(n),
                    Some(Tok::Str(s)) if is_enum => {
                        args.push(format!("'{}'", s.replace('\'', "''")));
                        values.push(s);
                    }
                    _ => return Err(self.err(if is_enum { "string literal" } else { "number" })),
                }
                self.at += 1;
                if !self.eat_punct(',') {
                    break;
                }
            }
            self.expect_punct(')')?;
            ty = format!("{ty}({})", args.join(","));
            if is_enum {
                attr.domain = Some(values);
            }
        }
        Ok(Some(ty))
    }

    fn column_list(&mut self) -> Result<Vec<(String, Pos)>, IngestError> {
        self.expect_punct('(')?;
        let mut cols = Vec::new();
        loop {
            cols.push(self.name("column name")?);
            if !self.eat_punct(',') {
                break;
            }
        }
        self.expect_punct(')')?;
        Ok(cols)
    }

    fn references_tail(&mut self) -> Result<(String, Option<String>), IngestError> {
        self.expect_kw("REFERENCES")?;
        let (target, _) = self.name("referenced table")?;
        let mut col = None;
        if self.peek() == Some(&Tok::Punct('(')) {
            let pos = self.pos();
            let cols = self.column_list()?;
            if cols.len() != 1 {
                return Err(self.unsupported(pos, "composite REFERENCES"));
            }
            col = cols.into_iter().next().map(|(c, _)| c);
        }
        if self.is_kw("ON") || self.is_kw("MATCH") || self.is_kw("DEFERRABLE") {
            return Err(self.unsupported(self.pos(), format!("referential action {}", self.found())));
        }
        Ok((target, col))
    }
}

/// Parses the supported DDL subset into a schema called `schema_name`.
pub fn parse_sql_ddl(text: &str, schema_name: &str) -> Result<RelationalDatabaseSchema, IngestError> {
    let toks = lex(text)?;
    let end = {
        let mut c = Cursor::new(text);
        while c.bump().is_some() {}
        c.here()
    };
    let mut p = Parser { toks, at: 0, end };
    let mut tables = Vec::new();
    while p.peek().is_some() {
        if let Some(t) = p.statement()? {
            tables.push(t);
        }
    }
    build(tables, schema_name)
}

fn build(tables: Vec<Table>, schema_name: &str) -> Result<RelationalDatabaseSchema, IngestError> {
    let mut spans = Vec::new();
    let mut relations = Vec::with_capacity(tables.len());
    let mut key_column: HashMap<String, Vec<String>> = HashMap::new();
    let mut pending = Vec::new();

    for t in tables {
        spans.push((t.name.clone(), None, t.pos));
        let mut attrs: Vec<AttributeDef> = Vec::with_capacity(t.columns.len());
        for (a, pos) in t.columns {
            spans.push((t.name.clone(), Some(a.name.clone()), pos));
            attrs.push(a);
        }
        if let Some((cols, pos)) = t.table_key {
            if attrs.iter().any(|a| a.in_primary_key) {
                return Err(IngestError::UnsupportedStatement {
                    pos,
                    what: "PRIMARY KEY declared both on a column and on the table".into(),
                });
            }
            for (col, cpos) in cols {
                match attrs.iter_mut().find(|a| a.name == col) {
                    Some(a) => a.in_primary_key = true,
                    None => {
                        return Err(IngestError::Schema {
                            pos: cpos,
                            source: SchemaError::UnknownAttribute {
                                relation: t.name.clone(),
                                attribute: col,
                            },
                        })
                    }
                }
            }
        }
        for (col, target, target_col, pos) in t.foreign {
            let Some(a) = attrs.iter_mut().find(|a| a.name == col) else {
                return Err(IngestError::Schema {
                    pos,
                    source: SchemaError::UnknownAttribute {
                        relation: t.name.clone(),
                        attribute: col,
                    },
                });
            };
            if a.references.is_some() {
                return Err(IngestError::UnsupportedStatement {
                    pos,
                    what: format!("second foreign key on column {col}"),
                });
            }
            a.references = Some(target.clone());
            pending.push((t.name.clone(), col, target, target_col, pos));
        }
        key_column.insert(
            t.name.clone(),
            attrs.iter().filter(|a| a.in_primary_key).map(|a| a.name.clone()).collect(),
        );
        relations.push(RelationSchema::new(t.name, attrs));
    }

    for (table, col, target, target_col, pos) in pending {
        let Some(keys) = key_column.get(&target) else {
            return Err(IngestError::DanglingReference {
                pos,
                what: format!("{table}.{col} references unknown table {target}"),
            });
        };
        if let Some(tc) = target_col {
            if keys.len() != 1 || keys[0] != tc {
                return Err(IngestError::DanglingReference {
                    pos,
                    what: format!("{table}.{col} references {target}({tc}), which is not the sole primary key column"),
                });
            }
        }
    }

    RelationalDatabaseSchema::new(schema_name, relations).map_err(|e| locate(e, &spans, Pos { line: 1, col: 1 }))
}
