//! Reader for the DDL emitted by [`Candidate::to_ddl`]. Three templates:
//!
//! ```text
//! CREATE BITMAP INDEX <id> ON <fact>(<dim>.<attr>) FROM <fact>, <dim> WHERE <fact>.<fk> = <dim>.<pk>;
//! CREATE INDEX <id> ON <table-or-view>(<col>, ...);
//! CREATE MATERIALIZED VIEW <id> AS SELECT <dims>, <aggs> FROM <star-join> [WHERE <joins>] [GROUP BY <dims>];
//! ```

use std::collections::BTreeSet;

use serde::Serialize;

use super::{view_column_name, Candidate, CandidateError, IndexKind, IndexTarget};
use crate::analyzer::lexer::Tok;
use crate::analyzer::parser::Cursor;
use crate::analyzer::{parse_query, split_statements, Aggregate, AnalyzeError, JoinEdge};
use crate::catalog::{AttrRef, Catalog};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "statement", rename_all = "snake_case")]
pub enum DdlStatement {
    BitmapIndex {
        name: String,
        table: String,
        attribute: AttrRef,
        from: Vec<String>,
        join: JoinEdge,
    },
    Index {
        name: String,
        table: String,
        columns: Vec<String>,
    },
    MaterializedView {
        name: String,
        dimensions: BTreeSet<AttrRef>,
        aggregates: BTreeSet<Aggregate>,
        tables: BTreeSet<String>,
        joins: BTreeSet<JoinEdge>,
    },
}

impl Candidate {
    /// The statement [`read_ddl`] yields for this candidate's DDL.
    pub fn ddl_statement(&self) -> DdlStatement {
        match self {
            Candidate::View(v) => DdlStatement::MaterializedView {
                name: v.id.to_string(),
                dimensions: v.dimensions.clone(),
                aggregates: v.aggregates.clone(),
                tables: v.tables.clone(),
                joins: v.joins.clone(),
            },
            Candidate::Index(ix) => match (&ix.kind, &ix.target) {
                (IndexKind::BitmapJoin, IndexTarget::Table(t)) => {
                    let join = ix.join.clone().expect("bitmap join index has a join");
                    DdlStatement::BitmapIndex {
                        name: ix.id.to_string(),
                        table: t.clone(),
                        attribute: ix.key[0].clone(),
                        from: vec![t.clone(), join.right.table.clone()],
                        join,
                    }
                }
                (_, IndexTarget::Table(t)) => DdlStatement::Index {
                    name: ix.id.to_string(),
                    table: t.clone(),
                    columns: ix.key.iter().map(|k| k.column.clone()).collect(),
                },
                (_, IndexTarget::View(v)) => DdlStatement::Index {
                    name: ix.id.to_string(),
                    table: v.to_string(),
                    columns: ix.key.iter().map(view_column_name).collect(),
                },
            },
        }
    }
}

fn qualified(cur: &mut Cursor) -> Result<AttrRef, AnalyzeError> {
    let t = cur.ident("table name")?;
    cur.expect(&Tok::Dot, ".")?;
    let c = cur.ident("column name")?;
    Ok(AttrRef::new(t, c))
}

fn finish(cur: &mut Cursor) -> Result<(), AnalyzeError> {
    cur.eat(&Tok::Semi);
    if cur.at_end() {
        Ok(())
    } else {
        cur.error("unexpected token after end of statement")
    }
}

fn read_statement(sql: &str, catalog: &Catalog) -> Result<DdlStatement, AnalyzeError> {
    let mut cur = Cursor::new(sql)?;
    cur.expect_keyword("CREATE")?;
    if cur.eat_keyword("BITMAP") {
        cur.expect_keyword("INDEX")?;
        let name = cur.ident("index name")?;
        cur.expect_keyword("ON")?;
        let table = cur.ident("table name")?;
        cur.expect(&Tok::LParen, "(")?;
        let attribute = qualified(&mut cur)?;
        cur.expect(&Tok::RParen, ")")?;
        cur.expect_keyword("FROM")?;
        let mut from = vec![cur.ident("table name")?];
        while cur.eat(&Tok::Comma) {
            from.push(cur.ident("table name")?);
        }
        cur.expect_keyword("WHERE")?;
        let left = qualified(&mut cur)?;
        cur.expect(&Tok::Eq, "=")?;
        let right = qualified(&mut cur)?;
        finish(&mut cur)?;
        Ok(DdlStatement::BitmapIndex {
            name,
            table,
            attribute,
            from,
            join: JoinEdge { left, right },
        })
    } else if cur.eat_keyword("INDEX") {
        let name = cur.ident("index name")?;
        cur.expect_keyword("ON")?;
        let table = cur.ident("table name")?;
        cur.expect(&Tok::LParen, "(")?;
        let mut columns = vec![cur.ident("column name")?];
        while cur.eat(&Tok::Comma) {
            columns.push(cur.ident("column name")?);
        }
        cur.expect(&Tok::RParen, ")")?;
        finish(&mut cur)?;
        Ok(DdlStatement::Index {
            name,
            table,
            columns,
        })
    } else if cur.eat_keyword("MATERIALIZED") {
        cur.expect_keyword("VIEW")?;
        let name = cur.ident("view name")?;
        cur.expect_keyword("AS")?;
        if !cur.at_keyword("SELECT") {
            return cur.error("expected SELECT");
        }
        let body = parse_query(&sql[cur.offset()..], catalog)?;
        Ok(DdlStatement::MaterializedView {
            name,
            dimensions: body.group_by.into_iter().collect(),
            aggregates: body.aggregates.into_iter().collect(),
            tables: body.tables,
            joins: body.join_edges,
        })
    } else {
        cur.error("expected BITMAP INDEX, INDEX or MATERIALIZED VIEW")
    }
}

/// Reads a DDL file produced by the advisor. View bodies are parsed with the
/// workload grammar and resolved against `catalog`.
pub fn read_ddl(text: &str, catalog: &Catalog) -> Result<Vec<DdlStatement>, CandidateError> {
    split_statements(text)
        .iter()
        .map(|s| {
            read_statement(&s.text, catalog).map_err(|e| {
                CandidateError::Ddl(AnalyzeError::Statement {
                    ordinal: s.ordinal,
                    source: Box::new(e),
                })
            })
        })
        .collect()
}
