//! Recursive-descent parser for single-block star-join aggregate queries.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! query    := SELECT item {, item} FROM tref { , tref | [INNER] JOIN tref ON conj }
//!             [WHERE conj] [GROUP BY col {, col}] [ORDER BY ...] [LIMIT n] [;]
//! item     := col [[AS] alias] | agg ( * | col ) [[AS] alias]
//! conj     := pred { AND pred } | ( conj )
//! pred     := operand cmp operand | col BETWEEN lit AND lit | col IN ( lit {, lit} )
//! cmp      := = | < | <= | > | >=
//! ```
//!
//! Column-to-column equalities are join edges and must follow a declared
//! foreign key. ORDER BY and LIMIT are accepted and ignored.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use super::query::{
    AggArg, AggFunc, Aggregate, Bound, JoinEdge, Literal, ParsedQuery, Predicate, PredicateOp,
};
use super::AnalyzeError;
use crate::catalog::{AttrRef, Catalog};

const RESERVED: &[&str] = &[
    "SELECT",
    "FROM",
    "WHERE",
    "GROUP",
    "ORDER",
    "BY",
    "HAVING",
    "LIMIT",
    "JOIN",
    "INNER",
    "LEFT",
    "RIGHT",
    "FULL",
    "OUTER",
    "CROSS",
    "NATURAL",
    "ON",
    "AND",
    "OR",
    "NOT",
    "IN",
    "BETWEEN",
    "AS",
    "UNION",
    "INTERSECT",
    "EXCEPT",
    "DISTINCT",
    "ASC",
    "DESC",
];

#[derive(Debug, Clone)]
struct ColRef {
    qualifier: Option<String>,
    name: String,
}

impl ColRef {
    fn display(&self) -> String {
        match &self.qualifier {
            Some(q) => format!("{q}.{}", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug)]
enum SelectItem {
    Star,
    Column(ColRef),
    Agg(AggFunc, Option<ColRef>),
}

#[derive(Debug)]
enum Operand {
    Col(ColRef),
    Lit(Literal),
}

#[derive(Debug, Clone, Copy)]
enum Cmp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn flipped(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Eq,
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
        }
    }
}

#[derive(Debug)]
enum RawPred {
    Cmp(Operand, Cmp, Operand),
    Between(ColRef, Literal, Literal),
    In(ColRef, Vec<Literal>),
}

#[derive(Debug)]
struct TableRef {
    name: String,
    alias: Option<String>,
}

#[derive(Debug, Default)]
struct RawQuery {
    items: Vec<SelectItem>,
    tables: Vec<TableRef>,
    preds: Vec<RawPred>,
    group_by: Vec<ColRef>,
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub fn new(sql: &str) -> Result<Cursor, AnalyzeError> {
        Ok(Cursor {
            toks: tokenize(sql)?,
            pos: 0,
            end: sql.len(),
        })
    }

    pub fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.toks.get(self.pos + ahead)
    }

    pub fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Result<T, AnalyzeError> {
        Err(AnalyzeError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    pub fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), AnalyzeError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(format!("expected {kw}"))
        }
    }

    pub fn at(&self, tok: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == tok)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), AnalyzeError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    /// Consumes an identifier that is not a reserved keyword.
    pub fn ident(&mut self, what: &str) -> Result<String, AnalyzeError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident { text, quoted }) if *quoted || !is_reserved(text) => {
                let text = text.clone();
                self.pos += 1;
                Ok(text)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn at_plain_ident(&self) -> bool {
        matches!(self.peek().map(|t| &t.tok),
            Some(Tok::Ident { text, quoted }) if *quoted || !is_reserved(text))
    }

    pub fn literal(&mut self) -> Result<Literal, AnalyzeError> {
        if self.at(&Tok::LParen) && self.peek_at(1).is_some_and(|t| t.is_keyword("SELECT")) {
            return Err(unsupported("subquery"));
        }
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Literal::Int(v))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Literal::Str(s))
            }
            Some(Tok::Decimal(d)) => Err(unsupported(&format!("decimal literal {d}"))),
            _ => self.error("expected literal"),
        }
    }
}

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn unsupported(what: &str) -> AnalyzeError {
    AnalyzeError::UnsupportedFeature(what.to_string())
}

/// Parses one statement and resolves it against the catalog. The returned
/// query has id 0; workload loading assigns ordinals.
pub fn parse_query(sql: &str, catalog: &Catalog) -> Result<ParsedQuery, AnalyzeError> {
    let mut cur = Cursor::new(sql)?;
    let raw = parse_raw(&mut cur)?;
    resolve(raw, catalog)
}

fn parse_raw(cur: &mut Cursor) -> Result<RawQuery, AnalyzeError> {
    let mut q = RawQuery::default();
    cur.expect_keyword("SELECT")?;
    if cur.at_keyword("DISTINCT") {
        return Err(unsupported("DISTINCT"));
    }
    loop {
        q.items.push(select_item(cur)?);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }

    cur.expect_keyword("FROM")?;
    q.tables.push(table_ref(cur)?);
    loop {
        if cur.eat(&Tok::Comma) {
            q.tables.push(table_ref(cur)?);
        } else if cur.at_keyword("JOIN") || cur.at_keyword("INNER") {
            if cur.eat_keyword("INNER") && !cur.at_keyword("JOIN") {
                return cur.error("expected JOIN");
            }
            cur.expect_keyword("JOIN")?;
            q.tables.push(table_ref(cur)?);
            cur.expect_keyword("ON")?;
            conjunction(cur, &mut q.preds)?;
        } else if ["LEFT", "RIGHT", "FULL", "OUTER"]
            .iter()
            .any(|k| cur.at_keyword(k))
        {
            return Err(unsupported("outer join"));
        } else if cur.at_keyword("CROSS") || cur.at_keyword("NATURAL") {
            return Err(unsupported("cross or natural join"));
        } else {
            break;
        }
    }

    if cur.eat_keyword("WHERE") {
        conjunction(cur, &mut q.preds)?;
    }
    if cur.at_keyword("GROUP") {
        cur.next();
        cur.expect_keyword("BY")?;
        loop {
            q.group_by.push(col_ref(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if cur.at_keyword("HAVING") {
        return Err(unsupported("HAVING"));
    }
    if cur.at_keyword("ORDER") {
        cur.next();
        cur.expect_keyword("BY")?;
        while !cur.at_end() && !cur.at(&Tok::Semi) && !cur.at_keyword("LIMIT") {
            if cur.at(&Tok::LParen) && cur.peek_at(1).is_some_and(|t| t.is_keyword("SELECT")) {
                return Err(unsupported("subquery"));
            }
            cur.next();
        }
    }
    if cur.eat_keyword("LIMIT") {
        match cur.next().map(|t| t.tok) {
            Some(Tok::Int(_)) => {}
            _ => return cur.error("expected LIMIT count"),
        }
    }
    for kw in ["UNION", "INTERSECT", "EXCEPT"] {
        if cur.at_keyword(kw) {
            return Err(unsupported("set operation"));
        }
    }
    cur.eat(&Tok::Semi);
    if !cur.at_end() {
        return cur.error("unexpected token after end of statement");
    }
    Ok(q)
}

fn select_item(cur: &mut Cursor) -> Result<SelectItem, AnalyzeError> {
    if cur.eat(&Tok::Star) {
        return Ok(SelectItem::Star);
    }
    let is_call = cur.at_plain_ident() && cur.peek_at(1).is_some_and(|t| t.tok == Tok::LParen);
    let item = if is_call {
        let name = cur.ident("function name")?;
        let func = AggFunc::from_keyword(&name)
            .ok_or_else(|| unsupported(&format!("function `{name}`")))?;
        cur.expect(&Tok::LParen, "(")?;
        if cur.at_keyword("DISTINCT") {
            return Err(unsupported("DISTINCT aggregate"));
        }
        if cur.at_keyword("SELECT") {
            return Err(unsupported("subquery"));
        }
        let arg = if cur.eat(&Tok::Star) {
            if func != AggFunc::Count {
                return Err(unsupported(&format!("{}(*)", func.name())));
            }
            None
        } else {
            Some(col_ref(cur)?)
        };
        cur.expect(&Tok::RParen, ")")?;
        SelectItem::Agg(func, arg)
    } else {
        SelectItem::Column(col_ref(cur)?)
    };
    if cur.eat_keyword("AS") {
        cur.ident("alias")?;
    } else if cur.at_plain_ident() {
        cur.next();
    }
    Ok(item)
}

fn table_ref(cur: &mut Cursor) -> Result<TableRef, AnalyzeError> {
    if cur.at(&Tok::LParen) {
        if cur.peek_at(1).is_some_and(|t| t.is_keyword("SELECT")) {
            return Err(unsupported("subquery"));
        }
        return cur.error("expected table name");
    }
    let name = cur.ident("table name")?;
    let alias = if cur.eat_keyword("AS") || cur.at_plain_ident() {
        Some(cur.ident("table alias")?)
    } else {
        None
    };
    Ok(TableRef { name, alias })
}

fn col_ref(cur: &mut Cursor) -> Result<ColRef, AnalyzeError> {
    let first = cur.ident("column name")?;
    if cur.eat(&Tok::Dot) {
        let name = cur.ident("column name")?;
        Ok(ColRef {
            qualifier: Some(first),
            name,
        })
    } else {
        Ok(ColRef {
            qualifier: None,
            name: first,
        })
    }
}

fn conjunction(cur: &mut Cursor, out: &mut Vec<RawPred>) -> Result<(), AnalyzeError> {
    loop {
        if cur.at_keyword("NOT") {
            return Err(unsupported("NOT"));
        }
        if cur.at(&Tok::LParen) {
            if cur.peek_at(1).is_some_and(|t| t.is_keyword("SELECT")) {
                return Err(unsupported("subquery"));
            }
            cur.next();
            conjunction(cur, out)?;
            cur.expect(&Tok::RParen, ")")?;
        } else {
            out.push(predicate(cur)?);
        }
        if cur.at_keyword("OR") {
            return Err(unsupported("OR"));
        }
        if !cur.eat_keyword("AND") {
            return Ok(());
        }
    }
}

fn operand(cur: &mut Cursor) -> Result<Operand, AnalyzeError> {
    if cur.at_plain_ident() {
        Ok(Operand::Col(col_ref(cur)?))
    } else {
        Ok(Operand::Lit(cur.literal()?))
    }
}

fn predicate(cur: &mut Cursor) -> Result<RawPred, AnalyzeError> {
    let lhs = operand(cur)?;
    if cur.at_keyword("NOT") {
        return Err(unsupported("NOT"));
    }
    if cur.eat_keyword("BETWEEN") {
        let Operand::Col(col) = lhs else {
            return cur.error("BETWEEN requires a column on the left");
        };
        let lo = cur.literal()?;
        cur.expect_keyword("AND")?;
        let hi = cur.literal()?;
        return Ok(RawPred::Between(col, lo, hi));
    }
    if cur.eat_keyword("IN") {
        let Operand::Col(col) = lhs else {
            return cur.error("IN requires a column on the left");
        };
        cur.expect(&Tok::LParen, "(")?;
        if cur.at_keyword("SELECT") {
            return Err(unsupported("subquery"));
        }
        let mut list = vec![cur.literal()?];
        while cur.eat(&Tok::Comma) {
            list.push(cur.literal()?);
        }
        cur.expect(&Tok::RParen, ")")?;
        return Ok(RawPred::In(col, list));
    }
    let cmp = match cur.peek().map(|t| &t.tok) {
        Some(Tok::Eq) => Cmp::Eq,
        Some(Tok::Lt) => Cmp::Lt,
        Some(Tok::Le) => Cmp::Le,
        Some(Tok::Gt) => Cmp::Gt,
        Some(Tok::Ge) => Cmp::Ge,
        Some(Tok::Ne) => return Err(unsupported("inequality predicate")),
        Some(Tok::Ident { text, .. }) if text.eq_ignore_ascii_case("LIKE") => {
            return Err(unsupported("LIKE"))
        }
        _ => return cur.error("expected comparison operator"),
    };
    cur.next();
    let rhs = operand(cur)?;
    Ok(RawPred::Cmp(lhs, cmp, rhs))
}

struct Scope<'a> {
    catalog: &'a Catalog,
    /// alias or table name -> table name
    names: BTreeMap<String, String>,
    tables: Vec<String>,
}

impl Scope<'_> {
    fn resolve(&self, c: &ColRef) -> Result<AttrRef, AnalyzeError> {
        match &c.qualifier {
            Some(q) => {
                let table = self
                    .names
                    .get(q)
                    .ok_or_else(|| AnalyzeError::UnknownAttribute(c.display()))?;
                let attr = AttrRef::new(table.clone(), c.name.clone());
                self.catalog
                    .column(&attr)
                    .map_err(|_| AnalyzeError::UnknownAttribute(c.display()))?;
                Ok(attr)
            }
            None => {
                let mut hits = self.tables.iter().filter(|t| {
                    self.catalog
                        .table(t)
                        .is_ok_and(|meta| meta.column(&c.name).is_some())
                });
                let first = hits
                    .next()
                    .ok_or_else(|| AnalyzeError::UnknownAttribute(c.name.clone()))?;
                if hits.next().is_some() {
                    return Err(AnalyzeError::AmbiguousColumn(c.name.clone()));
                }
                Ok(AttrRef::new(first.clone(), c.name.clone()))
            }
        }
    }
}

fn range(cmp: Cmp, value: Literal) -> PredicateOp {
    let bound = |inclusive| Some(Bound { value, inclusive });
    match cmp {
        Cmp::Lt => PredicateOp::Range {
            lower: None,
            upper: bound(false),
        },
        Cmp::Le => PredicateOp::Range {
            lower: None,
            upper: bound(true),
        },
        Cmp::Gt => PredicateOp::Range {
            lower: bound(false),
            upper: None,
        },
        Cmp::Ge => PredicateOp::Range {
            lower: bound(true),
            upper: None,
        },
        Cmp::Eq => unreachable!("equality is not a range"),
    }
}

fn resolve(raw: RawQuery, catalog: &Catalog) -> Result<ParsedQuery, AnalyzeError> {
    let mut scope = Scope {
        catalog,
        names: BTreeMap::new(),
        tables: Vec::new(),
    };
    for t in &raw.tables {
        catalog
            .table(&t.name)
            .map_err(|_| AnalyzeError::UnknownTable(t.name.clone()))?;
        if scope.tables.contains(&t.name) {
            return Err(unsupported(&format!("self join on `{}`", t.name)));
        }
        scope.tables.push(t.name.clone());
        let label = t.alias.clone().unwrap_or_else(|| t.name.clone());
        if scope.names.insert(label.clone(), t.name.clone()).is_some() {
            return Err(AnalyzeError::AmbiguousColumn(label));
        }
        if t.alias.is_some() {
            scope.names.entry(t.name.clone()).or_insert(t.name.clone());
        }
    }

    let fact = catalog.fact().name.clone();
    let tables: BTreeSet<String> = scope.tables.iter().cloned().collect();
    if !tables.contains(&fact) {
        return Err(unsupported(&format!("query without fact table `{fact}`")));
    }

    let mut join_edges = BTreeSet::new();
    let mut restrictions = Vec::new();
    for p in raw.preds {
        match p {
            RawPred::Cmp(Operand::Col(a), Cmp::Eq, Operand::Col(b)) => {
                let (a, b) = (scope.resolve(&a)?, scope.resolve(&b)?);
                join_edges.insert(join_edge(catalog, a, b)?);
            }
            RawPred::Cmp(Operand::Col(_), _, Operand::Col(_)) => {
                return Err(unsupported("column-to-column inequality"));
            }
            RawPred::Cmp(Operand::Lit(_), _, Operand::Lit(_)) => {
                return Err(unsupported("literal-only predicate"));
            }
            RawPred::Cmp(lhs, cmp, rhs) => {
                let (col, cmp, value) = match (lhs, rhs) {
                    (Operand::Col(c), Operand::Lit(v)) => (c, cmp, v),
                    (Operand::Lit(v), Operand::Col(c)) => (c, cmp.flipped(), v),
                    _ => unreachable!(),
                };
                let attribute = scope.resolve(&col)?;
                let op = match cmp {
                    Cmp::Eq => PredicateOp::Eq(value),
                    _ => range(cmp, value),
                };
                restrictions.push(Predicate { attribute, op });
            }
            RawPred::Between(col, lo, hi) => restrictions.push(Predicate {
                attribute: scope.resolve(&col)?,
                op: PredicateOp::Range {
                    lower: Some(Bound {
                        value: lo,
                        inclusive: true,
                    }),
                    upper: Some(Bound {
                        value: hi,
                        inclusive: true,
                    }),
                },
            }),
            RawPred::In(col, list) => restrictions.push(Predicate {
                attribute: scope.resolve(&col)?,
                op: PredicateOp::In(list),
            }),
        }
    }

    for t in &tables {
        if !join_edges
            .iter()
            .any(|e| &e.left.table == t || &e.right.table == t)
            && *t != fact
        {
            return Err(unsupported(&format!("cross join with `{t}`")));
        }
    }

    let mut group_by = Vec::new();
    for c in &raw.group_by {
        let a = scope.resolve(c)?;
        if !group_by.contains(&a) {
            group_by.push(a);
        }
    }

    let mut aggregates = Vec::new();
    for item in raw.items {
        match item {
            SelectItem::Star => return Err(unsupported("SELECT *")),
            SelectItem::Column(c) => {
                let a = scope.resolve(&c)?;
                if !group_by.contains(&a) {
                    return Err(unsupported(&format!(
                        "non-aggregated column `{a}` outside GROUP BY"
                    )));
                }
            }
            SelectItem::Agg(func, arg) => {
                let arg = match arg {
                    None => AggArg::Star,
                    Some(c) => AggArg::Column(scope.resolve(&c)?),
                };
                let agg = Aggregate { func, arg };
                if !aggregates.contains(&agg) {
                    aggregates.push(agg);
                }
            }
        }
    }

    Ok(ParsedQuery {
        id: 0,
        tables,
        join_edges,
        restrictions,
        group_by,
        aggregates,
    })
}

fn join_edge(catalog: &Catalog, a: AttrRef, b: AttrRef) -> Result<JoinEdge, AnalyzeError> {
    let fact = catalog.fact();
    let is_fk_edge = |l: &AttrRef, r: &AttrRef| {
        l.table == fact.name
            && fact
                .foreign_keys
                .iter()
                .any(|fk| fk.column == l.column && &fk.references == r)
    };
    if is_fk_edge(&a, &b) {
        Ok(JoinEdge { left: a, right: b })
    } else if is_fk_edge(&b, &a) {
        Ok(JoinEdge { left: b, right: a })
    } else {
        Err(unsupported(&format!(
            "join on non-foreign-key columns {a} = {b}"
        )))
    }
}
