use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::AttrRef;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bound {
    pub value: Literal,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateOp {
    Eq(Literal),
    In(Vec<Literal>),
    Range {
        lower: Option<Bound>,
        upper: Option<Bound>,
    },
}

impl PredicateOp {
    pub fn matches(&self, v: &Literal) -> bool {
        match self {
            PredicateOp::Eq(x) => v == x,
            PredicateOp::In(xs) => xs.contains(v),
            PredicateOp::Range { lower, upper } => {
                let above = lower.as_ref().is_none_or(|b| {
                    if b.inclusive {
                        v >= &b.value
                    } else {
                        v > &b.value
                    }
                });
                let below = upper.as_ref().is_none_or(|b| {
                    if b.inclusive {
                        v <= &b.value
                    } else {
                        v < &b.value
                    }
                });
                above && below
            }
        }
    }
}

/// A restriction `attribute op value(s)` from the WHERE conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub attribute: AttrRef,
    pub op: PredicateOp,
}

/// Equality join between a fact foreign key (`left`) and the primary key of
/// a dimension (`right`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JoinEdge {
    pub left: AttrRef,
    pub right: AttrRef,
}

impl fmt::Display for JoinEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggFunc {
    Sum,
    Count,
    Min,
    Max,
    Avg,
}

impl AggFunc {
    pub fn from_keyword(s: &str) -> Option<AggFunc> {
        Some(match s.to_ascii_uppercase().as_str() {
            "SUM" => AggFunc::Sum,
            "COUNT" => AggFunc::Count,
            "MIN" => AggFunc::Min,
            "MAX" => AggFunc::Max,
            "AVG" => AggFunc::Avg,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Sum => "SUM",
            AggFunc::Count => "COUNT",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
            AggFunc::Avg => "AVG",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggArg {
    Star,
    Column(AttrRef),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Aggregate {
    pub func: AggFunc,
    pub arg: AggArg,
}

impl Aggregate {
    pub fn count_star() -> Aggregate {
        Aggregate {
            func: AggFunc::Count,
            arg: AggArg::Star,
        }
    }

    pub fn column(&self) -> Option<&AttrRef> {
        match &self.arg {
            AggArg::Column(a) => Some(a),
            AggArg::Star => None,
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            AggArg::Star => write!(f, "{}(*)", self.func.name()),
            AggArg::Column(a) => write!(f, "{}({a})", self.func.name()),
        }
    }
}

/// Structural form of one workload statement, with every attribute resolved
/// to its `table.column` name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedQuery {
    pub id: usize,
    pub tables: BTreeSet<String>,
    pub join_edges: BTreeSet<JoinEdge>,
    pub restrictions: Vec<Predicate>,
    pub group_by: Vec<AttrRef>,
    pub aggregates: Vec<Aggregate>,
}

impl ParsedQuery {
    pub fn restriction_attributes(&self) -> BTreeSet<&AttrRef> {
        self.restrictions.iter().map(|p| &p.attribute).collect()
    }
}
