//! Syntactic workload analysis: SQL statements to [`ParsedQuery`] values,
//! if-then attribute extraction, and the query-attribute binary matrix.

pub(crate) mod lexer;
mod matrix;
pub(crate) mod parser;
mod query;
mod rules;
mod workload;

use thiserror::Error;

pub use matrix::{build_matrix, QueryAttributeMatrix};
pub use parser::parse_query;
pub use query::{
    AggArg, AggFunc, Aggregate, Bound, JoinEdge, Literal, ParsedQuery, Predicate, PredicateOp,
};
pub use rules::{extract_attributes, Clause, ExtractionRule, ExtractionRuleSet, RuleAction};
pub use workload::{parse_workload, split_statements, Statement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyzeError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("ambiguous column `{0}`")]
    AmbiguousColumn(String),
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("empty workload")]
    EmptyWorkload,
    #[error("extraction rule set has no extract rule")]
    NoExtractRule,
    #[error("statement {ordinal}: {source}")]
    Statement {
        ordinal: usize,
        #[source]
        source: Box<AnalyzeError>,
    },
}
