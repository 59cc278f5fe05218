use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnalyzeError, ParsedQuery};
use crate::catalog::AttrRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    WhereRestriction,
    WhereJoin,
    GroupBy,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::WhereRestriction => "where-restriction",
            Clause::WhereJoin => "where-join",
            Clause::GroupBy => "group-by",
        })
    }
}

impl FromStr for Clause {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "where-restriction" | "restriction" => Ok(Clause::WhereRestriction),
            "where-join" | "join" => Ok(Clause::WhereJoin),
            "group-by" | "groupby" => Ok(Clause::GroupBy),
            other => Err(format!("unknown clause `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleAction {
    Extract,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtractionRule {
    pub clause: Clause,
    pub action: RuleAction,
}

/// Ordered if-then rules. For each clause the first matching rule decides;
/// clauses without a rule are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRuleSet {
    rules: Vec<ExtractionRule>,
}

impl ExtractionRuleSet {
    pub fn new(rules: Vec<ExtractionRule>) -> Result<Self, AnalyzeError> {
        if !rules.iter().any(|r| r.action == RuleAction::Extract) {
            return Err(AnalyzeError::NoExtractRule);
        }
        Ok(ExtractionRuleSet { rules })
    }

    /// Extract only from the listed clauses.
    pub fn only(clauses: &[Clause]) -> Result<Self, AnalyzeError> {
        Self::new(
            clauses
                .iter()
                .map(|&clause| ExtractionRule {
                    clause,
                    action: RuleAction::Extract,
                })
                .collect(),
        )
    }

    pub fn rules(&self) -> &[ExtractionRule] {
        &self.rules
    }

    pub fn extracts(&self, clause: Clause) -> bool {
        self.rules
            .iter()
            .find(|r| r.clause == clause)
            .is_some_and(|r| r.action == RuleAction::Extract)
    }
}

impl Default for ExtractionRuleSet {
    fn default() -> Self {
        Self::only(&[Clause::WhereRestriction, Clause::WhereJoin, Clause::GroupBy])
            .expect("non-empty")
    }
}

/// Attributes selected from a query by the enabled rules. Aggregate arguments
/// are never extracted.
pub fn extract_attributes(q: &ParsedQuery, rules: &ExtractionRuleSet) -> BTreeSet<AttrRef> {
    let mut out = BTreeSet::new();
    if rules.extracts(Clause::WhereRestriction) {
        out.extend(q.restrictions.iter().map(|p| p.attribute.clone()));
    }
    if rules.extracts(Clause::WhereJoin) {
        for e in &q.join_edges {
            out.insert(e.left.clone());
            out.insert(e.right.clone());
        }
    }
    if rules.extracts(Clause::GroupBy) {
        out.extend(q.group_by.iter().cloned());
    }
    out
}
