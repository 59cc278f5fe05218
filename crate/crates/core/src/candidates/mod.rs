//! Candidate physical structures: bitmap join and B-tree indexes derived from
//! frequent itemsets, and merged aggregate views derived from query clusters,
//! each view carrying B-tree indexes on its restricted dimensions.

mod ddl;
mod index;
mod view;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyzer::AnalyzeError;
use crate::catalog::CatalogError;

pub use ddl::{read_ddl, DdlStatement};
pub use index::{indexes_from_itemsets, CandidateIndex, IndexKind, IndexTarget};
pub use view::{
    can_answer, indexes_on_view, view_from_cluster, views_from_clusters, CandidateView,
};

#[derive(Debug, Error)]
pub enum CandidateError {
    #[error("cluster has no member queries")]
    EmptyCluster,
    #[error("cluster references query {0} absent from the workload")]
    UnknownQuery(usize),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("DDL: {0}")]
    Ddl(#[from] AnalyzeError),
}

/// Content-derived identifier of a candidate structure. Equal descriptions
/// give equal ids, independent of generation order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(String);

impl CandidateId {
    pub fn new(s: impl Into<String>) -> Self {
        CandidateId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn hashed(prefix: &str, description: &str) -> Self {
        let digest = Sha256::digest(description.as_bytes());
        CandidateId(format!("{prefix}{}", &hex::encode(digest)[..12]))
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum Candidate {
    Index(CandidateIndex),
    View(CandidateView),
}

impl Candidate {
    pub fn id(&self) -> &CandidateId {
        match self {
            Candidate::Index(ix) => &ix.id,
            Candidate::View(v) => &v.id,
        }
    }

    pub fn size_bytes(&self) -> Option<u64> {
        match self {
            Candidate::Index(ix) => ix.size_bytes,
            Candidate::View(v) => v.size_bytes,
        }
    }

    /// The view a secondary index depends on.
    pub fn parent_view(&self) -> Option<&CandidateId> {
        match self {
            Candidate::Index(CandidateIndex {
                target: IndexTarget::View(v),
                ..
            }) => Some(v),
            _ => None,
        }
    }

    pub fn is_view(&self) -> bool {
        matches!(self, Candidate::View(_))
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            Candidate::View(_) => "materialized_view",
            Candidate::Index(ix) => match (ix.kind, &ix.target) {
                (IndexKind::BitmapJoin, _) => "bitmap_join_index",
                (IndexKind::BTree, IndexTarget::Table(_)) => "btree_index",
                (IndexKind::BTree, IndexTarget::View(_)) => "view_btree_index",
            },
        }
    }

    pub fn to_ddl(&self) -> String {
        match self {
            Candidate::Index(ix) => ix.to_ddl(),
            Candidate::View(v) => v.to_ddl(),
        }
    }
}

/// Column name of a base attribute inside a materialized view.
pub(crate) fn view_column_name(attr: &crate::catalog::AttrRef) -> String {
    format!("{}_{}", attr.table, attr.column)
}
