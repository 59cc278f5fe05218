use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{view_column_name, CandidateId};
use crate::analyzer::JoinEdge;
use crate::catalog::{AttrRef, Catalog};
use crate::miner::Itemset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    BTree,
    BitmapJoin,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexTarget {
    Table(String),
    View(CandidateId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateIndex {
    pub id: CandidateId,
    pub kind: IndexKind,
    /// Indexed table: the fact table for bitmap join indexes, the owning
    /// table or the view for B-trees.
    pub target: IndexTarget,
    /// Key attributes in index order. A bitmap join index has exactly one,
    /// a dimension attribute; an index on a view names the base attribute
    /// behind the view column.
    pub key: Vec<AttrRef>,
    /// Fact-to-dimension join a bitmap join index is defined over.
    pub join: Option<JoinEdge>,
    pub size_bytes: Option<u64>,
}

impl CandidateIndex {
    pub fn bitmap_join(catalog: &Catalog, attr: &AttrRef) -> Option<CandidateIndex> {
        if !catalog.is_bitmap_joinable(attr) {
            return None;
        }
        let fact = catalog.fact();
        let fk = catalog.fact_fk_to(&attr.table)?;
        Some(CandidateIndex {
            id: CandidateId::new(format!("bj_{}__{}", attr.table, attr.column)),
            kind: IndexKind::BitmapJoin,
            target: IndexTarget::Table(fact.name.clone()),
            key: vec![attr.clone()],
            join: Some(JoinEdge {
                left: AttrRef::new(fact.name.clone(), fk.column.clone()),
                right: fk.references.clone(),
            }),
            size_bytes: None,
        })
    }

    /// B-tree over columns of one base table, in the given order.
    pub fn btree(table: &str, columns: &[AttrRef]) -> CandidateIndex {
        debug_assert!(columns.iter().all(|c| c.table == table));
        let cols: Vec<&str> = columns.iter().map(|c| c.column.as_str()).collect();
        CandidateIndex {
            id: CandidateId::new(format!("bt_{table}__{}", cols.join("__"))),
            kind: IndexKind::BTree,
            target: IndexTarget::Table(table.to_string()),
            key: columns.to_vec(),
            join: None,
            size_bytes: None,
        }
    }

    /// Single-column B-tree on a view's dimension column.
    pub fn on_view(view: &CandidateId, attr: &AttrRef) -> CandidateIndex {
        CandidateIndex {
            id: CandidateId::new(format!("ix_{view}__{}__{}", attr.table, attr.column)),
            kind: IndexKind::BTree,
            target: IndexTarget::View(view.clone()),
            key: vec![attr.clone()],
            join: None,
            size_bytes: None,
        }
    }

    pub fn to_ddl(&self) -> String {
        match (&self.kind, &self.target) {
            (IndexKind::BitmapJoin, IndexTarget::Table(fact)) => {
                let join = self.join.as_ref().expect("bitmap join index has a join");
                format!(
                    "CREATE BITMAP INDEX {} ON {fact}({}) FROM {fact}, {} WHERE {} = {};",
                    self.id, self.key[0], join.right.table, join.left, join.right
                )
            }
            (IndexKind::BTree, IndexTarget::Table(table)) => {
                let cols: Vec<&str> = self.key.iter().map(|c| c.column.as_str()).collect();
                format!("CREATE INDEX {} ON {table}({});", self.id, cols.join(", "))
            }
            (_, IndexTarget::View(view)) => {
                let cols: Vec<String> = self.key.iter().map(view_column_name).collect();
                format!("CREATE INDEX {} ON {view}({});", self.id, cols.join(", "))
            }
        }
    }
}

/// Turns frequent itemsets into index candidates:
///
/// * every non-key dimension attribute yields a bitmap join index over its
///   foreign-key join with the fact table;
/// * every attribute yields a single-column B-tree on its table;
/// * every multi-attribute itemset lying on one table yields a composite
///   B-tree, columns by descending cardinality (then name).
///
/// Duplicates coalesce by id; the output is sorted by id.
pub fn indexes_from_itemsets(itemsets: &[Itemset], catalog: &Catalog) -> Vec<CandidateIndex> {
    let mut out: BTreeMap<CandidateId, CandidateIndex> = BTreeMap::new();
    let mut add = |ix: CandidateIndex| {
        out.entry(ix.id.clone()).or_insert(ix);
    };
    for it in itemsets {
        for attr in &it.attributes {
            if catalog.column(attr).is_err() {
                continue;
            }
            if let Some(bj) = CandidateIndex::bitmap_join(catalog, attr) {
                add(bj);
            }
            add(CandidateIndex::btree(
                &attr.table,
                std::slice::from_ref(attr),
            ));
        }
        let first = it.attributes.iter().next();
        if it.attributes.len() > 1
            && it
                .attributes
                .iter()
                .all(|a| Some(&a.table) == first.map(|f| &f.table))
            && it.attributes.iter().all(|a| catalog.column(a).is_ok())
        {
            let mut cols: Vec<AttrRef> = it.attributes.iter().cloned().collect();
            cols.sort_by(|a, b| {
                let ca = catalog.column(a).map_or(0, |c| c.cardinality);
                let cb = catalog.column(b).map_or(0, |c| c.cardinality);
                cb.cmp(&ca).then_with(|| a.cmp(b))
            });
            add(CandidateIndex::btree(&cols[0].table.clone(), &cols));
        }
    }
    out.into_values().collect()
}
