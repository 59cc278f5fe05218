//! Data mining over the query-attribute matrix: frequent itemsets feed index
//! candidates, query clusters feed view candidates.

mod apriori;
mod cluster;

use std::io::Write;

use thiserror::Error;

pub use apriori::{mine_frequent_itemsets, mine_frequent_itemsets_bounded, Itemset};
pub use cluster::{cluster_queries, jaccard, QueryCluster};

pub const DEFAULT_MINSUP: f64 = 0.25;
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MineError {
    #[error("minimum support must lie in (0, 1], got {0}")]
    InvalidMinsup(f64),
    #[error("similarity threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("row length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Debug dump, `attributes;support` with attributes comma-joined.
pub fn write_itemsets_csv<W: Write>(itemsets: &[Itemset], w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().delimiter(b';').from_writer(w);
    out.write_record(["attributes", "support"])?;
    for it in itemsets {
        let attrs: Vec<String> = it.attributes.iter().map(|a| a.to_string()).collect();
        out.write_record([attrs.join(","), format!("{:.6}", it.support())])?;
    }
    out.flush()?;
    Ok(())
}

/// Debug dump, `cluster_id;query_ids` with ids comma-joined.
pub fn write_clusters_csv<W: Write>(clusters: &[QueryCluster], w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().delimiter(b';').from_writer(w);
    out.write_record(["cluster_id", "query_ids"])?;
    for (i, c) in clusters.iter().enumerate() {
        let ids: Vec<String> = c.queries.iter().map(|q| q.to_string()).collect();
        out.write_record([i.to_string(), ids.join(",")])?;
    }
    out.flush()?;
    Ok(())
}
