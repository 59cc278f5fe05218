//! Optimizer-independent cost models. Storage is measured in bytes, access in
//! pages read; there is no CPU term and no caching.
//!
//! Sizes:
//! * bitmap join index: `ceil(|fact| * cardinality / 8)` bytes (one bit per
//!   fact row per distinct value);
//! * B-tree: `rows * (key width + 8)` bytes, rows of the indexed table or view;
//! * view: `min(prod of dimension cardinalities, |fact|)` rows of
//!   `sum(dimension widths) + 8 * stored aggregates` bytes.
//!
//! Access plans, the cheapest applicable one wins (ties: view+index, view,
//! bitmap, btree, scan):
//! * scan: pages of the fact table plus every joined dimension;
//! * bitmap: every restriction attribute has a bitmap join index; reads the
//!   bitmaps, `ceil(sel * fact pages)` fact pages and the dimensions still
//!   needed for grouping or aggregation;
//! * view: pages of a view that can answer the query;
//! * view+index: `ceil(sel * view pages) + 1` with `sel` over the
//!   restrictions covered by B-trees on that view.
//!
//! Selectivity is `1/cardinality` for equality, `k/cardinality` for an IN list
//! of `k` values and `1/3` for a range; conjunctions multiply (independence).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::analyzer::{ParsedQuery, Predicate, PredicateOp};
use crate::candidates::{
    can_answer, Candidate, CandidateId, CandidateIndex, CandidateView, IndexKind, IndexTarget,
};
use crate::catalog::{AttrRef, Catalog, CatalogError};

pub const RANGE_SELECTIVITY: f64 = 1.0 / 3.0;
/// Bytes per stored aggregate value and per B-tree row pointer.
pub const VALUE_BYTES: u64 = 8;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("structure `{0}` has no computed size")]
    UnsizedStructure(CandidateId),
    #[error("index `{index}` requires view `{view}` in the configuration")]
    MissingView {
        index: CandidateId,
        view: CandidateId,
    },
    #[error("structure `{0}` is already in the configuration")]
    DuplicateStructure(CandidateId),
    #[error("index `{0}` targets a view; size it with its view")]
    ViewIndexWithoutView(CandidateId),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub fn index_size(ix: &CandidateIndex, catalog: &Catalog) -> Result<u64, CostError> {
    let key_width = ix
        .key
        .iter()
        .map(|a| catalog.column(a).map(|c| c.width_bytes))
        .sum::<Result<u64, _>>()?;
    match (&ix.kind, &ix.target) {
        (IndexKind::BitmapJoin, _) => {
            let card = catalog.column(&ix.key[0])?.cardinality;
            Ok((catalog.fact().row_count * card).div_ceil(8))
        }
        (IndexKind::BTree, IndexTarget::Table(t)) => {
            Ok(catalog.table(t)?.row_count * (key_width + VALUE_BYTES))
        }
        (IndexKind::BTree, IndexTarget::View(_)) => {
            Err(CostError::ViewIndexWithoutView(ix.id.clone()))
        }
    }
}

/// Size of a B-tree on a view column, given the view's row estimate.
pub fn view_index_size(
    ix: &CandidateIndex,
    view: &CandidateView,
    catalog: &Catalog,
) -> Result<u64, CostError> {
    let key_width = ix
        .key
        .iter()
        .map(|a| catalog.column(a).map(|c| c.width_bytes))
        .sum::<Result<u64, _>>()?;
    Ok(view_rows(view, catalog)? * (key_width + VALUE_BYTES))
}

/// Capped product of dimension cardinalities; 1 for a global aggregate.
pub fn view_rows(v: &CandidateView, catalog: &Catalog) -> Result<u64, CostError> {
    let cap = catalog.fact().row_count;
    let mut rows: u64 = 1;
    for d in &v.dimensions {
        rows = rows.saturating_mul(catalog.column(d)?.cardinality).min(cap);
    }
    Ok(rows)
}

pub fn view_row_width(v: &CandidateView, catalog: &Catalog) -> Result<u64, CostError> {
    let dims = v
        .dimensions
        .iter()
        .map(|d| catalog.column(d).map(|c| c.width_bytes))
        .sum::<Result<u64, _>>()?;
    Ok(dims + VALUE_BYTES * v.aggregates.len() as u64)
}

pub fn view_size(v: &CandidateView, catalog: &Catalog) -> Result<u64, CostError> {
    Ok(view_rows(v, catalog)? * view_row_width(v, catalog)?)
}

/// Fills `size_bytes` (and view row estimates) on every candidate, including
/// the secondary indexes carried by views.
pub fn size_candidates(
    indexes: &mut [CandidateIndex],
    views: &mut [CandidateView],
    catalog: &Catalog,
) -> Result<(), CostError> {
    for ix in indexes.iter_mut() {
        ix.size_bytes = Some(index_size(ix, catalog)?);
    }
    for v in views.iter_mut() {
        v.estimated_rows = Some(view_rows(v, catalog)?);
        v.size_bytes = Some(view_size(v, catalog)?);
        let sizes = v
            .secondary_indexes
            .iter()
            .map(|ix| view_index_size(ix, v, catalog))
            .collect::<Result<Vec<_>, _>>()?;
        for (ix, s) in v.secondary_indexes.iter_mut().zip(sizes) {
            ix.size_bytes = Some(s);
        }
    }
    Ok(())
}

pub fn selectivity(p: &Predicate, catalog: &Catalog) -> Result<f64, CostError> {
    let card = catalog.column(&p.attribute)?.cardinality as f64;
    Ok(match &p.op {
        PredicateOp::Eq(_) => 1.0 / card,
        PredicateOp::In(values) => (values.len() as f64 / card).min(1.0),
        PredicateOp::Range { .. } => RANGE_SELECTIVITY,
    })
}

/// `ceil(sel * pages)`, at least 1, tolerant of rounding noise in `sel`.
fn fraction_of_pages(sel: f64, pages: u64) -> u64 {
    let x = sel * pages as f64;
    ((x - 1e-9 * x.max(1.0)).ceil() as u64).clamp(1, pages.max(1))
}

/// Physical structures chosen for a workload, with their total size.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Configuration {
    structures: BTreeMap<CandidateId, Candidate>,
    total_size_bytes: u64,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_candidates(
        candidates: impl IntoIterator<Item = Candidate>,
    ) -> Result<Self, CostError> {
        let mut pending: Vec<Candidate> = candidates.into_iter().collect();
        // views first so their indexes find them
        pending.sort_by_key(|c| !c.is_view());
        let mut config = Configuration::new();
        for c in pending {
            config.insert(c)?;
        }
        Ok(config)
    }

    pub fn insert(&mut self, c: Candidate) -> Result<(), CostError> {
        let size = c
            .size_bytes()
            .ok_or_else(|| CostError::UnsizedStructure(c.id().clone()))?;
        if self.structures.contains_key(c.id()) {
            return Err(CostError::DuplicateStructure(c.id().clone()));
        }
        if let Some(view) = c.parent_view() {
            if !self.structures.contains_key(view) {
                return Err(CostError::MissingView {
                    index: c.id().clone(),
                    view: view.clone(),
                });
            }
        }
        self.total_size_bytes += size;
        self.structures.insert(c.id().clone(), c);
        Ok(())
    }

    pub fn with(&self, c: Candidate) -> Result<Self, CostError> {
        let mut next = self.clone();
        next.insert(c)?;
        Ok(next)
    }

    pub fn contains(&self, id: &CandidateId) -> bool {
        self.structures.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &CandidateId> {
        self.structures.keys()
    }

    pub fn structures(&self) -> impl Iterator<Item = &Candidate> {
        self.structures.values()
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    pub fn total_size_bytes(&self) -> u64 {
        self.total_size_bytes
    }

    fn views(&self) -> impl Iterator<Item = &CandidateView> {
        self.structures.values().filter_map(|c| match c {
            Candidate::View(v) => Some(v),
            Candidate::Index(_) => None,
        })
    }

    fn bitmap_on(&self, attr: &AttrRef) -> Option<&CandidateIndex> {
        self.structures.values().find_map(|c| match c {
            Candidate::Index(ix) if ix.kind == IndexKind::BitmapJoin && ix.key[0] == *attr => {
                Some(ix)
            }
            _ => None,
        })
    }

    fn view_btree_on(&self, view: &CandidateId, attr: &AttrRef) -> Option<&CandidateIndex> {
        self.structures.values().find_map(|c| match c {
            Candidate::Index(ix)
                if ix.target == IndexTarget::View(view.clone())
                    && ix.kind == IndexKind::BTree
                    && ix.key.first() == Some(attr) =>
            {
                Some(ix)
            }
            _ => None,
        })
    }
}

/// Access plans in tie-break order: earlier variants win equal costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Plan {
    #[serde(rename = "view+index")]
    ViewIndex,
    #[serde(rename = "view")]
    View,
    #[serde(rename = "bitmap")]
    Bitmap,
    /// B-tree access paths are not costed; kept for report completeness.
    #[serde(rename = "btree")]
    BTree,
    #[serde(rename = "scan")]
    Scan,
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plan::ViewIndex => "view+index",
            Plan::View => "view",
            Plan::Bitmap => "bitmap",
            Plan::BTree => "btree",
            Plan::Scan => "scan",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryCost {
    pub query: usize,
    pub plan: Plan,
    pub pages: u64,
    pub structures: Vec<CandidateId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub queries: Vec<QueryCost>,
    pub total: u64,
}

fn page_count(c: &Candidate, catalog: &Catalog) -> Result<u64, CostError> {
    let size = c
        .size_bytes()
        .ok_or_else(|| CostError::UnsizedStructure(c.id().clone()))?;
    Ok(catalog.pages_for_bytes(size))
}

pub fn query_cost(
    q: &ParsedQuery,
    config: &Configuration,
    catalog: &Catalog,
) -> Result<QueryCost, CostError> {
    let fact = &catalog.fact().name;
    let fact_pages = catalog.table_pages(fact)?;

    let mut dim_pages = 0;
    for t in q.tables.iter().filter(|t| *t != fact) {
        dim_pages += catalog.table_pages(t)?;
    }
    let mut best = QueryCost {
        query: q.id,
        plan: Plan::Scan,
        pages: fact_pages + dim_pages,
        structures: vec![],
    };
    let mut consider = |candidate: QueryCost| {
        if (candidate.pages, candidate.plan, &candidate.structures)
            < (best.pages, best.plan, &best.structures)
        {
            best = candidate;
        }
    };

    if !q.restrictions.is_empty() {
        let attrs: BTreeSet<&AttrRef> = q.restrictions.iter().map(|p| &p.attribute).collect();
        let bitmaps: Option<Vec<&CandidateIndex>> =
            attrs.iter().map(|a| config.bitmap_on(a)).collect();
        if let Some(bitmaps) = bitmaps {
            let mut pages = 0;
            for b in &bitmaps {
                pages += catalog.pages_for_bytes(
                    b.size_bytes
                        .ok_or_else(|| CostError::UnsizedStructure(b.id.clone()))?,
                );
            }
            let mut sel = 1.0;
            for p in &q.restrictions {
                sel *= selectivity(p, catalog)?;
            }
            pages += fraction_of_pages(sel, fact_pages);
            let needed: BTreeSet<&String> = q
                .group_by
                .iter()
                .chain(q.aggregates.iter().filter_map(|a| a.column()))
                .map(|a| &a.table)
                .filter(|t| *t != fact)
                .collect();
            for t in needed {
                pages += catalog.table_pages(t)?;
            }
            consider(QueryCost {
                query: q.id,
                plan: Plan::Bitmap,
                pages,
                structures: bitmaps.iter().map(|b| b.id.clone()).collect(),
            });
        }
    }

    for v in config.views().filter(|v| can_answer(v, q)) {
        let view_candidate = Candidate::View(v.clone());
        let view_pages = page_count(&view_candidate, catalog)?;
        consider(QueryCost {
            query: q.id,
            plan: Plan::View,
            pages: view_pages,
            structures: vec![v.id.clone()],
        });

        let mut covered = Vec::new();
        let mut sel = 1.0;
        for p in &q.restrictions {
            if let Some(ix) = config.view_btree_on(&v.id, &p.attribute) {
                sel *= selectivity(p, catalog)?;
                if !covered.contains(&ix.id) {
                    covered.push(ix.id.clone());
                }
            }
        }
        if !covered.is_empty() {
            covered.sort();
            let mut structures = vec![v.id.clone()];
            structures.extend(covered);
            consider(QueryCost {
                query: q.id,
                plan: Plan::ViewIndex,
                pages: fraction_of_pages(sel, view_pages) + 1,
                structures,
            });
        }
    }
    Ok(best)
}

pub fn workload_cost(
    workload: &[ParsedQuery],
    config: &Configuration,
    catalog: &Catalog,
) -> Result<CostBreakdown, CostError> {
    let queries = workload
        .iter()
        .map(|q| query_cost(q, config, catalog))
        .collect::<Result<Vec<_>, _>>()?;
    let total = queries.iter().map(|q| q.pages).sum();
    Ok(CostBreakdown { queries, total })
}

impl CostBreakdown {
    /// Aligned text, one line per query plus the total.
    pub fn to_text(&self) -> String {
        let rows: Vec<[String; 4]> = self
            .queries
            .iter()
            .map(|q| {
                let used: Vec<&str> = q.structures.iter().map(|s| s.as_str()).collect();
                [
                    q.query.to_string(),
                    q.plan.to_string(),
                    q.pages.to_string(),
                    if used.is_empty() {
                        "-".into()
                    } else {
                        used.join(",")
                    },
                ]
            })
            .collect();
        let header = ["query", "plan", "pages", "structures"];
        let mut widths = header.map(str::len);
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: [&str; 4]| {
            format!(
                "{:>w0$}  {:<w1$}  {:>w2$}  {}\n",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2]
            )
        };
        let mut out = line(header);
        for r in &rows {
            out.push_str(&line([&r[0], &r[1], &r[2], &r[3]]));
        }
        out.push_str(&format!("total pages: {}\n", self.total));
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["query", "plan", "pages", "structures"])?;
        for q in &self.queries {
            let used: Vec<&str> = q.structures.iter().map(|s| s.as_str()).collect();
            out.write_record([
                q.query.to_string(),
                q.plan.to_string(),
                q.pages.to_string(),
                used.join(" "),
            ])?;
        }
        out.write_record(["total", "", &self.total.to_string(), ""])?;
        out.flush()?;
        Ok(())
    }
}
