use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{view_column_name, CandidateError, CandidateId, CandidateIndex};
use crate::analyzer::{AggArg, AggFunc, Aggregate, JoinEdge, ParsedQuery};
use crate::catalog::{AttrRef, Catalog};
use crate::miner::QueryCluster;

/// A fact-grain aggregate view: `SELECT dims, aggs FROM star-join GROUP BY dims`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateView {
    pub id: CandidateId,
    /// Ids of the workload queries whose cluster produced the view.
    pub source_queries: Vec<usize>,
    pub dimensions: BTreeSet<AttrRef>,
    pub aggregates: BTreeSet<Aggregate>,
    pub tables: BTreeSet<String>,
    pub joins: BTreeSet<JoinEdge>,
    pub estimated_rows: Option<u64>,
    pub size_bytes: Option<u64>,
    pub secondary_indexes: Vec<CandidateIndex>,
}

impl CandidateView {
    /// Assembles a view from its structural parts; the id is a hash of them.
    pub fn new(
        catalog: &Catalog,
        dimensions: BTreeSet<AttrRef>,
        aggregates: BTreeSet<Aggregate>,
        extra_tables: impl IntoIterator<Item = String>,
    ) -> CandidateView {
        let fact = catalog.fact().name.clone();
        let mut tables: BTreeSet<String> = extra_tables.into_iter().collect();
        tables.insert(fact.clone());
        tables.extend(dimensions.iter().map(|a| a.table.clone()));
        tables.extend(
            aggregates
                .iter()
                .filter_map(|a| a.column())
                .map(|a| a.table.clone()),
        );
        let joins = tables
            .iter()
            .filter(|t| **t != fact)
            .filter_map(|t| catalog.fact_fk_to(t))
            .map(|fk| JoinEdge {
                left: AttrRef::new(fact.clone(), fk.column.clone()),
                right: fk.references.clone(),
            })
            .collect();
        let description = format!(
            "dims={};aggs={};tables={}",
            dimensions
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
            aggregates
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
            tables.iter().cloned().collect::<Vec<_>>().join(","),
        );
        CandidateView {
            id: CandidateId::hashed("mv_", &description),
            source_queries: Vec::new(),
            dimensions,
            aggregates,
            tables,
            joins,
            estimated_rows: None,
            size_bytes: None,
            secondary_indexes: Vec::new(),
        }
    }

    pub fn has_aggregate(&self, func: AggFunc, arg: &AggArg) -> bool {
        self.aggregates.contains(&Aggregate {
            func,
            arg: arg.clone(),
        })
    }

    pub fn aggregate_column_name(agg: &Aggregate) -> String {
        match &agg.arg {
            AggArg::Star => format!("{}_all", agg.func.name().to_ascii_lowercase()),
            AggArg::Column(a) => format!(
                "{}_{}",
                agg.func.name().to_ascii_lowercase(),
                view_column_name(a)
            ),
        }
    }

    pub fn to_ddl(&self) -> String {
        let mut select: Vec<String> = self
            .dimensions
            .iter()
            .map(|d| format!("{d} AS {}", view_column_name(d)))
            .collect();
        select.extend(
            self.aggregates
                .iter()
                .map(|a| format!("{a} AS {}", Self::aggregate_column_name(a))),
        );
        let mut sql = format!(
            "CREATE MATERIALIZED VIEW {} AS SELECT {} FROM {}",
            self.id,
            select.join(", "),
            self.tables.iter().cloned().collect::<Vec<_>>().join(", ")
        );
        if !self.joins.is_empty() {
            let joins: Vec<String> = self.joins.iter().map(|j| j.to_string()).collect();
            sql.push_str(&format!(" WHERE {}", joins.join(" AND ")));
        }
        if !self.dimensions.is_empty() {
            let dims: Vec<String> = self.dimensions.iter().map(|d| d.to_string()).collect();
            sql.push_str(&format!(" GROUP BY {}", dims.join(", ")));
        }
        sql.push(';');
        sql
    }
}

/// Aggregates a view stores to serve `agg` by re-aggregation. AVG is kept as
/// SUM plus COUNT(*); COUNT(column) equals COUNT(*) since columns carry no
/// nulls in this model.
fn stored_aggregates(agg: &Aggregate) -> Vec<Aggregate> {
    match (agg.func, &agg.arg) {
        (AggFunc::Avg, arg) => vec![Aggregate {
            func: AggFunc::Sum,
            arg: arg.clone(),
        }],
        (AggFunc::Count, _) => vec![],
        _ => vec![agg.clone()],
    }
}

fn members<'a>(
    cluster: &QueryCluster,
    workload: &'a [ParsedQuery],
) -> Result<Vec<&'a ParsedQuery>, CandidateError> {
    cluster
        .queries
        .iter()
        .map(|id| {
            workload
                .iter()
                .find(|q| q.id == *id)
                .ok_or(CandidateError::UnknownQuery(*id))
        })
        .collect()
}

/// Merges the queries of one cluster into a single view able to answer each
/// of them: restrictions are lifted into grouping dimensions, aggregates are
/// unioned in rollup-able form, and COUNT(*) is always stored.
pub fn view_from_cluster(
    cluster: &QueryCluster,
    workload: &[ParsedQuery],
    catalog: &Catalog,
) -> Result<CandidateView, CandidateError> {
    if cluster.queries.is_empty() {
        return Err(CandidateError::EmptyCluster);
    }
    let members = members(cluster, workload)?;
    let mut dims = BTreeSet::new();
    let mut aggs = BTreeSet::from([Aggregate::count_star()]);
    let mut tables = BTreeSet::new();
    for q in &members {
        dims.extend(q.group_by.iter().cloned());
        dims.extend(q.restrictions.iter().map(|p| p.attribute.clone()));
        aggs.extend(q.aggregates.iter().flat_map(stored_aggregates));
        tables.extend(q.tables.iter().cloned());
    }
    for a in dims.iter().chain(aggs.iter().filter_map(|a| a.column())) {
        catalog.column(a)?;
    }
    let mut view = CandidateView::new(catalog, dims, aggs, tables);
    view.source_queries = cluster.queries.clone();
    view.secondary_indexes = indexes_on_view(&view, workload);
    Ok(view)
}

/// One single-column B-tree per view dimension restricted by at least one
/// source query of the view.
pub fn indexes_on_view(view: &CandidateView, workload: &[ParsedQuery]) -> Vec<CandidateIndex> {
    let restricted: BTreeSet<&AttrRef> = workload
        .iter()
        .filter(|q| view.source_queries.contains(&q.id))
        .flat_map(|q| q.restrictions.iter().map(|p| &p.attribute))
        .filter(|a| view.dimensions.contains(*a))
        .collect();
    restricted
        .into_iter()
        .map(|a| CandidateIndex::on_view(&view.id, a))
        .collect()
}

/// Views for every cluster, coalesced by id and sorted by id.
pub fn views_from_clusters(
    clusters: &[QueryCluster],
    workload: &[ParsedQuery],
    catalog: &Catalog,
) -> Result<Vec<CandidateView>, CandidateError> {
    let mut out: BTreeMap<CandidateId, CandidateView> = BTreeMap::new();
    for c in clusters {
        let v = view_from_cluster(c, workload, catalog)?;
        match out.get_mut(&v.id) {
            Some(existing) => {
                existing.source_queries.extend(v.source_queries);
                existing.source_queries.sort_unstable();
                existing.source_queries.dedup();
                let sec = indexes_on_view(existing, workload);
                existing.secondary_indexes = sec;
            }
            None => {
                out.insert(v.id.clone(), v);
            }
        }
    }
    Ok(out.into_values().collect())
}

/// Subsumption: the view's rows suffice to compute `q` by selection on its
/// dimensions and re-aggregation.
pub fn can_answer(view: &CandidateView, q: &ParsedQuery) -> bool {
    q.tables.is_subset(&view.tables)
        && q.group_by.iter().all(|a| view.dimensions.contains(a))
        && q.restrictions
            .iter()
            .all(|p| view.dimensions.contains(&p.attribute))
        && q.aggregates.iter().all(|agg| match (agg.func, &agg.arg) {
            (AggFunc::Count, _) => view.has_aggregate(AggFunc::Count, &AggArg::Star),
            (AggFunc::Avg, arg) => {
                view.has_aggregate(AggFunc::Sum, arg)
                    && view.has_aggregate(AggFunc::Count, &AggArg::Star)
            }
            (func, arg) => view.has_aggregate(func, arg),
        })
}
