//! End-to-end advisor: workload text to a sized candidate pool, then to a
//! recommended configuration with its cost report.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analyzer::{
    build_matrix, parse_workload, AnalyzeError, ExtractionRuleSet, ParsedQuery,
    QueryAttributeMatrix,
};
use crate::candidates::{
    indexes_from_itemsets, views_from_clusters, Candidate, CandidateError, CandidateId,
    CandidateIndex, CandidateView,
};
use crate::catalog::Catalog;
use crate::cost::{size_candidates, workload_cost, Configuration, CostBreakdown, CostError};
use crate::miner::{cluster_queries, mine_frequent_itemsets, Itemset, MineError, QueryCluster};
use crate::selector::{select, SelectError, Selection, SelectionParams, Strategy, TraceEntry};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("unknown structure id `{0}`")]
    UnknownStructureId(String),
}

/// Workload, mining results and the sized candidate pool.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub workload: Vec<ParsedQuery>,
    pub matrix: QueryAttributeMatrix,
    pub itemsets: Vec<Itemset>,
    pub clusters: Vec<QueryCluster>,
    pub indexes: Vec<CandidateIndex>,
    pub views: Vec<CandidateView>,
}

impl Analysis {
    pub fn run(
        workload_sql: &str,
        catalog: &Catalog,
        minsup: f64,
        tau: f64,
    ) -> Result<Analysis, PipelineError> {
        let workload = parse_workload(workload_sql, catalog)?;
        Self::from_workload(workload, catalog, minsup, tau)
    }

    pub fn from_workload(
        workload: Vec<ParsedQuery>,
        catalog: &Catalog,
        minsup: f64,
        tau: f64,
    ) -> Result<Analysis, PipelineError> {
        let matrix = build_matrix(&workload, &ExtractionRuleSet::default())?;
        let itemsets = mine_frequent_itemsets(&matrix, minsup)?;
        let clusters = cluster_queries(&matrix, tau)?;
        let mut indexes = indexes_from_itemsets(&itemsets, catalog);
        let mut views = views_from_clusters(&clusters, &workload, catalog)?;
        size_candidates(&mut indexes, &mut views, catalog)?;
        Ok(Analysis {
            workload,
            matrix,
            itemsets,
            clusters,
            indexes,
            views,
        })
    }

    /// Every candidate: base indexes, views, then indexes on views.
    pub fn all_candidates(&self) -> impl Iterator<Item = Candidate> + '_ {
        self.indexes
            .iter()
            .cloned()
            .map(Candidate::Index)
            .chain(self.views.iter().cloned().map(Candidate::View))
            .chain(
                self.views
                    .iter()
                    .flat_map(|v| v.secondary_indexes.iter().cloned().map(Candidate::Index)),
            )
    }

    /// Rebuilds a configuration from structure ids emitted by an earlier run.
    pub fn configuration_from_ids<S: AsRef<str>>(
        &self,
        ids: &[S],
    ) -> Result<Configuration, PipelineError> {
        let picked = ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                self.all_candidates()
                    .find(|c| c.id().as_str() == id)
                    .ok_or_else(|| PipelineError::UnknownStructureId(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Configuration::from_candidates(picked)?)
    }

    pub fn select(
        &self,
        params: &SelectionParams,
        catalog: &Catalog,
    ) -> Result<Selection, PipelineError> {
        Ok(select(
            params,
            &self.indexes,
            &self.views,
            &self.workload,
            catalog,
        )?)
    }

    pub fn explain(
        &self,
        config: &Configuration,
        catalog: &Catalog,
    ) -> Result<CostBreakdown, PipelineError> {
        Ok(workload_cost(&self.workload, config, catalog)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub minsup: f64,
    pub tau: f64,
    pub budget_bytes: u64,
    pub strategy: Strategy,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolSummary {
    pub queries: usize,
    pub attributes: usize,
    pub frequent_itemsets: usize,
    pub clusters: usize,
    pub index_candidates: usize,
    pub view_candidates: usize,
    pub view_index_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureSummary {
    pub id: CandidateId,
    pub kind: &'static str,
    pub size_bytes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub view: Option<CandidateId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub baseline_pages: u64,
    pub final_pages: u64,
    pub saving_fraction: f64,
}

impl CostSummary {
    fn new(baseline_pages: u64, final_pages: u64) -> Self {
        let saving_fraction = if baseline_pages == 0 {
            0.0
        } else {
            1.0 - final_pages as f64 / baseline_pages as f64
        };
        CostSummary {
            baseline_pages,
            final_pages,
            saving_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub final_pages: u64,
    pub total_size_bytes: u64,
    pub structures: Vec<CandidateId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub parameters: Parameters,
    pub pool: PoolSummary,
    pub total_size_bytes: u64,
    pub structures: Vec<StructureSummary>,
    pub ddl: Vec<String>,
    pub cost: CostSummary,
    pub breakdown: CostBreakdown,
    pub comparison: Vec<StrategyOutcome>,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

/// Views before indexes so the DDL can be applied in order.
fn ordered(config: &Configuration) -> Vec<&Candidate> {
    let mut out: Vec<&Candidate> = config.structures().collect();
    out.sort_by_key(|c| (!c.is_view(), c.id().clone()));
    out
}

pub fn recommend(
    analysis: &Analysis,
    catalog: &Catalog,
    minsup: f64,
    tau: f64,
    params: &SelectionParams,
) -> Result<Recommendation, PipelineError> {
    let baseline = analysis.explain(&Configuration::new(), catalog)?.total;
    let chosen = analysis.select(params, catalog)?;
    let comparison = Strategy::ALL
        .into_iter()
        .map(|strategy| {
            let s = if strategy == params.strategy {
                chosen.clone()
            } else {
                analysis.select(
                    &SelectionParams {
                        strategy,
                        ..*params
                    },
                    catalog,
                )?
            };
            Ok(StrategyOutcome {
                strategy,
                final_pages: s.cost.total,
                total_size_bytes: s.configuration.total_size_bytes(),
                structures: s.configuration.ids().cloned().collect(),
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;

    let structures = ordered(&chosen.configuration);
    Ok(Recommendation {
        parameters: Parameters {
            minsup,
            tau,
            budget_bytes: params.budget_bytes,
            strategy: params.strategy,
            alpha: params.alpha,
        },
        pool: PoolSummary {
            queries: analysis.workload.len(),
            attributes: analysis.matrix.n_cols(),
            frequent_itemsets: analysis.itemsets.len(),
            clusters: analysis.clusters.len(),
            index_candidates: analysis.indexes.len(),
            view_candidates: analysis.views.len(),
            view_index_candidates: analysis
                .views
                .iter()
                .map(|v| v.secondary_indexes.len())
                .sum(),
        },
        total_size_bytes: chosen.configuration.total_size_bytes(),
        ddl: structures.iter().map(|c| c.to_ddl()).collect(),
        structures: structures
            .iter()
            .map(|c| StructureSummary {
                id: c.id().clone(),
                kind: c.kind_label(),
                size_bytes: c.size_bytes().unwrap_or_default(),
                view: c.parent_view().cloned(),
            })
            .collect(),
        cost: CostSummary::new(baseline, chosen.cost.total),
        breakdown: chosen.cost,
        comparison,
        trace: chosen.trace,
    })
}

impl Recommendation {
    /// Identifiers of the chosen structures, one per line.
    pub fn configuration_text(&self) -> String {
        self.structures
            .iter()
            .map(|s| format!("{}\n", s.id))
            .collect()
    }

    pub fn ddl_text(&self) -> String {
        self.ddl.iter().map(|d| format!("{d}\n")).collect()
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|t| format!("{t}\n")).collect()
    }

    pub fn to_text(&self) -> String {
        let p = &self.parameters;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "parameters: minsup={} tau={} budget={} strategy={} alpha={}",
            p.minsup, p.tau, p.budget_bytes, p.strategy, p.alpha
        );
        let pool = &self.pool;
        let _ = writeln!(
            out,
            "pool: {} queries, {} attributes, {} frequent itemsets, {} clusters, {} index / {} view / {} view-index candidates",
            pool.queries,
            pool.attributes,
            pool.frequent_itemsets,
            pool.clusters,
            pool.index_candidates,
            pool.view_candidates,
            pool.view_index_candidates
        );
        let _ = writeln!(out, "\nconfiguration ({} bytes):", self.total_size_bytes);
        if self.structures.is_empty() {
            out.push_str("  (empty)\n");
        }
        for s in &self.structures {
            let _ = writeln!(out, "  {}  {}  {} bytes", s.id, s.kind, s.size_bytes);
        }
        let c = &self.cost;
        let _ = writeln!(
            out,
            "\ncost: baseline {} pages, final {} pages, saving {:.4}",
            c.baseline_pages, c.final_pages, c.saving_fraction
        );
        let _ = writeln!(out, "\nper query:");
        out.push_str(&self.breakdown.to_text());
        let _ = writeln!(out, "\nstrategy comparison:");
        for o in &self.comparison {
            let _ = writeln!(
                out,
                "  {:<12}  {:>8} pages  {:>10} bytes  {} structures",
                o.strategy.name(),
                o.final_pages,
                o.total_size_bytes,
                o.structures.len()
            );
        }
        let _ = writeln!(out, "\nddl:");
        for d in &self.ddl {
            let _ = writeln!(out, "  {d}");
        }
        out
    }
}
