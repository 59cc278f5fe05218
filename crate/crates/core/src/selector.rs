//! Ascending greedy selection of indexes and views under a storage budget.
//!
//! Each round adds the candidate with the best benefit per byte among those
//! that fit the remaining budget and strictly lower the workload cost.
//! Benefits are recomputed against the current configuration every round, so
//! index/view interactions are accounted for. A view that is too large to beat
//! a scan on its own may still be picked together with one of its indexes in
//! a single round.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::ParsedQuery;
use crate::candidates::{Candidate, CandidateId, CandidateIndex, CandidateView};
use crate::catalog::Catalog;
use crate::cost::{workload_cost, Configuration, CostBreakdown, CostError};

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("budget must be positive")]
    InvalidBudget,
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("`{0}` is already part of the configuration")]
    AlreadySelected(CandidateId),
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One greedy pass over indexes, views and view indexes together.
    Joint,
    /// Views with `alpha` of the budget, then indexes with the rest.
    #[serde(rename = "mvfirst")]
    MvFirst,
    /// Indexes with `1 - alpha` of the budget, then views with the rest.
    #[serde(rename = "indfirst")]
    IndFirst,
    ViewsOnly,
    IndexesOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Joint,
        Strategy::MvFirst,
        Strategy::IndFirst,
        Strategy::ViewsOnly,
        Strategy::IndexesOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Joint => "joint",
            Strategy::MvFirst => "mvfirst",
            Strategy::IndFirst => "indfirst",
            Strategy::ViewsOnly => "views_only",
            Strategy::IndexesOnly => "indexes_only",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(&s.replace('-', "_")))
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionParams {
    pub budget_bytes: u64,
    pub strategy: Strategy,
    /// Share of the budget given to views by the sequenced strategies.
    pub alpha: f64,
}

impl SelectionParams {
    pub fn new(budget_bytes: u64, strategy: Strategy) -> Self {
        SelectionParams {
            budget_bytes,
            strategy,
            alpha: DEFAULT_ALPHA,
        }
    }

    fn validate(&self) -> Result<(), SelectError> {
        if self.budget_bytes == 0 {
            return Err(SelectError::InvalidBudget);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SelectError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    pub candidate: CandidateId,
    /// Index on `candidate` added in the same round, when the view pays off
    /// only together with it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<CandidateId>,
    pub benefit: u64,
    pub size_bytes: u64,
    pub ratio: f64,
    pub remaining_budget: u64,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round {} pick {}", self.round, self.candidate)?;
        if let Some(c) = &self.companion {
            write!(f, " + {c}")?;
        }
        write!(
            f,
            " benefit {} size {} ratio {:.6} remaining {}",
            self.benefit, self.size_bytes, self.ratio, self.remaining_budget
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub configuration: Configuration,
    pub cost: CostBreakdown,
    pub trace: Vec<TraceEntry>,
}

/// Pages saved by adding `s` to `config`.
pub fn benefit(
    s: &Candidate,
    config: &Configuration,
    workload: &[ParsedQuery],
    catalog: &Catalog,
) -> Result<u64, SelectError> {
    if config.contains(s.id()) {
        return Err(SelectError::AlreadySelected(s.id().clone()));
    }
    let before = workload_cost(workload, config, catalog)?.total;
    let after = workload_cost(workload, &config.with(s.clone())?, catalog)?.total;
    Ok(before.saturating_sub(after))
}

/// One greedy step: a single structure, or a view with one of its indexes.
struct Move<'a> {
    parts: Vec<&'a Candidate>,
    benefit: u64,
    size: u64,
}

impl Move<'_> {
    fn ids(&self) -> impl Iterator<Item = &CandidateId> + '_ {
        self.parts.iter().map(|c| c.id())
    }

    /// Greater is better: ratio, then raw benefit, then the smaller ids.
    fn rank(&self, other: &Self) -> Ordering {
        let lhs = self.benefit as u128 * other.size as u128;
        let rhs = other.benefit as u128 * self.size as u128;
        lhs.cmp(&rhs)
            .then(self.benefit.cmp(&other.benefit))
            .then_with(|| other.ids().cmp(self.ids()))
    }
}

fn size_of(c: &Candidate) -> Result<u64, CostError> {
    c.size_bytes()
        .ok_or_else(|| CostError::UnsizedStructure(c.id().clone()))
}

/// Extends `config` greedily from `pool` while its total size stays within
/// `limit` bytes. A view index is eligible once its view is selected, or
/// together with its view when both are in the pool.
fn greedy_extend(
    config: &mut Configuration,
    pool: &[Candidate],
    workload: &[ParsedQuery],
    catalog: &Catalog,
    limit: u64,
    trace: &mut Vec<TraceEntry>,
) -> Result<(), SelectError> {
    let mut current = workload_cost(workload, config, catalog)?.total;
    loop {
        let mut moves: Vec<Vec<&Candidate>> = Vec::new();
        for c in pool.iter().filter(|c| !config.contains(c.id())) {
            match c.parent_view() {
                None => moves.push(vec![c]),
                Some(v) if config.contains(v) => moves.push(vec![c]),
                Some(v) => {
                    if let Some(view) = pool.iter().find(|p| p.id() == v) {
                        moves.push(vec![view, c]);
                    }
                }
            }
        }

        let mut best: Option<Move> = None;
        for parts in moves {
            let size = parts.iter().map(|c| size_of(c)).sum::<Result<u64, _>>()?;
            if config.total_size_bytes() + size > limit {
                continue;
            }
            let mut next = config.clone();
            for c in &parts {
                next.insert((*c).clone())?;
            }
            let gain = current.saturating_sub(workload_cost(workload, &next, catalog)?.total);
            if gain == 0 {
                continue;
            }
            let m = Move {
                parts,
                benefit: gain,
                size,
            };
            if best.as_ref().is_none_or(|b| m.rank(b) == Ordering::Greater) {
                best = Some(m);
            }
        }
        let Some(pick) = best else { return Ok(()) };
        for c in &pick.parts {
            config.insert((*c).clone())?;
        }
        current -= pick.benefit;
        trace.push(TraceEntry {
            round: trace.len() + 1,
            candidate: pick.parts[0].id().clone(),
            companion: pick.parts.get(1).map(|c| c.id().clone()),
            benefit: pick.benefit,
            size_bytes: pick.size,
            ratio: pick.benefit as f64 / pick.size as f64,
            remaining_budget: limit - config.total_size_bytes(),
        });
    }
}

/// Ascending greedy from the empty configuration over one candidate pool.
pub fn greedy_select(
    candidates: &[Candidate],
    workload: &[ParsedQuery],
    catalog: &Catalog,
    budget_bytes: u64,
) -> Result<Selection, SelectError> {
    if budget_bytes == 0 {
        return Err(SelectError::InvalidBudget);
    }
    let mut config = Configuration::new();
    let mut trace = Vec::new();
    greedy_extend(
        &mut config,
        candidates,
        workload,
        catalog,
        budget_bytes,
        &mut trace,
    )?;
    let cost = workload_cost(workload, &config, catalog)?;
    Ok(Selection {
        configuration: config,
        cost,
        trace,
    })
}

fn fraction_of(budget: u64, share: f64) -> u64 {
    ((budget as f64 * share).floor() as u64).min(budget)
}

/// Runs the chosen coupling strategy. Sequenced strategies roll budget left
/// unspent by the first phase over to the second.
pub fn select(
    params: &SelectionParams,
    index_candidates: &[CandidateIndex],
    view_candidates: &[CandidateView],
    workload: &[ParsedQuery],
    catalog: &Catalog,
) -> Result<Selection, SelectError> {
    params.validate()?;
    let indexes: Vec<Candidate> = index_candidates
        .iter()
        .cloned()
        .map(Candidate::Index)
        .collect();
    let views: Vec<Candidate> = view_candidates
        .iter()
        .cloned()
        .map(Candidate::View)
        .collect();
    let view_indexes: Vec<Candidate> = view_candidates
        .iter()
        .flat_map(|v| v.secondary_indexes.iter().cloned().map(Candidate::Index))
        .collect();
    let budget = params.budget_bytes;

    let phases: Vec<(Vec<Candidate>, u64)> = match params.strategy {
        Strategy::Joint => vec![([indexes, views, view_indexes].concat(), budget)],
        Strategy::MvFirst => vec![
            (views, fraction_of(budget, params.alpha)),
            ([indexes, view_indexes].concat(), budget),
        ],
        Strategy::IndFirst => vec![
            (indexes, fraction_of(budget, 1.0 - params.alpha)),
            ([views, view_indexes].concat(), budget),
        ],
        Strategy::ViewsOnly => vec![(views, budget)],
        Strategy::IndexesOnly => vec![(indexes, budget)],
    };

    let mut config = Configuration::new();
    let mut trace = Vec::new();
    for (pool, limit) in phases {
        greedy_extend(&mut config, &pool, workload, catalog, limit, &mut trace)?;
    }
    let cost = workload_cost(workload, &config, catalog)?;
    Ok(Selection {
        configuration: config,
        cost,
        trace,
    })
}
