//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dwadvisor::analyzer::{AggArg, AggFunc, Aggregate, Literal, ParsedQuery, QueryAttributeMatrix};
use dwadvisor::candidates::{Candidate, CandidateView};
use dwadvisor::catalog::{AttrRef, Catalog};
use dwadvisor::cost::{workload_cost, Configuration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RETAIL_CATALOG: &str = include_str!("../../fixtures/retail_catalog.json");
pub const RETAIL_WORKLOAD: &str = include_str!("../../fixtures/retail_workload.sql");
pub const FIXTURE_QUERY: &str = include_str!("../../fixtures/fixture_query.sql");

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn retail() -> Catalog {
    Catalog::from_json_str(RETAIL_CATALOG).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// itemsets

pub fn random_matrix(
    rng: &mut ChaCha8Rng,
    max_rows: usize,
    max_cols: usize,
) -> QueryAttributeMatrix {
    let n = rng.gen_range(1..=max_rows);
    let m = rng.gen_range(1..=max_cols);
    let density = rng.gen_range(0.2..0.8);
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_bool(density)).collect())
        .collect();
    QueryAttributeMatrix::from_rows(rows)
}

/// Every non-empty column subset with count >= threshold, as
/// (sorted columns, count), sorted by length then columns.
pub fn brute_force_itemsets(m: &QueryAttributeMatrix, minsup: f64) -> Vec<(Vec<usize>, usize)> {
    let n = m.n_rows();
    let cols = m.n_cols();
    let mut out = Vec::new();
    for mask in 1u32..(1 << cols) {
        let set: Vec<usize> = (0..cols).filter(|c| mask & (1 << c) != 0).collect();
        let count = m
            .rows()
            .iter()
            .filter(|r| set.iter().all(|&c| r[c]))
            .count();
        // count / n >= minsup, compared without rounding surprises
        if count > 0 && (count as f64) >= minsup * n as f64 - 1e-9 {
            out.push((set, count));
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------------------
// tiny materialized star schema

pub const TINY_CATALOG: &str = r#"{
  "page_size_bytes": 256,
  "tables": [
    {"name": "f", "kind": "fact", "row_count": 100, "primary_key": "id",
     "foreign_keys": [
       {"column": "a_id", "references": "a.a_id"},
       {"column": "b_id", "references": "b.b_id"},
       {"column": "c_id", "references": "c.c_id"}],
     "columns": [
       {"name": "id", "width_bytes": 8, "cardinality": 100},
       {"name": "a_id", "width_bytes": 4, "cardinality": 12},
       {"name": "b_id", "width_bytes": 4, "cardinality": 8},
       {"name": "c_id", "width_bytes": 4, "cardinality": 6},
       {"name": "m1", "width_bytes": 8, "cardinality": 10},
       {"name": "m2", "width_bytes": 4, "cardinality": 20}]},
    {"name": "a", "kind": "dimension", "row_count": 12, "primary_key": "a_id",
     "columns": [
       {"name": "a_id", "width_bytes": 4, "cardinality": 12},
       {"name": "x", "width_bytes": 4, "cardinality": 3},
       {"name": "y", "width_bytes": 8, "cardinality": 4}]},
    {"name": "b", "kind": "dimension", "row_count": 8, "primary_key": "b_id",
     "columns": [
       {"name": "b_id", "width_bytes": 4, "cardinality": 8},
       {"name": "u", "width_bytes": 2, "cardinality": 2},
       {"name": "v", "width_bytes": 6, "cardinality": 5}]},
    {"name": "c", "kind": "dimension", "row_count": 6, "primary_key": "c_id",
     "columns": [
       {"name": "c_id", "width_bytes": 4, "cardinality": 6},
       {"name": "w", "width_bytes": 4, "cardinality": 3}]}
  ]
}"#;

pub fn tiny() -> Catalog {
    Catalog::from_json_str(TINY_CATALOG).unwrap()
}

/// Rows of every table, column values in catalog column order. Keys are row
/// numbers; other values are drawn below the column's cardinality.
pub struct Dataset {
    pub tables: BTreeMap<String, Vec<Vec<i64>>>,
}

impl Dataset {
    pub fn random(catalog: &Catalog, rng: &mut ChaCha8Rng) -> Dataset {
        let mut tables = BTreeMap::new();
        for t in &catalog.tables {
            let rows = (0..t.row_count)
                .map(|r| {
                    t.columns
                        .iter()
                        .map(|c| {
                            if c.name == t.primary_key {
                                r as i64
                            } else if let Some(fk) =
                                t.foreign_keys.iter().find(|fk| fk.column == c.name)
                            {
                                let target = catalog.table(&fk.references.table).unwrap();
                                rng.gen_range(0..target.row_count) as i64
                            } else {
                                rng.gen_range(0..c.cardinality) as i64
                            }
                        })
                        .collect()
                })
                .collect();
            tables.insert(t.name.clone(), rows);
        }
        Dataset { tables }
    }

    /// Value of `attr` for the fact row `row`, following the foreign key
    /// when `attr` belongs to a dimension.
    pub fn value(&self, catalog: &Catalog, row: usize, attr: &AttrRef) -> i64 {
        let fact = catalog.fact();
        let col = |t: &str, c: &str| {
            catalog
                .table(t)
                .unwrap()
                .columns
                .iter()
                .position(|x| x.name == c)
                .unwrap()
        };
        let frow = &self.tables[&fact.name][row];
        if attr.table == fact.name {
            return frow[col(&fact.name, &attr.column)];
        }
        let fk = catalog.fact_fk_to(&attr.table).unwrap();
        let key = frow[col(&fact.name, &fk.column)] as usize;
        self.tables[&attr.table][key][col(&attr.table, &attr.column)]
    }

    pub fn fact_rows(&self, catalog: &Catalog) -> usize {
        self.tables[&catalog.fact().name].len()
    }
}

/// Exact aggregate value: AVG is kept as a (sum, count) fraction.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    Int(i64),
    Ratio(i64, i64),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (*self, *other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Ratio(a, b), Value::Ratio(c, d)) => {
                a as i128 * d as i128 == c as i128 * b as i128
            }
            _ => false,
        }
    }
}

pub type Answer = BTreeMap<Vec<i64>, Vec<Value>>;

fn matches_restrictions(ds: &Dataset, catalog: &Catalog, q: &ParsedQuery, row: usize) -> bool {
    q.restrictions.iter().all(|p| {
        p.op.matches(&Literal::Int(ds.value(catalog, row, &p.attribute)))
    })
}

/// Evaluates `q` directly on the base tables.
pub fn eval_base(ds: &Dataset, catalog: &Catalog, q: &ParsedQuery) -> Answer {
    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for r in 0..ds.fact_rows(catalog) {
        if matches_restrictions(ds, catalog, q, r) {
            let key = q.group_by.iter().map(|a| ds.value(catalog, r, a)).collect();
            groups.entry(key).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|(k, rows)| {
            let vals = q
                .aggregates
                .iter()
                .map(|agg| {
                    let xs = || {
                        rows.iter()
                            .map(|&r| ds.value(catalog, r, agg.column().unwrap()))
                    };
                    match agg.func {
                        AggFunc::Count => Value::Int(rows.len() as i64),
                        AggFunc::Sum => Value::Int(xs().sum()),
                        AggFunc::Min => Value::Int(xs().min().unwrap()),
                        AggFunc::Max => Value::Int(xs().max().unwrap()),
                        AggFunc::Avg => Value::Ratio(xs().sum(), rows.len() as i64),
                    }
                })
                .collect();
            (k, vals)
        })
        .collect()
}

/// Rows of a materialized view: dimension values in `view.dimensions` order
/// mapped to the stored aggregate values.
pub struct ViewRows {
    pub dims: Vec<AttrRef>,
    pub aggs: Vec<Aggregate>,
    pub rows: BTreeMap<Vec<i64>, Vec<i64>>,
}

pub fn materialize(ds: &Dataset, catalog: &Catalog, view: &CandidateView) -> ViewRows {
    let dims: Vec<AttrRef> = view.dimensions.iter().cloned().collect();
    let aggs: Vec<Aggregate> = view.aggregates.iter().cloned().collect();
    let mut rows: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
    for r in 0..ds.fact_rows(catalog) {
        let key: Vec<i64> = dims.iter().map(|a| ds.value(catalog, r, a)).collect();
        let vals: Vec<i64> = aggs
            .iter()
            .map(|a| match a.column() {
                Some(c) => ds.value(catalog, r, c),
                None => 1,
            })
            .collect();
        match rows.get_mut(&key) {
            None => {
                rows.insert(key, vals);
            }
            Some(acc) => {
                for ((slot, v), a) in acc.iter_mut().zip(vals).zip(&aggs) {
                    *slot = match a.func {
                        AggFunc::Sum | AggFunc::Count => *slot + v,
                        AggFunc::Min => (*slot).min(v),
                        AggFunc::Max => (*slot).max(v),
                        AggFunc::Avg => panic!("views store SUM and COUNT, not AVG"),
                    };
                }
            }
        }
    }
    ViewRows { dims, aggs, rows }
}

/// Answers `q` from view rows by selection on dimensions and re-aggregation.
pub fn eval_view(v: &ViewRows, q: &ParsedQuery) -> Answer {
    let dim_pos = |a: &AttrRef| {
        v.dims
            .iter()
            .position(|d| d == a)
            .expect("view lacks dimension")
    };
    let agg_pos = |func: AggFunc, arg: &AggArg| {
        v.aggs
            .iter()
            .position(|a| a.func == func && &a.arg == arg)
            .expect("view lacks aggregate")
    };
    let count = agg_pos(AggFunc::Count, &AggArg::Star);
    let mut groups: BTreeMap<Vec<i64>, Vec<&Vec<i64>>> = BTreeMap::new();
    for (key, vals) in &v.rows {
        let keep = q
            .restrictions
            .iter()
            .all(|p| p.op.matches(&Literal::Int(key[dim_pos(&p.attribute)])));
        if keep {
            let g = q.group_by.iter().map(|a| key[dim_pos(a)]).collect();
            groups.entry(g).or_default().push(vals);
        }
    }
    groups
        .into_iter()
        .map(|(k, rows)| {
            let sum_of = |i: usize| rows.iter().map(|r| r[i]).sum::<i64>();
            let vals = q
                .aggregates
                .iter()
                .map(|agg| match agg.func {
                    AggFunc::Count => Value::Int(sum_of(count)),
                    AggFunc::Sum => Value::Int(sum_of(agg_pos(AggFunc::Sum, &agg.arg))),
                    AggFunc::Min => {
                        let i = agg_pos(AggFunc::Min, &agg.arg);
                        Value::Int(rows.iter().map(|r| r[i]).min().unwrap())
                    }
                    AggFunc::Max => {
                        let i = agg_pos(AggFunc::Max, &agg.arg);
                        Value::Int(rows.iter().map(|r| r[i]).max().unwrap())
                    }
                    AggFunc::Avg => {
                        Value::Ratio(sum_of(agg_pos(AggFunc::Sum, &agg.arg)), sum_of(count))
                    }
                })
                .collect();
            (k, vals)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// selection

/// Picks at most `max` candidates from `pool`, pulling in the view of every
/// chosen view index so the result is closed under the dependency.
pub fn subsample_pool(pool: Vec<Candidate>, max: usize, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    use rand::seq::SliceRandom;
    if pool.len() <= max {
        return pool;
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut chosen: BTreeSet<usize> = BTreeSet::new();
    for i in order {
        let mut add = BTreeSet::from([i]);
        if let Some(v) = pool[i].parent_view() {
            add.insert(pool.iter().position(|c| c.id() == v).unwrap());
        }
        if chosen.union(&add).count() <= max {
            chosen.extend(add);
        }
    }
    chosen.into_iter().map(|i| pool[i].clone()).collect()
}

/// Dependency-closed configuration from a subset of `pool`, or None if some
/// chosen view index lacks its view.
pub fn closed_config(pool: &[Candidate], mask: u32) -> Option<Configuration> {
    let chosen: Vec<Candidate> = (0..pool.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| pool[i].clone())
        .collect();
    let ids: BTreeSet<_> = chosen.iter().map(|c| c.id().clone()).collect();
    if chosen
        .iter()
        .any(|c| c.parent_view().is_some_and(|v| !ids.contains(v)))
    {
        return None;
    }
    Some(Configuration::from_candidates(chosen).unwrap())
}

/// Minimum workload cost over every budget-feasible, dependency-closed
/// subset of `pool`.
pub fn exhaustive_optimum(
    pool: &[Candidate],
    workload: &[ParsedQuery],
    catalog: &Catalog,
    budget: u64,
) -> u64 {
    assert!(
        pool.len() <= 16,
        "exhaustive search over {} candidates",
        pool.len()
    );
    let mut best = u64::MAX;
    for mask in 0u32..(1 << pool.len()) {
        let size: u64 = (0..pool.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pool[i].size_bytes().unwrap())
            .sum();
        if size > budget {
            continue;
        }
        if let Some(config) = closed_config(pool, mask) {
            best = best.min(workload_cost(workload, &config, catalog).unwrap().total);
        }
    }
    best
}
