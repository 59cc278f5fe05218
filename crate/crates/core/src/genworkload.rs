//! Seeded generator of synthetic star-join aggregate workloads.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{AttrRef, Catalog, ColumnMeta};

/// Generates `n` statements over `catalog`, one per line. The same catalog,
/// count and seed always give the same text.
///
/// Each query joins the fact table to up to three dimensions, groups by up
/// to two of their attributes, restricts up to three attributes with `=`,
/// `IN` or `BETWEEN` on integer literals below the attribute's cardinality,
/// and computes one to three aggregates over fact measures.
pub fn generate_workload(catalog: &Catalog, n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let _ = writeln!(out, "-- generated query {i}");
        let _ = writeln!(out, "{}", generate_query(catalog, &mut rng));
    }
    out
}

fn non_key_columns<'a>(catalog: &'a Catalog, table: &str) -> Vec<(AttrRef, &'a ColumnMeta)> {
    let Ok(t) = catalog.table(table) else {
        return Vec::new();
    };
    t.columns
        .iter()
        .map(|c| (AttrRef::new(table, &c.name), c))
        .filter(|(a, _)| !catalog.is_key(a))
        .collect()
}

fn generate_query(catalog: &Catalog, rng: &mut ChaCha8Rng) -> String {
    let fact = catalog.fact();
    let joinable: Vec<&str> = fact
        .foreign_keys
        .iter()
        .map(|fk| fk.references.table.as_str())
        .collect();
    let n_dims = rng.gen_range(0..=joinable.len().min(3));
    let mut dims: Vec<&str> = joinable.choose_multiple(rng, n_dims).copied().collect();
    dims.sort_unstable();

    let measures = non_key_columns(catalog, &fact.name);
    let dim_attrs: Vec<(AttrRef, &ColumnMeta)> = dims
        .iter()
        .flat_map(|d| non_key_columns(catalog, d))
        .collect();

    let n_group = rng.gen_range(0..=dim_attrs.len().min(2));
    let mut group: Vec<AttrRef> = dim_attrs
        .choose_multiple(rng, n_group)
        .map(|(a, _)| a.clone())
        .collect();
    group.sort();

    let mut restrictable = dim_attrs.clone();
    restrictable.extend(measures.iter().cloned());
    let n_restr = rng.gen_range(0..=restrictable.len().min(3));
    let restrictions: Vec<String> = restrictable
        .choose_multiple(rng, n_restr)
        .map(|(a, col)| predicate(a, col.cardinality, rng))
        .collect();

    let mut aggs: Vec<String> = Vec::new();
    let n_aggs = rng.gen_range(1..=3);
    for _ in 0..n_aggs {
        let func = ["SUM", "COUNT", "MIN", "MAX", "AVG"].choose(rng).unwrap();
        let agg = match measures.choose(rng) {
            Some((m, _)) if !(*func == "COUNT" && rng.gen_bool(0.5)) => format!("{func}({m})"),
            _ => "COUNT(*)".to_string(),
        };
        if !aggs.contains(&agg) {
            aggs.push(agg);
        }
    }

    let select: Vec<String> = group.iter().map(ToString::to_string).chain(aggs).collect();
    let mut from = vec![fact.name.clone()];
    from.extend(dims.iter().map(|d| d.to_string()));
    let mut conds: Vec<String> = dims
        .iter()
        .filter_map(|d| catalog.fact_fk_to(d))
        .map(|fk| format!("{}.{} = {}", fact.name, fk.column, fk.references))
        .collect();
    conds.extend(restrictions);

    let mut sql = format!("SELECT {} FROM {}", select.join(", "), from.join(", "));
    if !conds.is_empty() {
        sql.push_str(&format!(" WHERE {}", conds.join(" AND ")));
    }
    if !group.is_empty() {
        let g: Vec<String> = group.iter().map(ToString::to_string).collect();
        sql.push_str(&format!(" GROUP BY {}", g.join(", ")));
    }
    sql.push(';');
    sql
}

fn predicate(attr: &AttrRef, cardinality: u64, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => format!("{attr} = {}", rng.gen_range(0..cardinality)),
        1 => {
            let k = rng.gen_range(1..=cardinality.min(3));
            let mut vals: Vec<u64> =
                rand::seq::index::sample(rng, cardinality as usize, k as usize)
                    .into_iter()
                    .map(|v| v as u64)
                    .collect();
            vals.sort_unstable();
            let vals: Vec<String> = vals.iter().map(ToString::to_string).collect();
            format!("{attr} IN ({})", vals.join(", "))
        }
        _ => {
            let a = rng.gen_range(0..cardinality);
            let b = rng.gen_range(a..cardinality);
            format!("{attr} BETWEEN {a} AND {b}")
        }
    }
}
