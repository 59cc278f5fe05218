use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::MineError;
use crate::analyzer::QueryAttributeMatrix;
use crate::catalog::AttrRef;

/// A set of attributes and the number of workload rows containing all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Itemset {
    pub attributes: BTreeSet<AttrRef>,
    /// Column indices in the source matrix, ascending.
    #[serde(skip)]
    pub columns: Vec<usize>,
    pub support_count: usize,
    pub n_rows: usize,
}

impl Itemset {
    pub fn support(&self) -> f64 {
        self.support_count as f64 / self.n_rows as f64
    }
}

/// Smallest row count reaching `minsup`. The epsilon absorbs decimal input
/// such as 0.3 * 10 = 3.0000000000000004.
pub(crate) fn min_count(minsup: f64, n: usize) -> usize {
    ((minsup * n as f64 - 1e-9).ceil() as usize).max(1)
}

pub fn mine_frequent_itemsets(
    m: &QueryAttributeMatrix,
    minsup: f64,
) -> Result<Vec<Itemset>, MineError> {
    mine_frequent_itemsets_bounded(m, minsup, None)
}

/// Levelwise (Apriori) mining with downward-closure pruning. Output is sorted
/// by itemset length, then by column indices.
pub fn mine_frequent_itemsets_bounded(
    m: &QueryAttributeMatrix,
    minsup: f64,
    max_len: Option<usize>,
) -> Result<Vec<Itemset>, MineError> {
    if !(minsup > 0.0 && minsup <= 1.0) {
        return Err(MineError::InvalidMinsup(minsup));
    }
    let n = m.n_rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let threshold = min_count(minsup, n);
    let max_len = max_len.unwrap_or(usize::MAX);
    let support = |cols: &[usize]| {
        m.rows()
            .iter()
            .filter(|row| cols.iter().all(|&c| row[c]))
            .count()
    };

    let mut result = Vec::new();
    let mut level: Vec<(Vec<usize>, usize)> = (0..m.n_cols())
        .map(|c| (vec![c], support(&[c])))
        .filter(|(_, s)| *s >= threshold)
        .collect();
    let mut k = 1;

    while !level.is_empty() && k <= max_len {
        let known: HashSet<&[usize]> = level.iter().map(|(c, _)| c.as_slice()).collect();
        let mut next = Vec::new();
        if k < max_len {
            for (i, (a, _)) in level.iter().enumerate() {
                for (b, _) in &level[i + 1..] {
                    if a[..k - 1] != b[..k - 1] {
                        // level is sorted, so no later b shares a's prefix
                        break;
                    }
                    let mut cand = a.clone();
                    cand.push(b[k - 1]);
                    let closed = (0..cand.len()).all(|skip| {
                        let sub: Vec<usize> = cand
                            .iter()
                            .enumerate()
                            .filter_map(|(j, &c)| (j != skip).then_some(c))
                            .collect();
                        known.contains(sub.as_slice())
                    });
                    if closed {
                        let s = support(&cand);
                        if s >= threshold {
                            next.push((cand, s));
                        }
                    }
                }
            }
        }
        result.extend(level.drain(..).map(|(columns, support_count)| Itemset {
            attributes: columns.iter().map(|&c| m.attributes()[c].clone()).collect(),
            columns,
            support_count,
            n_rows: n,
        }));
        next.sort();
        level = next;
        k += 1;
    }
    Ok(result)
}
