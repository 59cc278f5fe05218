use std::collections::BTreeSet;

use serde::Serialize;

use super::MineError;
use crate::analyzer::QueryAttributeMatrix;
use crate::catalog::AttrRef;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryCluster {
    /// Member query ids, ascending.
    pub queries: Vec<usize>,
    /// Union of the members' extracted attributes.
    pub attributes: BTreeSet<AttrRef>,
}

impl QueryCluster {
    pub fn min_id(&self) -> usize {
        self.queries[0]
    }
}

/// |i AND j| / |i OR j|; 1 when both rows are all-zero.
pub fn jaccard(a: &[bool], b: &[bool]) -> Result<f64, MineError> {
    if a.len() != b.len() {
        return Err(MineError::LengthMismatch(a.len(), b.len()));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Average-link agglomerative clustering of matrix rows under Jaccard
/// similarity, cut at `tau`.
///
/// Each round merges the pair of clusters with the highest average pairwise
/// similarity, as long as it is at least `tau`. Ties go to the pair with the
/// lowest (min id of first cluster, min id of second). Clusters come back
/// sorted by their smallest query id.
pub fn cluster_queries(m: &QueryAttributeMatrix, tau: f64) -> Result<Vec<QueryCluster>, MineError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(MineError::InvalidThreshold(tau));
    }
    let n = m.n_rows();
    let ids = m.queries();

    // rows ordered by query id so the slot order is the tie-break order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&r| ids[r]);

    // members[slot] holds matrix row indices; sums[a][b] is the total
    // similarity between the members of slots a and b
    let mut members: Vec<Vec<usize>> = order.iter().map(|&r| vec![r]).collect();
    let mut sums: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let s = jaccard(m.row(order[a]), m.row(order[b]))?;
            sums[a][b] = s;
            sums[b][a] = s;
        }
    }
    let mut active: Vec<usize> = (0..n).collect();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &a) in active.iter().enumerate() {
            for &b in &active[i + 1..] {
                let avg = sums[a][b] / (members[a].len() * members[b].len()) as f64;
                if best.is_none_or(|(s, _, _)| avg > s) {
                    best = Some((avg, a, b));
                }
            }
        }
        let Some((avg, a, b)) = best else { break };
        if avg < tau {
            break;
        }
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        for &c in &active {
            if c != a && c != b {
                sums[a][c] += sums[b][c];
                sums[c][a] = sums[a][c];
            }
        }
        active.retain(|&c| c != b);
    }

    Ok(active
        .into_iter()
        .map(|slot| {
            let mut queries: Vec<usize> = members[slot].iter().map(|&r| ids[r]).collect();
            queries.sort_unstable();
            let attributes = members[slot]
                .iter()
                .flat_map(|&r| {
                    m.row(r)
                        .iter()
                        .zip(m.attributes())
                        .filter(|(bit, _)| **bit)
                        .map(|(_, a)| a.clone())
                })
                .collect();
            QueryCluster {
                queries,
                attributes,
            }
        })
        .collect())
}
