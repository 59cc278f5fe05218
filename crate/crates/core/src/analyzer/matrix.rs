use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use super::{extract_attributes, AnalyzeError, ExtractionRuleSet, ParsedQuery};
use crate::catalog::AttrRef;

/// Binary matrix: one row per workload query (in workload order), one column
/// per extracted attribute (sorted), `cell = 1` iff the attribute was
/// extracted from the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryAttributeMatrix {
    queries: Vec<usize>,
    attributes: Vec<AttrRef>,
    rows: Vec<Vec<bool>>,
}

impl QueryAttributeMatrix {
    /// Builds a matrix directly from rows of booleans, with synthetic column
    /// names `a00`, `a01`, ... Used for mining arbitrary binary data.
    ///
    /// Panics if the rows differ in length.
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged matrix rows");
        QueryAttributeMatrix {
            queries: (0..rows.len()).collect(),
            attributes: (0..width)
                .map(|i| AttrRef::new("m", format!("a{i:02}")))
                .collect(),
            rows,
        }
    }

    pub fn queries(&self) -> &[usize] {
        &self.queries
    }

    pub fn attributes(&self) -> &[AttrRef] {
        &self.attributes
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.attributes.len()
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.rows[i]
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.rows[row][col]
    }

    /// Column indices set in row `i`.
    pub fn row_items(&self, i: usize) -> BTreeSet<usize> {
        self.rows[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }

    /// CSV export: header of attribute names, first column the query ordinal.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["query".to_string()];
        header.extend(self.attributes.iter().map(|a| a.to_string()));
        out.write_record(&header)?;
        for (q, row) in self.queries.iter().zip(&self.rows) {
            let mut rec = vec![q.to_string()];
            rec.extend(row.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn build_matrix(
    workload: &[ParsedQuery],
    rules: &ExtractionRuleSet,
) -> Result<QueryAttributeMatrix, AnalyzeError> {
    if workload.is_empty() {
        return Err(AnalyzeError::EmptyWorkload);
    }
    let extracted: Vec<BTreeSet<AttrRef>> = workload
        .iter()
        .map(|q| extract_attributes(q, rules))
        .collect();
    let attributes: Vec<AttrRef> = extracted
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows = extracted
        .iter()
        .map(|set| attributes.iter().map(|a| set.contains(a)).collect())
        .collect();
    Ok(QueryAttributeMatrix {
        queries: workload.iter().map(|q| q.id).collect(),
        attributes,
        rows,
    })
}
