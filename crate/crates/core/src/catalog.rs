//! Star-schema metadata: tables, columns, keys and the declared statistics
//! (row counts, column widths, distinct-value cardinalities).
//!
//! A catalog is loaded once from JSON, validated, and is read-only afterwards.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PAGE_SIZE: u64 = 8192;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid catalog: {0}")]
    Validation(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
}

/// Fully qualified attribute name, `table.column`.
///
/// Ordering is by `(table, column)`, which coincides with the lexicographic
/// order of the dotted form for identifier characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AttrRef {
    pub table: String,
    pub column: String,
}

impl AttrRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        AttrRef {
            table: table.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

impl FromStr for AttrRef {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((t, c)) if !t.is_empty() && !c.is_empty() && !c.contains('.') => {
                Ok(AttrRef::new(t, c))
            }
            _ => Err(CatalogError::UnknownAttribute(s.to_string())),
        }
    }
}

impl TryFrom<String> for AttrRef {
    type Error = CatalogError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AttrRef> for String {
    fn from(a: AttrRef) -> String {
        a.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Fact,
    Dimension,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMeta {
    pub name: String,
    pub width_bytes: u64,
    pub cardinality: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForeignKey {
    pub column: String,
    pub references: AttrRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableMeta {
    pub name: String,
    pub kind: TableKind,
    pub row_count: u64,
    pub primary_key: String,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
    pub columns: Vec<ColumnMeta>,
}

impl TableMeta {
    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Sum of the column widths, in bytes.
    pub fn row_width(&self) -> u64 {
        self.columns.iter().map(|c| c.width_bytes).sum()
    }
}

fn default_page_size() -> u64 {
    DEFAULT_PAGE_SIZE
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    #[serde(default = "default_page_size")]
    pub page_size_bytes: u64,
    pub tables: Vec<TableMeta>,
}

impl Catalog {
    pub fn load(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Catalog::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Catalog, CatalogError> {
        let catalog: Catalog = serde_json::from_str(text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    /// Checks every structural invariant. Called by the loaders; exposed for
    /// catalogs assembled in code.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |msg: String| Err(CatalogError::Validation(msg));

        if self.page_size_bytes == 0 {
            return invalid("page_size_bytes must be positive".into());
        }
        let facts = self
            .tables
            .iter()
            .filter(|t| t.kind == TableKind::Fact)
            .count();
        if facts != 1 {
            return invalid(format!("exactly one fact table required, found {facts}"));
        }

        let mut names = BTreeSet::new();
        for t in &self.tables {
            if !names.insert(t.name.as_str()) {
                return invalid(format!("duplicate table `{}`", t.name));
            }
            if t.row_count < 1 {
                return invalid(format!("table `{}` has row_count 0", t.name));
            }
            let mut cols = BTreeSet::new();
            for c in &t.columns {
                if !cols.insert(c.name.as_str()) {
                    return invalid(format!("duplicate column `{}.{}`", t.name, c.name));
                }
                if c.width_bytes < 1 {
                    return invalid(format!("column `{}.{}` has width 0", t.name, c.name));
                }
                if c.cardinality < 1 || c.cardinality > t.row_count {
                    return invalid(format!(
                        "column `{}.{}` cardinality {} outside [1, {}]",
                        t.name, c.name, c.cardinality, t.row_count
                    ));
                }
            }
            if t.column(&t.primary_key).is_none() {
                return invalid(format!(
                    "primary key `{}` of `{}` is not a column",
                    t.primary_key, t.name
                ));
            }
        }

        for t in &self.tables {
            let mut referenced = BTreeSet::new();
            for fk in &t.foreign_keys {
                if t.column(&fk.column).is_none() {
                    return invalid(format!(
                        "foreign key column `{}.{}` does not exist",
                        t.name, fk.column
                    ));
                }
                let target = match self.tables.iter().find(|x| x.name == fk.references.table) {
                    Some(target) if target.primary_key == fk.references.column => target,
                    _ => {
                        return invalid(format!(
                            "dangling foreign key `{}.{}` -> `{}`",
                            t.name, fk.column, fk.references
                        ))
                    }
                };
                if t.kind == TableKind::Dimension {
                    return invalid(format!(
                        "snowflake foreign key `{}.{}` -> `{}`: dimensions may not reference other tables",
                        t.name, fk.column, fk.references
                    ));
                }
                if target.kind == TableKind::Fact {
                    return invalid(format!(
                        "foreign key `{}.{}` references the fact table",
                        t.name, fk.column
                    ));
                }
                if !referenced.insert(target.name.as_str()) {
                    return invalid(format!(
                        "dimension `{}` is referenced by more than one foreign key",
                        target.name
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn table(&self, name: &str) -> Result<&TableMeta, CatalogError> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CatalogError::UnknownTable(name.to_string()))
    }

    pub fn fact(&self) -> &TableMeta {
        self.tables
            .iter()
            .find(|t| t.kind == TableKind::Fact)
            .expect("validated catalog has a fact table")
    }

    pub fn is_fact(&self, table: &str) -> bool {
        self.fact().name == table
    }

    /// Exact, case-sensitive lookup of a dotted `table.column` name.
    pub fn attribute_ref(&self, name: &str) -> Result<&ColumnMeta, CatalogError> {
        let attr: AttrRef = name.parse()?;
        self.column(&attr)
    }

    pub fn column(&self, attr: &AttrRef) -> Result<&ColumnMeta, CatalogError> {
        self.tables
            .iter()
            .find(|t| t.name == attr.table)
            .and_then(|t| t.column(&attr.column))
            .ok_or_else(|| CatalogError::UnknownAttribute(attr.to_string()))
    }

    pub fn pages_for_bytes(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.page_size_bytes).max(1)
    }

    pub fn table_pages(&self, table: &str) -> Result<u64, CatalogError> {
        let t = self.table(table)?;
        Ok(self.pages_for_bytes(t.row_count * t.row_width()))
    }

    /// The fact-table foreign key joining to `dimension`, if any.
    pub fn fact_fk_to(&self, dimension: &str) -> Option<&ForeignKey> {
        self.fact()
            .foreign_keys
            .iter()
            .find(|fk| fk.references.table == dimension)
    }

    /// True for primary-key and foreign-key columns.
    pub fn is_key(&self, attr: &AttrRef) -> bool {
        self.table(&attr.table).is_ok_and(|t| {
            t.primary_key == attr.column || t.foreign_keys.iter().any(|fk| fk.column == attr.column)
        })
    }

    /// True when `attr` is a non-key column of a dimension joined to the fact
    /// by a single foreign key.
    pub fn is_bitmap_joinable(&self, attr: &AttrRef) -> bool {
        self.column(attr).is_ok()
            && !self.is_fact(&attr.table)
            && !self.is_key(attr)
            && self.fact_fk_to(&attr.table).is_some()
    }
}
