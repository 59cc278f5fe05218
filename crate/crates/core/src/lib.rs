//! Workload-driven selection of bitmap join indexes, B-tree indexes and
//! materialized aggregate views for star-schema data warehouses.
//!
//! The pipeline parses a SQL workload against a [`catalog::Catalog`], builds
//! a query-attribute matrix, mines frequent attribute sets (index candidates)
//! and query clusters (view candidates), sizes every candidate with
//! optimizer-independent cost models, and greedily selects a configuration
//! under a storage budget.

pub mod analyzer;
pub mod candidates;
pub mod catalog;
pub mod cli;
pub mod cost;
pub mod genworkload;
pub mod miner;
pub mod pipeline;
pub mod selector;
