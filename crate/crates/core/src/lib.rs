//! Fairness auditing and bias mitigation for binary classifiers.
//!
//! The crate covers the full audit pipeline for group fairness in binary
//! prediction tasks:
//!
//! * [`dataset`] — schema-validated CSV ingestion, listwise deletion,
//!   one-hot encoding, stratified splitting, and a calibrated synthetic
//!   generator for experiments without access to restricted microdata.
//! * [`metrics`] — confusion counts, per-group rates, and signed gaps for
//!   four fairness notions (statistical parity, equal opportunity,
//!   predictive equality, equalized odds), audited one-vs-rest per group
//!   and at the aggregate privileged/unprivileged level.
//! * [`models`] — four weighted classifiers (decision tree, random forest,
//!   logistic regression, linear SVM) with stratified k-fold grid search.
//! * [`mitigation`] — two preprocessing techniques (reweighting, disparate
//!   impact removal) and two in-processing techniques (exponentiated
//!   gradient reduction, group-threshold meta classifier).
//! * [`harness`] — repeated-split experiment runner producing long-form
//!   results tables, box-plot statistics, and reproducibility manifests.
//!
//! All seeded operations are deterministic: the same inputs and seeds
//! produce bit-identical outputs whether the `parallel` feature is enabled
//! or not.

pub mod dataset;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod mitigation;
pub mod models;
