//! Experiment layer over `forestlab-core`: reference oracles, convergence
//! tables, reproducible experiment runners, and run manifests.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod oracle;
pub mod table;
