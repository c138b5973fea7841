//! File formats, configuration and experiment drivers for `alcs-core`.

pub mod commands;
pub mod config;
pub mod initial;
pub mod ledger;
pub mod snapshot;
