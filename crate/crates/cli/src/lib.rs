//! Pipeline commands behind the `protolex` binary. Each command reads a
//! resolved [`RunConfig`], writes its data files into the output
//! directory and finishes with a `<command>.manifest` file.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod report;

pub use commands::{
    cmd_discover, cmd_filter, cmd_ingest, cmd_nounclass, cmd_phylo, cmd_report, cmd_simulate, cmd_validate,
    NounClassOutcome, PhyloOutcome, ValidationOutcome, Written,
};
pub use config::{RunConfig, OUT_ENV};
