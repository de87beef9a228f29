//! threatloom builds and analyses privacy threat knowledge bases.
//!
//! Catalogs are written in the TMC text format and hold threat sources,
//! threats, AND/OR refinement trees, domain assets, analyst embrace
//! decisions, threat-to-asset association rows, and incident records. On top
//! of the format sit the analysis operations: semantic merge with provenance
//! (embracing), attack-path enumeration over trees, three-step domain-threat
//! elicitation with a verifiable count, and report rendering.

pub mod cli;
pub mod dsl;
pub mod elicit;
pub mod embrace;
pub mod fixtures;
pub mod model;
pub mod report;
pub mod trees;

/// Compiles every code sample in the guide under `book/` as a doc-test,
/// so the chapters cannot drift from the API they describe.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}

    #[doc = include_str!("../../../book/src/catalog-format.md")]
    mod catalog_format {}

    #[doc = include_str!("../../../book/src/merging-and-embracing.md")]
    mod merging_and_embracing {}

    #[doc = include_str!("../../../book/src/threat-trees.md")]
    mod threat_trees {}

    #[doc = include_str!("../../../book/src/elicitation.md")]
    mod elicitation {}

    #[doc = include_str!("../../../book/src/reports-and-cli.md")]
    mod reports_and_cli {}
}
