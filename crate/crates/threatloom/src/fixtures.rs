//! The bundled automotive soft-privacy corpus, embedded as string constants
//! so tests, docs, and downstream examples can load it without touching the
//! filesystem.

/// LINDDUN U and N threats with their refinement trees.
pub const LINDDUN_UN: &str = include_str!("../../../fixtures/linddun-un.tmc");
/// The LINDDUN Linking tree and the Identifying tree it links to.
pub const LINDDUN_LINKING: &str = include_str!("../../../fixtures/linddun-linking.tmc");
/// The eight legacy extension threats (ENISA smart-car legal + OWASP).
pub const LEGACY_EXTENSIONS: &str = include_str!("../../../fixtures/legacy-extensions.tmc");
/// The five legal-category threats of the 2016 ENISA taxonomy.
pub const ENISA_2016_LEGAL: &str = include_str!("../../../fixtures/enisa-2016-legal.tmc");
/// Automotive assets from the Bella et al. study and the ENISA taxonomy.
pub const ASSETS_AUTOMOTIVE: &str = include_str!("../../../fixtures/assets-automotive.tmc");
/// The 2023 embrace decisions: six threat merges, four asset merges.
pub const EMBRACES_2023: &str = include_str!("../../../fixtures/embraces-2023.tmc");
/// Exemplar association rows for ten threats over the automotive assets.
pub const ASSOC_EXEMPLAR: &str = include_str!("../../../fixtures/assoc-exemplar.tmc");
/// News-sourced automotive privacy incidents from 2023.
pub const INCIDENTS: &str = include_str!("../../../fixtures/incidents.tmc");
/// Snapshot of the 23 canonical threats, entity-equal to the originals.
pub const TABLE1: &str = include_str!("../../../fixtures/table1.tmc");

/// Every bundled fixture as (name, text), in the order the files are meant
/// to be merged: threat sources first, then assets, decisions, matrix, and
/// incidents, with the snapshot last.
pub fn bundled() -> Vec<(&'static str, &'static str)> {
    vec![
        ("linddun-un.tmc", LINDDUN_UN),
        ("linddun-linking.tmc", LINDDUN_LINKING),
        ("legacy-extensions.tmc", LEGACY_EXTENSIONS),
        ("enisa-2016-legal.tmc", ENISA_2016_LEGAL),
        ("assets-automotive.tmc", ASSETS_AUTOMOTIVE),
        ("embraces-2023.tmc", EMBRACES_2023),
        ("assoc-exemplar.tmc", ASSOC_EXEMPLAR),
        ("incidents.tmc", INCIDENTS),
        ("table1.tmc", TABLE1),
    ]
}

/// Parses and merges the whole bundled corpus.
///
/// Panics on parse or merge failure; the corpus is tested to be clean.
pub fn bundled_catalog() -> crate::model::Catalog {
    let catalogs: Vec<crate::model::Catalog> = bundled()
        .into_iter()
        .map(|(name, text)| {
            crate::dsl::parse_catalog(text)
                .unwrap_or_else(|e| panic!("bundled fixture {name} failed to parse: {e}"))
        })
        .collect();
    crate::dsl::merge_catalogs(&catalogs)
        .expect("bundled fixtures merge cleanly")
        .catalog
}
