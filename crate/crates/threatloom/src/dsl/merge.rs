//! Catalog union. Identical declarations collapse, differing declarations
//! under one id conflict, and label-level redundancy across sources is
//! surfaced as duplicate candidates for the analyst to rule on.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{normalize_label, Catalog, Id};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("conflicting {kind} declarations for id {id}")]
    IdConflict { kind: &'static str, id: Id },
}

/// Entities from different sources whose labels normalize to the same
/// wording. Candidates are hints for embrace decisions, never merged
/// automatically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateCandidate {
    pub kind: &'static str,
    pub normalized_label: String,
    pub ids: Vec<Id>,
}

/// Merge result: the union catalog plus its duplicate-candidate annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Merged {
    pub catalog: Catalog,
    pub duplicate_candidates: Vec<DuplicateCandidate>,
}

fn fold<T: Clone + PartialEq>(
    kind: &'static str,
    dst: &mut Vec<T>,
    src: &[T],
    key: impl Fn(&T) -> &Id,
) -> Result<(), MergeError> {
    for item in src {
        match dst.iter().find(|existing| key(existing) == key(item)) {
            None => dst.push(item.clone()),
            Some(existing) if existing == item => {}
            Some(_) => {
                return Err(MergeError::IdConflict {
                    kind,
                    id: key(item).clone(),
                })
            }
        }
    }
    Ok(())
}

/// Unions any number of catalogs. First occurrence wins the declaration
/// order; the same id may appear in several inputs only with an identical
/// body. Associativity holds up to entity equality and candidate sets.
pub fn merge_catalogs(catalogs: &[Catalog]) -> Result<Merged, MergeError> {
    let mut out = Catalog::default();
    for catalog in catalogs {
        fold("source", &mut out.sources, &catalog.sources, |s| &s.id)?;
        fold("threat", &mut out.threats, &catalog.threats, |t| &t.id)?;
        fold("tree", &mut out.trees, &catalog.trees, |t| &t.id)?;
        fold("asset", &mut out.assets, &catalog.assets, |a| &a.id)?;
        fold("incident", &mut out.incidents, &catalog.incidents, |i| {
            &i.id
        })?;
        for decision in &catalog.embraces {
            if !out.embraces.contains(decision) {
                out.embraces.push(decision.clone());
            }
        }
        for (threat, targets) in &catalog.matrix.rows {
            match out.matrix.rows.get(threat) {
                None => {
                    out.matrix.rows.insert(threat.clone(), targets.clone());
                }
                Some(existing) if existing == targets => {}
                Some(_) => {
                    return Err(MergeError::IdConflict {
                        kind: "assoc",
                        id: threat.clone(),
                    })
                }
            }
        }
    }

    let duplicate_candidates = find_candidates(&out);
    Ok(Merged {
        catalog: out,
        duplicate_candidates,
    })
}

fn find_candidates(catalog: &Catalog) -> Vec<DuplicateCandidate> {
    let threat_entries = catalog
        .threats
        .iter()
        .map(|t| (&t.label, &t.source, &t.id));
    let asset_entries = catalog.assets.iter().map(|a| (&a.label, &a.source, &a.id));

    let mut candidates = Vec::new();
    for (kind, entries) in [
        ("threat", threat_entries.collect::<Vec<_>>()),
        ("asset", asset_entries.collect::<Vec<_>>()),
    ] {
        let mut groups: BTreeMap<String, Vec<(&Id, &Id)>> = BTreeMap::new();
        for (label, source, id) in entries {
            groups
                .entry(normalize_label(label))
                .or_default()
                .push((source, id));
        }
        for (normalized_label, members) in groups {
            let distinct_sources: std::collections::BTreeSet<&Id> =
                members.iter().map(|(source, _)| *source).collect();
            if members.len() < 2 || distinct_sources.len() < 2 {
                continue;
            }
            let mut ids: Vec<Id> = members.into_iter().map(|(_, id)| id.clone()).collect();
            ids.sort();
            candidates.push(DuplicateCandidate {
                kind,
                normalized_label,
                ids,
            });
        }
    }
    candidates.sort_by(|a, b| (a.kind, &a.normalized_label).cmp(&(b.kind, &b.normalized_label)));
    candidates
}
