//! Embracing: executing analyst decisions that one catalog entry subsumes
//! others. Dropped entries disappear from the canonical set; their ids and
//! sources stay attached to the kept representative so provenance is never
//! lost. Chains (a decision whose keep is itself dropped by another) collapse
//! onto the final representative.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Asset, EmbraceDecision, Id, Threat};

/// Entity kinds the embrace engine can canonicalize.
pub trait Embraceable: Clone {
    fn id(&self) -> &Id;
    fn label(&self) -> &str;
    fn source(&self) -> &Id;
}

impl Embraceable for Threat {
    fn id(&self) -> &Id {
        &self.id
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn source(&self) -> &Id {
        &self.source
    }
}

impl Embraceable for Asset {
    fn id(&self) -> &Id {
        &self.id
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn source(&self) -> &Id {
        &self.source
    }
}

/// A kept representative together with everything it absorbed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Canonical<T> {
    pub representative: T,
    /// Ids this representative absorbed, directly or through a chain.
    pub absorbed: BTreeSet<Id>,
    /// Source ids of the representative and of every absorbed entity.
    pub provenance: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbraceError {
    /// A decision's keep does not name a present entity (dangling keep).
    #[error("unresolved id {0}")]
    UnresolvedId(Id),
    /// The same id is dropped by two different decisions.
    #[error("id {0} is dropped by two decisions")]
    DropConflict(Id),
    #[error("embrace cycle involving {0}")]
    CycleDetected(Id),
}

/// Resolves where `start` ultimately lands when kept ids may themselves be
/// dropped by other decisions.
fn final_rep<'a>(
    start: &'a Id,
    keep_of: &BTreeMap<&'a Id, &'a Id>,
) -> Result<&'a Id, EmbraceError> {
    let mut visited: BTreeSet<&Id> = BTreeSet::new();
    let mut cursor = start;
    while let Some(next) = keep_of.get(cursor) {
        if !visited.insert(cursor) {
            return Err(EmbraceError::CycleDetected(cursor.clone()));
        }
        cursor = next;
    }
    Ok(cursor)
}

/// Applies embrace decisions to an entity list, returning the canonical
/// entities in input order.
///
/// Decisions whose drop ids are all absent are skipped, so re-applying a
/// decision set to its own output is a no-op rather than an error, and
/// decisions aimed at a different entity kind pass through harmlessly. A
/// decision with a present drop but no resolvable keep is a hard error.
pub fn apply_embraces<T: Embraceable>(
    entities: &[T],
    decisions: &[EmbraceDecision],
) -> Result<Vec<Canonical<T>>, EmbraceError> {
    let by_id: BTreeMap<&Id, &T> = entities.iter().map(|e| (e.id(), e)).collect();

    // Keep only decisions with at least one drop id present.
    let active: Vec<&EmbraceDecision> = decisions
        .iter()
        .filter(|d| d.drop.iter().any(|id| by_id.contains_key(id)))
        .collect();

    let mut keep_of: BTreeMap<&Id, &Id> = BTreeMap::new();
    for decision in &active {
        for id in &decision.drop {
            if !by_id.contains_key(id) {
                continue;
            }
            if keep_of.insert(id, &decision.keep).is_some() {
                return Err(EmbraceError::DropConflict(id.clone()));
            }
        }
    }

    // Map every dropped id onto its final representative, which must exist.
    let mut lands_on: BTreeMap<&Id, &Id> = BTreeMap::new();
    for (dropped, _) in &keep_of {
        let rep = final_rep(dropped, &keep_of)?;
        if !by_id.contains_key(rep) {
            return Err(EmbraceError::UnresolvedId(rep.clone()));
        }
        lands_on.insert(dropped, rep);
    }

    let mut absorbed_by: BTreeMap<&Id, BTreeSet<Id>> = BTreeMap::new();
    for (dropped, rep) in &lands_on {
        absorbed_by
            .entry(rep)
            .or_default()
            .insert((*dropped).clone());
    }

    let mut out = Vec::new();
    for entity in entities {
        if keep_of.contains_key(entity.id()) {
            continue;
        }
        let absorbed = absorbed_by.remove(entity.id()).unwrap_or_default();
        let mut provenance: BTreeSet<Id> = BTreeSet::new();
        provenance.insert(entity.source().clone());
        for id in &absorbed {
            provenance.insert(by_id[id].source().clone());
        }
        out.push(Canonical {
            representative: entity.clone(),
            absorbed,
            provenance,
        });
    }
    Ok(out)
}

/// One audit row: a kept entity and what it absorbed, with the deciding
/// rationales. Ids that arrived through a collapsed chain carry the
/// intermediate keep in `via`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbraceReportRow {
    pub kept: Id,
    pub kept_label: String,
    pub absorbed: Vec<AbsorbedEntry>,
    pub rationales: Vec<String>,
    pub sources: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbsorbedEntry {
    pub id: Id,
    pub label: String,
    pub via: Option<Id>,
}

/// Builds the audit trail for an entity list and decision set: one row per
/// representative that absorbed anything, in canonical (input) order.
pub fn embrace_report<T: Embraceable>(
    entities: &[T],
    decisions: &[EmbraceDecision],
) -> Result<Vec<EmbraceReportRow>, EmbraceError> {
    let canonicals = apply_embraces(entities, decisions)?;
    let by_id: BTreeMap<&Id, &T> = entities.iter().map(|e| (e.id(), e)).collect();
    let direct_keep: BTreeMap<&Id, &Id> = decisions
        .iter()
        .flat_map(|d| d.drop.iter().map(move |id| (id, &d.keep)))
        .collect();

    let mut rows = Vec::new();
    for canonical in &canonicals {
        if canonical.absorbed.is_empty() {
            continue;
        }
        let kept = canonical.representative.id();
        let absorbed: Vec<AbsorbedEntry> = canonical
            .absorbed
            .iter()
            .map(|id| {
                let direct = direct_keep[id];
                AbsorbedEntry {
                    id: id.clone(),
                    label: by_id[id].label().to_owned(),
                    via: (direct != kept).then(|| direct.clone()),
                }
            })
            .collect();
        // A decision speaks for this row when its drops land here.
        let mut rationales = Vec::new();
        for decision in decisions {
            let lands_here = decision
                .drop
                .iter()
                .any(|id| canonical.absorbed.contains(id));
            if lands_here && !rationales.contains(&decision.rationale) {
                rationales.push(decision.rationale.clone());
            }
        }
        rows.push(EmbraceReportRow {
            kept: kept.clone(),
            kept_label: canonical.representative.label().to_owned(),
            absorbed,
            rationales,
            sources: canonical.provenance.clone(),
        });
    }
    Ok(rows)
}
