//! Three-step domain-threat elicitation under a variable profile.
//!
//! Step 1 filters the catalog's threats by the profile (property, source
//! set, agent overlap, abstraction level) and applies embrace decisions.
//! Step 2 does the same for assets matching the profile's domain tag.
//! Step 3 instantiates every step-1 threat over the assets its association
//! row names, expanding the `all` sentinel over the full step-2 list. The
//! count formula sums row sizes and must agree with step 3's length.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::embrace::{apply_embraces, Canonical, Embraceable, EmbraceError};
use crate::model::{
    AssocTargets, AssociationMatrix, Asset, Catalog, EmbraceDecision, Id, Threat, VariableProfile,
};

/// A domain-dependent threat: one step-1 threat instantiated over one
/// step-2 asset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainThreat {
    pub threat: Id,
    pub threat_label: String,
    pub asset: Id,
    pub asset_label: String,
    pub domain: String,
    /// "<threat label> \u{2014} <asset label>".
    pub derived_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElicitError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("no asset carries the domain tag {0:?}")]
    UnknownDomain(String),
    #[error("threat {0} has no association row")]
    MissingRow(Id),
    #[error("association row references {0}, which is not an elicited asset")]
    UnresolvedAsset(Id),
    #[error(transparent)]
    Embrace(#[from] EmbraceError),
}

/// Sorts canonicals by the first appearance of their category in the
/// pre-embrace filtered list, then by id.
fn sort_by_category_block<T, F>(canon: &mut [Canonical<T>], categories: &[String], category: F)
where
    T: Embraceable,
    F: Fn(&T) -> &str,
{
    let rank = |cat: &str| {
        categories
            .iter()
            .position(|c| c == cat)
            .unwrap_or(categories.len())
    };
    canon.sort_by(|a, b| {
        let ka = (rank(category(&a.representative)), a.representative.id());
        let kb = (rank(category(&b.representative)), b.representative.id());
        ka.cmp(&kb)
    });
}

fn category_blocks<'a, T, I, F>(items: I, category: F) -> Vec<String>
where
    I: Iterator<Item = &'a T>,
    T: 'a,
    F: Fn(&T) -> &str,
{
    let mut order: Vec<String> = Vec::new();
    for item in items {
        let cat = category(item);
        if !order.iter().any(|c| c == cat) {
            order.push(cat.to_owned());
        }
    }
    order
}

/// Keeps only the embrace decisions whose keeper survived the profile
/// filter. A decision pointing at an out-of-view keeper is inert here: the
/// admitted duplicate stands as its own canonical entry rather than being
/// folded into an entity the profile excluded.
fn in_view_decisions<T: Embraceable>(
    entities: &[T],
    decisions: &[EmbraceDecision],
) -> Vec<EmbraceDecision> {
    let present: BTreeSet<&Id> = entities.iter().map(Embraceable::id).collect();
    decisions
        .iter()
        .filter(|d| present.contains(&d.keep))
        .cloned()
        .collect()
}

/// Step 1: domain-independent threats matching the profile, with embrace
/// decisions applied. Order is category block order as authored, then id.
/// A threat with no agent annotation matches every agent.
pub fn step1_elicit(
    catalog: &Catalog,
    profile: &VariableProfile,
) -> Result<Vec<Canonical<Threat>>, ElicitError> {
    let admitted = |t: &Threat| {
        t.property == profile.property
            && profile
                .source_filter
                .as_ref()
                .map_or(true, |sources| sources.contains(&t.source))
            && (t.agents.is_empty() || t.agents.iter().any(|a| profile.agents.contains(a)))
            && t.level == profile.level
    };
    let filtered: Vec<Threat> = catalog
        .threats
        .iter()
        .filter(|t| admitted(t))
        .cloned()
        .collect();
    let categories = category_blocks(filtered.iter(), |t: &Threat| t.category.as_str());
    let decisions = in_view_decisions(&filtered, &catalog.embraces);
    let mut canon = apply_embraces(&filtered, &decisions)?;
    sort_by_category_block(&mut canon, &categories, |t: &Threat| t.category.as_str());
    Ok(canon)
}

/// Step 2: assets carrying the profile's domain tag, with embrace decisions
/// applied. Order is category block order as authored, then id.
pub fn step2_assets(
    catalog: &Catalog,
    profile: &VariableProfile,
) -> Result<Vec<Canonical<Asset>>, ElicitError> {
    let filtered: Vec<Asset> = catalog
        .assets
        .iter()
        .filter(|a| a.domain == profile.domain)
        .cloned()
        .collect();
    if filtered.is_empty() {
        return Err(ElicitError::UnknownDomain(profile.domain.clone()));
    }
    let categories = category_blocks(filtered.iter(), |a: &Asset| a.category.as_str());
    let decisions = in_view_decisions(&filtered, &catalog.embraces);
    let mut canon = apply_embraces(&filtered, &decisions)?;
    sort_by_category_block(&mut canon, &categories, |a: &Asset| a.category.as_str());
    Ok(canon)
}

/// Maps every id a canonical answers to (representative and absorbed) to
/// its position in the list.
fn alias_index<T>(canon: &[Canonical<T>], id_of: impl Fn(&T) -> &Id) -> HashMap<Id, usize> {
    let mut index = HashMap::new();
    for (pos, entry) in canon.iter().enumerate() {
        index.insert(id_of(&entry.representative).clone(), pos);
        for absorbed in &entry.absorbed {
            index.insert(absorbed.clone(), pos);
        }
    }
    index
}

/// Collects the asset positions a threat's row names, or `None` when no row
/// exists. Rows may be keyed by the representative or any absorbed id;
/// multiple matching rows union. `all` expands over every asset.
fn row_targets(
    threat: &Canonical<Threat>,
    assets: &[Canonical<Asset>],
    asset_index: &HashMap<Id, usize>,
    matrix: &AssociationMatrix,
) -> Result<Option<BTreeSet<usize>>, ElicitError> {
    let mut keys: Vec<&Id> = vec![&threat.representative.id];
    keys.extend(threat.absorbed.iter());
    let mut targets: BTreeSet<usize> = BTreeSet::new();
    let mut found = false;
    for key in keys {
        let Some(row) = matrix.rows.get(key) else {
            continue;
        };
        found = true;
        match row {
            AssocTargets::All => targets.extend(0..assets.len()),
            AssocTargets::Ids(ids) => {
                for id in ids {
                    let pos = asset_index
                        .get(id)
                        .ok_or_else(|| ElicitError::UnresolvedAsset(id.clone()))?;
                    targets.insert(*pos);
                }
            }
        }
    }
    Ok(if found { Some(targets) } else { None })
}

/// Step 3: instantiate each threat over the assets its association row
/// names. Every threat must have a non-empty row. Output is sorted by
/// (threat order, asset order) and pairs are unique.
pub fn step3_combine(
    threats: &[Canonical<Threat>],
    assets: &[Canonical<Asset>],
    matrix: &AssociationMatrix,
) -> Result<Vec<DomainThreat>, ElicitError> {
    let asset_index = alias_index(assets, |a: &Asset| &a.id);
    let mut out = Vec::new();
    for threat in threats {
        let targets = row_targets(threat, assets, &asset_index, matrix)?
            .filter(|t| !t.is_empty())
            .ok_or_else(|| ElicitError::MissingRow(threat.representative.id.clone()))?;
        for pos in targets {
            let asset = &assets[pos].representative;
            out.push(DomainThreat {
                threat: threat.representative.id.clone(),
                threat_label: threat.representative.label.clone(),
                asset: asset.id.clone(),
                asset_label: asset.label.clone(),
                domain: asset.domain.clone(),
                derived_label: format!(
                    "{} \u{2014} {}",
                    threat.representative.label, asset.label
                ),
            });
        }
    }
    Ok(out)
}

/// The count formula: the sum of association-row sizes, with `all` counting
/// as the full asset list and duplicate ids within a row counted once.
/// Always equals the length of [`step3_combine`] over the same rows.
pub fn count_domain_threats(
    matrix: &AssociationMatrix,
    assets: &[Canonical<Asset>],
) -> Result<usize, ElicitError> {
    let asset_index = alias_index(assets, |a: &Asset| &a.id);
    let mut total = 0usize;
    for targets in matrix.rows.values() {
        match targets {
            AssocTargets::All => total += assets.len(),
            AssocTargets::Ids(ids) => {
                let mut distinct: BTreeSet<usize> = BTreeSet::new();
                for id in ids {
                    let pos = asset_index
                        .get(id)
                        .ok_or_else(|| ElicitError::UnresolvedAsset(id.clone()))?;
                    distinct.insert(*pos);
                }
                total += distinct.len();
            }
        }
    }
    Ok(total)
}

/// What to do with step-1 threats that have no association row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowPolicy {
    /// Every step-1 threat must have a row; missing rows fail.
    RequireAll,
    /// Threats without rows are skipped and reported in `uncovered`.
    /// A row that is present but empty still fails.
    SkipUncovered,
}

/// Full elicitation output. `threats` and `assets` are the step-1 and
/// step-2 lists; `domain_threats` is step 3 over the covered threats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elicitation {
    pub profile: VariableProfile,
    pub threats: Vec<Canonical<Threat>>,
    pub assets: Vec<Canonical<Asset>>,
    pub domain_threats: Vec<DomainThreat>,
    pub count: usize,
    /// Step-1 threats without association rows, in step-1 order. Empty
    /// under [`RowPolicy::RequireAll`].
    pub uncovered: Vec<Id>,
}

/// Runs the three steps end to end under one profile.
pub fn elicit(
    catalog: &Catalog,
    profile: &VariableProfile,
    policy: RowPolicy,
) -> Result<Elicitation, ElicitError> {
    profile.check().map_err(ElicitError::InvalidProfile)?;
    let threats = step1_elicit(catalog, profile)?;
    let assets = step2_assets(catalog, profile)?;
    let (covered, uncovered): (Vec<Canonical<Threat>>, Vec<Id>) = match policy {
        RowPolicy::RequireAll => (threats.clone(), Vec::new()),
        RowPolicy::SkipUncovered => {
            let mut covered = Vec::new();
            let mut uncovered = Vec::new();
            for threat in &threats {
                let has_row = matrix_has_row(&catalog.matrix, threat);
                if has_row {
                    covered.push(threat.clone());
                } else {
                    uncovered.push(threat.representative.id.clone());
                }
            }
            (covered, uncovered)
        }
    };
    let domain_threats = step3_combine(&covered, &assets, &catalog.matrix)?;
    let count = domain_threats.len();
    Ok(Elicitation {
        profile: profile.clone(),
        threats,
        assets,
        domain_threats,
        count,
        uncovered,
    })
}

fn matrix_has_row(matrix: &AssociationMatrix, threat: &Canonical<Threat>) -> bool {
    matrix.rows.contains_key(&threat.representative.id)
        || threat.absorbed.iter().any(|id| matrix.rows.contains_key(id))
}
