//! Shared helpers for the integration suites: seeded random catalog and
//! tree generators plus an exhaustive attack-path oracle.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use chrono::NaiveDate;
use rand::prelude::*;
use rand::rngs::StdRng;

use threatloom::model::{
    Abstraction, AssocTargets, Asset, Catalog, Combinator, EmbraceDecision, Id, IncidentRecord,
    PrivacyProperty, SourceKind, SourceRef, Threat, ThreatAgent, ThreatTree, TreeNode,
};

/// Characters the label generator draws from. Quotes, backslashes, pipes,
/// and multibyte characters are in on purpose: they exercise escaping.
const LABEL_POOL: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'X', 'Y', 'Z', '0', '7', ' ', ' ', ' ', '"', '\\', '|',
    ',', '.', '/', '–', 'é', '#', '[', ']', '{', '}', ':', ';', '\'',
];

pub fn gen_label(rng: &mut StdRng) -> String {
    let len = rng.random_range(1..=30);
    let mut label = String::new();
    label.push(*['A', 'T', 'L', 'V', 'G'].choose(rng).unwrap());
    for _ in 1..len {
        label.push(*LABEL_POOL.choose(rng).unwrap());
    }
    label
}

fn gen_agents(rng: &mut StdRng) -> BTreeSet<ThreatAgent> {
    ThreatAgent::ALL
        .into_iter()
        .filter(|_| rng.random_bool(0.3))
        .collect()
}

fn gen_date(rng: &mut StdRng) -> NaiveDate {
    NaiveDate::from_ymd_opt(
        rng.random_range(2000..=2030),
        rng.random_range(1..=12),
        rng.random_range(1..=28),
    )
    .unwrap()
}

/// Builds a catalog that passes validation with zero errors: every
/// reference resolves, embrace decisions are acyclic, matrix rows point at
/// kept entities only.
pub fn gen_catalog(rng: &mut StdRng) -> Catalog {
    let mut catalog = Catalog::default();

    let nsources = rng.random_range(1..=3);
    for i in 0..nsources {
        let kind = if i > 0 && rng.random_bool(0.2) {
            SourceKind::Hybrid
        } else if rng.random_bool(0.5) {
            SourceKind::External
        } else {
            SourceKind::Internal
        };
        catalog.sources.push(SourceRef {
            id: Id::from(format!("src{i}")),
            name: gen_label(rng),
            kind,
            year: rng.random_bool(0.5).then(|| rng.random_range(1990..=2030)),
            version: rng.random_bool(0.3).then(|| gen_label(rng)),
            derived_from: if kind == SourceKind::Hybrid {
                vec![Id::from(format!("src{}", rng.random_range(0..i)))]
            } else {
                Vec::new()
            },
        });
    }
    let source_of = |rng: &mut StdRng| Id::from(format!("src{}", rng.random_range(0..nsources)));

    let nthreats = rng.random_range(0..=8);
    for i in 0..nthreats {
        let source = source_of(rng);
        catalog.threats.push(Threat {
            id: Id::from(format!("t{i}")),
            label: gen_label(rng),
            property: *[
                PrivacyProperty::Soft,
                PrivacyProperty::Hard,
                PrivacyProperty::Cybersecurity,
            ]
            .choose(rng)
            .unwrap(),
            category: ["U", "N", "Legal", "Ops"].choose(rng).unwrap().to_string(),
            source,
            agents: gen_agents(rng),
            level: if rng.random_bool(0.2) {
                Abstraction::Concrete
            } else {
                Abstraction::Abstract
            },
            description: rng.random_bool(0.5).then(|| gen_label(rng)),
        });
    }

    let ntrees = rng.random_range(0..=2);
    for i in 0..ntrees {
        let id = format!("tr{i}");
        let mut budget = rng.random_range(1..=6);
        let existing: Vec<Id> = (0..i).map(|j| Id::from(format!("tr{j}"))).collect();
        let root = gen_node(rng, id.clone(), &mut budget, 0, &existing);
        catalog.trees.push(ThreatTree {
            id: Id::from(id),
            title: gen_label(rng),
            source: source_of(rng),
            root,
        });
    }

    let nassets = rng.random_range(0..=8);
    for i in 0..nassets {
        let source = source_of(rng);
        catalog.assets.push(Asset {
            id: Id::from(format!("a{i}")),
            label: gen_label(rng),
            category: ["Information", "Servers", "Humans"]
                .choose(rng)
                .unwrap()
                .to_string(),
            source,
            domain: ["auto", "marine", "rail"].choose(rng).unwrap().to_string(),
            description: rng.random_bool(0.5).then(|| gen_label(rng)),
        });
    }

    // Embraces pair a keeper with the next entity, occasionally chaining
    // three deep; pairs never overlap, so the result stays acyclic.
    let mut dropped_threats: BTreeSet<Id> = BTreeSet::new();
    let mut i = 0;
    while i + 1 < nthreats {
        if rng.random_bool(0.4) {
            let chain = i + 2 < nthreats && rng.random_bool(0.3);
            catalog.embraces.push(EmbraceDecision {
                keep: Id::from(format!("t{i}")),
                drop: [Id::from(format!("t{}", i + 1))].into(),
                rationale: gen_label(rng),
                decided_by: gen_label(rng),
            });
            dropped_threats.insert(Id::from(format!("t{}", i + 1)));
            if chain {
                catalog.embraces.push(EmbraceDecision {
                    keep: Id::from(format!("t{}", i + 1)),
                    drop: [Id::from(format!("t{}", i + 2))].into(),
                    rationale: gen_label(rng),
                    decided_by: gen_label(rng),
                });
                dropped_threats.insert(Id::from(format!("t{}", i + 2)));
                i += 1;
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    let mut dropped_assets: BTreeSet<Id> = BTreeSet::new();
    let mut i = 0;
    while i + 1 < nassets {
        if rng.random_bool(0.3) {
            catalog.embraces.push(EmbraceDecision {
                keep: Id::from(format!("a{i}")),
                drop: [Id::from(format!("a{}", i + 1))].into(),
                rationale: gen_label(rng),
                decided_by: gen_label(rng),
            });
            dropped_assets.insert(Id::from(format!("a{}", i + 1)));
            i += 2;
        } else {
            i += 1;
        }
    }

    let kept_threats: Vec<Id> = (0..nthreats)
        .map(|i| Id::from(format!("t{i}")))
        .filter(|id| !dropped_threats.contains(id))
        .collect();
    let kept_assets: Vec<Id> = (0..nassets)
        .map(|i| Id::from(format!("a{i}")))
        .filter(|id| !dropped_assets.contains(id))
        .collect();

    for threat in &kept_threats {
        if !rng.random_bool(0.5) {
            continue;
        }
        let targets = if kept_assets.is_empty() || rng.random_bool(0.3) {
            AssocTargets::All
        } else {
            let count = rng.random_range(1..=kept_assets.len());
            let mut picks = kept_assets.clone();
            picks.shuffle(rng);
            picks.truncate(count);
            AssocTargets::Ids(picks)
        };
        catalog.matrix.rows.insert(threat.clone(), targets);
    }

    if !kept_threats.is_empty() {
        for i in 0..rng.random_range(0..=3) {
            let count = rng.random_range(1..=kept_threats.len());
            let mut picks = kept_threats.clone();
            picks.shuffle(rng);
            picks.truncate(count);
            catalog.incidents.push(IncidentRecord {
                id: Id::from(format!("inc{i}")),
                date: gen_date(rng),
                summary: gen_label(rng),
                url: rng.random_bool(0.3).then(|| gen_label(rng)),
                matched_threats: picks,
            });
        }
    }

    catalog
}

fn gen_node(
    rng: &mut StdRng,
    id: String,
    budget: &mut usize,
    depth: usize,
    linkable: &[Id],
) -> TreeNode {
    let make_leaf = depth >= 4 || *budget <= 1 || rng.random_bool(0.35);
    let mut node = TreeNode {
        id: Id::from(id.clone()),
        label: gen_label(rng),
        combinator: Combinator::Leaf,
        criteria: rng.random_bool(0.2).then(|| gen_label(rng)),
        impact: rng.random_bool(0.2).then(|| gen_label(rng)),
        examples: if rng.random_bool(0.2) {
            vec![gen_label(rng)]
        } else {
            Vec::new()
        },
        links: if !linkable.is_empty() && rng.random_bool(0.15) {
            vec![linkable.choose(rng).unwrap().clone()]
        } else {
            Vec::new()
        },
        children: Vec::new(),
    };
    if make_leaf {
        *budget -= 1;
        return node;
    }
    node.combinator = if rng.random_bool(0.5) {
        Combinator::And
    } else {
        Combinator::Or
    };
    let nchildren = rng.random_range(1..=3).min(*budget);
    for c in 0..nchildren.max(1) {
        let child = gen_node(rng, format!("{id}.{c}"), budget, depth + 1, linkable);
        node.children.push(child);
        if *budget == 0 {
            break;
        }
    }
    node
}

/// Catalog with random threats, assets, a few embraces, and an association
/// matrix covering every canonical threat, whose rows may name absorbed
/// aliases or duplicate entries.
pub fn random_matrix_catalog(rng: &mut StdRng) -> Catalog {
    // Threats need a non-empty asset pool to combine against; an `all` row
    // over zero assets is an authoring error, not a counting case.
    let mut catalog = loop {
        let candidate = gen_catalog(rng);
        if candidate.threats.is_empty() || !candidate.assets.is_empty() {
            break candidate;
        }
    };
    // gen_catalog only writes rows for kept ids without duplicates; rewrite
    // rows with messier target lists to stress alias resolution.
    let assets = threatloom::embrace::apply_embraces(&catalog.assets, &catalog.embraces).unwrap();
    let mut aliases: Vec<Id> = Vec::new();
    for asset in &assets {
        aliases.push(asset.representative.id.clone());
        aliases.extend(asset.absorbed.iter().cloned());
    }
    let threats = threatloom::embrace::apply_embraces(&catalog.threats, &catalog.embraces).unwrap();
    catalog.matrix.rows.clear();
    for threat in &threats {
        if aliases.is_empty() || rng.random_bool(0.3) {
            catalog
                .matrix
                .rows
                .insert(threat.representative.id.clone(), AssocTargets::All);
        } else {
            let len = rng.random_range(1..=aliases.len() + 2);
            let ids: Vec<Id> = (0..len)
                .map(|_| aliases.choose(rng).unwrap().clone())
                .collect();
            catalog
                .matrix
                .rows
                .insert(threat.representative.id.clone(), AssocTargets::Ids(ids));
        }
    }
    catalog
}

/// Random elicitation profile drawing from the vocabulary `gen_catalog`
/// uses, so filters sometimes match and sometimes exclude.
pub fn gen_profile(rng: &mut StdRng) -> threatloom::model::VariableProfile {
    use threatloom::model::VariableProfile;
    let property = *[
        PrivacyProperty::Soft,
        PrivacyProperty::Hard,
        PrivacyProperty::Cybersecurity,
    ]
    .choose(rng)
    .unwrap();
    let domain = *["auto", "marine", "rail"].choose(rng).unwrap();
    let mut profile = VariableProfile::new(property, domain);
    if rng.random_bool(0.4) {
        let count = rng.random_range(0..=3);
        profile.source_filter = Some(
            (0..count)
                .map(|_| Id::from(format!("src{}", rng.random_range(0..3))))
                .collect(),
        );
    }
    let agents: BTreeSet<ThreatAgent> = ThreatAgent::ALL
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    if !agents.is_empty() {
        profile.agents = agents;
    }
    if rng.random_bool(0.2) {
        profile.level = Abstraction::Concrete;
    }
    profile
}

/// Random AND/OR tree with at most `max_leaves` leaves. With some
/// probability two leaves share an id, which makes superset pruning do
/// real work.
pub fn gen_random_tree(rng: &mut StdRng, max_leaves: usize) -> ThreatTree {
    gen_random_tree_with(rng, max_leaves, true)
}

/// Like [`gen_random_tree`], with leaf-id aliasing switchable so structural
/// properties can rely on globally distinct leaves.
pub fn gen_random_tree_with(rng: &mut StdRng, max_leaves: usize, allow_alias: bool) -> ThreatTree {
    let mut budget = rng.random_range(1..=max_leaves);
    let mut root = gen_node(rng, "n".to_owned(), &mut budget, 0, &[]);
    if allow_alias && rng.random_bool(0.2) {
        let mut leaf_ids: Vec<Id> = root
            .walk()
            .filter(|n| n.children.is_empty())
            .map(|n| n.id.clone())
            .collect();
        if leaf_ids.len() >= 2 {
            leaf_ids.shuffle(rng);
            alias_leaf(&mut root, &leaf_ids[0], &leaf_ids[1]);
        }
    }
    ThreatTree {
        id: Id::from("n"),
        title: "generated".to_owned(),
        source: Id::from("src0"),
        root,
    }
}

fn alias_leaf(node: &mut TreeNode, from: &Id, to: &Id) {
    if node.children.is_empty() && node.id == *from {
        node.id = to.clone();
        return;
    }
    for child in &mut node.children {
        alias_leaf(child, from, to);
    }
}

/// Exhaustive oracle: evaluates every subset of distinct leaf ids and
/// returns the minimal satisfying sets, sorted like `enumerate_paths`.
pub fn brute_force_paths(tree: &ThreatTree) -> Vec<BTreeSet<Id>> {
    let mut leaf_ids: Vec<Id> = Vec::new();
    for node in tree.root.walk() {
        if node.children.is_empty() && !leaf_ids.contains(&node.id) {
            leaf_ids.push(node.id.clone());
        }
    }
    let bits: HashMap<&Id, u32> = leaf_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i as u32))
        .collect();
    assert!(leaf_ids.len() <= 20, "oracle is exponential in leaf count");

    fn satisfied(node: &TreeNode, mask: u32, bits: &HashMap<&Id, u32>) -> bool {
        if node.children.is_empty() {
            return match node.combinator {
                Combinator::Or => false,
                _ => mask & (1 << bits[&node.id]) != 0,
            };
        }
        match node.combinator {
            Combinator::Or => node.children.iter().any(|c| satisfied(c, mask, bits)),
            _ => node.children.iter().all(|c| satisfied(c, mask, bits)),
        }
    }

    let nmasks: u32 = 1 << leaf_ids.len();
    let sat: Vec<bool> = (0..nmasks)
        .map(|mask| satisfied(&tree.root, mask, &bits))
        .collect();
    let mut minimal: Vec<BTreeSet<Id>> = Vec::new();
    for mask in 0..nmasks {
        if !sat[mask as usize] {
            continue;
        }
        let is_minimal = (0..leaf_ids.len() as u32)
            .filter(|bit| mask & (1 << bit) != 0)
            .all(|bit| !sat[(mask & !(1 << bit)) as usize]);
        if is_minimal {
            minimal.push(
                leaf_ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << *i as u32) != 0)
                    .map(|(_, id)| id.clone())
                    .collect(),
            );
        }
    }
    minimal.sort();
    minimal
}
