//! AND/OR threat-tree analysis: attack-path enumeration, detail projection,
//! and cross-tree link resolution.
//!
//! A path is a minimal set of leaves that satisfies the root: an OR node is
//! satisfied by any satisfied child, an AND node by all of them. Links
//! between trees are navigation metadata and never change what a tree
//! enumerates to.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Catalog, Combinator, Id, ThreatTree, TreeNode};

/// Enumeration refuses trees whose path-count bound exceeds this.
pub const PATH_BOUND: u64 = 1_000_000;

/// A minimal leaf set whose joint realization satisfies the tree root.
/// Ordering is lexicographic over the sorted leaf ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AttackPath {
    pub leaves: BTreeSet<Id>,
}

/// How much annotation a projected tree keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetailLevel {
    /// Structure only: labels and combinators.
    Basic,
    /// Structure plus example annotations.
    Examples,
    /// Everything: criteria, impact, and examples.
    AllDetails,
}

impl DetailLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            DetailLevel::Basic => "basic",
            DetailLevel::Examples => "examples",
            DetailLevel::AllDetails => "all_details",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "basic" => Some(DetailLevel::Basic),
            "examples" => Some(DetailLevel::Examples),
            "all_details" => Some(DetailLevel::AllDetails),
            _ => None,
        }
    }
}

/// A `links` entry resolved to its target tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkEdge {
    pub from_node: Id,
    pub to_tree: Id,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree admits more than {bound} paths; refusing to enumerate")]
    PathExplosion { bound: u64 },
    #[error("node {node} links to unknown tree {target}")]
    UnresolvedLink { node: Id, target: Id },
}

/// Upper bound on the number of paths, before minimization.
fn path_bound(node: &TreeNode) -> u64 {
    if node.children.is_empty() {
        return match node.combinator {
            // An OR with no children is unsatisfiable; AND degenerates to
            // the empty product. Validation rejects both shapes.
            Combinator::Or => 0,
            _ => 1,
        };
    }
    match node.combinator {
        Combinator::Or => node
            .children
            .iter()
            .fold(0u64, |acc, c| acc.saturating_add(path_bound(c))),
        _ => node
            .children
            .iter()
            .fold(1u64, |acc, c| acc.saturating_mul(path_bound(c))),
    }
}

fn paths_of(node: &TreeNode) -> Vec<BTreeSet<Id>> {
    if node.children.is_empty() {
        return match node.combinator {
            Combinator::Or => Vec::new(),
            _ => vec![[node.id.clone()].into()],
        };
    }
    match node.combinator {
        Combinator::Or => node.children.iter().flat_map(paths_of).collect(),
        _ => {
            let mut acc: Vec<BTreeSet<Id>> = vec![BTreeSet::new()];
            for child in &node.children {
                let child_paths = paths_of(child);
                let mut next = Vec::with_capacity(acc.len() * child_paths.len());
                for left in &acc {
                    for right in &child_paths {
                        let mut combined = left.clone();
                        combined.extend(right.iter().cloned());
                        next.push(combined);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Drops supersets and duplicates. Size-ascending order makes one subset
/// scan against the kept list sufficient.
fn minimize(mut paths: Vec<BTreeSet<Id>>) -> Vec<BTreeSet<Id>> {
    paths.sort_by_key(BTreeSet::len);
    let mut kept: Vec<BTreeSet<Id>> = Vec::new();
    for path in paths {
        if !kept.iter().any(|smaller| smaller.is_subset(&path)) {
            kept.push(path);
        }
    }
    kept
}

/// Enumerates every minimal attack path of the tree, deduplicated and sorted
/// lexicographically by leaf-id tuple. Refuses trees whose path bound
/// exceeds [`PATH_BOUND`].
pub fn enumerate_paths(tree: &ThreatTree) -> Result<Vec<AttackPath>, TreeError> {
    if path_bound(&tree.root) > PATH_BOUND {
        return Err(TreeError::PathExplosion { bound: PATH_BOUND });
    }
    let mut paths: Vec<AttackPath> = minimize(paths_of(&tree.root))
        .into_iter()
        .map(|leaves| AttackPath { leaves })
        .collect();
    paths.sort();
    Ok(paths)
}

fn project_node(node: &TreeNode, level: DetailLevel) -> TreeNode {
    TreeNode {
        id: node.id.clone(),
        label: node.label.clone(),
        combinator: node.combinator,
        criteria: match level {
            DetailLevel::AllDetails => node.criteria.clone(),
            _ => None,
        },
        impact: match level {
            DetailLevel::AllDetails => node.impact.clone(),
            _ => None,
        },
        examples: match level {
            DetailLevel::Basic => Vec::new(),
            _ => node.examples.clone(),
        },
        links: node.links.clone(),
        children: node
            .children
            .iter()
            .map(|child| project_node(child, level))
            .collect(),
    }
}

/// Returns a copy of the tree carrying only the requested detail level.
/// Structure (and therefore path enumeration) is unchanged.
pub fn project(tree: &ThreatTree, level: DetailLevel) -> ThreatTree {
    ThreatTree {
        id: tree.id.clone(),
        title: tree.title.clone(),
        source: tree.source.clone(),
        root: project_node(&tree.root, level),
    }
}

/// Resolves every `links` entry in the tree against the catalog's trees, in
/// pre-order. The first dangling target is an error.
pub fn resolve_links(tree: &ThreatTree, catalog: &Catalog) -> Result<Vec<LinkEdge>, TreeError> {
    let mut edges = Vec::new();
    for node in tree.root.walk() {
        for target in &node.links {
            if catalog.tree(target.as_str()).is_none() {
                return Err(TreeError::UnresolvedLink {
                    node: node.id.clone(),
                    target: target.clone(),
                });
            }
            edges.push(LinkEdge {
                from_node: node.id.clone(),
                to_tree: target.clone(),
            });
        }
    }
    Ok(edges)
}
