//! Core catalog model: sources, threats, threat trees, assets, embrace
//! decisions, association matrices, and incident records, plus whole-catalog
//! validation.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Identifier for any catalog entity. Ids are stable strings, conventionally
/// scoped by the source that introduced the entity (`linddun.n.1.1`,
/// `enisa-sc.info.user`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Id(String);

impl Id {
    pub fn new(raw: impl Into<String>) -> Self {
        Id(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Id {
    fn from(raw: &str) -> Self {
        Id(raw.to_owned())
    }
}

impl From<String> for Id {
    fn from(raw: String) -> Self {
        Id(raw)
    }
}

impl Borrow<str> for Id {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Where a knowledge-base source sits relative to the analysis team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Internal,
    External,
    Hybrid,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Internal => "internal",
            SourceKind::External => "external",
            SourceKind::Hybrid => "hybrid",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "internal" => Some(SourceKind::Internal),
            "external" => Some(SourceKind::External),
            "hybrid" => Some(SourceKind::Hybrid),
            _ => None,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A knowledge-base source: a document or catalog that threats, trees, and
/// assets are transcribed from. Hybrid sources must say what they derive from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub id: Id,
    pub name: String,
    pub kind: SourceKind,
    pub year: Option<i32>,
    pub version: Option<String>,
    pub derived_from: Vec<Id>,
}

/// The privacy property family a threat speaks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyProperty {
    Soft,
    Hard,
    Cybersecurity,
}

impl PrivacyProperty {
    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyProperty::Soft => "soft",
            PrivacyProperty::Hard => "hard",
            PrivacyProperty::Cybersecurity => "cybersecurity",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "soft" => Some(PrivacyProperty::Soft),
            "hard" => Some(PrivacyProperty::Hard),
            "cybersecurity" => Some(PrivacyProperty::Cybersecurity),
            _ => None,
        }
    }
}

impl fmt::Display for PrivacyProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Who can realize a threat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreatAgent {
    Attacker,
    DataController,
    DataProcessor,
    ThirdParty,
}

impl ThreatAgent {
    pub const ALL: [ThreatAgent; 4] = [
        ThreatAgent::Attacker,
        ThreatAgent::DataController,
        ThreatAgent::DataProcessor,
        ThreatAgent::ThirdParty,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThreatAgent::Attacker => "attacker",
            ThreatAgent::DataController => "data_controller",
            ThreatAgent::DataProcessor => "data_processor",
            ThreatAgent::ThirdParty => "third_party",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "attacker" => Some(ThreatAgent::Attacker),
            "data_controller" => Some(ThreatAgent::DataController),
            "data_processor" => Some(ThreatAgent::DataProcessor),
            "third_party" => Some(ThreatAgent::ThirdParty),
            _ => None,
        }
    }
}

impl fmt::Display for ThreatAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a threat is stated at the knowledge-base level or as a
/// domain-specific instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abstraction {
    Abstract,
    Concrete,
}

impl Abstraction {
    pub fn as_str(self) -> &'static str {
        match self {
            Abstraction::Abstract => "abstract",
            Abstraction::Concrete => "concrete",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "abstract" => Some(Abstraction::Abstract),
            "concrete" => Some(Abstraction::Concrete),
            _ => None,
        }
    }
}

impl Default for Abstraction {
    fn default() -> Self {
        Abstraction::Abstract
    }
}

impl fmt::Display for Abstraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single catalogued threat. An empty agent set means the threat is open to
/// every agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threat {
    pub id: Id,
    pub label: String,
    pub property: PrivacyProperty,
    pub category: String,
    pub source: Id,
    pub agents: BTreeSet<ThreatAgent>,
    pub level: Abstraction,
    pub description: Option<String>,
}

/// Node combinator in a threat tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combinator {
    And,
    Or,
    Leaf,
}

impl Combinator {
    pub fn as_str(self) -> &'static str {
        match self {
            Combinator::And => "and",
            Combinator::Or => "or",
            Combinator::Leaf => "leaf",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "and" => Some(Combinator::And),
            "or" => Some(Combinator::Or),
            "leaf" => Some(Combinator::Leaf),
            _ => None,
        }
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A node in an AND/OR threat tree. `links` point at other trees whose root
/// refines this node; they are navigation metadata, never spliced into path
/// enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: Id,
    pub label: String,
    pub combinator: Combinator,
    pub criteria: Option<String>,
    pub impact: Option<String>,
    pub examples: Vec<String>,
    pub links: Vec<Id>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    /// Pre-order walk over this node and everything below it.
    pub fn walk(&self) -> TreeWalk<'_> {
        TreeWalk { stack: vec![self] }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.walk().filter(|n| n.children.is_empty())
    }
}

pub struct TreeWalk<'a> {
    stack: Vec<&'a TreeNode>,
}

impl<'a> Iterator for TreeWalk<'a> {
    type Item = &'a TreeNode;

    fn next(&mut self) -> Option<&'a TreeNode> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// An AND/OR refinement tree for one threat category. The root node id equals
/// the tree id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatTree {
    pub id: Id,
    pub title: String,
    pub source: Id,
    pub root: TreeNode,
}

/// An asset of the target domain that threats can affect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Asset {
    pub id: Id,
    pub label: String,
    pub category: String,
    pub source: Id,
    pub domain: String,
    pub description: Option<String>,
}

/// An analyst ruling that one entity subsumes others. All ids must name the
/// same kind of entity (all threats or all assets).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmbraceDecision {
    pub keep: Id,
    pub drop: BTreeSet<Id>,
    pub rationale: String,
    pub decided_by: String,
}

/// Right-hand side of an association row: either every elicited asset or an
/// explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssocTargets {
    All,
    Ids(Vec<Id>),
}

/// Analyst-maintained mapping from threat ids to the assets they affect.
/// Row order follows declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    pub rows: IndexMap<Id, AssocTargets>,
}

impl AssociationMatrix {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A real-world case matched against catalogued threats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub id: Id,
    pub date: NaiveDate,
    pub summary: String,
    pub url: Option<String>,
    pub matched_threats: Vec<Id>,
}

/// The five analysis variables that scope an elicitation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableProfile {
    /// Restrict threats to these sources; `None` admits every source.
    pub source_filter: Option<BTreeSet<Id>>,
    pub property: PrivacyProperty,
    pub agents: BTreeSet<ThreatAgent>,
    /// Domain tag assets are filtered by; `independent` is the conventional
    /// tag for domain-independent material.
    pub domain: String,
    pub level: Abstraction,
}

impl VariableProfile {
    /// Profile with every agent admitted and the abstract level, scoped to
    /// one property and domain.
    pub fn new(property: PrivacyProperty, domain: impl Into<String>) -> Self {
        VariableProfile {
            source_filter: None,
            property,
            agents: ThreatAgent::ALL.into_iter().collect(),
            domain: domain.into(),
            level: Abstraction::Abstract,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.agents.is_empty() {
            return Err("profile admits no threat agents".into());
        }
        if self.domain.trim().is_empty() {
            return Err("profile has an empty domain tag".into());
        }
        Ok(())
    }
}

/// A parsed knowledge base: every entity kind the catalog format can declare.
/// Vectors preserve declaration order; equality is entity equality and
/// ignores declaration order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Catalog {
    pub sources: Vec<SourceRef>,
    pub threats: Vec<Threat>,
    pub trees: Vec<ThreatTree>,
    pub assets: Vec<Asset>,
    pub embraces: Vec<EmbraceDecision>,
    pub matrix: AssociationMatrix,
    pub incidents: Vec<IncidentRecord>,
}

impl Catalog {
    pub fn source(&self, id: &str) -> Option<&SourceRef> {
        self.sources.iter().find(|s| s.id.as_str() == id)
    }

    pub fn threat(&self, id: &str) -> Option<&Threat> {
        self.threats.iter().find(|t| t.id.as_str() == id)
    }

    pub fn tree(&self, id: &str) -> Option<&ThreatTree> {
        self.trees.iter().find(|t| t.id.as_str() == id)
    }

    pub fn asset(&self, id: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.id.as_str() == id)
    }

    pub fn incident(&self, id: &str) -> Option<&IncidentRecord> {
        self.incidents.iter().find(|i| i.id.as_str() == id)
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
            && self.threats.is_empty()
            && self.trees.is_empty()
            && self.assets.is_empty()
            && self.embraces.is_empty()
            && self.matrix.is_empty()
            && self.incidents.is_empty()
    }
}

fn id_map<'a, T, F: Fn(&T) -> &Id>(items: &'a [T], key: F) -> BTreeMap<&'a Id, &'a T> {
    items.iter().map(|item| (key(item), item)).collect()
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        let mut mine = self.embraces.clone();
        let mut theirs = other.embraces.clone();
        mine.sort();
        theirs.sort();
        self.sources.len() == other.sources.len()
            && self.threats.len() == other.threats.len()
            && self.trees.len() == other.trees.len()
            && self.assets.len() == other.assets.len()
            && self.incidents.len() == other.incidents.len()
            && id_map(&self.sources, |s| &s.id) == id_map(&other.sources, |s| &s.id)
            && id_map(&self.threats, |t| &t.id) == id_map(&other.threats, |t| &t.id)
            && id_map(&self.trees, |t| &t.id) == id_map(&other.trees, |t| &t.id)
            && id_map(&self.assets, |a| &a.id) == id_map(&other.assets, |a| &a.id)
            && id_map(&self.incidents, |i| &i.id) == id_map(&other.incidents, |i| &i.id)
            && mine == theirs
            && self.matrix == other.matrix
    }
}

impl Eq for Catalog {}

/// True when `raw` can stand bare as an identifier token in catalog text:
/// a letter or underscore followed by letters, digits, `_`, `.`, or `-`.
pub fn ident_like(raw: &str) -> bool {
    let mut chars = raw.chars();
    match chars.next() {
        Some(first) if first.is_alphabetic() || first == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// Case-folds, trims, collapses internal whitespace, and maps typographic
/// quote and dash variants onto their ASCII forms. Two labels that normalize
/// equal are treated as the same wording.
pub fn normalize_label(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        let ch = match ch {
            '\u{2018}' | '\u{2019}' => '\'',
            '\u{201c}' | '\u{201d}' => '"',
            '\u{2010}' | '\u{2011}' | '\u{2013}' | '\u{2014}' | '\u{2212}' => '-',
            other => other,
        };
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// One validation finding, anchored to the entity it concerns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.severity, self.location, self.message)
    }
}

/// Referential-integrity findings for a whole catalog, sorted by location so
/// equal inputs render byte-identically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

struct IssueSink {
    issues: Vec<ValidationIssue>,
}

impl IssueSink {
    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            severity: Severity::Error,
            location: location.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        });
    }

    // The catalog grammar cannot escape control characters, so text that
    // contains them would not survive a serialize/parse trip.
    fn check_text(&mut self, location: &str, field: &str, value: &str) {
        if value.chars().any(|c| c.is_control()) {
            self.error(location, format!("{field} contains a control character"));
        }
    }
}

/// Checks every referential-integrity rule a catalog must satisfy before the
/// analysis operations run: resolvable ids, unique ids per kind, well-formed
/// trees, coherent embrace decisions, canonical matrix references, and
/// incident threat links.
pub fn validate_catalog(catalog: &Catalog) -> ValidationReport {
    let mut sink = IssueSink { issues: Vec::new() };

    check_unique_ids(catalog, &mut sink);
    check_sources(catalog, &mut sink);
    check_threats(catalog, &mut sink);
    check_assets(catalog, &mut sink);
    check_trees(catalog, &mut sink);
    let embraces_ok = check_embraces(catalog, &mut sink);
    check_matrix(catalog, embraces_ok, &mut sink);
    check_incidents(catalog, &mut sink);

    let mut issues = sink.issues;
    issues.sort_by(|a, b| {
        (&a.location, &a.message, a.severity).cmp(&(&b.location, &b.message, b.severity))
    });
    issues.dedup();
    ValidationReport { issues }
}

fn check_unique_ids(catalog: &Catalog, sink: &mut IssueSink) {
    fn dupes<'a, T: 'a>(
        kind: &str,
        items: impl Iterator<Item = &'a T>,
        key: impl Fn(&'a T) -> &'a Id,
        sink: &mut IssueSink,
    ) {
        let mut seen = BTreeSet::new();
        for item in items {
            let id = key(item);
            if !seen.insert(id) {
                sink.error(format!("{kind}/{id}"), format!("duplicate id {id}"));
            }
            // Ids are written bare in catalog text, so they must lex as
            // identifiers.
            if !ident_like(id.as_str()) {
                sink.error(
                    format!("{kind}/{id}"),
                    format!("id {:?} is not identifier-shaped", id.as_str()),
                );
            }
        }
    }
    dupes("source", catalog.sources.iter(), |s| &s.id, sink);
    dupes("threat", catalog.threats.iter(), |t| &t.id, sink);
    dupes("tree", catalog.trees.iter(), |t| &t.id, sink);
    dupes("asset", catalog.assets.iter(), |a| &a.id, sink);
    dupes("incident", catalog.incidents.iter(), |i| &i.id, sink);
}

fn check_sources(catalog: &Catalog, sink: &mut IssueSink) {
    for source in &catalog.sources {
        let loc = format!("source/{}", source.id);
        sink.check_text(&loc, "name", &source.name);
        if source.name.trim().is_empty() {
            sink.error(&loc, "empty name");
        }
        match source.kind {
            SourceKind::Hybrid if source.derived_from.is_empty() => {
                sink.error(&loc, "hybrid source lists no derived_from ids");
            }
            SourceKind::Internal | SourceKind::External if !source.derived_from.is_empty() => {
                sink.warning(&loc, "derived_from on a non-hybrid source");
            }
            _ => {}
        }
        for parent in &source.derived_from {
            if catalog.source(parent.as_str()).is_none() {
                sink.error(&loc, format!("unresolved id {parent}"));
            }
        }
    }
}

fn check_threats(catalog: &Catalog, sink: &mut IssueSink) {
    for threat in &catalog.threats {
        let loc = format!("threat/{}", threat.id);
        if catalog.source(threat.source.as_str()).is_none() {
            sink.error(&loc, format!("unresolved id {}", threat.source));
        }
        if normalize_label(&threat.label).is_empty() {
            sink.error(&loc, "empty label");
        }
        sink.check_text(&loc, "label", &threat.label);
        sink.check_text(&loc, "category", &threat.category);
        if let Some(desc) = &threat.description {
            sink.check_text(&loc, "description", desc);
        }
    }
}

fn check_assets(catalog: &Catalog, sink: &mut IssueSink) {
    for asset in &catalog.assets {
        let loc = format!("asset/{}", asset.id);
        if catalog.source(asset.source.as_str()).is_none() {
            sink.error(&loc, format!("unresolved id {}", asset.source));
        }
        if normalize_label(&asset.label).is_empty() {
            sink.error(&loc, "empty label");
        }
        if !ident_like(&asset.domain) {
            sink.error(
                &loc,
                format!("domain tag {:?} is not identifier-shaped", asset.domain),
            );
        }
        sink.check_text(&loc, "label", &asset.label);
        sink.check_text(&loc, "category", &asset.category);
        if let Some(desc) = &asset.description {
            sink.check_text(&loc, "description", desc);
        }
    }
}

fn extends_parent(child: &Id, parent: &Id) -> bool {
    let rest = match child.as_str().strip_prefix(parent.as_str()) {
        Some(rest) => rest,
        None => return false,
    };
    let segment = match rest.strip_prefix('.') {
        Some(segment) => segment,
        None => return false,
    };
    !segment.is_empty() && !segment.contains('.')
}

fn check_trees(catalog: &Catalog, sink: &mut IssueSink) {
    for tree in &catalog.trees {
        let tree_loc = format!("tree/{}", tree.id);
        if catalog.source(tree.source.as_str()).is_none() {
            sink.error(&tree_loc, format!("unresolved id {}", tree.source));
        }
        if tree.root.id != tree.id {
            sink.error(
                &tree_loc,
                format!("root node id {} does not match tree id", tree.root.id),
            );
        }
        let mut seen = BTreeSet::new();
        for node in tree.root.walk() {
            let loc = format!("{tree_loc}/node/{}", node.id);
            if !seen.insert(&node.id) {
                sink.error(&loc, format!("duplicate node id {}", node.id));
            }
            if !ident_like(node.id.as_str()) {
                sink.error(
                    &loc,
                    format!("id {:?} is not identifier-shaped", node.id.as_str()),
                );
            }
            match node.combinator {
                Combinator::Leaf if !node.children.is_empty() => {
                    sink.error(&loc, "leaf node has children");
                }
                Combinator::And | Combinator::Or if node.children.is_empty() => {
                    sink.error(&loc, format!("{} node has no children", node.combinator));
                }
                _ => {}
            }
            for child in &node.children {
                if !extends_parent(&child.id, &node.id) {
                    sink.error(
                        format!("{tree_loc}/node/{}", child.id),
                        format!("node id does not extend parent id {}", node.id),
                    );
                }
            }
            for link in &node.links {
                if catalog.tree(link.as_str()).is_none() {
                    sink.error(&loc, format!("unresolved id {link}"));
                }
            }
            sink.check_text(&loc, "label", &node.label);
            if let Some(criteria) = &node.criteria {
                sink.check_text(&loc, "criteria", criteria);
            }
            if let Some(impact) = &node.impact {
                sink.check_text(&loc, "impact", impact);
            }
            for example in &node.examples {
                sink.check_text(&loc, "example", example);
            }
        }
    }
}

/// Returns true when the embrace set is coherent enough for dependent checks
/// (matrix canonical resolution) to be meaningful.
fn check_embraces(catalog: &Catalog, sink: &mut IssueSink) -> bool {
    let threat_ids: BTreeSet<&str> = catalog.threats.iter().map(|t| t.id.as_str()).collect();
    let asset_ids: BTreeSet<&str> = catalog.assets.iter().map(|a| a.id.as_str()).collect();
    let mut clean = true;
    let mut dropped_by: BTreeMap<&Id, usize> = BTreeMap::new();
    let mut keep_of: BTreeMap<&Id, &Id> = BTreeMap::new();

    for (index, decision) in catalog.embraces.iter().enumerate() {
        let loc = format!("embrace/{}", decision.keep);
        sink.check_text(&loc, "rationale", &decision.rationale);
        sink.check_text(&loc, "decided_by", &decision.decided_by);
        if decision.drop.is_empty() {
            sink.error(&loc, "decision drops nothing");
            clean = false;
        }
        if decision.drop.contains(&decision.keep) {
            sink.error(&loc, format!("decision keeps and drops {}", decision.keep));
            clean = false;
        }

        let mut kinds = BTreeSet::new();
        for id in std::iter::once(&decision.keep).chain(decision.drop.iter()) {
            let is_threat = threat_ids.contains(id.as_str());
            let is_asset = asset_ids.contains(id.as_str());
            if is_threat {
                kinds.insert("threat");
            }
            if is_asset {
                kinds.insert("asset");
            }
            if !is_threat && !is_asset {
                sink.error(&loc, format!("unresolved id {id}"));
                clean = false;
            }
        }
        if kinds.len() > 1 {
            sink.error(&loc, "decision mixes threat and asset ids");
            clean = false;
        }

        for id in &decision.drop {
            if let Some(previous) = dropped_by.insert(id, index) {
                if previous != index {
                    sink.error(&loc, format!("id {id} is dropped by two decisions"));
                    clean = false;
                }
            }
            keep_of.insert(id, &decision.keep);
        }
    }

    // Follow keep chains; revisiting a decision's own drop set means a cycle.
    for decision in &catalog.embraces {
        let mut visited = BTreeSet::new();
        let mut cursor = &decision.keep;
        while let Some(next) = keep_of.get(cursor) {
            if !visited.insert(cursor) {
                sink.error(
                    format!("embrace/{}", decision.keep),
                    format!("embrace cycle involving {cursor}"),
                );
                clean = false;
                break;
            }
            cursor = next;
        }
    }

    // Cross-property embraces execute, but the analyst should see them.
    let threat_props: BTreeMap<&str, PrivacyProperty> = catalog
        .threats
        .iter()
        .map(|t| (t.id.as_str(), t.property))
        .collect();
    for decision in &catalog.embraces {
        let kept = match threat_props.get(decision.keep.as_str()) {
            Some(p) => *p,
            None => continue,
        };
        for id in &decision.drop {
            if let Some(dropped) = threat_props.get(id.as_str()) {
                if *dropped != kept {
                    sink.warning(
                        format!("embrace/{}", decision.keep),
                        format!(
                            "cross-property embrace: {} ({kept}) absorbs {id} ({dropped})",
                            decision.keep
                        ),
                    );
                }
            }
        }
    }

    clean
}

fn check_matrix(catalog: &Catalog, embraces_ok: bool, sink: &mut IssueSink) {
    // Matrix references must hold against the post-embrace canonical sets;
    // when the decisions themselves are broken, fall back to raw ids so one
    // root cause does not cascade.
    let dropped: BTreeSet<&str> = if embraces_ok {
        catalog
            .embraces
            .iter()
            .flat_map(|d| d.drop.iter().map(Id::as_str))
            .collect()
    } else {
        BTreeSet::new()
    };
    let canonical_threats: BTreeSet<&str> = catalog
        .threats
        .iter()
        .map(|t| t.id.as_str())
        .filter(|id| !dropped.contains(id))
        .collect();
    let canonical_assets: BTreeSet<&str> = catalog
        .assets
        .iter()
        .map(|a| a.id.as_str())
        .filter(|id| !dropped.contains(id))
        .collect();

    for (threat, targets) in &catalog.matrix.rows {
        let loc = format!("assoc/{threat}");
        if !canonical_threats.contains(threat.as_str()) {
            sink.error(&loc, format!("unresolved id {threat}"));
        }
        let ids = match targets {
            AssocTargets::All => continue,
            AssocTargets::Ids(ids) => ids,
        };
        if ids.is_empty() {
            sink.error(&loc, "empty asset list");
        }
        let mut seen = BTreeSet::new();
        for asset in ids {
            if !canonical_assets.contains(asset.as_str()) {
                sink.error(&loc, format!("unresolved id {asset}"));
            }
            if !seen.insert(asset) {
                sink.error(&loc, format!("duplicate asset id {asset}"));
            }
        }
    }
}

fn check_incidents(catalog: &Catalog, sink: &mut IssueSink) {
    for incident in &catalog.incidents {
        let loc = format!("incident/{}", incident.id);
        sink.check_text(&loc, "summary", &incident.summary);
        if incident.summary.trim().is_empty() {
            sink.error(&loc, "empty summary");
        }
        if incident.matched_threats.is_empty() {
            sink.error(&loc, "incident matches no threats");
        }
        let mut seen = BTreeSet::new();
        for threat in &incident.matched_threats {
            if catalog.threat(threat.as_str()).is_none() {
                sink.error(&loc, format!("unresolved id {threat}"));
            }
            if !seen.insert(threat) {
                sink.error(&loc, format!("duplicate threat id {threat}"));
            }
        }
    }
}
