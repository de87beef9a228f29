//! Canonical catalog writer. One output form only: LF line endings, two-space
//! indent, blocks ordered source/threat/tree/asset/embrace/assoc/incident and
//! sorted by id, keys in a fixed order per declaration kind.

use std::fmt::Write;

use thiserror::Error;

use crate::model::{
    ident_like, Abstraction, Asset, AssocTargets, Catalog, EmbraceDecision, Id, IncidentRecord,
    SourceRef, Threat, ThreatTree, TreeNode,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("cannot render {location}: {reason}")]
    Unrepresentable { location: String, reason: String },
}

/// Renders the catalog in canonical form. Referential problems such as
/// dangling ids pass through untouched, so a document that validates with
/// findings round-trips to one with the same findings. Only values the
/// grammar cannot spell back are refused: ids that would not lex as
/// identifiers, strings containing line breaks, negative years.
pub fn serialize_catalog(catalog: &Catalog) -> Result<String, SerializeError> {
    check_representable(catalog)?;
    Ok(write_catalog(catalog))
}

fn check_id(location: &str, id: &Id) -> Result<(), SerializeError> {
    if ident_like(id.as_str()) {
        Ok(())
    } else {
        Err(SerializeError::Unrepresentable {
            location: location.to_owned(),
            reason: format!("id {:?} would not lex as an identifier", id.as_str()),
        })
    }
}

fn check_text(location: &str, text: &str) -> Result<(), SerializeError> {
    if text.contains('\n') || text.contains('\r') {
        Err(SerializeError::Unrepresentable {
            location: location.to_owned(),
            reason: "string contains a line break, which the format cannot escape".to_owned(),
        })
    } else {
        Ok(())
    }
}

fn check_node(location: &str, node: &TreeNode) -> Result<(), SerializeError> {
    let here = format!("{location} node {}", node.id);
    check_id(&here, &node.id)?;
    check_text(&here, &node.label)?;
    for text in node.criteria.iter().chain(&node.impact).chain(&node.examples) {
        check_text(&here, text)?;
    }
    for link in &node.links {
        check_id(&here, link)?;
    }
    for child in &node.children {
        check_node(location, child)?;
    }
    Ok(())
}

fn check_representable(catalog: &Catalog) -> Result<(), SerializeError> {
    for source in &catalog.sources {
        let here = format!("source {}", source.id);
        check_id(&here, &source.id)?;
        check_text(&here, &source.name)?;
        if let Some(version) = &source.version {
            check_text(&here, version)?;
        }
        if source.year.is_some_and(|y| y < 0) {
            return Err(SerializeError::Unrepresentable {
                location: here,
                reason: "the grammar has no negative integers".to_owned(),
            });
        }
        for parent in &source.derived_from {
            check_id(&here, parent)?;
        }
    }
    for threat in &catalog.threats {
        let here = format!("threat {}", threat.id);
        check_id(&here, &threat.id)?;
        check_id(&here, &threat.source)?;
        check_text(&here, &threat.label)?;
        check_text(&here, &threat.category)?;
        if let Some(description) = &threat.description {
            check_text(&here, description)?;
        }
    }
    for tree in &catalog.trees {
        let here = format!("tree {}", tree.id);
        check_id(&here, &tree.id)?;
        check_id(&here, &tree.source)?;
        check_text(&here, &tree.title)?;
        check_node(&here, &tree.root)?;
    }
    for asset in &catalog.assets {
        let here = format!("asset {}", asset.id);
        check_id(&here, &asset.id)?;
        check_id(&here, &asset.source)?;
        check_text(&here, &asset.label)?;
        check_text(&here, &asset.category)?;
        if !ident_like(&asset.domain) {
            return Err(SerializeError::Unrepresentable {
                location: here,
                reason: format!("domain tag {:?} would not lex as an identifier", asset.domain),
            });
        }
        if let Some(description) = &asset.description {
            check_text(&here, description)?;
        }
    }
    for decision in &catalog.embraces {
        let here = format!("embrace keeping {}", decision.keep);
        check_id(&here, &decision.keep)?;
        for dropped in &decision.drop {
            check_id(&here, dropped)?;
        }
        check_text(&here, &decision.rationale)?;
        check_text(&here, &decision.decided_by)?;
    }
    for (threat, targets) in &catalog.matrix.rows {
        let here = format!("association row {threat}");
        check_id(&here, threat)?;
        if let AssocTargets::Ids(ids) = targets {
            for id in ids {
                check_id(&here, id)?;
            }
        }
    }
    for incident in &catalog.incidents {
        let here = format!("incident {}", incident.id);
        check_id(&here, &incident.id)?;
        check_text(&here, &incident.summary)?;
        if let Some(url) = &incident.url {
            check_text(&here, url)?;
        }
        for matched in &incident.matched_threats {
            check_id(&here, matched)?;
        }
    }
    Ok(())
}

fn esc(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn id_list(ids: &[Id]) -> String {
    let items: Vec<&str> = ids.iter().map(Id::as_str).collect();
    format!("[{}]", items.join(", "))
}

fn sorted<'a, T, K: Ord>(items: &'a [T], key: impl Fn(&'a T) -> K) -> Vec<&'a T> {
    let mut refs: Vec<&T> = items.iter().collect();
    refs.sort_by_key(|item| key(item));
    refs
}

fn write_catalog(catalog: &Catalog) -> String {
    let mut chunks: Vec<String> = Vec::new();

    for source in sorted(&catalog.sources, |s| &s.id) {
        chunks.push(write_source(source));
    }
    for threat in sorted(&catalog.threats, |t| &t.id) {
        chunks.push(write_threat(threat));
    }
    for tree in sorted(&catalog.trees, |t| &t.id) {
        chunks.push(write_tree(tree));
    }
    for asset in sorted(&catalog.assets, |a| &a.id) {
        chunks.push(write_asset(asset));
    }
    for embrace in sorted(&catalog.embraces, |e| (&e.keep, &e.drop)) {
        chunks.push(write_embrace(embrace));
    }
    if !catalog.matrix.rows.is_empty() {
        chunks.push(write_matrix(catalog));
    }
    for incident in sorted(&catalog.incidents, |i| &i.id) {
        chunks.push(write_incident(incident));
    }

    chunks.join("\n")
}

fn write_source(source: &SourceRef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "source {} \"{}\" {{", source.id, esc(&source.name));
    let _ = writeln!(out, "  kind: {};", source.kind);
    if let Some(year) = source.year {
        let _ = writeln!(out, "  year: {year};");
    }
    if let Some(version) = &source.version {
        let _ = writeln!(out, "  version: \"{}\";", esc(version));
    }
    if !source.derived_from.is_empty() {
        let _ = writeln!(out, "  derived_from: {};", id_list(&source.derived_from));
    }
    out.push_str("}\n");
    out
}

fn write_threat(threat: &Threat) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "threat {} \"{}\" {{", threat.id, esc(&threat.label));
    let _ = writeln!(out, "  property: {};", threat.property);
    let _ = writeln!(out, "  category: \"{}\";", esc(&threat.category));
    let _ = writeln!(out, "  source: {};", threat.source);
    if !threat.agents.is_empty() {
        let agents: Vec<&str> = threat.agents.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(out, "  agents: [{}];", agents.join(", "));
    }
    if threat.level != Abstraction::Abstract {
        let _ = writeln!(out, "  level: {};", threat.level);
    }
    if let Some(description) = &threat.description {
        let _ = writeln!(out, "  description: \"{}\";", esc(description));
    }
    out.push_str("}\n");
    out
}

fn write_tree(tree: &ThreatTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tree {} \"{}\" {{", tree.id, esc(&tree.title));
    let _ = writeln!(out, "  source: {};", tree.source);
    write_node(&mut out, &tree.root, 1);
    out.push_str("}\n");
    out
}

fn write_node(out: &mut String, node: &TreeNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(
        out,
        "{pad}node {} \"{}\" {} {{",
        node.id,
        esc(&node.label),
        node.combinator
    );
    if let Some(criteria) = &node.criteria {
        let _ = writeln!(out, "{pad}  criteria: \"{}\";", esc(criteria));
    }
    if let Some(impact) = &node.impact {
        let _ = writeln!(out, "{pad}  impact: \"{}\";", esc(impact));
    }
    if !node.examples.is_empty() {
        let examples: Vec<String> = node
            .examples
            .iter()
            .map(|e| format!("\"{}\"", esc(e)))
            .collect();
        let _ = writeln!(out, "{pad}  examples: [{}];", examples.join(", "));
    }
    if !node.links.is_empty() {
        let _ = writeln!(out, "{pad}  links: {};", id_list(&node.links));
    }
    for child in &node.children {
        write_node(out, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn write_asset(asset: &Asset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "asset {} \"{}\" {{", asset.id, esc(&asset.label));
    let _ = writeln!(out, "  category: \"{}\";", esc(&asset.category));
    let _ = writeln!(out, "  source: {};", asset.source);
    let _ = writeln!(out, "  domain: {};", asset.domain);
    if let Some(description) = &asset.description {
        let _ = writeln!(out, "  description: \"{}\";", esc(description));
    }
    out.push_str("}\n");
    out
}

fn write_embrace(decision: &EmbraceDecision) -> String {
    let mut out = String::new();
    out.push_str("embrace {\n");
    let _ = writeln!(out, "  keep: {};", decision.keep);
    let drops: Vec<&str> = decision.drop.iter().map(Id::as_str).collect();
    let _ = writeln!(out, "  drop: [{}];", drops.join(", "));
    let _ = writeln!(out, "  rationale: \"{}\";", esc(&decision.rationale));
    let _ = writeln!(out, "  decided_by: \"{}\";", esc(&decision.decided_by));
    out.push_str("}\n");
    out
}

fn write_matrix(catalog: &Catalog) -> String {
    let mut out = String::new();
    let mut rows: Vec<(&Id, &AssocTargets)> = catalog.matrix.rows.iter().collect();
    rows.sort_by_key(|(id, _)| *id);
    for (threat, targets) in rows {
        match targets {
            AssocTargets::All => {
                let _ = writeln!(out, "assoc {threat} -> all;");
            }
            AssocTargets::Ids(ids) => {
                let _ = writeln!(out, "assoc {threat} -> {};", id_list(ids));
            }
        }
    }
    out
}

fn write_incident(incident: &IncidentRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "incident {} {{", incident.id);
    let _ = writeln!(out, "  date: \"{}\";", incident.date.format("%Y-%m-%d"));
    let _ = writeln!(out, "  summary: \"{}\";", esc(&incident.summary));
    if let Some(url) = &incident.url {
        let _ = writeln!(out, "  url: \"{}\";", esc(url));
    }
    let _ = writeln!(out, "  threats: {};", id_list(&incident.matched_threats));
    out.push_str("}\n");
    out
}
