//! Rendering of elicitation results and incident statistics: Markdown pipe
//! tables, RFC 4180 CSV, and a structured JSON export for downstream tools.
//!
//! Every renderer is pure; identical inputs give byte-identical output.

use serde::Serialize;
use thiserror::Error;

use crate::elicit::{DomainThreat, Elicitation};
use crate::embrace::Canonical;
use crate::model::{Asset, Id, IncidentRecord, Threat, VariableProfile};

/// How often a threat shows up in the incident log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreatFrequency {
    pub threat: Id,
    pub incident_count: usize,
    /// Matching incidents in log order; its length is `incident_count`.
    pub incident_ids: Vec<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("incident {incident} references unresolved threat id {threat}")]
    UnresolvedId { incident: Id, threat: Id },
}

fn md_escape(cell: &str) -> String {
    cell.replace('|', "\\|")
}

/// Renders the step-1 threat list as a Markdown pipe table with one row per
/// canonical threat. The provenance column lists every source the entry
/// absorbed. Empty input renders the header only.
pub fn render_threat_table(threats: &[Canonical<Threat>]) -> String {
    let mut out = String::from("| Category | Threat | Source | Provenance |\n| --- | --- | --- | --- |\n");
    for entry in threats {
        let rep = &entry.representative;
        let provenance: Vec<&str> = entry.provenance.iter().map(Id::as_str).collect();
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            md_escape(&rep.category),
            md_escape(&rep.label),
            md_escape(rep.source.as_str()),
            md_escape(&provenance.join(", ")),
        ));
    }
    out
}

/// Renders the step-3 pairs as CSV: header
/// `threat_id,threat_label,asset_id,asset_label,domain`, RFC 4180 quoting,
/// LF line endings, rows in input order.
pub fn render_matrix_csv(pairs: &[DomainThreat]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["threat_id", "threat_label", "asset_id", "asset_label", "domain"])
        .expect("writing to a Vec cannot fail");
    for pair in pairs {
        writer
            .write_record([
                pair.threat.as_str(),
                &pair.threat_label,
                pair.asset.as_str(),
                &pair.asset_label,
                &pair.domain,
            ])
            .expect("writing to a Vec cannot fail");
    }
    let bytes = writer.into_inner().expect("flushing a Vec cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

/// Counts incident matches per canonical threat. An incident may increment
/// several threats; naming a representative or any absorbed id of the same
/// canonical counts once. Every threat gets an entry, zero-count included.
/// Output is sorted by count descending, then threat id.
pub fn tally_incidents(
    incidents: &[IncidentRecord],
    threats: &[Canonical<Threat>],
) -> Result<Vec<ThreatFrequency>, ReportError> {
    let mut hits: Vec<Vec<Id>> = vec![Vec::new(); threats.len()];
    for incident in incidents {
        let mut touched: Vec<usize> = Vec::new();
        for named in &incident.matched_threats {
            let pos = threats
                .iter()
                .position(|t| t.representative.id == *named || t.absorbed.contains(named))
                .ok_or_else(|| ReportError::UnresolvedId {
                    incident: incident.id.clone(),
                    threat: named.clone(),
                })?;
            if !touched.contains(&pos) {
                touched.push(pos);
                hits[pos].push(incident.id.clone());
            }
        }
    }
    let mut freqs: Vec<ThreatFrequency> = threats
        .iter()
        .zip(hits)
        .map(|(threat, incident_ids)| ThreatFrequency {
            threat: threat.representative.id.clone(),
            incident_count: incident_ids.len(),
            incident_ids,
        })
        .collect();
    freqs.sort_by(|a, b| {
        b.incident_count
            .cmp(&a.incident_count)
            .then_with(|| a.threat.cmp(&b.threat))
    });
    Ok(freqs)
}

/// Renders incident frequencies as a Markdown pipe table in the given
/// order. Empty input renders the header only.
pub fn render_frequency_table(freqs: &[ThreatFrequency]) -> String {
    let mut out = String::from("| Threat | Incidents | Incident ids |\n| --- | --- | --- |\n");
    for freq in freqs {
        let ids: Vec<&str> = freq.incident_ids.iter().map(Id::as_str).collect();
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            md_escape(freq.threat.as_str()),
            freq.incident_count,
            md_escape(&ids.join(", ")),
        ));
    }
    out
}

#[derive(Serialize)]
struct StructuredExport<'a> {
    profile: &'a VariableProfile,
    threats: &'a [Canonical<Threat>],
    assets: &'a [Canonical<Asset>],
    domain_threats: &'a [DomainThreat],
    count: usize,
    frequencies: &'a [ThreatFrequency],
}

/// Renders the whole elicitation run, plus incident frequencies, as pretty
/// JSON with top-level keys `profile, threats, assets, domain_threats,
/// count, frequencies` in that order.
pub fn render_structured(run: &Elicitation, frequencies: &[ThreatFrequency]) -> String {
    let export = StructuredExport {
        profile: &run.profile,
        threats: &run.threats,
        assets: &run.assets,
        domain_threats: &run.domain_threats,
        count: run.count,
        frequencies,
    };
    let mut rendered =
        serde_json::to_string_pretty(&export).expect("export model serializes infallibly");
    rendered.push('\n');
    rendered
}
