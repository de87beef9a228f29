//! Command-line frontend. Merges catalog files and drives validation,
//! elicitation, attack-path listing, incident statistics, and canonical
//! formatting as reproducible batch runs.

use std::collections::BTreeSet;
use std::fs;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dsl::{merge_catalogs, parse_catalog_with_warnings, serialize_catalog, Merged};
use crate::elicit::{elicit, RowPolicy};
use crate::embrace::apply_embraces;
use crate::model::{
    validate_catalog, Abstraction, Id, PrivacyProperty, Severity, ThreatAgent, VariableProfile,
};
use crate::report::{
    render_frequency_table, render_matrix_csv, render_structured, render_threat_table,
    tally_incidents, ThreatFrequency,
};
use crate::trees::{enumerate_paths, project, DetailLevel};

pub const EXIT_OK: i32 = 0;
/// Syntax, validation, or elicitation failures.
pub const EXIT_DOMAIN: i32 = 1;
/// Unreadable or unwritable files and usage errors.
pub const EXIT_IO: i32 = 2;

#[derive(Parser)]
#[command(
    name = "threatloom",
    version,
    about = "Knowledge-base engine for domain-dependent privacy threat modelling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge catalog files and report referential findings
    Validate(ValidateArgs),
    /// Run the three elicitation steps and write the selected reports
    Elicit(ElicitArgs),
    /// List the minimal attack paths of one threat tree
    Paths(PathsArgs),
    /// Tabulate incident frequencies per canonical threat
    Stats(StatsArgs),
    /// Reprint the merged catalogs in canonical form on standard output
    Fmt(FmtArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Catalog file in TMC format; repeat to merge several
    #[arg(long = "catalog", value_name = "FILE", required = true)]
    catalogs: Vec<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    catalogs: CatalogArgs,
    /// Fail on warnings too, not only on errors
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ElicitArgs {
    #[command(flatten)]
    catalogs: CatalogArgs,
    /// Privacy property to elicit for
    #[arg(long, value_name = "PROPERTY", default_value = "soft", value_parser = parse_property)]
    property: PrivacyProperty,
    /// Restrict threats to these source ids; repeat for several
    #[arg(long = "source", value_name = "ID")]
    sources: Vec<String>,
    /// Admit only threats enactable by these agents; repeat for several
    #[arg(long = "agent", value_name = "AGENT", value_parser = parse_agent)]
    agents: Vec<ThreatAgent>,
    /// Domain tag selecting the asset scope
    #[arg(long, value_name = "TAG")]
    domain: String,
    /// Abstraction level of the threats to admit
    #[arg(long, value_name = "LEVEL", default_value = "abstract", value_parser = parse_abstraction)]
    level: Abstraction,
    /// Directory the reports are written into
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Report format to write (markdown, csv, structured); repeat for
    /// several, default is all three
    #[arg(long = "format", value_name = "FORMAT", value_parser = parse_format)]
    formats: Vec<ReportFormat>,
    /// Fail when an elicited threat has no association row
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PathsArgs {
    #[command(flatten)]
    catalogs: CatalogArgs,
    /// Id of the tree to enumerate
    #[arg(value_name = "TREE")]
    tree: String,
    /// Annotation detail kept before display (basic, examples, all_details)
    #[arg(long, value_name = "LEVEL", default_value = "all_details", value_parser = parse_detail)]
    level: DetailLevel,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    catalogs: CatalogArgs,
}

#[derive(Args)]
struct FmtArgs {
    #[command(flatten)]
    catalogs: CatalogArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ReportFormat {
    Markdown,
    Csv,
    Structured,
}

fn parse_property(token: &str) -> Result<PrivacyProperty, String> {
    PrivacyProperty::parse(token)
        .ok_or_else(|| "expected one of: soft, hard, cybersecurity".to_owned())
}

fn parse_agent(token: &str) -> Result<ThreatAgent, String> {
    ThreatAgent::parse(token).ok_or_else(|| {
        "expected one of: attacker, data_controller, data_processor, third_party".to_owned()
    })
}

fn parse_abstraction(token: &str) -> Result<Abstraction, String> {
    Abstraction::parse(token).ok_or_else(|| "expected abstract or concrete".to_owned())
}

fn parse_detail(token: &str) -> Result<DetailLevel, String> {
    DetailLevel::parse(token)
        .ok_or_else(|| "expected one of: basic, examples, all_details".to_owned())
}

fn parse_format(token: &str) -> Result<ReportFormat, String> {
    match token {
        "markdown" => Ok(ReportFormat::Markdown),
        "csv" => Ok(ReportFormat::Csv),
        "structured" => Ok(ReportFormat::Structured),
        _ => Err("expected one of: markdown, csv, structured".to_owned()),
    }
}

/// Stderr styling, active only on a terminal and without
/// THREATLOOM_NO_COLOR in the environment.
struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        Style {
            color: std::env::var_os("THREATLOOM_NO_COLOR").is_none()
                && std::io::stderr().is_terminal(),
        }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    fn error(&self, message: &str) {
        eprintln!("{}", self.paint("31", message));
    }

    fn warning(&self, message: &str) {
        eprintln!("{}", self.paint("33", message));
    }

    fn note(&self, message: &str) {
        eprintln!("{}", self.paint("36", message));
    }
}

/// Parses and runs one invocation, returning the process exit status.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    let style = Style::detect();
    match cli.command {
        Command::Validate(args) => cmd_validate(args, &style),
        Command::Elicit(args) => cmd_elicit(args, &style),
        Command::Paths(args) => cmd_paths(args, &style),
        Command::Stats(args) => cmd_stats(args, &style),
        Command::Fmt(args) => cmd_fmt(args, &style),
    }
}

fn load_merged(paths: &[PathBuf], style: &Style) -> Result<Merged, i32> {
    let mut parts = Vec::new();
    for path in paths {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(err) => {
                style.error(&format!("error: {}: {err}", path.display()));
                return Err(EXIT_IO);
            }
        };
        match parse_catalog_with_warnings(&text) {
            Ok(outcome) => {
                for unknown in &outcome.unknown_keys {
                    style.warning(&format!(
                        "warning: {}: line {}: unknown key {:?} in {} is ignored",
                        path.display(),
                        unknown.line,
                        unknown.key,
                        unknown.location
                    ));
                }
                parts.push(outcome.catalog);
            }
            Err(err) => {
                style.error(&format!("error: {}: {err}", path.display()));
                return Err(EXIT_DOMAIN);
            }
        }
    }
    merge_catalogs(&parts).map_err(|err| {
        style.error(&format!("error: {err}"));
        EXIT_DOMAIN
    })
}

fn cmd_validate(args: ValidateArgs, style: &Style) -> i32 {
    let merged = match load_merged(&args.catalogs.catalogs, style) {
        Ok(merged) => merged,
        Err(code) => return code,
    };
    for candidate in &merged.duplicate_candidates {
        let ids: Vec<&str> = candidate.ids.iter().map(Id::as_str).collect();
        style.note(&format!(
            "note: {} label {:?} recurs under ids {}; an embrace decision may be due",
            candidate.kind,
            candidate.normalized_label,
            ids.join(", ")
        ));
    }
    let report = validate_catalog(&merged.catalog);
    for issue in &report.issues {
        match issue.severity {
            Severity::Error => style.error(&issue.to_string()),
            Severity::Warning => style.warning(&issue.to_string()),
        }
    }
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    style.note(&format!("{errors} error(s), {warnings} warning(s)"));
    if errors > 0 || (args.strict && warnings > 0) {
        EXIT_DOMAIN
    } else {
        EXIT_OK
    }
}

fn cmd_elicit(args: ElicitArgs, style: &Style) -> i32 {
    let merged = match load_merged(&args.catalogs.catalogs, style) {
        Ok(merged) => merged,
        Err(code) => return code,
    };
    let catalog = merged.catalog;

    let mut profile = VariableProfile::new(args.property, &args.domain);
    profile.level = args.level;
    if !args.sources.is_empty() {
        profile.source_filter = Some(args.sources.iter().map(|s| Id::from(s.as_str())).collect());
    }
    if !args.agents.is_empty() {
        profile.agents = args.agents.iter().copied().collect();
    }
    let policy = if args.strict {
        RowPolicy::RequireAll
    } else {
        RowPolicy::SkipUncovered
    };

    let run = match elicit(&catalog, &profile, policy) {
        Ok(run) => run,
        Err(err) => {
            style.error(&format!("error: {err}"));
            return EXIT_DOMAIN;
        }
    };
    for id in &run.uncovered {
        style.warning(&format!(
            "warning: threat {id} has no association row; skipped (use --strict to fail)"
        ));
    }

    // Frequencies are tallied over every canonical threat so incidents
    // matching out-of-profile threats stay valid, then narrowed to the
    // elicited set for reporting.
    let canonical = match apply_embraces(&catalog.threats, &catalog.embraces) {
        Ok(canonical) => canonical,
        Err(err) => {
            style.error(&format!("error: {err}"));
            return EXIT_DOMAIN;
        }
    };
    let tallied = match tally_incidents(&catalog.incidents, &canonical) {
        Ok(tallied) => tallied,
        Err(err) => {
            style.error(&format!("error: {err}"));
            return EXIT_DOMAIN;
        }
    };
    let elicited: BTreeSet<&Id> = run.threats.iter().map(|t| &t.representative.id).collect();
    let frequencies: Vec<ThreatFrequency> = tallied
        .into_iter()
        .filter(|f| elicited.contains(&f.threat))
        .collect();

    let formats: BTreeSet<ReportFormat> = if args.formats.is_empty() {
        [
            ReportFormat::Markdown,
            ReportFormat::Csv,
            ReportFormat::Structured,
        ]
        .into()
    } else {
        args.formats.iter().copied().collect()
    };
    if let Err(err) = fs::create_dir_all(&args.out) {
        style.error(&format!("error: {}: {err}", args.out.display()));
        return EXIT_IO;
    }
    for format in formats {
        let (file, contents) = match format {
            ReportFormat::Markdown => ("threats.md", markdown_report(&run, &frequencies)),
            ReportFormat::Csv => ("matrix.csv", render_matrix_csv(&run.domain_threats)),
            ReportFormat::Structured => ("result.json", render_structured(&run, &frequencies)),
        };
        let path = args.out.join(file);
        if let Err(err) = fs::write(&path, contents) {
            style.error(&format!("error: {}: {err}", path.display()));
            return EXIT_IO;
        }
    }

    println!(
        "threats={} assets={} domain_threats={}",
        run.threats.len(),
        run.assets.len(),
        run.count
    );
    EXIT_OK
}

fn markdown_report(run: &crate::elicit::Elicitation, frequencies: &[ThreatFrequency]) -> String {
    let profile = &run.profile;
    let mut out = String::from("# Domain threat report\n\n");
    out.push_str(&format!(
        "Profile: property={} domain={} level={}",
        profile.property, profile.domain, profile.level
    ));
    if let Some(sources) = &profile.source_filter {
        let ids: Vec<&str> = sources.iter().map(Id::as_str).collect();
        out.push_str(&format!(" sources={}", ids.join(",")));
    }
    out.push_str("\n\n## Elicited threats\n\n");
    out.push_str(&render_threat_table(&run.threats));
    out.push_str("\n## Incident frequencies\n\n");
    out.push_str(&render_frequency_table(frequencies));
    out
}

fn cmd_paths(args: PathsArgs, style: &Style) -> i32 {
    let merged = match load_merged(&args.catalogs.catalogs, style) {
        Ok(merged) => merged,
        Err(code) => return code,
    };
    let tree = match merged
        .catalog
        .trees
        .iter()
        .find(|t| t.id.as_str() == args.tree)
    {
        Some(tree) => tree,
        None => {
            style.error(&format!("error: no tree with id {}", args.tree));
            return EXIT_DOMAIN;
        }
    };
    let projected = project(tree, args.level);
    match enumerate_paths(&projected) {
        Ok(paths) => {
            for path in &paths {
                let leaves: Vec<&str> = path.leaves.iter().map(Id::as_str).collect();
                println!("{}", leaves.join(", "));
            }
            EXIT_OK
        }
        Err(err) => {
            style.error(&format!("error: {err}"));
            EXIT_DOMAIN
        }
    }
}

fn cmd_stats(args: StatsArgs, style: &Style) -> i32 {
    let merged = match load_merged(&args.catalogs.catalogs, style) {
        Ok(merged) => merged,
        Err(code) => return code,
    };
    let canonical = match apply_embraces(&merged.catalog.threats, &merged.catalog.embraces) {
        Ok(canonical) => canonical,
        Err(err) => {
            style.error(&format!("error: {err}"));
            return EXIT_DOMAIN;
        }
    };
    match tally_incidents(&merged.catalog.incidents, &canonical) {
        Ok(frequencies) => {
            print!("{}", render_frequency_table(&frequencies));
            EXIT_OK
        }
        Err(err) => {
            style.error(&format!("error: {err}"));
            EXIT_DOMAIN
        }
    }
}

fn cmd_fmt(args: FmtArgs, style: &Style) -> i32 {
    let merged = match load_merged(&args.catalogs.catalogs, style) {
        Ok(merged) => merged,
        Err(code) => return code,
    };
    match serialize_catalog(&merged.catalog) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(err) => {
            style.error(&format!("error: {err}"));
            EXIT_DOMAIN
        }
    }
}
