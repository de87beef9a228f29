//! Recursive-descent parser turning catalog text into a [`Catalog`].
//!
//! The parser is strict about structure (unknown declarations, missing keys,
//! and duplicate ids are errors) but forward-compatible about vocabulary:
//! keys it does not know are skipped and reported as warnings.

use std::collections::{BTreeSet, HashMap};

use chrono::NaiveDate;

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::model::{
    Abstraction, Asset, AssocTargets, Catalog, Combinator, EmbraceDecision, Id, IncidentRecord,
    PrivacyProperty, SourceKind, SourceRef, Threat, ThreatAgent, ThreatTree, TreeNode,
};

/// A key the grammar does not know. The value was parsed and dropped; the
/// catalog model (and therefore canonical output) never sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownKey {
    pub location: String,
    pub key: String,
    pub line: u32,
}

/// Parse result plus the unknown-key side list.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub catalog: Catalog,
    pub unknown_keys: Vec<UnknownKey>,
}

/// Parses one catalog document.
pub fn parse_catalog(text: &str) -> Result<Catalog, ParseError> {
    parse_catalog_with_warnings(text).map(|outcome| outcome.catalog)
}

/// Parses one catalog document, keeping warnings about unknown keys.
pub fn parse_catalog_with_warnings(text: &str) -> Result<ParseOutcome, ParseError> {
    let tokens = tokenize(text)?;
    Parser::new(tokens).run()
}

struct Header {
    id: Option<(Id, Token)>,
    label: Option<(String, Token)>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    catalog: Catalog,
    unknown_keys: Vec<UnknownKey>,
    decl_lines: HashMap<(&'static str, String), u32>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            catalog: Catalog::default(),
            unknown_keys: Vec::new(),
            decl_lines: HashMap::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn fail(&self, expected: impl Into<String>, at: &Token) -> ParseError {
        ParseError::Syntax {
            line: at.line,
            column: at.column,
            expected: expected.into(),
            found: at.describe(),
        }
    }

    fn expect(&mut self, kind: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.fail(expected, self.peek()))
        }
    }

    fn expect_ident(&mut self, expected: &str) -> Result<(String, Token), ParseError> {
        match self.peek().kind.clone() {
            Tok::Ident(name) => {
                let token = self.bump();
                Ok((name, token))
            }
            _ => Err(self.fail(expected, self.peek())),
        }
    }

    fn expect_string(&mut self, expected: &str) -> Result<(String, Token), ParseError> {
        match self.peek().kind.clone() {
            Tok::Str(value) => {
                let token = self.bump();
                Ok((value, token))
            }
            _ => Err(self.fail(expected, self.peek())),
        }
    }

    /// After a `key: value` pair: consume `;`, or accept the block's closing
    /// brace directly.
    fn end_pair(&mut self) -> Result<(), ParseError> {
        match self.peek().kind {
            Tok::Semi => {
                self.bump();
                Ok(())
            }
            Tok::RBrace => Ok(()),
            _ => Err(self.fail("';' or '}'", self.peek())),
        }
    }

    fn register(&mut self, kind: &'static str, id: &Id, line: u32) -> Result<(), ParseError> {
        if let Some(first_line) = self.decl_lines.insert((kind, id.as_str().to_owned()), line) {
            return Err(ParseError::DuplicateId {
                kind,
                id: id.clone(),
                first_line,
                second_line: line,
            });
        }
        Ok(())
    }

    fn run(mut self) -> Result<ParseOutcome, ParseError> {
        loop {
            let token = self.peek().clone();
            let keyword = match &token.kind {
                Tok::Eof => break,
                Tok::Ident(word) => word.clone(),
                _ => {
                    return Err(self.fail(
                        "a declaration keyword (source, threat, tree, asset, embrace, assoc, or incident)",
                        &token,
                    ))
                }
            };
            self.bump();
            match keyword.as_str() {
                "source" => self.parse_source(token.line)?,
                "threat" => self.parse_threat(token.line)?,
                "tree" => self.parse_tree(token.line)?,
                "asset" => self.parse_asset(token.line)?,
                "embrace" => self.parse_embrace()?,
                "assoc" => self.parse_assoc(token.line)?,
                "incident" => self.parse_incident(token.line)?,
                _ => {
                    return Err(self.fail(
                        "a declaration keyword (source, threat, tree, asset, embrace, assoc, or incident)",
                        &token,
                    ))
                }
            }
        }
        Ok(ParseOutcome {
            catalog: self.catalog,
            unknown_keys: self.unknown_keys,
        })
    }

    /// `<id>? "<label>"? '{'` after a declaration keyword.
    fn parse_header(&mut self) -> Result<Header, ParseError> {
        let id = match self.peek().kind.clone() {
            Tok::Ident(name) => {
                let token = self.bump();
                Some((Id::from(name), token))
            }
            _ => None,
        };
        let label = match self.peek().kind.clone() {
            Tok::Str(value) => {
                let token = self.bump();
                Some((value, token))
            }
            _ => None,
        };
        self.expect(Tok::LBrace, "'{'")?;
        Ok(Header { id, label })
    }

    fn missing_key(&self, decl: &str, key: &str, at: &Token) -> ParseError {
        self.fail(format!("key '{key}' in {decl} declaration"), at)
    }

    // -- value parsers ------------------------------------------------------

    fn value_id(&mut self) -> Result<Id, ParseError> {
        let (name, _) = self.expect_ident("an id")?;
        Ok(Id::from(name))
    }

    fn value_string(&mut self) -> Result<String, ParseError> {
        Ok(self.expect_string("a quoted string")?.0)
    }

    fn value_int(&mut self) -> Result<i64, ParseError> {
        match self.peek().kind {
            Tok::Int(value) => {
                self.bump();
                Ok(value)
            }
            _ => Err(self.fail("an integer", self.peek())),
        }
    }

    fn value_id_list(&mut self) -> Result<Vec<Id>, ParseError> {
        self.value_list(|parser| parser.value_id())
    }

    fn value_string_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.value_list(|parser| parser.value_string())
    }

    fn value_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        self.expect(Tok::LBracket, "'['")?;
        let mut items = Vec::new();
        if self.peek().kind == Tok::RBracket {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            match self.peek().kind {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(items);
                }
                _ => return Err(self.fail("',' or ']'", self.peek())),
            }
        }
    }

    fn value_enum<T: Copy>(
        &mut self,
        parse: fn(&str) -> Option<T>,
        expected: &str,
    ) -> Result<T, ParseError> {
        let token = self.peek().clone();
        let (word, _) = self.expect_ident(expected)?;
        parse(&word).ok_or_else(|| self.fail(expected, &token))
    }

    fn value_date(&mut self) -> Result<NaiveDate, ParseError> {
        let token = self.peek().clone();
        let (raw, _) = self.expect_string("an ISO date string (\"YYYY-MM-DD\")")?;
        NaiveDate::parse_from_str(&raw, "%Y-%m-%d")
            .map_err(|_| self.fail("an ISO date string (\"YYYY-MM-DD\")", &token))
    }

    /// Consumes a value of any shape. Used for unknown keys.
    fn skip_value(&mut self) -> Result<(), ParseError> {
        match self.peek().kind.clone() {
            Tok::Ident(_) | Tok::Str(_) | Tok::Int(_) => {
                self.bump();
                Ok(())
            }
            Tok::LBracket => {
                self.bump();
                loop {
                    match self.peek().kind.clone() {
                        Tok::RBracket => {
                            self.bump();
                            return Ok(());
                        }
                        Tok::Ident(_) | Tok::Str(_) | Tok::Int(_) | Tok::Comma => {
                            self.bump();
                        }
                        _ => return Err(self.fail("a list item or ']'", self.peek())),
                    }
                }
            }
            _ => Err(self.fail("a value", self.peek())),
        }
    }

    // -- declarations -------------------------------------------------------

    /// Runs `body` for every `key: value` pair in a block, handling the `;`
    /// rule, duplicate keys, and unknown-key warnings. `body` returns false
    /// when it does not know the key.
    fn parse_pairs(
        &mut self,
        decl: &'static str,
        unknowns: &mut Vec<(String, u32)>,
        mut body: impl FnMut(&mut Self, &str, &Token) -> Result<bool, ParseError>,
    ) -> Result<Token, ParseError> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        loop {
            match self.peek().kind.clone() {
                Tok::RBrace => return Ok(self.bump()),
                Tok::Ident(key) => {
                    let key_token = self.bump();
                    self.expect(Tok::Colon, "':'")?;
                    if !seen.insert(key.clone()) {
                        return Err(self.fail("a key not set before", &key_token));
                    }
                    let known = body(self, &key, &key_token)?;
                    if !known {
                        self.skip_value()?;
                        unknowns.push((key, key_token.line));
                    }
                    self.end_pair()?;
                }
                _ => {
                    return Err(self.fail(format!("a key or '}}' in {decl} declaration"), self.peek()))
                }
            }
        }
    }

    fn take_id(
        &mut self,
        decl: &'static str,
        header: &Header,
        body_id: Option<Id>,
        close: &Token,
    ) -> Result<Id, ParseError> {
        match (&header.id, body_id) {
            (Some((id, _)), None) => Ok(id.clone()),
            (None, Some(id)) => Ok(id),
            (Some((_, token)), Some(_)) => {
                let token = token.clone();
                Err(self.fail("id in the header or the body, not both", &token))
            }
            (None, None) => Err(self.missing_key(decl, "id", close)),
        }
    }

    fn take_label(
        &mut self,
        decl: &'static str,
        header: Header,
        close: &Token,
    ) -> Result<String, ParseError> {
        match header.label {
            Some((label, _)) => Ok(label),
            None => Err(self.fail(
                format!("a quoted label in the {decl} declaration header"),
                close,
            )),
        }
    }

    fn no_label(&mut self, decl: &str, header: &Header) -> Result<(), ParseError> {
        if let Some((_, token)) = &header.label {
            let token = token.clone();
            return Err(self.fail(format!("'{{' ({decl} declarations take no label)"), &token));
        }
        Ok(())
    }

    fn flush_unknowns(&mut self, location: String, unknowns: Vec<(String, u32)>) {
        for (key, line) in unknowns {
            self.unknown_keys.push(UnknownKey {
                location: location.clone(),
                key,
                line,
            });
        }
    }

    fn parse_source(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        let mut body_id = None;
        let mut kind = None;
        let mut year = None;
        let mut version = None;
        let mut derived_from = Vec::new();
        let mut unknowns = Vec::new();

        let close = self.parse_pairs("source", &mut unknowns, |parser, key, _| {
            match key {
                "id" => body_id = Some(parser.value_id()?),
                "kind" => {
                    kind = Some(parser.value_enum(
                        SourceKind::parse,
                        "a source kind (internal, external, or hybrid)",
                    )?)
                }
                "year" => year = Some(parser.value_int()? as i32),
                "version" => version = Some(parser.value_string()?),
                "derived_from" => derived_from = parser.value_id_list()?,
                _ => return Ok(false),
            }
            Ok(true)
        })?;

        let id = self.take_id("source", &header, body_id, &close)?;
        let name = self.take_label("source", header, &close)?;
        let kind = kind.ok_or_else(|| self.missing_key("source", "kind", &close))?;
        self.register("source", &id, decl_line)?;
        self.flush_unknowns(format!("source/{id}"), unknowns);
        self.catalog.sources.push(SourceRef {
            id,
            name,
            kind,
            year,
            version,
            derived_from,
        });
        Ok(())
    }

    fn parse_threat(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        let mut body_id = None;
        let mut property = None;
        let mut category = None;
        let mut source = None;
        let mut agents = BTreeSet::new();
        let mut level = Abstraction::Abstract;
        let mut description = None;
        let mut unknowns = Vec::new();

        let close = self.parse_pairs("threat", &mut unknowns, |parser, key, _| {
            match key {
                "id" => body_id = Some(parser.value_id()?),
                "property" => {
                    property = Some(parser.value_enum(
                        PrivacyProperty::parse,
                        "a property (soft, hard, or cybersecurity)",
                    )?)
                }
                "category" => category = Some(parser.value_string()?),
                "source" => source = Some(parser.value_id()?),
                "agents" => {
                    let list = parser.value_list(|p| {
                        p.value_enum(
                            ThreatAgent::parse,
                            "a threat agent (attacker, data_controller, data_processor, or third_party)",
                        )
                    })?;
                    agents = list.into_iter().collect();
                }
                "level" => {
                    level = parser
                        .value_enum(Abstraction::parse, "a level (abstract or concrete)")?
                }
                "description" => description = Some(parser.value_string()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;

        let id = self.take_id("threat", &header, body_id, &close)?;
        let label = self.take_label("threat", header, &close)?;
        let property = property.ok_or_else(|| self.missing_key("threat", "property", &close))?;
        let category = category.ok_or_else(|| self.missing_key("threat", "category", &close))?;
        let source = source.ok_or_else(|| self.missing_key("threat", "source", &close))?;
        self.register("threat", &id, decl_line)?;
        self.flush_unknowns(format!("threat/{id}"), unknowns);
        self.catalog.threats.push(Threat {
            id,
            label,
            property,
            category,
            source,
            agents,
            level,
            description,
        });
        Ok(())
    }

    fn parse_tree(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        let mut body_id = None;
        let mut source = None;
        let mut root = None;
        let mut unknowns = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let close;

        loop {
            match self.peek().kind.clone() {
                Tok::RBrace => {
                    close = self.bump();
                    break;
                }
                Tok::Ident(word) if word == "node" => {
                    let node_token = self.bump();
                    if root.is_some() {
                        return Err(self.fail("'}' (a tree has one root node)", &node_token));
                    }
                    root = Some(self.parse_node(&mut unknowns, 0)?);
                }
                Tok::Ident(key) => {
                    let key_token = self.bump();
                    self.expect(Tok::Colon, "':'")?;
                    if !seen.insert(key.clone()) {
                        return Err(self.fail("a key not set before", &key_token));
                    }
                    match key.as_str() {
                        "id" => body_id = Some(self.value_id()?),
                        "source" => source = Some(self.value_id()?),
                        _ => {
                            self.skip_value()?;
                            unknowns.push((key, key_token.line));
                        }
                    }
                    self.end_pair()?;
                }
                _ => return Err(self.fail("a key, 'node', or '}'", self.peek())),
            }
        }

        let id = self.take_id("tree", &header, body_id, &close)?;
        let title = self.take_label("tree", header, &close)?;
        let source = source.ok_or_else(|| self.missing_key("tree", "source", &close))?;
        let root = root.ok_or_else(|| self.fail("a root 'node' block in the tree", &close))?;
        self.register("tree", &id, decl_line)?;
        self.flush_unknowns(format!("tree/{id}"), unknowns);
        self.catalog.trees.push(ThreatTree {
            id,
            title,
            source,
            root,
        });
        Ok(())
    }

    /// Parses a node body after the `node` keyword was consumed. The depth
    /// cap keeps hostile input from exhausting the stack.
    fn parse_node(
        &mut self,
        unknowns: &mut Vec<(String, u32)>,
        depth: usize,
    ) -> Result<TreeNode, ParseError> {
        if depth > 128 {
            return Err(self.fail("node nesting of at most 128 levels", self.peek()));
        }
        let (id, _) = self.expect_ident("a node id")?;
        let (label, _) = self.expect_string("a quoted node label")?;
        let combinator =
            self.value_enum(Combinator::parse, "a combinator (and, or, or leaf)")?;
        self.expect(Tok::LBrace, "'{'")?;

        let mut node = TreeNode {
            id: Id::from(id),
            label,
            combinator,
            criteria: None,
            impact: None,
            examples: Vec::new(),
            links: Vec::new(),
            children: Vec::new(),
        };
        let mut seen: BTreeSet<String> = BTreeSet::new();

        loop {
            match self.peek().kind.clone() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(node);
                }
                Tok::Ident(word) if word == "node" => {
                    self.bump();
                    let child = self.parse_node(unknowns, depth + 1)?;
                    node.children.push(child);
                }
                Tok::Ident(key) => {
                    let key_token = self.bump();
                    self.expect(Tok::Colon, "':'")?;
                    if !seen.insert(key.clone()) {
                        return Err(self.fail("a key not set before", &key_token));
                    }
                    match key.as_str() {
                        "criteria" => node.criteria = Some(self.value_string()?),
                        "impact" => node.impact = Some(self.value_string()?),
                        "examples" => node.examples = self.value_string_list()?,
                        "links" => node.links = self.value_id_list()?,
                        _ => {
                            self.skip_value()?;
                            unknowns.push((format!("node/{}/{key}", node.id), key_token.line));
                        }
                    }
                    self.end_pair()?;
                }
                _ => return Err(self.fail("a key, 'node', or '}'", self.peek())),
            }
        }
    }

    fn parse_asset(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        let mut body_id = None;
        let mut category = None;
        let mut source = None;
        let mut domain = None;
        let mut description = None;
        let mut unknowns = Vec::new();

        let close = self.parse_pairs("asset", &mut unknowns, |parser, key, _| {
            match key {
                "id" => body_id = Some(parser.value_id()?),
                "category" => category = Some(parser.value_string()?),
                "source" => source = Some(parser.value_id()?),
                "domain" => domain = Some(parser.value_id()?.as_str().to_owned()),
                "description" => description = Some(parser.value_string()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;

        let id = self.take_id("asset", &header, body_id, &close)?;
        let label = self.take_label("asset", header, &close)?;
        let category = category.ok_or_else(|| self.missing_key("asset", "category", &close))?;
        let source = source.ok_or_else(|| self.missing_key("asset", "source", &close))?;
        let domain = domain.ok_or_else(|| self.missing_key("asset", "domain", &close))?;
        self.register("asset", &id, decl_line)?;
        self.flush_unknowns(format!("asset/{id}"), unknowns);
        self.catalog.assets.push(Asset {
            id,
            label,
            category,
            source,
            domain,
            description,
        });
        Ok(())
    }

    fn parse_embrace(&mut self) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        if let Some((_, token)) = &header.id {
            let token = token.clone();
            return Err(self.fail("'{' (embrace declarations take no id)", &token));
        }
        self.no_label("embrace", &header)?;

        let mut keep = None;
        let mut drop = None;
        let mut rationale = None;
        let mut decided_by = None;
        let mut unknowns = Vec::new();

        let close = self.parse_pairs("embrace", &mut unknowns, |parser, key, _| {
            match key {
                "keep" => keep = Some(parser.value_id()?),
                "drop" => drop = Some(parser.value_id_list()?),
                "rationale" => rationale = Some(parser.value_string()?),
                "decided_by" => decided_by = Some(parser.value_string()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;

        let keep = keep.ok_or_else(|| self.missing_key("embrace", "keep", &close))?;
        let drop = drop.ok_or_else(|| self.missing_key("embrace", "drop", &close))?;
        let rationale =
            rationale.ok_or_else(|| self.missing_key("embrace", "rationale", &close))?;
        let decided_by =
            decided_by.ok_or_else(|| self.missing_key("embrace", "decided_by", &close))?;
        self.flush_unknowns(format!("embrace/{keep}"), unknowns);
        self.catalog.embraces.push(EmbraceDecision {
            keep,
            drop: drop.into_iter().collect(),
            rationale,
            decided_by,
        });
        Ok(())
    }

    fn parse_assoc(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let (threat, _) = self.expect_ident("a threat id")?;
        let threat = Id::from(threat);
        self.expect(Tok::Arrow, "'->'")?;
        let targets = match self.peek().kind.clone() {
            Tok::Ident(word) if word == "all" => {
                self.bump();
                AssocTargets::All
            }
            Tok::LBracket => AssocTargets::Ids(self.value_id_list()?),
            _ => return Err(self.fail("'all' or an asset id list", self.peek())),
        };
        self.expect(Tok::Semi, "';'")?;
        self.register("assoc", &threat, decl_line)?;
        self.catalog.matrix.rows.insert(threat, targets);
        Ok(())
    }

    fn parse_incident(&mut self, decl_line: u32) -> Result<(), ParseError> {
        let header = self.parse_header()?;
        self.no_label("incident", &header)?;
        let mut body_id = None;
        let mut date = None;
        let mut summary = None;
        let mut url = None;
        let mut threats = None;
        let mut unknowns = Vec::new();

        let close = self.parse_pairs("incident", &mut unknowns, |parser, key, _| {
            match key {
                "id" => body_id = Some(parser.value_id()?),
                "date" => date = Some(parser.value_date()?),
                "summary" => summary = Some(parser.value_string()?),
                "url" => url = Some(parser.value_string()?),
                "threats" => threats = Some(parser.value_id_list()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;

        let id = self.take_id("incident", &header, body_id, &close)?;
        let date = date.ok_or_else(|| self.missing_key("incident", "date", &close))?;
        let summary = summary.ok_or_else(|| self.missing_key("incident", "summary", &close))?;
        let matched_threats =
            threats.ok_or_else(|| self.missing_key("incident", "threats", &close))?;
        self.register("incident", &id, decl_line)?;
        self.flush_unknowns(format!("incident/{id}"), unknowns);
        self.catalog.incidents.push(IncidentRecord {
            id,
            date,
            summary,
            url,
            matched_threats,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_source_example() {
        let catalog =
            parse_catalog(r#"source "LINDDUN" { id: linddun; kind: external; year: 2023 }"#)
                .unwrap();
        assert_eq!(catalog.sources.len(), 1);
        let source = &catalog.sources[0];
        assert_eq!(source.id.as_str(), "linddun");
        assert_eq!(source.name, "LINDDUN");
        assert_eq!(source.kind, SourceKind::External);
        assert_eq!(source.year, Some(2023));
    }

    #[test]
    fn unterminated_threat_block_fails_at_end_of_input() {
        let err = parse_catalog("threat t1 \"x\" { property: soft").unwrap_err();
        match err {
            ParseError::Syntax { found, .. } => assert_eq!(found, "end of input"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_threat_ids_report_both_lines() {
        let text = "source s \"S\" { kind: external }\n\
                    threat t1 \"a\" { property: soft; category: \"U\"; source: s }\n\
                    threat t1 \"b\" { property: soft; category: \"U\"; source: s }\n";
        match parse_catalog(text).unwrap_err() {
            ParseError::DuplicateId {
                kind,
                id,
                first_line,
                second_line,
            } => {
                assert_eq!(kind, "threat");
                assert_eq!(id.as_str(), "t1");
                assert_eq!((first_line, second_line), (2, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_warn_and_parse() {
        let text = "threat t1 \"x\" { property: soft; category: \"U\"; source: s; severity: [1, 2]; }";
        let outcome = parse_catalog_with_warnings(text).unwrap();
        assert_eq!(outcome.catalog.threats.len(), 1);
        assert_eq!(outcome.unknown_keys.len(), 1);
        assert_eq!(outcome.unknown_keys[0].key, "severity");
        assert_eq!(outcome.unknown_keys[0].location, "threat/t1");
    }

    #[test]
    fn semicolon_is_optional_before_closing_brace() {
        let with = parse_catalog("source s \"S\" { kind: external; }").unwrap();
        let without = parse_catalog("source s \"S\" { kind: external }").unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn missing_semicolon_between_pairs_is_an_error() {
        let err = parse_catalog("source s \"S\" { kind: external year: 2023 }").unwrap_err();
        match err {
            ParseError::Syntax { expected, .. } => assert_eq!(expected, "';' or '}'"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn assoc_rows_parse_both_forms() {
        let catalog = parse_catalog("assoc t1 -> all;\nassoc t2 -> [a1, a2];\n").unwrap();
        assert_eq!(catalog.matrix.rows.len(), 2);
        assert_eq!(catalog.matrix.rows["t1"], AssocTargets::All);
        assert_eq!(
            catalog.matrix.rows["t2"],
            AssocTargets::Ids(vec![Id::from("a1"), Id::from("a2")])
        );
    }

    #[test]
    fn duplicate_assoc_rows_are_rejected() {
        let err = parse_catalog("assoc t1 -> all;\nassoc t1 -> all;\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateId { kind: "assoc", .. }));
    }

    #[test]
    fn nested_nodes_parse() {
        let text = r#"
            source linddun "LINDDUN" { kind: external }
            tree L "Linking" {
                source: linddun;
                node L "Linking" or {
                    criteria: "linkability";
                    node L.1 "Linked data" leaf {
                        examples: ["IP address"];
                        links: [L];
                    }
                    node L.2 "Linkable data" leaf {}
                }
            }
        "#;
        let catalog = parse_catalog(text).unwrap();
        let tree = catalog.tree("L").unwrap();
        assert_eq!(tree.root.children.len(), 2);
        assert_eq!(tree.root.children[0].examples, vec!["IP address"]);
        assert_eq!(tree.root.children[0].links, vec![Id::from("L")]);
    }

    #[test]
    fn id_in_header_and_body_is_rejected() {
        let err = parse_catalog("source s \"S\" { id: s2; kind: external }").unwrap_err();
        match err {
            ParseError::Syntax { expected, .. } => {
                assert!(expected.contains("not both"), "got {expected}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn incident_dates_must_be_iso() {
        let err = parse_catalog(
            "incident i { date: \"12/05/2023\"; summary: \"x\"; threats: [t1] }",
        )
        .unwrap_err();
        match err {
            ParseError::Syntax { expected, .. } => assert!(expected.contains("ISO date")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_required_key_names_it() {
        let err = parse_catalog("threat t1 \"x\" { category: \"U\"; source: s }").unwrap_err();
        match err {
            ParseError::Syntax { expected, .. } => {
                assert_eq!(expected, "key 'property' in threat declaration");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn level_defaults_to_abstract() {
        let catalog =
            parse_catalog("threat t1 \"x\" { property: soft; category: \"U\"; source: s }")
                .unwrap();
        assert_eq!(catalog.threats[0].level, Abstraction::Abstract);
    }
}
