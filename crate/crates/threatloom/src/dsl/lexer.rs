//! Tokenizer for catalog text. Comments run from `#` to end of line; strings
//! are double-quoted with `\"` and `\\` as the only escapes.

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Arrow,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) struct Token {
    pub kind: Tok,
    pub line: u32,
    pub column: u32,
}

impl Token {
    /// How the token reads in an "expected X, found Y" diagnostic.
    pub fn describe(&self) -> String {
        match &self.kind {
            Tok::Ident(name) => format!("identifier '{name}'"),
            Tok::Str(_) => "string literal".to_owned(),
            Tok::Int(value) => format!("integer {value}"),
            Tok::LBrace => "'{'".to_owned(),
            Tok::RBrace => "'}'".to_owned(),
            Tok::LBracket => "'['".to_owned(),
            Tok::RBracket => "']'".to_owned(),
            Tok::Colon => "':'".to_owned(),
            Tok::Semi => "';'".to_owned(),
            Tok::Comma => "','".to_owned(),
            Tok::Arrow => "'->'".to_owned(),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_ahead(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += 1;
        if ch == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(ch)
    }

    fn error(&self, expected: &str, found: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column,
            expected: expected.to_owned(),
            found: found.into(),
        }
    }
}

fn is_ident_start(ch: char) -> bool {
    ch.is_alphabetic() || ch == '_'
}

fn is_ident_continue(ch: char) -> bool {
    ch.is_alphanumeric() || matches!(ch, '_' | '.' | '-')
}

pub(super) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut scanner = Scanner {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    if scanner.peek() == Some('\u{feff}') {
        return Err(scanner.error("a declaration keyword", "byte-order mark"));
    }

    loop {
        // Skip whitespace and comments.
        loop {
            match scanner.peek() {
                Some(ch) if ch.is_whitespace() => {
                    scanner.bump();
                }
                Some('#') => {
                    while let Some(ch) = scanner.peek() {
                        if ch == '\n' {
                            break;
                        }
                        scanner.bump();
                    }
                }
                _ => break,
            }
        }

        let (line, column) = (scanner.line, scanner.column);
        let ch = match scanner.peek() {
            None => {
                tokens.push(Token {
                    kind: Tok::Eof,
                    line,
                    column,
                });
                return Ok(tokens);
            }
            Some(ch) => ch,
        };

        let kind = match ch {
            '{' => {
                scanner.bump();
                Tok::LBrace
            }
            '}' => {
                scanner.bump();
                Tok::RBrace
            }
            '[' => {
                scanner.bump();
                Tok::LBracket
            }
            ']' => {
                scanner.bump();
                Tok::RBracket
            }
            ':' => {
                scanner.bump();
                Tok::Colon
            }
            ';' => {
                scanner.bump();
                Tok::Semi
            }
            ',' => {
                scanner.bump();
                Tok::Comma
            }
            '-' => {
                scanner.bump();
                if scanner.peek() == Some('>') {
                    scanner.bump();
                    Tok::Arrow
                } else {
                    return Err(scanner.error("a token", "'-'"));
                }
            }
            '"' => {
                scanner.bump();
                let mut value = String::new();
                loop {
                    match scanner.bump() {
                        None => {
                            return Err(scanner.error("closing '\"'", "end of input"));
                        }
                        Some('"') => break,
                        Some('\n') => {
                            return Err(scanner.error("closing '\"'", "line break"));
                        }
                        Some('\\') => match scanner.bump() {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some(other) => {
                                return Err(scanner.error(
                                    "escape sequence \\\" or \\\\",
                                    format!("'\\{other}'"),
                                ));
                            }
                            None => {
                                return Err(
                                    scanner.error("escape sequence \\\" or \\\\", "end of input")
                                );
                            }
                        },
                        Some(other) => value.push(other),
                    }
                }
                Tok::Str(value)
            }
            digit if digit.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(d) = scanner.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    text.push(d);
                    scanner.bump();
                }
                match text.parse::<i64>() {
                    Ok(value) => Tok::Int(value),
                    Err(_) => return Err(scanner.error("an integer", format!("'{text}'"))),
                }
            }
            start if is_ident_start(start) => {
                let mut name = String::new();
                while let Some(c) = scanner.peek() {
                    // `->` terminates an identifier so `id->` lexes as id, arrow.
                    if c == '-' && scanner.peek_ahead(1) == Some('>') {
                        break;
                    }
                    if !is_ident_continue(c) {
                        break;
                    }
                    name.push(c);
                    scanner.bump();
                }
                Tok::Ident(name)
            }
            other => return Err(scanner.error("a token", format!("'{other}'"))),
        };

        tokens.push(Token { kind, line, column });
    }
}
