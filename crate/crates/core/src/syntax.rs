//! Tokenizer and error type shared by the metamodel and transformation parsers.
//!
//! Both DSLs use `--` line comments, identifiers, single-quoted strings and a
//! loose set of punctuation. Expression bodies are kept as token runs, so the
//! lexer accepts any non-whitespace character as a one-character symbol.

use std::fmt;

use thiserror::Error;

/// 1-based line and column (columns count characters, not bytes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Position { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate concept `{0}`")]
    DuplicateConcept(String),
    #[error("unknown supertype `{0}`")]
    UnknownSupertype(String),
    #[error("inheritance cycle through `{0}`")]
    InheritanceCycle(String),
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("unknown parent rule `{0}`")]
    UnknownParentRule(String),
    #[error("source pattern `{found}` is not qualified by the source metamodel `{expected}`")]
    ForeignSourceConcept { found: String, expected: String },
}

/// A positioned parse or validation error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: Position,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, position: Position) -> Self {
        ParseError { kind, position }
    }

    pub fn syntax(message: impl Into<String>, position: Position) -> Self {
        ParseError::new(ParseErrorKind::Syntax(message.into()), position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
    pub position: Position,
}

impl Token {
    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }

    pub fn is_symbol(&self, symbol: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == symbol
    }

    pub fn is_keyword(&self, keyword: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == keyword
    }
}

const TWO_CHAR_SYMBOLS: &[&str] = &["<-", "->", "..", "<>", "<=", ">=", "::"];

/// Splits `source` into tokens, dropping whitespace and `--` comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    let mut line = 1;
    let mut column = 1;

    // Advances past one char, keeping line/column in sync.
    macro_rules! bump {
        () => {{
            let (_, c) = chars.next().expect("bump past end");
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        }};
    }

    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let position = Position::new(line, column);
        let rest = &source[start..];

        if rest.starts_with("--") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }

        let kind = if c.is_alphabetic() || c == '_' {
            while let Some(&(_, c)) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    bump!();
                } else {
                    break;
                }
            }
            TokenKind::Ident
        } else if c.is_ascii_digit() {
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    bump!();
                } else {
                    break;
                }
            }
            // A fractional part only when a digit follows the dot, so `0..*` stays three tokens.
            let here = chars.peek().map(|&(i, _)| i).unwrap_or(source.len());
            let mut tail = source[here..].chars();
            if tail.next() == Some('.') && tail.next().is_some_and(|c| c.is_ascii_digit()) {
                bump!();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_digit() {
                        bump!();
                    } else {
                        break;
                    }
                }
            }
            TokenKind::Number
        } else if c == '\'' || c == '"' {
            let quote = bump!();
            let mut closed = false;
            while let Some(&(_, c)) = chars.peek() {
                bump!();
                if c == '\\' {
                    if chars.peek().is_some() {
                        bump!();
                    }
                } else if c == quote {
                    closed = true;
                    break;
                } else if c == '\n' {
                    break;
                }
            }
            if !closed {
                return Err(ParseError::syntax("unterminated string literal", position));
            }
            TokenKind::Str
        } else if TWO_CHAR_SYMBOLS.iter().any(|s| rest.starts_with(s)) {
            bump!();
            bump!();
            TokenKind::Symbol
        } else {
            bump!();
            TokenKind::Symbol
        };

        let end = chars.peek().map(|&(i, _)| i).unwrap_or(source.len());
        tokens.push(Token {
            kind,
            text: source[start..end].to_string(),
            start,
            end,
            position,
        });
    }
    Ok(tokens)
}

/// Position just past the last character of `source`.
pub(crate) fn end_position(source: &str) -> Position {
    let mut line = 1;
    let mut column = 1;
    for c in source.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Position::new(line, column)
}

/// Token cursor with the small set of expectations both parsers need.
pub(crate) struct Cursor<'a> {
    tokens: Vec<Token>,
    index: usize,
    eof: Position,
    pub source: &'a str,
}

impl<'a> Cursor<'a> {
    pub fn new(source: &'a str) -> Result<Self, ParseError> {
        Ok(Cursor {
            tokens: tokenize(source)?,
            index: 0,
            eof: end_position(source),
            source,
        })
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index)
    }

    pub fn at_end(&self) -> bool {
        self.index >= self.tokens.len()
    }

    pub fn position(&self) -> Position {
        self.peek().map(|t| t.position).unwrap_or(self.eof)
    }

    pub fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.index).cloned();
        if token.is_some() {
            self.index += 1;
        }
        token
    }

    fn describe(&self) -> String {
        match self.peek() {
            Some(t) => format!("`{}`", t.text),
            None => "end of input".to_string(),
        }
    }

    pub fn error(&self, expected: &str) -> ParseError {
        ParseError::syntax(
            format!("expected {expected}, found {}", self.describe()),
            self.position(),
        )
    }

    pub fn check_symbol(&self, symbol: &str) -> bool {
        self.peek().is_some_and(|t| t.is_symbol(symbol))
    }

    pub fn check_keyword(&self, keyword: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(keyword))
    }

    pub fn eat_symbol(&mut self, symbol: &str) -> bool {
        if self.check_symbol(symbol) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, keyword: &str) -> bool {
        if self.check_keyword(keyword) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_symbol(&mut self, symbol: &str) -> Result<Token, ParseError> {
        if self.check_symbol(symbol) {
            Ok(self.next().expect("checked"))
        } else {
            Err(self.error(&format!("`{symbol}`")))
        }
    }

    pub fn expect_keyword(&mut self, keyword: &str) -> Result<Token, ParseError> {
        if self.check_keyword(keyword) {
            Ok(self.next().expect("checked"))
        } else {
            Err(self.error(&format!("`{keyword}`")))
        }
    }

    /// Any identifier not in `reserved`.
    pub fn expect_ident(&mut self, what: &str, reserved: &[&str]) -> Result<Token, ParseError> {
        match self.peek() {
            Some(t) if t.is_ident() && !reserved.contains(&t.text.as_str()) => {
                Ok(self.next().expect("checked"))
            }
            _ => Err(self.error(what)),
        }
    }

    /// Collects a balanced token run ending before one of `terminators` at depth 0.
    ///
    /// Returns the tokens consumed; the terminator itself is left in place. With
    /// no terminators the run extends to the end of input.
    pub fn balanced_run(&mut self, terminators: &[&str]) -> Result<Vec<Token>, ParseError> {
        let mut run = Vec::new();
        let mut stack: Vec<(char, Position)> = Vec::new();
        loop {
            let Some(token) = self.peek() else {
                return match stack.last() {
                    Some(&(open, pos)) => Err(ParseError::syntax(
                        format!("unclosed `{open}` in expression"),
                        pos,
                    )),
                    None if terminators.is_empty() => Ok(run),
                    None => Err(self.error(&terminator_list(terminators))),
                };
            };
            if stack.is_empty()
                && token.kind == TokenKind::Symbol
                && terminators.contains(&token.text.as_str())
            {
                return Ok(run);
            }
            if token.kind == TokenKind::Symbol {
                match token.text.as_str() {
                    "(" => stack.push(('(', token.position)),
                    "[" => stack.push(('[', token.position)),
                    "{" => stack.push(('{', token.position)),
                    close @ (")" | "]" | "}") => {
                        let want = match close {
                            ")" => '(',
                            "]" => '[',
                            _ => '{',
                        };
                        match stack.pop() {
                            Some((open, _)) if open == want => {}
                            _ => {
                                return Err(ParseError::syntax(
                                    format!("unbalanced `{close}` in expression"),
                                    token.position,
                                ))
                            }
                        }
                    }
                    _ => {}
                }
            }
            run.push(self.next().expect("peeked"));
        }
    }
}

fn terminator_list(terminators: &[&str]) -> String {
    terminators
        .iter()
        .map(|t| format!("`{t}`"))
        .collect::<Vec<_>>()
        .join(" or ")
}
