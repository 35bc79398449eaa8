//! Source text to token stream.
//!
//! The alphabet is deliberately small: ASCII letters, digits, underscore,
//! whitespace, double-quoted strings, and the operator/punctuation set below.
//! Anything else, including every comment marker, is a [`LexError`].

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::span::{Pos, Span};

pub const KEYWORDS: [&str; 6] = ["function", "return", "print", "if", "else", "while"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Operator,
    Punct,
    EndOfInput,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TokenKind::Keyword => "Keyword",
            TokenKind::Identifier => "Identifier",
            TokenKind::Number => "Number",
            TokenKind::String => "String",
            TokenKind::Operator => "Operator",
            TokenKind::Punct => "Punct",
            TokenKind::EndOfInput => "EndOfInput",
        };
        f.write_str(name)
    }
}

/// Decoded payload of a literal token.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(BigInt),
    Float(f64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw lexeme exactly as it appears in the source.
    pub text: String,
    pub value: Option<Literal>,
    pub line: u32,
    pub column: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    /// Span from the first character to just past the last one.
    pub fn span(&self) -> Span {
        let mut end = self.pos();
        for ch in self.text.chars() {
            if ch == '\n' {
                end.line += 1;
                end.column = 1;
            } else {
                end.column += 1;
            }
        }
        Span::new(self.pos(), end)
    }

    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Operator, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    /// Human-readable description used in diagnostics.
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::EndOfInput => "end of input".to_string(),
            TokenKind::String => "string literal".to_string(),
            TokenKind::Number => format!("number `{}`", self.text),
            _ => format!("`{}`", self.text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedString,
    UnexpectedChar,
    Comment,
    BadEscape,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct LexError {
    pub kind: LexErrorKind,
    pub message: String,
    pub line: u32,
    pub column: u32,
}

impl LexError {
    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }
}

const TWO_CHAR_OPS: [&str; 6] = ["==", "!=", "<=", ">=", "&&", "||"];

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<(usize, char)> {
        self.chars.peek().copied()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, ch)) = next {
            if ch == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        next
    }

    fn offset(&mut self) -> usize {
        self.peek().map_or(self.src.len(), |(i, _)| i)
    }

    fn error(&self, kind: LexErrorKind, pos: Pos, message: impl Into<String>) -> LexError {
        LexError {
            kind,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }

    fn token(&self, kind: TokenKind, start: usize, pos: Pos, end: usize, value: Option<Literal>) -> Token {
        Token {
            kind,
            text: self.src[start..end].to_string(),
            value,
            line: pos.line,
            column: pos.column,
            offset: start,
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        loop {
            while let Some((_, ch)) = self.peek() {
                if matches!(ch, ' ' | '\t' | '\r' | '\n') {
                    self.bump();
                } else {
                    break;
                }
            }
            let pos = Pos::new(self.line, self.column);
            let Some((start, ch)) = self.peek() else {
                tokens.push(self.token(TokenKind::EndOfInput, self.src.len(), pos, self.src.len(), None));
                return Ok(tokens);
            };
            let tok = match ch {
                'a'..='z' | 'A'..='Z' | '_' => self.word(start, pos),
                '0'..='9' => self.number(start, pos)?,
                '"' => self.string(start, pos)?,
                '#' => {
                    return Err(self.error(LexErrorKind::Comment, pos, "comments are not supported"));
                }
                '/' if matches!(self.peek_second(), Some('/' | '*')) => {
                    return Err(self.error(LexErrorKind::Comment, pos, "comments are not supported"));
                }
                '(' | ')' | '{' | '}' | '[' | ']' | ',' | ';' => {
                    self.bump();
                    self.token(TokenKind::Punct, start, pos, start + 1, None)
                }
                '+' | '-' | '*' | '/' | '%' | '=' | '!' | '<' | '>' | '&' | '|' => self.operator(start, pos, ch)?,
                other => {
                    return Err(self.error(
                        LexErrorKind::UnexpectedChar,
                        pos,
                        format!("unexpected character {other:?}"),
                    ));
                }
            };
            tokens.push(tok);
        }
    }

    fn word(&mut self, start: usize, pos: Pos) -> Token {
        while let Some((_, ch)) = self.peek() {
            if ch.is_ascii_alphanumeric() || ch == '_' {
                self.bump();
            } else {
                break;
            }
        }
        let end = self.offset();
        let kind = if KEYWORDS.contains(&&self.src[start..end]) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.token(kind, start, pos, end, None)
    }

    fn number(&mut self, start: usize, pos: Pos) -> Result<Token, LexError> {
        let mut seen_dot = false;
        while let Some((_, ch)) = self.peek() {
            if ch.is_ascii_digit() {
                self.bump();
            } else if ch == '.' && !seen_dot {
                let dot = Pos::new(self.line, self.column);
                if !self.peek_second().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.error(
                        LexErrorKind::UnexpectedChar,
                        dot,
                        "malformed number: `.` must be followed by a digit",
                    ));
                }
                seen_dot = true;
                self.bump();
            } else {
                break;
            }
        }
        let end = self.offset();
        let text = &self.src[start..end];
        let value = if seen_dot {
            // Grammar guarantees digits '.' digits, which always parses.
            Literal::Float(text.parse().expect("float literal"))
        } else {
            Literal::Int(text.parse().expect("integer literal"))
        };
        Ok(self.token(TokenKind::Number, start, pos, end, Some(value)))
    }

    fn string(&mut self, start: usize, pos: Pos) -> Result<Token, LexError> {
        self.bump();
        let mut decoded = String::new();
        loop {
            let here = Pos::new(self.line, self.column);
            match self.bump() {
                None => {
                    return Err(self.error(LexErrorKind::UnterminatedString, pos, "unterminated string literal"));
                }
                Some((_, '"')) => break,
                Some((_, '\\')) => match self.bump() {
                    Some((_, 'n')) => decoded.push('\n'),
                    Some((_, 't')) => decoded.push('\t'),
                    Some((_, '\\')) => decoded.push('\\'),
                    Some((_, '"')) => decoded.push('"'),
                    Some((_, other)) => {
                        return Err(self.error(
                            LexErrorKind::BadEscape,
                            here,
                            format!("unknown escape sequence `\\{other}`"),
                        ));
                    }
                    None => {
                        return Err(self.error(LexErrorKind::UnterminatedString, pos, "unterminated string literal"));
                    }
                },
                Some((_, ch)) => decoded.push(ch),
            }
        }
        let end = self.offset();
        Ok(self.token(TokenKind::String, start, pos, end, Some(Literal::Str(decoded))))
    }

    fn operator(&mut self, start: usize, pos: Pos, first: char) -> Result<Token, LexError> {
        self.bump();
        if let Some((_, second)) = self.peek() {
            let mut pair = String::with_capacity(2);
            pair.push(first);
            pair.push(second);
            if TWO_CHAR_OPS.contains(&pair.as_str()) {
                self.bump();
                return Ok(self.token(TokenKind::Operator, start, pos, start + 2, None));
            }
        }
        if matches!(first, '&' | '|' | '!') {
            return Err(self.error(
                LexErrorKind::UnexpectedChar,
                pos,
                format!("unexpected character {first:?}"),
            ));
        }
        Ok(self.token(TokenKind::Operator, start, pos, start + 1, None))
    }
}

/// Tokenizes `source`. The returned list always ends with an
/// [`TokenKind::EndOfInput`] token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source).run()
}

/// One `LINE:COL KIND LEXEME` line per token.
pub fn dump_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for tok in tokens {
        let line = format!("{}:{} {} {}", tok.line, tok.column, tok.kind, tok.text);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn smallest_statement() {
        use TokenKind::*;
        assert_eq!(
            kinds("x = 1;"),
            vec![
                (Identifier, "x".into()),
                (Operator, "=".into()),
                (Number, "1".into()),
                (Punct, ";".into()),
                (EndOfInput, "".into()),
            ]
        );
        let toks = tokenize("x = 1;").unwrap();
        assert_eq!(toks[2].value, Some(Literal::Int(1.into())));
    }

    #[test]
    fn string_escapes_decode() {
        let toks = tokenize(r#""a\nb""#).unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].kind, TokenKind::String);
        assert_eq!(toks[0].value, Some(Literal::Str("a\nb".into())));
        let toks = tokenize(r#""\t\\\"""#).unwrap();
        assert_eq!(toks[0].value, Some(Literal::Str("\t\\\"".into())));
    }

    #[test]
    fn bad_escape() {
        let err = tokenize(r#""a\qb""#).unwrap_err();
        assert_eq!(err.kind, LexErrorKind::BadEscape);
        assert_eq!((err.line, err.column), (1, 3));
    }

    #[test]
    fn keywords() {
        for kw in KEYWORDS {
            let toks = tokenize(kw).unwrap();
            assert_eq!(toks[0].kind, TokenKind::Keyword);
        }
        assert_eq!(kinds("while")[0], (TokenKind::Keyword, "while".into()));
        assert_eq!(kinds("whilex")[0].0, TokenKind::Identifier);
        assert_eq!(kinds("for")[0].0, TokenKind::Identifier);
    }

    #[test]
    fn comments_rejected() {
        let err = tokenize("x = 1; # note").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::Comment);
        assert_eq!((err.line, err.column), (1, 8));
        assert_eq!(tokenize("x = 1; // note").unwrap_err().kind, LexErrorKind::Comment);
        assert_eq!(tokenize("/* x */").unwrap_err().kind, LexErrorKind::Comment);
        // plain division is still fine
        assert!(tokenize("a / b").is_ok());
    }

    #[test]
    fn unterminated_string_points_at_quote() {
        let err = tokenize("x = \"abc").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedString);
        assert_eq!((err.line, err.column), (1, 5));
        assert_eq!(tokenize("\"abc\\").unwrap_err().kind, LexErrorKind::UnterminatedString);
    }

    #[test]
    fn numbers() {
        let toks = tokenize("42 3.14 007").unwrap();
        assert_eq!(toks[0].value, Some(Literal::Int(42.into())));
        assert_eq!(toks[1].value, Some(Literal::Float(3.14)));
        assert_eq!(toks[2].value, Some(Literal::Int(7.into())));
        let big = tokenize("123456789012345678901234567890").unwrap();
        assert_eq!(
            big[0].value,
            Some(Literal::Int("123456789012345678901234567890".parse().unwrap()))
        );
        assert!(tokenize(".5").is_err());
        assert!(tokenize("5.").is_err());
        assert!(tokenize("5.;").is_err());
        assert!(tokenize("1.2.3").is_err());
    }

    #[test]
    fn operators_maximal_munch() {
        use TokenKind::Operator;
        let ops: Vec<_> = kinds("== != <= >= && || < > = + - * / %")
            .into_iter()
            .filter(|(k, _)| *k == Operator)
            .map(|(_, t)| t)
            .collect();
        assert_eq!(ops, ["==", "!=", "<=", ">=", "&&", "||", "<", ">", "=", "+", "-", "*", "/", "%"]);
        assert_eq!(kinds("a<=b")[1].1, "<=");
        assert_eq!(kinds("a===b")[1].1, "==");
        assert!(tokenize("a & b").is_err());
        assert!(tokenize("a | b").is_err());
        assert!(tokenize("!a").is_err());
    }

    #[test]
    fn unknown_characters() {
        for src in ["@", "$", "x.y", "'a'", "é", "`", "~", "^", ":", "?", "\u{0}"] {
            let err = tokenize(src).unwrap_err();
            assert_eq!(err.kind, LexErrorKind::UnexpectedChar, "{src:?}");
        }
        // non-ASCII inside strings is fine
        assert!(tokenize("\"héllo\"").is_ok());
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n  bb = \"x\ny\";\nc").unwrap();
        let pos: Vec<_> = toks.iter().map(|t| (t.line, t.column)).collect();
        assert_eq!(pos, [(1, 1), (2, 3), (2, 6), (2, 8), (3, 3), (4, 1), (4, 2)]);
    }

    #[test]
    fn empty_input() {
        let toks = tokenize("").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::EndOfInput);
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
    }

    #[test]
    fn dump_format() {
        let toks = tokenize("x = \"hi\";").unwrap();
        assert_eq!(
            dump_tokens(&toks),
            "1:1 Identifier x\n1:3 Operator =\n1:5 String \"hi\"\n1:9 Punct ;\n1:10 EndOfInput\n"
        );
    }

    fn source_fragment() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z_][a-zA-Z0-9_]{0,6}",
            "[0-9]{1,5}",
            "[0-9]{1,3}\\.[0-9]{1,3}",
            "\"[a-z \\\\n]{0,5}\"".prop_map(|s| s.replace('\\', "\\\\")),
            prop::sample::select(vec![
                "==", "!=", "<=", ">=", "&&", "||", "<", ">", "=", "+", "-", "*", "/", "%", "(", ")",
                "{", "}", "[", "]", ",", ";",
            ])
            .prop_map(str::to_string),
        ]
    }

    fn separator() -> impl Strategy<Value = String> {
        prop::sample::select(vec![" ", "  ", "\n", "\t", " \r\n "]).prop_map(str::to_string)
    }

    proptest! {
        #[test]
        fn lexemes_and_whitespace_reconstruct_source(
            parts in prop::collection::vec((source_fragment(), separator()), 0..30)
        ) {
            let src: String = parts.iter().map(|(a, b)| format!("{a}{b}")).collect();
            let toks = tokenize(&src).unwrap();
            prop_assert_eq!(toks.last().unwrap().kind, TokenKind::EndOfInput);
            let mut cursor = 0;
            let mut last_pos = Pos::new(0, 0);
            for tok in &toks {
                let gap = &src[cursor..tok.offset];
                prop_assert!(gap.chars().all(|c| matches!(c, ' ' | '\t' | '\r' | '\n')));
                prop_assert_eq!(&src[tok.offset..tok.offset + tok.text.len()], tok.text.as_str());
                prop_assert!(tok.pos() >= last_pos);
                last_pos = tok.span().end;
                cursor = tok.offset + tok.text.len();
                if tok.kind == TokenKind::Identifier {
                    prop_assert!(!KEYWORDS.contains(&tok.text.as_str()));
                }
            }
            prop_assert_eq!(cursor, src.len());
            prop_assert_eq!(tokenize(&src).unwrap(), toks);
        }

        #[test]
        fn identifier_runs_are_single_tokens(word in "[a-zA-Z_][a-zA-Z0-9_]{0,20}") {
            let toks = tokenize(&word).unwrap();
            prop_assert_eq!(toks.len(), 2);
            prop_assert!(matches!(toks[0].kind, TokenKind::Identifier | TokenKind::Keyword));
            prop_assert_eq!(&toks[0].text, &word);
        }

        #[test]
        fn only_four_escapes_decode(c in any::<char>()) {
            let src = format!("\"\\{c}\"");
            let res = tokenize(&src);
            if matches!(c, 'n' | 't' | '\\' | '"') {
                prop_assert!(res.is_ok());
            } else {
                prop_assert!(res.is_err());
            }
        }
    }
}
