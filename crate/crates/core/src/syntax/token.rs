use std::fmt;

use super::error::LexError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Keyword,
    Punct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source text, including quotes for string literals.
    pub lexeme: String,
    pub position: Position,
    /// Byte offset of the lexeme in the source.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.is(TokenKind::Punct, p)
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.is(TokenKind::Keyword, k)
    }
}

pub const KEYWORDS: &[&str] = &[
    "fun",
    "sbx",
    "fresh",
    "new",
    "let",
    "true",
    "false",
    "null",
    "undefined",
    "typeof",
];

const PUNCTS: &[&str] = &[
    "===", "!==", "=>", "<=", ">=", "&&", "||", "(", ")", "[", "]", "{", "}", ".", ";", ",", "=",
    "+", "-", "*", "/", "%", "<", ">", "!",
];

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c))
        && chars.all(is_ident_continue)
        && !KEYWORDS.contains(&s)
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.offset..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }
}

/// Splits source text into tokens. Whitespace and `//` comments separate
/// tokens and are dropped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        src: source,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        skip_trivia(&mut cur);
        let Some(c) = cur.peek() else { break };
        let start = cur.offset;
        let position = cur.position();
        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            if KEYWORDS.contains(&&source[start..cur.offset]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() {
            lex_number(&mut cur);
            TokenKind::Number
        } else if c == '"' || c == '\'' {
            lex_string(&mut cur, position)?;
            TokenKind::Str
        } else if let Some(p) = PUNCTS.iter().find(|p| source[start..].starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct
        } else {
            return Err(LexError {
                position,
                message: format!("unexpected character '{c}'"),
            });
        };
        tokens.push(Token {
            kind,
            lexeme: source[start..cur.offset].to_string(),
            position,
            offset: start,
        });
    }
    Ok(tokens)
}

fn skip_trivia(cur: &mut Cursor<'_>) {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek_at(1) == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            _ => return,
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
    }
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let digit_at = if matches!(cur.peek_at(1), Some('+' | '-')) {
            2
        } else {
            1
        };
        if cur.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
            for _ in 0..digit_at {
                cur.bump();
            }
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
}

fn lex_string(cur: &mut Cursor<'_>, start: Position) -> Result<(), LexError> {
    let quote = cur.bump();
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(LexError {
                    position: start,
                    message: "unterminated string literal".into(),
                })
            }
            Some('\\') => {
                let esc_pos = cur.position();
                match cur.bump() {
                    Some('n' | 't' | 'r' | '0' | '\\' | '"' | '\'') => {}
                    Some(other) => {
                        return Err(LexError {
                            position: esc_pos,
                            message: format!("unknown escape '\\{other}'"),
                        })
                    }
                    None => {
                        return Err(LexError {
                            position: start,
                            message: "unterminated string literal".into(),
                        })
                    }
                }
            }
            Some(c) if Some(c) == quote => return Ok(()),
            Some(_) => {}
        }
    }
}

/// Decodes the contents of a string-literal lexeme (quotes included).
pub fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('0') => out.push('\0'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// Renders `s` as a double-quoted literal that [`unescape`] inverts.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn lambda_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("fun x => x"),
            vec![
                (Keyword, "fun".into()),
                (Ident, "x".into()),
                (Punct, "=>".into()),
                (Ident, "x".into())
            ]
        );
    }

    #[test]
    fn sandbox_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds(r#"sbx g => g["v"]"#),
            vec![
                (Keyword, "sbx".into()),
                (Ident, "g".into()),
                (Punct, "=>".into()),
                (Ident, "g".into()),
                (Punct, "[".into()),
                (Str, "\"v\"".into()),
                (Punct, "]".into()),
            ]
        );
    }

    #[test]
    fn unterminated_string_reports_start() {
        let err = tokenize("\"unterminated").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 1 });
    }

    #[test]
    fn unknown_character() {
        let err = tokenize("a # b").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 3 });
    }

    #[test]
    fn longest_punctuation_wins() {
        let lex: Vec<_> = tokenize("a === b !== c = d => e")
            .unwrap()
            .into_iter()
            .map(|t| t.lexeme)
            .collect();
        assert_eq!(lex, ["a", "===", "b", "!==", "c", "=", "d", "=>", "e"]);
    }

    #[test]
    fn numbers() {
        let lex: Vec<_> = tokenize("1 2.5 3e2 4.x 5e")
            .unwrap()
            .into_iter()
            .map(|t| t.lexeme)
            .collect();
        assert_eq!(lex, ["1", "2.5", "3e2", "4", ".", "x", "5", "e"]);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("a // note\n  b").unwrap();
        assert_eq!(toks[1].position, Position { line: 2, column: 3 });
    }

    #[test]
    fn lexemes_reassemble_with_gaps() {
        let src = "let  x = 'a\\'b';\n x . y";
        let toks = tokenize(src).unwrap();
        let mut rebuilt = String::new();
        for t in &toks {
            rebuilt.push_str(&src[rebuilt.len()..t.offset]);
            rebuilt.push_str(&t.lexeme);
        }
        assert_eq!(rebuilt, src);
        assert_eq!(unescape(&toks[3].lexeme), "a'b");
    }

    #[test]
    fn escape_roundtrip() {
        for s in ["", "plain", "q\"uote", "back\\slash\n"] {
            assert_eq!(unescape(&escape(s)), s);
        }
    }
}
