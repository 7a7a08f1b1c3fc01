use super::{Diagnostic, Rule, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Integer, real or complex literal, kept as written.
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Equals,
    Arrow,
    Star,
    Comma,
    Dot,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Dot => "`.`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn span(&self) -> Span {
        Span { line: self.line, col: self.col }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Split source text into tokens. `#` starts a comment that runs to the end
/// of the line; all whitespace is insignificant.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor { chars: src.char_indices().peekable(), src, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let single = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            ':' => Some(TokenKind::Colon),
            '=' => Some(TokenKind::Equals),
            '*' => Some(TokenKind::Star),
            ',' => Some(TokenKind::Comma),
            '.' if !cur.peek2().is_some_and(|d| d.is_ascii_digit()) => Some(TokenKind::Dot),
            _ => None,
        };
        if let Some(kind) = single {
            cur.bump();
            out.push(Token { kind, span });
            continue;
        }
        if c == '-' && cur.peek2() == Some('>') {
            cur.bump();
            cur.bump();
            out.push(Token { kind: TokenKind::Arrow, span });
            continue;
        }
        if c == '"' {
            cur.bump();
            let start = cur.offset();
            loop {
                match cur.peek() {
                    Some('"') => break,
                    Some('\n') | None => return Err(Diagnostic::new(span, Rule::Parse, "unterminated string")),
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            let end = cur.offset();
            cur.bump();
            out.push(Token { kind: TokenKind::Str(src[start..end].to_string()), span });
            continue;
        }
        if is_ident_start(c) {
            let start = cur.offset();
            while cur.peek().is_some_and(is_ident_char) {
                if cur.peek() == Some('-') && cur.peek2() == Some('>') {
                    break;
                }
                cur.bump();
            }
            let end = cur.offset();
            out.push(Token { kind: TokenKind::Ident(src[start..end].to_string()), span });
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || c == '.'
            || ((c == '-' || c == '+') && cur.peek2().is_some_and(|d| d.is_ascii_digit() || d == '.' || d == 'i'));
        if starts_number {
            let start = cur.offset();
            cur.bump();
            let mut last = c;
            while let Some(d) = cur.peek() {
                let sign_ok = (d == '+' || d == '-') && cur.peek2() != Some('>');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || d == 'i' || sign_ok {
                    if d == 'i' && !(last.is_ascii_digit() || last == '.' || last == '+' || last == '-') {
                        break;
                    }
                    last = d;
                    cur.bump();
                } else {
                    break;
                }
            }
            let end = cur.offset();
            if cur.peek().is_some_and(is_ident_start) {
                return Err(Diagnostic::new(cur.span(), Rule::Parse, format!("unexpected character `{}`", cur.peek().unwrap())));
            }
            out.push(Token { kind: TokenKind::Number(src[start..end].to_string()), span });
            continue;
        }
        return Err(Diagnostic::new(span, Rule::Parse, format!("unexpected character `{c}`")));
    }
    Ok(out)
}
